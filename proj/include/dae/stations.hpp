#pragma once

// Stations: partial states over the goal's exclusive fluents, evolved as
// intermediate goals between the initial state and the task goal.

#include <cstddef>
#include <cstdint>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "dae/model.hpp"
#include "dae/task.hpp"

namespace dae {

using ValueIndex = std::uint32_t;
using Rng = std::mt19937_64;

/// One goal atom of a station predicate, viewed as "key -> value": the key is
/// the argument the predicate is exclusive on, the value the other one.
struct GoalLine {
    std::string predicate;
    std::string key;
    /// 0-based positions of key and value in the atom
    std::size_t key_position = 0;
    std::size_t value_position = 1;
    /// objects of the value parameter's type, declaration order
    std::vector<std::string> domain;
    /// per domain value, its ground atom id (atom_count() when not in the universe)
    std::vector<AtomId> atoms;
    ValueIndex goal_value = 0;
};

/// The goal's lines in goal order. Only binary station predicates with an
/// exclusivity declaration yield lines; other goal atoms are left to the final
/// sub-problem.
class GoalLines {
public:
    GoalLines() = default;
    GoalLines(const GroundTask& task, const InvariantSpec& inv);

    std::size_t size() const { return lines_.size(); }
    bool empty() const { return lines_.empty(); }
    const GoalLine& operator[](std::size_t i) const { return lines_.at(i); }
    const std::vector<GoalLine>& lines() const { return lines_; }
    std::size_t atom_count() const { return atom_count_; }

private:
    std::vector<GoalLine> lines_;
    std::size_t atom_count_ = 0;
};

struct StationEntry {
    ValueIndex value = 0;
    /// inactive entries impose nothing on the sub-planner but keep their value
    bool active = true;

    bool operator==(const StationEntry&) const = default;
};

/// One entry per goal line, in line order.
struct Station {
    std::vector<StationEntry> entries;

    std::size_t active_count() const;
    bool operator==(const Station&) const = default;
};

/// s_1 .. s_n; the initial state and the goal are implicit.
struct Genome {
    std::vector<Station> stations;

    std::size_t size() const { return stations.size(); }
    bool empty() const { return stations.empty(); }
    bool operator==(const Genome&) const = default;
};

/// Per-line value, or none when no atom of the line holds.
using Assignment = std::vector<std::optional<ValueIndex>>;

/// The value each line has in a world state (the lowest-index one if several hold).
Assignment project(const WorldState& state, const GoalLines& lines);
/// A station's stored values, masked entries included.
Assignment values_of(const Station& st);
/// The goal as a fully active station.
Station goal_station(const GoalLines& lines);
/// Atoms a sub-planner must reach for this station: its active entries.
std::vector<AtomId> goal_atoms(const Station& st, const GoalLines& lines);

/// Active entries of `to` whose line differs in `from` or has no value there.
std::size_t distance(const Assignment& from, const Station& to);
std::size_t distance(const WorldState& from, const Station& to, const GoalLines& lines);
std::size_t distance(const Station& from, const Station& to);

/// Entry count matches the lines, values lie in their domains, and no two
/// active entries assign the same exclusive key of the same predicate.
bool is_consistent(const Station& st, const GoalLines& lines);

struct InitParams {
    std::size_t n_min = 2;
    std::size_t n_max = 10;
    std::size_t d_max = 3;
    /// markers placed after the one mandatory move per line
    std::size_t extra_moves = 0;
    double p_mask = 0.1;
};

/// Matrix initialisation: every line moves at least once among the n interior
/// columns, no column holds more than d_max moves, values are init-anchored
/// before the first move and goal-anchored from the last, and entries are
/// masked with probability p_mask unless that would leave the station equal to
/// its left neighbour. Throws InitInfeasible when d_max * n < lines.
Genome random_init(const GoalLines& lines, const WorldState& init, const InitParams& p, Rng& rng);

struct StationRates {
    double change = 0.75;
    double remove = 0.125;
    double restore = 0.125;
};

/// Neighbouring columns of a station: stored values on the left, the station
/// (or goal) on the right.
struct Neighbors {
    Assignment left;
    Station right;
};

/// Neighbours of station k (0-based) inside g.
Neighbors neighbors_of(const Genome& g, std::size_t k, const GoalLines& lines, const WorldState& init);

/// Change one active value, deactivate one active entry, or reactivate one
/// inactive entry. New values come from legal_values; with no legal target the
/// station is returned unchanged.
Station mutate_station(const Station& st, const GoalLines& lines, std::size_t d_max, const Neighbors& nb, Rng& rng,
                       const StationRates& rates = {});

/// Values in the line's domain that keep `st` consistent and within d_max of
/// both neighbours when assigned to (an active) entry `line`. A side already
/// farther than d_max (after a deletion) only has to stay no farther.
std::vector<ValueIndex> legal_values(const Station& st, std::size_t line, const GoalLines& lines, std::size_t d_max,
                                     const Neighbors& nb);

/// Inserts a station after a uniform position: a fully active copy of the left
/// column with between 1 and d_max entries redrawn. Redrawn values stay within
/// d_max of the left column and do not move the station farther from the right
/// one than max(d_max, its current distance). No-op at n_max_hard.
Genome mutate_add(const Genome& g, const GoalLines& lines, const WorldState& init, std::size_t d_max,
                  std::size_t n_max_hard, Rng& rng);
/// mutate_add with the insertion position fixed (0 = before the first station).
Genome mutate_add_at(const Genome& g, std::size_t at, const GoalLines& lines, const WorldState& init,
                     std::size_t d_max, std::size_t n_max_hard, Rng& rng);
/// Removes a uniformly chosen station; no-op on an empty genome.
Genome mutate_del(const Genome& g, Rng& rng);

/// `station k` headers followed by `  i: pred key -> value` or `-> #masked`.
std::string dump(const Genome& g, const GoalLines& lines);

/// Uniform integer in [lo, hi].
std::size_t uniform_index(Rng& rng, std::size_t lo, std::size_t hi);
/// Uniform real in [0, 1).
double uniform_real(Rng& rng);

}  // namespace dae
