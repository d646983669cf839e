#pragma once

// Pareto fronts over raw (makespan, cost) pairs and the exhaustive oracle that
// computes the true front of a small instance.

#include <cstdint>
#include <string>
#include <vector>

#include "dae/model.hpp"
#include "dae/rational.hpp"
#include "dae/task.hpp"

namespace dae {

struct ParetoPoint {
    Ticks makespan = 0;
    Rational cost;
    /// "oracle" or "run <r> gen <g>"
    std::string provenance;
};

/// a is no worse on both objectives and strictly better on one.
inline bool dominates(const ParetoPoint& a, const ParetoPoint& b) {
    return a.makespan <= b.makespan && a.cost <= b.cost && (a.makespan < b.makespan || a.cost < b.cost);
}

/// Mutually non-dominating points, kept sorted by makespan. A point equal in
/// both objectives to a stored one is not added twice; the first provenance wins.
class ParetoFront {
public:
    /// Inserts unless weakly dominated; evicts points the new one dominates.
    /// Returns whether the point was inserted.
    bool offer(const ParetoPoint& point);
    /// Some stored point is no worse on both objectives.
    bool weakly_dominated(Ticks makespan, const Rational& cost) const;
    bool contains(Ticks makespan, const Rational& cost) const;

    const std::vector<ParetoPoint>& points() const { return points_; }
    std::size_t size() const { return points_.size(); }
    bool empty() const { return points_.empty(); }

private:
    std::vector<ParetoPoint> points_;
};

struct OracleBounds {
    std::size_t max_sequence_length = 10;
    std::uint64_t node_cap = 200'000'000;
    /// run the schedule validator on every goal-reaching schedule (slow)
    bool validate_each = false;
};

struct OracleStats {
    std::uint64_t nodes = 0;
    std::uint64_t goal_schedules = 0;
    std::uint64_t validated = 0;
};

/// Non-dominated (makespan, cost) pairs over the compressions of all
/// sequentially executable goal-reaching sequences up to the length bound.
/// Sequences that differ only by swapping adjacent independent actions yield
/// identical schedules and costs and are enumerated once; prefixes whose
/// (makespan lower bound, cost so far) is weakly dominated by the front are
/// cut, both quantities being monotone under extension. Throws CapExceeded,
/// and InvalidSchedule when validate_each finds a bad compression.
ParetoFront brute_force_pareto(const GroundTask& task, const CostModel& cm, const OracleBounds& bounds,
                               OracleStats* stats = nullptr);

}  // namespace dae
