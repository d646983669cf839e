#pragma once

// Temporal semantics of plans: interference, validity of a schedule, greedy
// earliest-start compression of a totally ordered action sequence, makespan,
// and cost/risk evaluation.
//
// Time is integral (ticks). An occurrence <a, t> occupies [t, t + dur(a)];
// its effects take place at t + dur(a) and its preconditions must hold at t.
// An atom is true at t > 0 if it was true at t - 1 and nothing ending at t
// deletes it, or if something ending at t adds it (adds win ties).

#include <algorithm>
#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "dae/model.hpp"
#include "dae/rational.hpp"
#include "dae/task.hpp"

namespace dae {

struct Occurrence {
    ActionId action = 0;
    Ticks start = 0;
    /// position in the generating total order
    std::size_t rank = 0;

    bool operator==(const Occurrence&) const = default;
};

/// Action occurrences in rank order. Start/End are implicit.
struct Schedule {
    std::vector<Occurrence> occurrences;

    bool empty() const { return occurrences.empty(); }
    std::size_t size() const { return occurrences.size(); }
    /// Action ids in rank order.
    std::vector<ActionId> sequence() const;

    bool operator==(const Schedule&) const = default;
};

enum class ViolationKind { precondition_unmet, interference_overlap };

struct Violation {
    ViolationKind kind;
    /// rank of the offending occurrence; for overlaps both ranks
    std::vector<std::size_t> ranks;
    /// unmet atom (precondition_unmet only)
    AtomId atom = 0;
    Ticks time = 0;

    std::string describe(const GroundTask& task) const;
};

/// One deletes a precondition or an add effect of the other.
bool interferes(const GroundAction& a, const GroundAction& b);

/// The closed intervals share more than one time point.
bool overlaps(Ticks start1, Ticks dur1, Ticks start2, Ticks dur2);

/// Every violation of the temporal validity conditions; empty means valid.
std::vector<Violation> validate(const GroundTask& task, const Schedule& sched, const WorldState& init);

/// State reached by applying the sequence in order; throws NotApplicable.
WorldState apply_sequence(const GroundTask& task, std::span<const ActionId> seq, WorldState state);

/// Greedy earliest-start list scheduling of a sequentially executable
/// sequence. Each action gets the smallest start that keeps the placed prefix
/// valid, is not before the end of any earlier interfering occurrence, and is
/// not before the end of the occurrence that established each of its
/// preconditions in sequence order. Throws NotSequentiallyExecutable.
Schedule compress(const GroundTask& task, std::span<const ActionId> seq, const WorldState& init);

/// Incremental form of compress, for callers that extend a sequence one action
/// at a time (search, enumeration). Copyable; undo restores the previous state.
class Compressor {
public:
    Compressor(const GroundTask& task, const WorldState& init);

    /// Places the next action; returns its start. Throws NotSequentiallyExecutable.
    Ticks push(ActionId action);
    void pop();

    const Schedule& schedule() const { return schedule_; }
    const WorldState& state() const { return state_; }
    Ticks makespan() const { return ends_.empty() ? 0 : ends_.back(); }
    /// End of the occurrence that last made `atom` true (0 for initial atoms).
    Ticks established(AtomId atom) const { return established_[atom]; }
    /// Lower bound on the start of `action` if it were pushed next.
    Ticks earliest_start_bound(ActionId action) const;

private:
    struct Event {
        Ticks time;
        bool adds;
        std::size_t owner;
    };
    struct Frame {
        std::vector<std::pair<AtomId, Ticks>> established_before;
        WorldState state_before;
    };

    bool true_at(AtomId p, Ticks t, std::size_t self) const;
    bool placement_ok(const GroundAction& b, Ticks t);

    const GroundTask* task_;
    WorldState init_;
    WorldState state_;
    Schedule schedule_;
    /// running maximum of occurrence end times, one per placed occurrence
    std::vector<Ticks> ends_;
    std::vector<std::vector<Event>> events_;
    /// end time of the occurrence that last made each atom true in sequence order
    std::vector<Ticks> established_;
    std::vector<Frame> frames_;
};

Ticks makespan(const GroundTask& task, const Schedule& sched);

/// Cost (additive) or risk (max) of a schedule under a location-value model.
/// Flights are actions moving a vehicle between two locations via the cost
/// model's location predicate; passengers are the objects related to the
/// vehicle by the carrier predicate just before the flight, replaying the
/// schedule in rank order. Throws InvalidSchedule.
Rational evaluate_cost(const GroundTask& task, const Schedule& sched, const WorldState& init, const CostModel& cm);

/// Reusable form of evaluate_cost with per-action flight data precomputed.
class CostEvaluator {
public:
    CostEvaluator(const GroundTask& task, CostModel cm);

    Rational operator()(const Schedule& sched, const WorldState& init) const;
    Rational operator()(std::span<const ActionId> seq, const WorldState& init) const;
    /// Cost event of `action` executed in `before`; 0 for non-flights.
    Rational event(ActionId action, const WorldState& before) const;
    /// Folds one event into a running total (sum or max by mode).
    Rational accumulate(const Rational& total, const Rational& event) const {
        return cm_.mode == CostMode::max ? std::max(total, event) : total + event;
    }
    const CostModel& model() const { return cm_; }
    /// Largest event a single action can produce.
    Rational max_event() const;
    /// Atoms whose truth changes the cost of `action` (its passenger atoms).
    std::span<const AtomId> sensitive_atoms(ActionId action) const { return flights_.at(action).passenger_atoms; }

private:
    struct Flight {
        bool is_flight = false;
        Rational endpoint_value;
        /// carrier atoms (passenger, vehicle) that count as passengers
        std::vector<AtomId> passenger_atoms;
    };

    const GroundTask* task_;
    CostModel cm_;
    std::vector<Flight> flights_;
};

/// One occurrence per line, `t: (action args) [dur]`, sorted by start then rank.
std::string format_plan(const GroundTask& task, const Schedule& sched);

}  // namespace dae
