#pragma once

// The embedded sub-planner: an exact, resource-bounded depth-first
// branch-and-bound over action sequences, scoring each sequence by the
// makespan of its compressed schedule.

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "dae/schedule.hpp"
#include "dae/task.hpp"

namespace dae {

struct SubProblem {
    const GroundTask* task = nullptr;
    WorldState init;
    /// partial goal; need not be a full state
    std::vector<AtomId> goal;
};

struct SearchLimits {
    std::uint64_t max_backtracks = 20000;
    std::size_t max_sequence_length = 12;
    /// accept only plans whose makespan does not exceed this
    std::optional<Ticks> max_makespan_bound;

    bool operator==(const SearchLimits&) const = default;
};

enum class PlanOutcome { solved, backtrack_limit, unsolvable };

std::string to_string(PlanOutcome outcome);

struct PlanResult {
    PlanOutcome outcome = PlanOutcome::unsolvable;
    std::vector<ActionId> sequence;
    Schedule schedule;
    Ticks makespan = 0;
    /// false when the backtrack limit fired before the incumbent was proven optimal
    bool proven_optimal = false;
    std::uint64_t backtracks = 0;
    std::uint64_t nodes = 0;

    bool solved() const { return outcome == PlanOutcome::solved; }
};

inline bool applicable(const WorldState& state, const GroundAction& action) { return state.contains_all(action.pre); }

/// (state \ del) U add. Throws NotApplicable.
WorldState apply(const WorldState& state, const GroundAction& action);

/// Max over unsatisfied goal atoms of the shortest duration of an action
/// adding it; 0 when the goal holds. Throws GoalUnsupportable.
Ticks heuristic(const WorldState& state, std::span<const AtomId> goal, const GroundTask& task);

/// Per-task tables shared by many solves: pairwise interference of actions,
/// and the adders and consumers of each atom.
class PlannerContext {
public:
    explicit PlannerContext(const GroundTask& task);

    const GroundTask& task() const { return *task_; }
    bool interferes(ActionId a, ActionId b) const { return interference_[a].test(b); }
    const boost::dynamic_bitset<>& interfering(ActionId a) const { return interference_[a]; }
    const std::vector<ActionId>& adders(AtomId p) const { return adders_[p]; }
    /// Actions with `p` among their preconditions.
    const std::vector<ActionId>& consumers(AtomId p) const { return consumers_[p]; }

private:
    const GroundTask* task_;
    std::vector<boost::dynamic_bitset<>> interference_;
    std::vector<std::vector<ActionId>> adders_;
    std::vector<std::vector<ActionId>> consumers_;
};

/// Minimum-makespan plan from sub.init to a state containing sub.goal; among
/// plans of equal makespan the shortest sequence is preferred. Children are
/// expanded in action-id order; a prefix is pruned when an admissible bound on
/// its completion reaches the incumbent, or when its state was already reached
/// no later and no deeper. The bound is a relaxed critical path: each atom's
/// earliest achievement time ignoring deletes, anchored on the placed
/// occurrences. Every retreat from an expanded node counts as one backtrack.
/// When the backtrack limit fires the incumbent (if any) is returned with
/// proven_optimal = false.
PlanResult solve(const SubProblem& sub, const SearchLimits& limits, const PlannerContext* context = nullptr);

}  // namespace dae
