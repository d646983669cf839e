#include "dae/planner.hpp"

#include <algorithm>
#include <functional>
#include <limits>
#include <unordered_map>

#include "dae/errors.hpp"

namespace dae {

std::string to_string(PlanOutcome outcome) {
    switch (outcome) {
        case PlanOutcome::solved: return "solved";
        case PlanOutcome::backtrack_limit: return "backtrack-limit";
        case PlanOutcome::unsolvable: return "unsolvable";
    }
    return "?";
}

WorldState apply(const WorldState& state, const GroundAction& action) {
    if (!applicable(state, action)) throw NotApplicable(action.label() + " is not applicable");
    WorldState next = state;
    for (AtomId p : action.del) next.erase(p);
    for (AtomId p : action.add) next.insert(p);
    return next;
}

Ticks heuristic(const WorldState& state, std::span<const AtomId> goal, const GroundTask& task) {
    Ticks h = 0;
    for (AtomId g : goal) {
        if (state.contains(g)) continue;
        Ticks best = std::numeric_limits<Ticks>::max();
        for (const auto& a : task.actions)
            if (std::binary_search(a.add.begin(), a.add.end(), g)) best = std::min(best, a.dur);
        if (best == std::numeric_limits<Ticks>::max())
            throw GoalUnsupportable(task.atom_label(g) + " holds initially in no state and no action adds it");
        h = std::max(h, best);
    }
    return h;
}

namespace {

constexpr Ticks kInfinity = std::numeric_limits<Ticks>::max() / 4;

}  // namespace

PlannerContext::PlannerContext(const GroundTask& task) : task_(&task) {
    const std::size_t n = task.actions.size();
    interference_.assign(n, boost::dynamic_bitset<>(n));
    adders_.resize(task.atom_count());
    consumers_.resize(task.atom_count());
    for (const auto& a : task.actions) {
        for (AtomId p : a.add) adders_[p].push_back(a.id);
        for (AtomId p : a.pre) consumers_[p].push_back(a.id);
        for (const auto& b : task.actions) {
            if (b.id < a.id) continue;
            if (dae::interferes(a, b)) {
                interference_[a.id].set(b.id);
                interference_[b.id].set(a.id);
            }
        }
    }
}

namespace {

class BranchAndBound {
public:
    BranchAndBound(const SubProblem& sub, const SearchLimits& limits, const PlannerContext& context)
        : task_(*sub.task), sub_(sub), limits_(limits), context_(context), compressor_(*sub.task, sub.init) {
        start_bound_.resize(task_.actions.size());
        start_bounds_.assign(1, std::vector<Ticks>(task_.actions.size(), 0));
        earliest_.resize(task_.atom_count());
        settled_.resize(task_.atom_count());
        waiting_.resize(task_.actions.size());
        is_goal_.assign(task_.atom_count(), false);
        for (AtomId g : sub_.goal) is_goal_[g] = true;
        for (const auto& a : task_.actions) {
            std::size_t k = 0;
            for (AtomId g : sub_.goal) k += std::binary_search(a.add.begin(), a.add.end(), g) ? 1 : 0;
            max_goal_adds_ = std::max(max_goal_adds_, k);
        }
    }

    PlanResult run() {
        PlanResult result;
        const Ticks cap = limits_.max_makespan_bound ? *limits_.max_makespan_bound : kInfinity - 1;
        try {
            // deepen the makespan threshold through successive pruned bounds
            for (Ticks threshold = std::min(bound(0), cap + 1); threshold <= cap && !found_;) {
                incumbent_ = threshold;
                next_threshold_ = kInfinity;
                visited_.clear();
                visited_.emplace(sub_.init, Seen{0, 0});
                expand(0);
                threshold = next_threshold_;
            }
        } catch (const LimitReached&) {
            limit_hit_ = true;
        }
        result.backtracks = backtracks_;
        result.nodes = nodes_;
        if (found_) {
            result.outcome = PlanOutcome::solved;
            result.sequence = best_sequence_;
            result.schedule = best_schedule_;
            result.makespan = compressor_makespan_;
            result.proven_optimal = !limit_hit_;
        } else {
            result.outcome = limit_hit_ ? PlanOutcome::backtrack_limit : PlanOutcome::unsolvable;
        }
        return result;
    }

private:
    struct LimitReached {};
    struct Seen {
        Ticks makespan;
        std::size_t depth;
    };

    bool goal_reached() const { return compressor_.state().contains_all(sub_.goal); }

    /// max(prefix makespan, relaxed earliest achievement of each goal atom)
    Ticks bound(std::size_t depth) {
        start_bound_ = start_bounds_[depth];
        // generalized Dijkstra: atoms settle in time order, an action fires once
        // its last precondition settles
        const auto& state = compressor_.state();
        std::fill(earliest_.begin(), earliest_.end(), kInfinity);
        std::fill(settled_.begin(), settled_.end(), false);
        heap_.clear();
        auto improve = [&](AtomId q, Ticks t) {
            if (t >= earliest_[q]) return;
            earliest_[q] = t;
            heap_.emplace_back(t, q);
            std::push_heap(heap_.begin(), heap_.end(), std::greater<>{});
        };
        auto fire = [&](const GroundAction& a, Ticks start) {
            for (AtomId q : a.add) improve(q, start + a.dur);
        };
        for (AtomId p = 0; p < earliest_.size(); ++p)
            if (state.contains(p)) improve(p, compressor_.established(p));
        for (const auto& a : task_.actions) {
            waiting_[a.id] = a.pre.size();
            if (a.pre.empty()) fire(a, start_bound_[a.id]);
        }
        std::size_t open_goals = sub_.goal.size();
        Ticks b = compressor_.makespan();
        while (!heap_.empty() && open_goals > 0) {
            std::pop_heap(heap_.begin(), heap_.end(), std::greater<>{});
            const auto [t, p] = heap_.back();
            heap_.pop_back();
            if (settled_[p] || t > earliest_[p]) continue;
            settled_[p] = true;
            if (is_goal_[p]) {
                --open_goals;
                b = std::max(b, t);
            }
            for (ActionId a : context_.consumers(p)) {
                start_bound_[a] = std::max(start_bound_[a], t);
                if (--waiting_[a] == 0) fire(task_.actions[a], start_bound_[a]);
            }
        }
        return open_goals > 0 ? kInfinity : b;
    }

    /// unsatisfied goal atoms over the most goal atoms one action adds, rounded up
    std::size_t remaining_actions_bound() const {
        std::size_t open = 0;
        for (AtomId g : sub_.goal) open += compressor_.state().contains(g) ? 0 : 1;
        return max_goal_adds_ == 0 ? open : (open + max_goal_adds_ - 1) / max_goal_adds_;
    }

    /// The state was already reached no later and no deeper.
    bool covered(Ticks ms, std::size_t depth) const {
        auto it = visited_.find(compressor_.state());
        return it != visited_.end() && it->second.makespan <= ms && it->second.depth <= depth;
    }

    void record_visit(Ticks ms, std::size_t depth) {
        auto [it, fresh] = visited_.try_emplace(compressor_.state(), Seen{ms, depth});
        if (!fresh && ms <= it->second.makespan && depth <= it->second.depth) it->second = Seen{ms, depth};
    }

    /// Earliest start of each action imposed by interfering placed
    /// occurrences, extended from the level above by the occurrence just placed.
    void push_start_bounds(std::size_t depth, ActionId placed) {
        if (start_bounds_.size() <= depth) start_bounds_.resize(depth + 1, std::vector<Ticks>(task_.actions.size(), 0));
        auto& level = start_bounds_[depth];
        level = start_bounds_[depth - 1];
        const Ticks end = compressor_.schedule().occurrences.back().start + task_.actions[placed].dur;
        const auto& row = context_.interfering(placed);
        for (auto b = row.find_first(); b != boost::dynamic_bitset<>::npos; b = row.find_next(b))
            level[b] = std::max(level[b], end);
    }

    void retreat() {
        ++backtracks_;
        if (backtracks_ >= limits_.max_backtracks) throw LimitReached{};
    }

    void expand(std::size_t depth) {
        ++nodes_;
        if (goal_reached()) {
            const Ticks ms = compressor_.makespan();
            if (ms < incumbent_ || (ms == incumbent_ && depth < incumbent_length_)) {
                incumbent_ = ms;
                compressor_makespan_ = ms;
                incumbent_length_ = depth;
                best_sequence_ = compressor_.schedule().sequence();
                best_schedule_ = compressor_.schedule();
                found_ = true;
            }
            return;
        }
        if (depth >= limits_.max_sequence_length) {
            retreat();
            return;
        }
        for (const auto& a : task_.actions) {
            if (!applicable(compressor_.state(), a)) continue;
            compressor_.push(a.id);
            const Ticks ms = compressor_.makespan();
            bool prune = covered(ms, depth + 1);
            if (!prune) {
                push_start_bounds(depth + 1, a.id);
                const std::size_t min_length = depth + 1 + remaining_actions_bound();
                const Ticks b = bound(depth + 1);
                prune = b > incumbent_ || (b == incumbent_ && min_length >= incumbent_length_);
                if (b > incumbent_ && !found_) next_threshold_ = std::min(next_threshold_, b);
            }
            if (!prune) {
                record_visit(ms, depth + 1);
                expand(depth + 1);
            }
            compressor_.pop();
        }
        retreat();
    }

    const GroundTask& task_;
    const SubProblem& sub_;
    SearchLimits limits_;
    const PlannerContext& context_;
    Compressor compressor_;
    std::vector<Ticks> start_bound_;
    std::vector<std::vector<Ticks>> start_bounds_;
    std::vector<Ticks> earliest_;
    std::vector<char> settled_;
    std::vector<char> is_goal_;
    std::vector<std::size_t> waiting_;
    std::vector<std::pair<Ticks, AtomId>> heap_;
    std::size_t max_goal_adds_ = 0;
    std::unordered_map<WorldState, Seen> visited_;
    /// the current threshold until a plan is found, then that plan's makespan
    Ticks incumbent_ = 0;
    Ticks next_threshold_ = kInfinity;
    Ticks compressor_makespan_ = 0;
    std::size_t incumbent_length_ = std::numeric_limits<std::size_t>::max();
    bool found_ = false;
    bool limit_hit_ = false;
    std::vector<ActionId> best_sequence_;
    Schedule best_schedule_;
    std::uint64_t backtracks_ = 0;
    std::uint64_t nodes_ = 0;
};

}  // namespace

PlanResult solve(const SubProblem& sub, const SearchLimits& limits, const PlannerContext* context) {
    const GroundTask& task = *sub.task;
    // goal atoms pruned by grounding can never be reached
    for (AtomId g : sub.goal)
        if (g >= task.atom_count()) return PlanResult{};
    if (sub.init.contains_all(sub.goal)) {
        PlanResult done;
        done.outcome = PlanOutcome::solved;
        done.proven_optimal = true;
        done.nodes = 1;
        return done;
    }
    try {
        heuristic(sub.init, sub.goal, task);
    } catch (const GoalUnsupportable&) {
        return PlanResult{};
    }
    if (context) return BranchAndBound(sub, limits, *context).run();
    const PlannerContext local(task);
    return BranchAndBound(sub, limits, local).run();
}

}  // namespace dae
