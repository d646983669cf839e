#include "dae/oracle.hpp"

#include <algorithm>
#include <limits>

#include "dae/errors.hpp"
#include "dae/planner.hpp"
#include "dae/schedule.hpp"

namespace dae {

bool ParetoFront::weakly_dominated(Ticks makespan, const Rational& cost) const {
    return std::any_of(points_.begin(), points_.end(),
                       [&](const ParetoPoint& p) { return p.makespan <= makespan && p.cost <= cost; });
}

bool ParetoFront::contains(Ticks makespan, const Rational& cost) const {
    return std::any_of(points_.begin(), points_.end(),
                       [&](const ParetoPoint& p) { return p.makespan == makespan && p.cost == cost; });
}

bool ParetoFront::offer(const ParetoPoint& point) {
    if (weakly_dominated(point.makespan, point.cost)) return false;
    std::erase_if(points_, [&](const ParetoPoint& p) { return dominates(point, p); });
    auto at = std::lower_bound(points_.begin(), points_.end(), point, [](const ParetoPoint& a, const ParetoPoint& b) {
        return a.makespan < b.makespan;
    });
    points_.insert(at, point);
    return true;
}

namespace {

bool intersects(std::span<const AtomId> a, std::span<const AtomId> b) {
    auto i = a.begin();
    auto j = b.begin();
    while (i != a.end() && j != b.end()) {
        if (*i < *j)
            ++i;
        else if (*j < *i)
            ++j;
        else
            return true;
    }
    return false;
}

constexpr Ticks kInfinity = std::numeric_limits<Ticks>::max() / 4;

class Enumerator {
public:
    Enumerator(const GroundTask& task, const CostModel& cm, const OracleBounds& bounds)
        : task_(task), costs_(task, cm), bounds_(bounds), compressor_(task, task.init) {
        const std::size_t n = task.actions.size();
        independent_.assign(n, std::vector<bool>(n, false));
        for (const auto& a : task.actions)
            for (const auto& b : task.actions) independent_[a.id][b.id] = independent(a, b);
        adders_.resize(task.goal.size());
        for (std::size_t i = 0; i < task.goal.size(); ++i)
            for (const auto& a : task.actions)
                if (std::binary_search(a.add.begin(), a.add.end(), task.goal[i])) adders_[i].push_back(a.id);
    }

    ParetoFront run(OracleStats* stats) {
        visit(0, Rational(0), std::numeric_limits<ActionId>::max());
        if (stats) *stats = stats_;
        return std::move(front_);
    }

private:
    /// Swapping the pair leaves the schedule, the final state and the cost unchanged.
    bool independent(const GroundAction& a, const GroundAction& b) const {
        if (a.id == b.id || interferes(a, b)) return false;
        if (intersects(a.add, b.pre) || intersects(b.add, a.pre) || intersects(a.add, b.add)) return false;
        for (const auto* x : {&a, &b}) {
            const auto* y = x == &a ? &b : &a;
            const auto sensitive = costs_.sensitive_atoms(y->id);
            if (intersects(x->add, sensitive) || intersects(x->del, sensitive)) return false;
        }
        return true;
    }

    Ticks makespan_bound() const {
        Ticks b = compressor_.makespan();
        const auto& state = compressor_.state();
        for (std::size_t i = 0; i < task_.goal.size(); ++i) {
            if (state.contains(task_.goal[i])) continue;
            Ticks best = kInfinity;
            for (ActionId a : adders_[i])
                best = std::min(best, compressor_.earliest_start_bound(a) + task_.actions[a].dur);
            b = std::max(b, best);
        }
        return b;
    }

    void visit(std::size_t depth, const Rational& cost, ActionId last) {
        if (++stats_.nodes > bounds_.node_cap)
            throw CapExceeded("oracle enumeration exceeds " + std::to_string(bounds_.node_cap) + " nodes");
        if (compressor_.state().contains_all(task_.goal)) {
            ++stats_.goal_schedules;
            if (bounds_.validate_each) {
                ++stats_.validated;
                if (!validate(task_, compressor_.schedule(), task_.init).empty())
                    throw InvalidSchedule("oracle produced a schedule that does not validate");
            }
            front_.offer({compressor_.makespan(), cost, "oracle"});
            return;
        }
        if (depth >= bounds_.max_sequence_length) return;
        for (const auto& a : task_.actions) {
            if (!applicable(compressor_.state(), a)) continue;
            if (last != std::numeric_limits<ActionId>::max() && a.id < last && independent_[last][a.id]) continue;
            const Rational next_cost = costs_.accumulate(cost, costs_.event(a.id, compressor_.state()));
            compressor_.push(a.id);
            if (!front_.weakly_dominated(makespan_bound(), next_cost)) visit(depth + 1, next_cost, a.id);
            compressor_.pop();
        }
    }

    const GroundTask& task_;
    CostEvaluator costs_;
    OracleBounds bounds_;
    Compressor compressor_;
    std::vector<std::vector<bool>> independent_;
    std::vector<std::vector<ActionId>> adders_;
    ParetoFront front_;
    OracleStats stats_;
};

}  // namespace

ParetoFront brute_force_pareto(const GroundTask& task, const CostModel& cm, const OracleBounds& bounds,
                               OracleStats* stats) {
    return Enumerator(task, cm, bounds).run(stats);
}

}  // namespace dae
