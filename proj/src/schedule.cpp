#include "dae/schedule.hpp"

#include <algorithm>
#include <sstream>

#include "dae/errors.hpp"

namespace dae {

namespace {

bool intersects(const std::vector<AtomId>& a, const std::vector<AtomId>& b) {
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

/// Per-atom event lists for the truth test.
class Timeline {
public:
    Timeline(const GroundTask& task, const Schedule& sched, const WorldState& init) : init_(init) {
        events_.resize(task.atom_count());
        for (std::size_t i = 0; i < sched.occurrences.size(); ++i) {
            const auto& occ = sched.occurrences[i];
            const auto& a = task.actions.at(occ.action);
            const Ticks end = occ.start + a.dur;
            for (AtomId p : a.add) events_[p].push_back({end, true, i});
            for (AtomId p : a.del) events_[p].push_back({end, false, i});
        }
    }

    /// Truth of p at t, ignoring the effects of occurrence `self` (a
    /// zero-duration action's own effects land on its start).
    bool true_at(AtomId p, Ticks t, std::size_t self) const {
        Ticks last = -1;
        bool value = init_.contains(p);
        for (const auto& [time, adds, owner] : events_[p]) {
            if (time > t || owner == self) continue;
            if (time > last) {
                last = time;
                value = adds;
            } else if (time == last) {
                value = value || adds;
            }
        }
        return value;
    }

private:
    struct Event {
        Ticks time;
        bool adds;
        std::size_t owner;
    };
    const WorldState& init_;
    std::vector<std::vector<Event>> events_;
};

}  // namespace

std::vector<ActionId> Schedule::sequence() const {
    std::vector<Occurrence> sorted = occurrences;
    std::stable_sort(sorted.begin(), sorted.end(), [](const Occurrence& a, const Occurrence& b) { return a.rank < b.rank; });
    std::vector<ActionId> seq;
    seq.reserve(sorted.size());
    for (const auto& o : sorted) seq.push_back(o.action);
    return seq;
}

std::string Violation::describe(const GroundTask& task) const {
    std::ostringstream out;
    if (kind == ViolationKind::precondition_unmet) {
        out << "precondition " << task.atom_label(atom) << " of occurrence #" << ranks.front() << " false at t=" << time;
    } else {
        out << "interfering occurrences #" << ranks.at(0) << " and #" << ranks.at(1) << " overlap at t=" << time;
    }
    return out.str();
}

bool interferes(const GroundAction& a, const GroundAction& b) {
    return intersects(a.del, b.pre) || intersects(a.del, b.add) || intersects(b.del, a.pre) ||
           intersects(b.del, a.add);
}

bool overlaps(Ticks start1, Ticks dur1, Ticks start2, Ticks dur2) {
    const Ticks lo = std::max(start1, start2);
    const Ticks hi = std::min(start1 + dur1, start2 + dur2);
    return hi - lo >= 1;
}

std::vector<Violation> validate(const GroundTask& task, const Schedule& sched, const WorldState& init) {
    std::vector<Violation> out;
    const auto& occ = sched.occurrences;
    for (std::size_t i = 0; i < occ.size(); ++i) {
        const auto& a = task.actions.at(occ[i].action);
        for (std::size_t j = i + 1; j < occ.size(); ++j) {
            const auto& b = task.actions.at(occ[j].action);
            if (interferes(a, b) && overlaps(occ[i].start, a.dur, occ[j].start, b.dur))
                out.push_back({ViolationKind::interference_overlap,
                               {occ[i].rank, occ[j].rank},
                               0,
                               std::max(occ[i].start, occ[j].start)});
        }
    }
    const Timeline timeline(task, sched, init);
    for (std::size_t i = 0; i < occ.size(); ++i) {
        const auto& o = occ[i];
        for (AtomId p : task.actions.at(o.action).pre)
            if (!timeline.true_at(p, o.start, i)) out.push_back({ViolationKind::precondition_unmet, {o.rank}, p, o.start});
    }
    return out;
}

WorldState apply_sequence(const GroundTask& task, std::span<const ActionId> seq, WorldState state) {
    for (ActionId id : seq) {
        const auto& a = task.actions.at(id);
        if (!state.contains_all(a.pre)) throw NotApplicable(a.label() + " is not applicable");
        for (AtomId p : a.del) state.erase(p);
        for (AtomId p : a.add) state.insert(p);
    }
    return state;
}

Compressor::Compressor(const GroundTask& task, const WorldState& init)
    : task_(&task), init_(init), state_(init), events_(task.atom_count()), established_(task.atom_count(), 0) {}

bool Compressor::true_at(AtomId p, Ticks t, std::size_t self) const {
    Ticks last = -1;
    bool value = init_.contains(p);
    for (const auto& e : events_[p]) {
        if (e.time > t || e.owner == self) continue;
        if (e.time > last) {
            last = e.time;
            value = e.adds;
        } else if (e.time == last) {
            value = value || e.adds;
        }
    }
    return value;
}

bool Compressor::placement_ok(const GroundAction& b, Ticks t) {
    for (AtomId p : b.pre)
        if (!true_at(p, t, schedule_.size())) return false;
    if (b.del.empty()) return true;
    // b's deletions must not falsify a precondition of an already placed occurrence
    const Ticks end = t + b.dur;
    const std::size_t self = schedule_.size();
    for (AtomId p : b.del) events_[p].push_back({end, false, self});
    bool ok = true;
    for (std::size_t i = 0; i < schedule_.size(); ++i) {
        const auto& o = schedule_.occurrences[i];
        if (o.start < end) continue;
        const auto& x = task_->actions[o.action];
        for (AtomId p : x.pre) {
            if (std::binary_search(b.del.begin(), b.del.end(), p) && !true_at(p, o.start, i)) {
                ok = false;
                break;
            }
        }
        if (!ok) break;
    }
    for (AtomId p : b.del) events_[p].pop_back();
    return ok;
}

Ticks Compressor::earliest_start_bound(ActionId action) const {
    const auto& b = task_->actions[action];
    Ticks lb = 0;
    for (const auto& o : schedule_.occurrences) {
        const auto& x = task_->actions[o.action];
        if (o.start + x.dur > lb && interferes(x, b)) lb = o.start + x.dur;
    }
    return lb;
}

Ticks Compressor::push(ActionId action) {
    const auto& b = task_->actions.at(action);
    if (!state_.contains_all(b.pre))
        throw NotSequentiallyExecutable(b.label() + " is not applicable at position " +
                                        std::to_string(schedule_.size()));
    Ticks lb = earliest_start_bound(action);
    for (AtomId p : b.pre) lb = std::max(lb, established_[p]);

    std::vector<Ticks> candidates{lb};
    Ticks horizon = lb;
    for (const auto& o : schedule_.occurrences) {
        const Ticks end = o.start + task_->actions[o.action].dur;
        if (end > lb) candidates.push_back(end);
        horizon = std::max(horizon, end);
    }
    candidates.push_back(horizon + 1);
    std::sort(candidates.begin(), candidates.end());
    candidates.erase(std::unique(candidates.begin(), candidates.end()), candidates.end());

    Ticks start = -1;
    for (Ticks t : candidates) {
        if (placement_ok(b, t)) {
            start = t;
            break;
        }
    }
    if (start < 0) throw NotSequentiallyExecutable("no valid start for " + b.label());

    Frame frame;
    frame.state_before = state_;
    const Ticks end = start + b.dur;
    for (AtomId p : b.add) {
        events_[p].push_back({end, true, schedule_.size()});
        if (!state_.contains(p)) {
            frame.established_before.emplace_back(p, established_[p]);
            established_[p] = end;
        }
    }
    for (AtomId p : b.del) events_[p].push_back({end, false, schedule_.size()});
    for (AtomId p : b.del) state_.erase(p);
    for (AtomId p : b.add) state_.insert(p);

    schedule_.occurrences.push_back({action, start, schedule_.size()});
    ends_.push_back(std::max(makespan(), end));
    frames_.push_back(std::move(frame));
    return start;
}

void Compressor::pop() {
    if (frames_.empty()) return;
    const auto& b = task_->actions[schedule_.occurrences.back().action];
    for (AtomId p : b.add) events_[p].pop_back();
    for (AtomId p : b.del) events_[p].pop_back();
    Frame& frame = frames_.back();
    for (const auto& [p, before] : frame.established_before) established_[p] = before;
    state_ = std::move(frame.state_before);
    frames_.pop_back();
    schedule_.occurrences.pop_back();
    ends_.pop_back();
}

Schedule compress(const GroundTask& task, std::span<const ActionId> seq, const WorldState& init) {
    Compressor c(task, init);
    for (ActionId a : seq) c.push(a);
    return c.schedule();
}

Ticks makespan(const GroundTask& task, const Schedule& sched) {
    Ticks m = 0;
    for (const auto& o : sched.occurrences) m = std::max(m, o.start + task.actions.at(o.action).dur);
    return m;
}

CostEvaluator::CostEvaluator(const GroundTask& task, CostModel cm) : task_(&task), cm_(std::move(cm)) {
    flights_.resize(task.actions.size());
    for (const auto& a : task.actions) {
        Flight& f = flights_[a.id];
        for (AtomId from : a.del) {
            const auto& fa = task.atoms[from];
            if (fa.predicate != cm_.location_predicate || fa.args.size() != 2) continue;
            if (!std::binary_search(a.pre.begin(), a.pre.end(), from)) continue;
            for (AtomId to : a.add) {
                const auto& ta = task.atoms[to];
                if (ta.predicate != cm_.location_predicate || ta.args.size() != 2 || ta.args[0] != fa.args[0]) continue;
                f.is_flight = true;
                f.endpoint_value = cm_.value_of(fa.args[1]) + cm_.value_of(ta.args[1]);
                for (AtomId q = 0; q < task.atom_count(); ++q) {
                    const auto& qa = task.atoms[q];
                    if (qa.predicate == cm_.carrier_predicate && qa.args.size() == 2 && qa.args[1] == fa.args[0])
                        f.passenger_atoms.push_back(q);
                }
                break;
            }
            if (f.is_flight) break;
        }
    }
}

Rational CostEvaluator::max_event() const {
    Rational best(0);
    for (const auto& f : flights_) {
        if (!f.is_flight) continue;
        const std::int64_t load = cm_.mode == CostMode::max ? 1 : 1 + static_cast<std::int64_t>(f.passenger_atoms.size());
        best = std::max(best, f.endpoint_value * Rational(load));
    }
    return best;
}

Rational CostEvaluator::event(ActionId action, const WorldState& before) const {
    const Flight& f = flights_.at(action);
    if (!f.is_flight) return Rational(0);
    if (cm_.mode == CostMode::max) return f.endpoint_value;
    std::int64_t passengers = 0;
    for (AtomId q : f.passenger_atoms) passengers += before.contains(q) ? 1 : 0;
    if (passengers == 0 && cm_.accrual == CostAccrual::loaded_flights) return Rational(0);
    return f.endpoint_value * Rational(1 + passengers);
}

Rational CostEvaluator::operator()(std::span<const ActionId> seq, const WorldState& init) const {
    WorldState state = init;
    Rational total(0);
    for (ActionId id : seq) {
        const auto& a = task_->actions.at(id);
        if (!state.contains_all(a.pre)) throw InvalidSchedule(a.label() + " is not applicable in rank order");
        total = accumulate(total, event(id, state));
        for (AtomId p : a.del) state.erase(p);
        for (AtomId p : a.add) state.insert(p);
    }
    return total;
}

Rational CostEvaluator::operator()(const Schedule& sched, const WorldState& init) const {
    const auto seq = sched.sequence();
    return (*this)(std::span<const ActionId>(seq), init);
}

Rational evaluate_cost(const GroundTask& task, const Schedule& sched, const WorldState& init, const CostModel& cm) {
    if (!validate(task, sched, init).empty()) throw InvalidSchedule("schedule does not validate");
    return CostEvaluator(task, cm)(sched, init);
}

std::string format_plan(const GroundTask& task, const Schedule& sched) {
    std::vector<Occurrence> sorted = sched.occurrences;
    std::stable_sort(sorted.begin(), sorted.end(), [](const Occurrence& a, const Occurrence& b) {
        return a.start != b.start ? a.start < b.start : a.rank < b.rank;
    });
    std::ostringstream out;
    for (const auto& o : sorted) {
        const auto& a = task.actions.at(o.action);
        out << to_decimal(task.to_time(o.start), 3) << ": " << a.label() << " [" << to_decimal(task.to_time(a.dur), 3)
            << "]\n";
    }
    return out.str();
}

}  // namespace dae
