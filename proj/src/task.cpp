#include "dae/task.hpp"

#include <algorithm>
#include <map>
#include <numeric>
#include <set>
#include <unordered_map>

#include "dae/errors.hpp"

namespace dae {

std::vector<AtomId> WorldState::atoms() const {
    std::vector<AtomId> out;
    out.reserve(bits_.count());
    for (auto i = bits_.find_first(); i != boost::dynamic_bitset<>::npos; i = bits_.find_next(i))
        out.push_back(static_cast<AtomId>(i));
    return out;
}

std::string GroundAction::label() const {
    std::string out = "(" + name;
    for (const auto& a : args) out += " " + a;
    return out + ")";
}

AtomId GroundTask::find_atom(const GroundAtom& atom) const {
    auto it = std::lower_bound(atoms.begin(), atoms.end(), atom);
    if (it == atoms.end() || *it != atom) return static_cast<AtomId>(atoms.size());
    return static_cast<AtomId>(it - atoms.begin());
}

std::vector<std::string> GroundTask::objects_of(const std::vector<std::string>& types) const {
    std::vector<std::string> out;
    for (const auto& o : objects)
        if (domain.conforms(o.types, types)) out.push_back(o.name);
    return out;
}

WorldState GroundTask::make_state(std::span<const AtomId> ids) const {
    WorldState s(atoms.size());
    for (AtomId a : ids) s.insert(a);
    return s;
}

namespace {

struct Candidate {
    std::size_t op = 0;
    std::vector<std::string> args;
    std::vector<GroundAtom> pre, add, del;
};

GroundAtom instantiate(const AtomTemplate& t, const OperatorDecl& op, const std::vector<std::string>& binding) {
    GroundAtom g{t.predicate, {}};
    g.args.reserve(t.args.size());
    for (const auto& term : t.args) {
        if (!term.empty() && term.front() == '?') {
            auto it = std::find_if(op.params.begin(), op.params.end(),
                                   [&](const TypedName& p) { return p.name == term; });
            g.args.push_back(binding[static_cast<std::size_t>(it - op.params.begin())]);
        } else {
            g.args.push_back(term);
        }
    }
    return g;
}

/// Highest parameter position a template depends on, or -1 when ground.
int last_variable(const AtomTemplate& t, const OperatorDecl& op) {
    int last = -1;
    for (const auto& term : t.args) {
        if (term.empty() || term.front() != '?') continue;
        auto it = std::find_if(op.params.begin(), op.params.end(), [&](const TypedName& p) { return p.name == term; });
        last = std::max(last, static_cast<int>(it - op.params.begin()));
    }
    return last;
}

class Grounder {
public:
    Grounder(const DomainModel& d, const ProblemModel& p, const GroundingOptions& o)
        : domain_(d), problem_(p), options_(o) {
        for (const auto& op : d.operators) {
            for (const auto& a : op.add) fluent_.insert(a.predicate);
            for (const auto& a : op.del) fluent_.insert(a.predicate);
        }
        init_.insert(p.init.begin(), p.init.end());
        objects_ = d.constants;
        for (const auto& o2 : p.objects)
            if (std::none_of(objects_.begin(), objects_.end(), [&](const TypedName& c) { return c.name == o2.name; }))
                objects_.push_back(o2);
    }

    GroundTask run() {
        for (std::size_t i = 0; i < domain_.operators.size(); ++i) enumerate(i);

        // delete-relaxed reachability fixpoint
        std::set<GroundAtom> reachable = init_;
        std::vector<bool> fired(candidates_.size(), false);
        for (bool changed = true; changed;) {
            changed = false;
            for (std::size_t i = 0; i < candidates_.size(); ++i) {
                if (fired[i]) continue;
                const auto& c = candidates_[i];
                if (!std::all_of(c.pre.begin(), c.pre.end(), [&](const GroundAtom& a) { return reachable.count(a); }))
                    continue;
                fired[i] = true;
                for (const auto& a : c.add) changed = reachable.insert(a).second || changed;
            }
        }

        std::set<GroundAtom> universe = init_;
        universe.insert(problem_.goal.begin(), problem_.goal.end());
        std::vector<const Candidate*> kept;
        for (std::size_t i = 0; i < candidates_.size(); ++i) {
            if (!fired[i]) continue;
            kept.push_back(&candidates_[i]);
            for (const auto* part : {&candidates_[i].pre, &candidates_[i].add, &candidates_[i].del})
                universe.insert(part->begin(), part->end());
        }
        std::sort(kept.begin(), kept.end(), [&](const Candidate* a, const Candidate* b) {
            const auto& na = domain_.operators[a->op].name;
            const auto& nb = domain_.operators[b->op].name;
            return na != nb ? na < nb : a->args < b->args;
        });

        GroundTask task;
        task.atoms.assign(universe.begin(), universe.end());
        task.domain = domain_;
        task.objects = objects_;

        std::int64_t scale = 1;
        for (const auto& op : domain_.operators) scale = std::lcm(scale, op.duration.denominator());
        task.time_scale = scale;

        auto ids = [&](const std::vector<GroundAtom>& atoms) {
            std::vector<AtomId> out;
            out.reserve(atoms.size());
            for (const auto& a : atoms) out.push_back(task.find_atom(a));
            std::sort(out.begin(), out.end());
            out.erase(std::unique(out.begin(), out.end()), out.end());
            return out;
        };

        task.actions.reserve(kept.size());
        for (const Candidate* c : kept) {
            const auto& op = domain_.operators[c->op];
            GroundAction a;
            a.id = static_cast<ActionId>(task.actions.size());
            a.name = op.name;
            a.args = c->args;
            a.pre = ids(c->pre);
            a.add = ids(c->add);
            a.del = ids(c->del);
            std::erase_if(a.del, [&](AtomId d) { return std::binary_search(a.add.begin(), a.add.end(), d); });
            const Rational ticks = op.duration * Rational(scale);
            a.dur = ticks.numerator();
            task.actions.push_back(std::move(a));
        }

        std::vector<AtomId> init_ids;
        for (const auto& a : init_) init_ids.push_back(task.find_atom(a));
        task.init = task.make_state(init_ids);
        task.goal = ids(problem_.goal);
        return task;
    }

private:
    void enumerate(std::size_t op_index) {
        const OperatorDecl& op = domain_.operators[op_index];
        std::vector<std::vector<std::string>> domains;
        for (const auto& p : op.params) {
            std::vector<std::string> values;
            for (const auto& o : objects_)
                if (domain_.conforms(o.types, p.types)) values.push_back(o.name);
            domains.push_back(std::move(values));
        }
        // static preconditions checked as soon as their last variable is bound
        std::vector<std::vector<const AtomTemplate*>> checks(op.params.size() + 1);
        for (const auto& pre : op.pre) {
            if (fluent_.count(pre.predicate)) continue;
            checks[static_cast<std::size_t>(last_variable(pre, op) + 1)].push_back(&pre);
        }
        std::vector<std::string> binding(op.params.size());
        auto statics_hold = [&](std::size_t level) {
            for (const AtomTemplate* t : checks[level])
                if (!init_.count(instantiate(*t, op, binding))) return false;
            return true;
        };
        if (!statics_hold(0)) return;

        auto rec = [&](auto&& self, std::size_t depth) -> void {
            if (depth == op.params.size()) {
                if (candidates_.size() >= options_.max_actions)
                    throw GroundingExplosion("grounding exceeds " + std::to_string(options_.max_actions) +
                                             " actions (operator " + op.name + ")");
                Candidate c;
                c.op = op_index;
                c.args = binding;
                for (const auto& t : op.pre) c.pre.push_back(instantiate(t, op, binding));
                for (const auto& t : op.add) c.add.push_back(instantiate(t, op, binding));
                for (const auto& t : op.del) c.del.push_back(instantiate(t, op, binding));
                candidates_.push_back(std::move(c));
                return;
            }
            for (const auto& value : domains[depth]) {
                binding[depth] = value;
                if (statics_hold(depth + 1)) self(self, depth + 1);
            }
        };
        rec(rec, 0);
    }

    const DomainModel& domain_;
    const ProblemModel& problem_;
    GroundingOptions options_;
    std::set<std::string> fluent_;
    std::set<GroundAtom> init_;
    std::vector<TypedName> objects_;
    std::vector<Candidate> candidates_;
};

}  // namespace

GroundTask ground(const DomainModel& domain, const ProblemModel& problem, const GroundingOptions& options) {
    return Grounder(domain, problem, options).run();
}

}  // namespace dae
