#include "dae/stations.hpp"

#include <algorithm>
#include <numeric>
#include <set>
#include <sstream>

#include "dae/errors.hpp"

namespace dae {

std::size_t uniform_index(Rng& rng, std::size_t lo, std::size_t hi) {
    return std::uniform_int_distribution<std::size_t>(lo, hi)(rng);
}

double uniform_real(Rng& rng) { return std::uniform_real_distribution<double>(0.0, 1.0)(rng); }

GoalLines::GoalLines(const GroundTask& task, const InvariantSpec& inv) : atom_count_(task.atom_count()) {
    for (AtomId g : task.goal) {
        const GroundAtom& atom = task.atoms[g];
        if (std::find(inv.station_predicates.begin(), inv.station_predicates.end(), atom.predicate) ==
            inv.station_predicates.end())
            continue;
        auto ex = inv.exclusivity.find(atom.predicate);
        if (ex == inv.exclusivity.end() || atom.args.size() != 2) continue;
        const PredicateDecl* decl = task.domain.find_predicate(atom.predicate);
        GoalLine line;
        line.predicate = atom.predicate;
        line.key_position = ex->second - 1;
        line.value_position = 1 - line.key_position;
        line.key = atom.args[line.key_position];
        line.domain = task.objects_of(decl->params[line.value_position].types);
        for (const auto& v : line.domain) {
            GroundAtom a{atom.predicate, {}};
            a.args.resize(2);
            a.args[line.key_position] = line.key;
            a.args[line.value_position] = v;
            line.atoms.push_back(task.find_atom(a));
        }
        auto it = std::find(line.domain.begin(), line.domain.end(), atom.args[line.value_position]);
        line.goal_value = static_cast<ValueIndex>(it - line.domain.begin());
        lines_.push_back(std::move(line));
    }
}

std::size_t Station::active_count() const {
    return static_cast<std::size_t>(
        std::count_if(entries.begin(), entries.end(), [](const StationEntry& e) { return e.active; }));
}

Assignment project(const WorldState& state, const GoalLines& lines) {
    Assignment out(lines.size());
    for (std::size_t i = 0; i < lines.size(); ++i) {
        const auto& line = lines[i];
        for (ValueIndex v = 0; v < line.atoms.size(); ++v) {
            if (line.atoms[v] < lines.atom_count() && state.contains(line.atoms[v])) {
                out[i] = v;
                break;
            }
        }
    }
    return out;
}

Assignment values_of(const Station& st) {
    Assignment out;
    out.reserve(st.entries.size());
    for (const auto& e : st.entries) out.emplace_back(e.value);
    return out;
}

Station goal_station(const GoalLines& lines) {
    Station st;
    for (const auto& line : lines.lines()) st.entries.push_back({line.goal_value, true});
    return st;
}

std::vector<AtomId> goal_atoms(const Station& st, const GoalLines& lines) {
    std::vector<AtomId> out;
    for (std::size_t i = 0; i < st.entries.size(); ++i)
        if (st.entries[i].active) out.push_back(lines[i].atoms.at(st.entries[i].value));
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
    return out;
}

std::size_t distance(const Assignment& from, const Station& to) {
    std::size_t d = 0;
    for (std::size_t i = 0; i < to.entries.size(); ++i) {
        const auto& e = to.entries[i];
        if (!e.active) continue;
        if (i >= from.size() || !from[i] || *from[i] != e.value) ++d;
    }
    return d;
}

std::size_t distance(const WorldState& from, const Station& to, const GoalLines& lines) {
    return distance(project(from, lines), to);
}

std::size_t distance(const Station& from, const Station& to) { return distance(values_of(from), to); }

bool is_consistent(const Station& st, const GoalLines& lines) {
    if (st.entries.size() != lines.size()) return false;
    std::set<std::pair<std::string_view, std::string_view>> keys;
    for (std::size_t i = 0; i < st.entries.size(); ++i) {
        const auto& e = st.entries[i];
        if (e.value >= lines[i].domain.size()) return false;
        if (!e.active) continue;
        if (!keys.emplace(lines[i].predicate, lines[i].key).second) return false;
    }
    return true;
}

namespace {

/// Values for `line` in column `st` that leave the column consistent.
std::vector<ValueIndex> consistent_values(Station st, std::size_t line, const GoalLines& lines) {
    std::vector<ValueIndex> out;
    st.entries[line].active = true;
    for (ValueIndex v = 0; v < lines[line].domain.size(); ++v) {
        st.entries[line].value = v;
        if (is_consistent(st, lines)) out.push_back(v);
    }
    return out;
}

template <typename T>
const T& pick(const std::vector<T>& items, Rng& rng) {
    return items[uniform_index(rng, 0, items.size() - 1)];
}

}  // namespace

Genome random_init(const GoalLines& lines, const WorldState& init, const InitParams& p, Rng& rng) {
    const std::size_t n = uniform_index(rng, p.n_min, p.n_max);
    const std::size_t L = lines.size();
    if (p.d_max * n < L)
        throw InitInfeasible("cannot place one move for each of " + std::to_string(L) + " goal lines in " +
                             std::to_string(n) + " stations with d_max = " + std::to_string(p.d_max));

    std::vector<std::vector<bool>> marked(L, std::vector<bool>(n, false));
    std::vector<std::size_t> per_column(n, 0);
    for (std::size_t l = 0; l < L; ++l) {
        std::vector<std::size_t> open;
        for (std::size_t c = 0; c < n; ++c)
            if (per_column[c] < p.d_max) open.push_back(c);
        const std::size_t c = pick(open, rng);
        marked[l][c] = true;
        ++per_column[c];
    }
    for (std::size_t e = 0; e < p.extra_moves; ++e) {
        std::vector<std::pair<std::size_t, std::size_t>> open;
        for (std::size_t l = 0; l < L; ++l)
            for (std::size_t c = 0; c < n; ++c)
                if (!marked[l][c] && per_column[c] < p.d_max) open.emplace_back(l, c);
        if (open.empty()) break;
        const auto [l, c] = pick(open, rng);
        marked[l][c] = true;
        ++per_column[c];
    }

    const Assignment start = project(init, lines);
    Genome g;
    g.stations.assign(n, Station{std::vector<StationEntry>(L, StationEntry{0, false})});
    for (std::size_t l = 0; l < L; ++l) {
        const std::size_t last = n - 1 - static_cast<std::size_t>(std::distance(
                                             marked[l].rbegin(), std::find(marked[l].rbegin(), marked[l].rend(), true)));
        // a line without an initial value stays masked until its first move
        StationEntry current{start[l].value_or(lines[l].goal_value), start[l].has_value()};
        for (std::size_t c = 0; c < n; ++c) {
            if (c == last)
                current = {lines[l].goal_value, true};
            else if (marked[l][c])
                current = {pick(consistent_values(g.stations[c], l, lines), rng), true};
            g.stations[c].entries[l] = current;
        }
    }

    for (std::size_t c = 0; c < n; ++c) {
        const Assignment left = c == 0 ? start : values_of(g.stations[c - 1]);
        for (std::size_t l = 0; l < L; ++l) {
            const bool draw = uniform_real(rng) < p.p_mask;
            auto& entry = g.stations[c].entries[l];
            if (!draw || !entry.active) continue;
            const bool differs = !left[l] || *left[l] != entry.value;
            if (differs && distance(left, g.stations[c]) == 1) continue;
            entry.active = false;
        }
    }
    return g;
}

Neighbors neighbors_of(const Genome& g, std::size_t k, const GoalLines& lines, const WorldState& init) {
    Neighbors nb;
    nb.left = k == 0 ? project(init, lines) : values_of(g.stations.at(k - 1));
    nb.right = k + 1 < g.size() ? g.stations[k + 1] : goal_station(lines);
    return nb;
}

std::vector<ValueIndex> legal_values(const Station& st, std::size_t line, const GoalLines& lines, std::size_t d_max,
                                     const Neighbors& nb) {
    std::vector<ValueIndex> out;
    // a gap already wider than d_max (left by a deletion) may not widen further
    const std::size_t left_reach = std::max(d_max, distance(nb.left, st));
    const std::size_t right_reach = std::max(d_max, distance(st, nb.right));
    Station probe = st;
    for (ValueIndex v : consistent_values(st, line, lines)) {
        probe.entries[line] = {v, true};
        if (distance(nb.left, probe) <= left_reach && distance(probe, nb.right) <= right_reach) out.push_back(v);
    }
    return out;
}

Station mutate_station(const Station& st, const GoalLines& lines, std::size_t d_max, const Neighbors& nb, Rng& rng,
                       const StationRates& rates) {
    std::vector<std::size_t> active, inactive;
    for (std::size_t i = 0; i < st.entries.size(); ++i) (st.entries[i].active ? active : inactive).push_back(i);
    const double u = uniform_real(rng) * (rates.change + rates.remove + rates.restore);
    Station out = st;
    if (u < rates.change) {
        if (active.empty()) return out;
        const std::size_t line = pick(active, rng);
        auto legal = legal_values(st, line, lines, d_max, nb);
        std::erase(legal, st.entries[line].value);
        if (!legal.empty()) out.entries[line].value = pick(legal, rng);
    } else if (u < rates.change + rates.remove) {
        if (active.empty()) return out;
        out.entries[pick(active, rng)].active = false;
    } else {
        if (inactive.empty()) return out;
        const std::size_t line = pick(inactive, rng);
        const auto legal = legal_values(st, line, lines, d_max, nb);
        if (!legal.empty()) out.entries[line] = {pick(legal, rng), true};
    }
    return out;
}

Genome mutate_add(const Genome& g, const GoalLines& lines, const WorldState& init, std::size_t d_max,
                  std::size_t n_max_hard, Rng& rng) {
    if (g.size() >= n_max_hard) return g;
    return mutate_add_at(g, uniform_index(rng, 0, g.size()), lines, init, d_max, n_max_hard, rng);
}

Genome mutate_add_at(const Genome& g, std::size_t at, const GoalLines& lines, const WorldState& init,
                     std::size_t d_max, std::size_t n_max_hard, Rng& rng) {
    if (g.size() >= n_max_hard || at > g.size()) return g;
    Neighbors nb;
    nb.left = at == 0 ? project(init, lines) : values_of(g.stations[at - 1]);
    nb.right = at < g.size() ? g.stations[at] : goal_station(lines);

    Station fresh;
    for (std::size_t l = 0; l < lines.size(); ++l)
        fresh.entries.push_back({nb.left[l].value_or(nb.right.entries[l].value), true});
    if (d_max > 0 && !lines.empty()) {
        std::vector<std::size_t> order(lines.size());
        std::iota(order.begin(), order.end(), 0);
        std::shuffle(order.begin(), order.end(), rng);
        const std::size_t redraw = std::min(uniform_index(rng, 1, d_max), order.size());
        for (std::size_t i = 0; i < redraw; ++i) {
            const std::size_t line = order[i];
            // a gap wider than d_max cannot be bridged in one station; allow any
            // value that does not widen it
            const std::size_t reach = std::max(d_max, distance(fresh, nb.right));
            std::vector<ValueIndex> legal;
            Station probe = fresh;
            for (ValueIndex v : consistent_values(fresh, line, lines)) {
                if (v == fresh.entries[line].value) continue;
                probe.entries[line].value = v;
                if (distance(nb.left, probe) <= d_max && distance(probe, nb.right) <= reach) legal.push_back(v);
            }
            if (!legal.empty()) fresh.entries[line].value = pick(legal, rng);
        }
    }
    Genome out = g;
    out.stations.insert(out.stations.begin() + static_cast<std::ptrdiff_t>(at), std::move(fresh));
    return out;
}

Genome mutate_del(const Genome& g, Rng& rng) {
    if (g.empty()) return g;
    Genome out = g;
    out.stations.erase(out.stations.begin() + static_cast<std::ptrdiff_t>(uniform_index(rng, 0, g.size() - 1)));
    return out;
}

std::string dump(const Genome& g, const GoalLines& lines) {
    std::ostringstream out;
    for (std::size_t k = 0; k < g.size(); ++k) {
        out << "station " << k + 1 << "\n";
        const auto& st = g.stations[k];
        for (std::size_t i = 0; i < st.entries.size(); ++i) {
            out << "  " << i + 1 << ": " << lines[i].predicate << " " << lines[i].key << " -> ";
            if (st.entries[i].active)
                out << lines[i].domain.at(st.entries[i].value) << "\n";
            else
                out << "#masked\n";
        }
    }
    return out.str();
}

}  // namespace dae
