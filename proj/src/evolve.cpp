#include "dae/evolve.hpp"

#include <algorithm>
#include <limits>
#include <numeric>
#include <sstream>

#include "dae/errors.hpp"

namespace dae {

EvalResult decode(const Genome& g, const GroundTask& task, const GoalLines& lines, const SubSolver& solver,
                  const CostEvaluator* costs) {
    EvalResult r;
    WorldState current = task.init;
    const std::size_t n = g.size();
    std::vector<ActionId> all;
    for (std::size_t k = 0; k <= n; ++k) {
        const std::vector<AtomId> goal = k < n ? goal_atoms(g.stations[k], lines) : task.goal;
        PlanResult plan = solver(SubProblem{&task, current, goal});
        if (!plan.solved()) {
            r.fail_index = k;
            r.remaining_after_failure = n + 1 - k;
            r.sub_plans.push_back(std::move(plan));
            return r;
        }
        r.sub_makespans.push_back(plan.makespan);
        if (costs) r.sub_costs.push_back((*costs)(plan.schedule, current));
        all.insert(all.end(), plan.sequence.begin(), plan.sequence.end());
        current = apply_sequence(task, plan.sequence, std::move(current));
        r.sub_plans.push_back(std::move(plan));
    }
    r.feasible = true;
    r.global_schedule = compress(task, all, task.init);
    r.total_makespan = makespan(task, *r.global_schedule);
    if (costs) r.total_cost = (*costs)(*r.global_schedule, task.init);
    return r;
}

EvalResult decode(const Genome& g, const GroundTask& task, const GoalLines& lines, const SearchLimits& limits,
                  const CostEvaluator* costs) {
    return decode(g, task, lines, [&](const SubProblem& sub) { return solve(sub, limits); }, costs);
}

Penalty penalty_for(const GroundTask& task, const SearchLimits& limits, std::size_t n_max_hard,
                    const CostEvaluator* costs) {
    Ticks max_dur = 0;
    for (const auto& a : task.actions) max_dur = std::max(max_dur, a.dur);
    const auto len = static_cast<std::int64_t>(limits.max_sequence_length);
    const auto legs = static_cast<std::int64_t>(n_max_hard) + 1;
    Penalty p;
    p.makespan_unit = Rational(1 + legs * len * max_dur);
    p.cost_unit = Rational(1);
    if (costs) p.cost_unit += Rational((legs + 1) * len) * costs->max_event();
    return p;
}

Rational fitness_single(const EvalResult& e, const Penalty& penalty) {
    if (!e.feasible) return penalty.makespan_unit * Rational(1 + static_cast<std::int64_t>(e.remaining_after_failure));
    Ticks sum = 0;
    for (Ticks m : e.sub_makespans) sum += m;
    return Rational(e.total_makespan + sum, 2);
}

Objectives objectives_multi(const EvalResult& e, const Penalty& penalty) {
    if (!e.feasible) {
        const Rational scale(1 + static_cast<std::int64_t>(e.remaining_after_failure));
        return {penalty.makespan_unit * scale, penalty.cost_unit * scale};
    }
    Rational sum(0);
    std::int64_t counted = 0;
    for (std::size_t i = 0; i < e.sub_costs.size(); ++i) {
        if (e.sub_makespans[i] <= 0) continue;
        sum += e.sub_costs[i];
        ++counted;
    }
    const Rational mean = counted ? sum / Rational(counted) : Rational(0);
    return {fitness_single(e, penalty), e.total_cost + mean};
}

Rng stream_for(std::uint64_t seed, std::uint64_t generation, std::uint64_t index) {
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                      static_cast<std::uint32_t>(generation), static_cast<std::uint32_t>(index)};
    return Rng(seq);
}

std::pair<Genome, Genome> crossover_at(const Genome& a, const Genome& b, std::size_t u, std::size_t v,
                                       std::size_t n_max_hard) {
    auto splice = [&](const Genome& head, std::size_t cut_head, const Genome& tail, std::size_t cut_tail) {
        Genome child;
        child.stations.assign(head.stations.begin(), head.stations.begin() + static_cast<std::ptrdiff_t>(cut_head));
        child.stations.insert(child.stations.end(), tail.stations.begin() + static_cast<std::ptrdiff_t>(cut_tail),
                              tail.stations.end());
        if (child.stations.size() > n_max_hard) child.stations.resize(n_max_hard);
        return child;
    };
    return {splice(a, u, b, v), splice(b, v, a, u)};
}

std::pair<Genome, Genome> crossover_1pt(const Genome& a, const Genome& b, std::size_t n_max_hard, Rng& rng) {
    const std::size_t u = uniform_index(rng, 0, a.size());
    const std::size_t v = uniform_index(rng, 0, b.size());
    return crossover_at(a, b, u, v, n_max_hard);
}

PlanCache::PlanCache(const GroundTask& task, const SearchLimits& limits) : limits_(limits), context_(task) {}

const PlanResult& PlanCache::solve(const SubProblem& sub) {
    auto key = std::make_pair(sub.init, sub.goal);
    {
        std::lock_guard lock(mutex_);
        if (auto it = solved_.find(key); it != solved_.end()) return it->second;
    }
    PlanResult plan = dae::solve(sub, limits_, &context_);
    std::lock_guard lock(mutex_);
    // map nodes stay put, so the reference outlives the lock
    return solved_.emplace(std::move(key), std::move(plan)).first->second;
}

Evaluator::Evaluator(const GroundTask& task, const GoalLines& lines, const SearchLimits& limits,
                     std::optional<CostModel> cm, std::size_t n_max_hard)
    : Evaluator(task, lines, std::make_shared<PlanCache>(task, limits), std::move(cm), n_max_hard) {}

Evaluator::Evaluator(const GroundTask& task, const GoalLines& lines, std::shared_ptr<PlanCache> cache,
                     std::optional<CostModel> cm, std::size_t n_max_hard)
    : task_(task), lines_(lines), cache_(std::move(cache)) {
    if (cm) costs_.emplace(task, std::move(*cm));
    penalty_ = penalty_for(task, cache_->limits(), n_max_hard, costs());
}

namespace {

std::string genome_key(const Genome& g) {
    std::string key;
    for (const auto& st : g.stations) {
        for (const auto& e : st.entries) {
            key += std::to_string(e.value);
            key += e.active ? ',' : '~';
        }
        key += '|';
    }
    return key;
}

}  // namespace

std::shared_ptr<const EvalResult> Evaluator::evaluate(const Genome& g) {
    ++evaluations_;
    const std::string key = genome_key(g);
    if (auto it = decoded_.find(key); it != decoded_.end()) return it->second;
    auto solver = [&](const SubProblem& sub) {
        const PlanResult& plan = cache_->solve(sub);
        ++planner_calls_;
        backtracks_ += plan.backtracks;
        return plan;
    };
    auto result = std::make_shared<const EvalResult>(decode(g, task_, lines_, solver, costs()));
    decoded_.emplace(key, result);
    return result;
}

Genome mutate_stations(const Genome& g, const GoalLines& lines, const WorldState& init, std::size_t d_max, Rng& rng,
                       const StationRates& rates) {
    Genome out = g;
    if (g.empty()) return out;
    const double p = 1.0 / static_cast<double>(g.size());
    for (std::size_t k = 0; k < out.size(); ++k) {
        if (uniform_real(rng) >= p) continue;
        out.stations[k] = mutate_station(out.stations[k], lines, d_max, neighbors_of(out, k, lines, init), rng, rates);
    }
    return out;
}

Genome mutate(const Genome& g, const EvalResult* eval, const Evaluator& ev, const EngineParams& p, Rng& rng) {
    const auto& r = p.rates;
    const double u = uniform_real(rng) * (r.p_add + r.p_del + r.p_station);
    const WorldState& init = ev.task().init;
    if (u < r.p_add) {
        if (p.guided_add && eval && !eval->sub_plans.empty()) {
            // the failing leg, or else the leg that cost the planner most backtracks
            std::size_t hardest = eval->sub_plans.size() - 1;
            if (eval->feasible) {
                hardest = 0;
                for (std::size_t k = 1; k < eval->sub_plans.size(); ++k)
                    if (eval->sub_plans[k].backtracks > eval->sub_plans[hardest].backtracks) hardest = k;
            }
            return mutate_add_at(g, hardest, ev.lines(), init, p.init.d_max, p.n_max_hard, rng);
        }
        return mutate_add(g, ev.lines(), init, p.init.d_max, p.n_max_hard, rng);
    }
    if (u < r.p_add + r.p_del) return mutate_del(g, rng);
    return mutate_stations(g, ev.lines(), init, p.init.d_max, rng, r.station);
}

namespace {

Individual make_individual(Genome genome, Evaluator& ev, std::uint64_t id) {
    Individual ind;
    ind.eval = ev.evaluate(genome);
    ind.genome = std::move(genome);
    ind.fitness = fitness_single(*ind.eval, ev.penalty());
    ind.objectives = objectives_multi(*ind.eval, ev.penalty());
    ind.id = id;
    return ind;
}

template <typename Select>
Genome make_child(Select&& select, const EngineParams& p, const Evaluator& ev, Rng& rng) {
    const double total = p.rates.p_crossover + p.rates.p_mutation;
    if (uniform_real(rng) * total < p.rates.p_crossover) {
        const Individual& a = select(rng);
        const Individual& b = select(rng);
        auto [c1, c2] = crossover_1pt(a.genome, b.genome, p.n_max_hard, rng);
        return uniform_index(rng, 0, 1) == 0 ? std::move(c1) : std::move(c2);
    }
    const Individual& x = select(rng);
    return mutate(x.genome, x.eval.get(), ev, p, rng);
}

bool es_better(const Individual& a, const Individual& b) {
    if (a.fitness != b.fitness) return a.fitness < b.fitness;
    if (a.eval->total_makespan != b.eval->total_makespan) return a.eval->total_makespan < b.eval->total_makespan;
    return a.id < b.id;
}

bool multi_better(const Individual& a, const Individual& b) {
    if (a.objectives.f1 != b.objectives.f1) return a.objectives.f1 < b.objectives.f1;
    if (a.objectives.f2 != b.objectives.f2) return a.objectives.f2 < b.objectives.f2;
    return a.id < b.id;
}

bool dominates(const Objectives& a, const Objectives& b) {
    return a.f1 <= b.f1 && a.f2 <= b.f2 && (a.f1 < b.f1 || a.f2 < b.f2);
}

std::vector<Objectives> objectives_of(const std::vector<Individual>& pop) {
    std::vector<Objectives> out;
    out.reserve(pop.size());
    for (const auto& ind : pop) out.push_back(ind.objectives);
    return out;
}

}  // namespace

std::vector<Individual> es_step(const std::vector<Individual>& parents, const EngineParams& p, Evaluator& ev,
                                std::size_t generation, std::uint64_t& next_id) {
    if (parents.empty()) throw ConfigError("es_step needs at least one parent");
    auto select = [&](Rng& rng) -> const Individual& { return parents[uniform_index(rng, 0, parents.size() - 1)]; };
    std::vector<Individual> children;
    children.reserve(p.lambda);
    for (std::size_t i = 0; i < p.lambda; ++i) {
        Rng rng = stream_for(p.seed, generation, i);
        children.push_back(make_individual(make_child(select, p, ev, rng), ev, next_id++));
    }
    std::sort(children.begin(), children.end(), es_better);
    children.resize(std::min(p.mu, children.size()));
    return children;
}

std::vector<std::vector<std::size_t>> nondominated_sort(const std::vector<Objectives>& points) {
    const std::size_t n = points.size();
    std::vector<std::vector<std::size_t>> dominated(n);
    std::vector<std::size_t> counter(n, 0);
    std::vector<std::vector<std::size_t>> fronts;
    std::vector<std::size_t> current;
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < n; ++j) {
            if (i == j) continue;
            if (dominates(points[i], points[j]))
                dominated[i].push_back(j);
            else if (dominates(points[j], points[i]))
                ++counter[i];
        }
        if (counter[i] == 0) current.push_back(i);
    }
    while (!current.empty()) {
        std::vector<std::size_t> next;
        for (std::size_t i : current)
            for (std::size_t j : dominated[i])
                if (--counter[j] == 0) next.push_back(j);
        std::sort(next.begin(), next.end());
        fronts.push_back(std::move(current));
        current = std::move(next);
    }
    return fronts;
}

std::vector<double> crowding_distance(const std::vector<Objectives>& points, const std::vector<std::size_t>& front) {
    const std::size_t m = front.size();
    std::vector<double> dist(m, 0.0);
    if (m == 0) return dist;
    constexpr double inf = std::numeric_limits<double>::infinity();
    for (int objective = 0; objective < 2; ++objective) {
        auto value = [&](std::size_t k) {
            const Objectives& o = points[front[k]];
            return boost::rational_cast<double>(objective == 0 ? o.f1 : o.f2);
        };
        std::vector<std::size_t> order(m);
        std::iota(order.begin(), order.end(), 0);
        std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return value(a) < value(b); });
        dist[order.front()] = inf;
        dist[order.back()] = inf;
        const double span = value(order.back()) - value(order.front());
        if (span <= 0) continue;
        for (std::size_t k = 1; k + 1 < m; ++k)
            dist[order[k]] += (value(order[k + 1]) - value(order[k - 1])) / span;
    }
    return dist;
}

std::vector<Individual> nsga2_step(const std::vector<Individual>& pop, const EngineParams& p, Evaluator& ev,
                                   std::size_t generation, std::uint64_t& next_id) {
    if (pop.empty()) throw ConfigError("nsga2_step needs a non-empty population");
    const auto points = objectives_of(pop);
    std::vector<std::size_t> rank(pop.size());
    std::vector<double> crowd(pop.size());
    const auto fronts = nondominated_sort(points);
    for (std::size_t f = 0; f < fronts.size(); ++f) {
        const auto d = crowding_distance(points, fronts[f]);
        for (std::size_t k = 0; k < fronts[f].size(); ++k) {
            rank[fronts[f][k]] = f;
            crowd[fronts[f][k]] = d[k];
        }
    }
    auto select = [&](Rng& rng) -> const Individual& {
        const std::size_t i = uniform_index(rng, 0, pop.size() - 1);
        const std::size_t j = uniform_index(rng, 0, pop.size() - 1);
        if (rank[j] < rank[i] || (rank[j] == rank[i] && crowd[j] > crowd[i])) return pop[j];
        return pop[i];
    };

    std::vector<Individual> pool = pop;
    for (std::size_t i = 0; i < pop.size(); ++i) {
        Rng rng = stream_for(p.seed, generation, i);
        pool.push_back(make_individual(make_child(select, p, ev, rng), ev, next_id++));
    }

    const auto pool_points = objectives_of(pool);
    std::vector<Individual> next;
    next.reserve(pop.size());
    for (const auto& front : nondominated_sort(pool_points)) {
        if (next.size() + front.size() <= pop.size()) {
            for (std::size_t i : front) next.push_back(pool[i]);
            if (next.size() == pop.size()) break;
            continue;
        }
        const auto d = crowding_distance(pool_points, front);
        std::vector<std::size_t> order(front.size());
        std::iota(order.begin(), order.end(), 0);
        std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return d[a] > d[b]; });
        for (std::size_t k = 0; next.size() < pop.size(); ++k) next.push_back(pool[front[order[k]]]);
        break;
    }
    return next;
}

namespace {

GenerationStats stats_of(const std::vector<Individual>& pop, std::size_t generation, const Evaluator& ev,
                         bool multi) {
    GenerationStats s;
    s.generation = generation;
    s.best_fitness = pop.front().fitness;
    std::size_t total_length = 0;
    for (const auto& ind : pop) {
        s.best_fitness = std::min(s.best_fitness, multi ? ind.objectives.f1 : ind.fitness);
        total_length += ind.genome.size();
        if (!ind.eval->feasible) continue;
        ++s.feasible;
        s.front.offer({ind.eval->total_makespan, ind.eval->total_cost, "gen " + std::to_string(generation)});
    }
    s.mean_length = static_cast<double>(total_length) / static_cast<double>(pop.size());
    s.planner_calls = ev.planner_calls();
    s.backtracks = ev.backtracks();
    return s;
}

}  // namespace

RunResult run_engine(const EngineParams& p, Evaluator& ev) {
    const bool multi = p.engine == EngineKind::nsga2;
    const std::size_t size = multi ? p.pop : p.mu;
    if (size == 0) throw ConfigError("population size must be positive");
    if (!multi && p.lambda < p.mu) throw ConfigError("comma selection needs lambda >= mu");
    if (p.init.n_max > p.n_max_hard) throw ConfigError("initial size range exceeds the genome length cap");

    RunResult run;
    std::uint64_t next_id = 0;
    std::vector<Individual> pop;
    for (std::size_t i = 0; i < size; ++i) {
        Rng rng = stream_for(p.seed, 0, i);
        pop.push_back(make_individual(random_init(ev.lines(), ev.task().init, p.init, rng), ev, next_id++));
    }
    auto better = multi ? multi_better : es_better;
    auto track = [&](const std::vector<Individual>& members, std::size_t generation) {
        for (const auto& ind : members)
            if (!run.best.eval || better(ind, run.best)) run.best = ind;
        run.generations.push_back(stats_of(members, generation, ev, multi));
    };
    track(pop, 0);
    for (std::size_t g = 1; g <= p.gens; ++g) {
        pop = multi ? nsga2_step(pop, p, ev, g, next_id) : es_step(pop, p, ev, g, next_id);
        track(pop, g);
    }
    run.front = run.generations.back().front;
    run.population = std::move(pop);
    return run;
}

std::string gen_stats_csv(const std::vector<GenerationStats>& stats) {
    std::ostringstream out;
    out << "generation,best_fitness,feasible,mean_length,planner_calls,backtracks\n";
    for (const auto& s : stats) {
        out << s.generation << "," << to_decimal(s.best_fitness, 3) << "," << s.feasible << ",";
        out.setf(std::ios::fixed);
        out.precision(3);
        out << s.mean_length << "," << s.planner_calls << "," << s.backtracks << "\n";
    }
    return out.str();
}

}  // namespace dae
