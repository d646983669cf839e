#include <doctest.h>

#include <random>
#include <set>

#include "dae/errors.hpp"
#include "dae/evolve.hpp"
#include "support.hpp"

using namespace dae;
using testing::zeno;

namespace {

const GoalLines& zeno_lines() {
    static const GoalLines lines(zeno().task, zeno().model.invariants);
    return lines;
}

Genome labelled(std::initializer_list<ValueIndex> tags) {
    Genome g;
    for (ValueIndex t : tags) g.stations.push_back(Station{{StationEntry{t, true}}});
    return g;
}

std::vector<ValueIndex> tags(const Genome& g) {
    std::vector<ValueIndex> out;
    for (const auto& s : g.stations) out.push_back(s.entries[0].value);
    return out;
}

Station at_values(std::initializer_list<ValueIndex> values) {
    Station st;
    for (ValueIndex v : values) st.entries.push_back({v, true});
    return st;
}

/// Fronts by repeatedly peeling the points no remaining point dominates.
std::vector<std::set<std::size_t>> peel(const std::vector<Objectives>& pts) {
    auto dom = [](const Objectives& a, const Objectives& b) {
        return a.f1 <= b.f1 && a.f2 <= b.f2 && (a.f1 < b.f1 || a.f2 < b.f2);
    };
    std::set<std::size_t> left;
    for (std::size_t i = 0; i < pts.size(); ++i) left.insert(i);
    std::vector<std::set<std::size_t>> fronts;
    while (!left.empty()) {
        std::set<std::size_t> front;
        for (std::size_t i : left) {
            bool beaten = false;
            for (std::size_t j : left) beaten = beaten || dom(pts[j], pts[i]);
            if (!beaten) front.insert(i);
        }
        for (std::size_t i : front) left.erase(i);
        fronts.push_back(front);
    }
    return fronts;
}

}  // namespace

TEST_CASE("one-point crossover") {
    const Genome a = labelled({1, 2, 3});
    const Genome b = labelled({11, 12, 13, 14});
    auto [c1, c2] = crossover_at(a, b, 1, 2, 20);
    CHECK(tags(c1) == std::vector<ValueIndex>{1, 13, 14});
    CHECK(tags(c2) == std::vector<ValueIndex>{11, 12, 2, 3});

    auto [same_a, same_b] = crossover_at(a, b, 3, 4, 20);
    CHECK(same_a == a);
    CHECK(same_b == b);

    auto [e1, e2] = crossover_at(Genome{}, Genome{}, 0, 0, 20);
    CHECK(e1.empty());
    CHECK(e2.empty());

    auto [t1, t2] = crossover_at(a, b, 3, 0, 5);
    CHECK(tags(t1) == std::vector<ValueIndex>{1, 2, 3, 11, 12});
    CHECK(t2.empty());

    Rng rng = stream_for(1, 0, 0);
    for (int i = 0; i < 500; ++i) {
        auto [x, y] = crossover_1pt(a, b, 20, rng);
        CHECK(x.size() + y.size() == a.size() + b.size());
    }
}

TEST_CASE("per-individual streams") {
    Rng a = stream_for(7, 3, 5), b = stream_for(7, 3, 5), c = stream_for(7, 3, 6), d = stream_for(8, 3, 5);
    const auto x = a();
    CHECK(x == b());
    CHECK(x != c());
    CHECK(x != d());
}

TEST_CASE("single-objective fitness") {
    const Penalty pen{Rational(1000), Rational(5000)};
    EvalResult one;
    one.feasible = true;
    one.total_makespan = 8;
    one.sub_makespans = {8};
    CHECK(fitness_single(one, pen) == Rational(8));

    EvalResult two;
    two.feasible = true;
    two.total_makespan = 16;
    two.sub_makespans = {8, 12};
    CHECK(fitness_single(two, pen) == Rational(18));

    EvalResult bad;
    bad.fail_index = 1;
    bad.remaining_after_failure = 4;
    CHECK(fitness_single(bad, pen) == Rational(5000));
    CHECK(objectives_multi(bad, pen) == Objectives{Rational(5000), Rational(25000)});
}

TEST_CASE("penalty units exceed any feasible value") {
    const auto& task = zeno().task;
    const SearchLimits limits;
    const CostEvaluator costs(task, zeno().model.additive);
    const Penalty pen = penalty_for(task, limits, 20, &costs);
    Ticks max_dur = 0;
    for (const auto& a : task.actions) max_dur = std::max(max_dur, a.dur);
    // 21 legs of at most 12 actions each, every action no longer than max_dur
    CHECK(pen.makespan_unit > Rational(21 * 12 * max_dur));
    // the dearest flight touches City1 (100) with all three persons aboard
    CHECK(costs.max_event() == Rational(400));
    CHECK(pen.cost_unit > Rational(22 * 12 * 400));
}

TEST_CASE("dual objectives") {
    const Penalty pen{Rational(1000), Rational(5000)};
    EvalResult one;
    one.feasible = true;
    one.total_makespan = 8;
    one.sub_makespans = {8};
    one.sub_costs = {Rational(800)};
    one.total_cost = Rational(800);
    CHECK(objectives_multi(one, pen) == Objectives{Rational(8), Rational(1600)});

    EvalResult two;
    two.feasible = true;
    two.total_makespan = 16;
    two.sub_makespans = {16, 0};
    two.sub_costs = {Rational(80), Rational(0)};
    two.total_cost = Rational(80);
    CHECK(objectives_multi(two, pen).f2 == Rational(160));

    EvalResult none;
    none.feasible = true;
    none.sub_makespans = {0};
    none.sub_costs = {Rational(0)};
    CHECK(objectives_multi(none, pen).f2 == Rational(0));
}

TEST_CASE("decode") {
    const auto& z = zeno();
    const auto& task = z.task;
    const auto& lines = zeno_lines();
    const CostEvaluator costs(task, z.model.additive);
    const SearchLimits limits;

    const auto direct = decode(Genome{}, task, lines, limits, &costs);
    REQUIRE(direct.feasible);
    const auto planned = solve({&task, task.init, task.goal}, limits);
    CHECK(direct.total_makespan == planned.makespan);
    CHECK(direct.total_makespan == 8);
    CHECK(direct.sub_makespans == std::vector<Ticks>{8});
    CHECK(direct.total_cost == Rational(800));

    // person1 to City3 first, then the goal
    Genome g;
    g.stations.push_back(at_values({3, 0, 0, 0, 0}));
    for (std::size_t i = 1; i < 5; ++i) g.stations[0].entries[i].active = false;
    const auto two = decode(g, task, lines, limits, &costs);
    REQUIRE(two.feasible);
    CHECK(two.sub_plans.size() == 2);
    CHECK(two.sub_costs.size() == 2);
    Ticks sum = 0;
    for (Ticks m : two.sub_makespans) sum += m;
    CHECK(two.total_makespan <= sum);
    CHECK(two.total_makespan == makespan(task, *two.global_schedule));
    CHECK(validate(task, *two.global_schedule, task.init).empty());

    // a station already reached costs an empty leg
    Genome stay;
    stay.stations.push_back(at_values({0, 0, 0, 0, 0}));
    const auto s = decode(stay, task, lines, limits, &costs);
    REQUIRE(s.feasible);
    CHECK(s.sub_makespans.front() == 0);
    CHECK(s.sub_plans.front().sequence.empty());
}

TEST_CASE("decode stops at an unreachable station") {
    const auto& z = zeno();
    const auto& d = z.model.domain;
    auto text = mini_zeno_problem_text();
    text.replace(text.find("City4 - city"), 12, "City4 City9 - city");
    const auto task = ground(d, parse_problem(text, d));
    const GoalLines lines(task, z.model.invariants);
    const auto nine = static_cast<ValueIndex>(5);
    REQUIRE(lines[0].domain[nine] == "City9");

    Genome g;
    g.stations.push_back(at_values({1, 0, 0, 0, 0}));
    g.stations.push_back(at_values({nine, 0, 0, 0, 0}));
    g.stations.push_back(at_values({4, 4, 4, 4, 4}));
    for (int k : {0, 1})
        for (std::size_t i = 1; i < 5; ++i) g.stations[k].entries[i].active = false;
    const auto r = decode(g, task, lines, SearchLimits{});
    CHECK_FALSE(r.feasible);
    CHECK(r.fail_index == std::optional<std::size_t>{1});
    CHECK(r.remaining_after_failure == 3);
    CHECK_FALSE(r.global_schedule.has_value());
}

TEST_CASE("non-dominated sort and crowding") {
    std::mt19937_64 rng(99);
    for (int trial = 0; trial < 200; ++trial) {
        const std::size_t n = 1 + rng() % 64;
        std::vector<Objectives> pts;
        for (std::size_t i = 0; i < n; ++i)
            pts.push_back({Rational(static_cast<std::int64_t>(rng() % 10)), Rational(static_cast<std::int64_t>(rng() % 10))});
        const auto fronts = nondominated_sort(pts);
        const auto expected = peel(pts);
        REQUIRE(fronts.size() == expected.size());
        for (std::size_t f = 0; f < fronts.size(); ++f)
            CHECK(std::set<std::size_t>(fronts[f].begin(), fronts[f].end()) == expected[f]);
    }

    const std::vector<Objectives> pts{{Rational(8), Rational(800)}, {Rational(16), Rational(80)},
                                      {Rational(24), Rational(8)}, {Rational(12), Rational(300)}};
    const std::vector<std::size_t> front{0, 1, 2, 3};
    const auto d = crowding_distance(pts, front);
    CHECK(std::isinf(d[0]));
    CHECK(std::isinf(d[2]));
    // (16 - 8) / 16 + (800 - 80) / 792
    CHECK(d[3] == doctest::Approx(0.5 + 720.0 / 792.0));

    const std::vector<Objectives> same(5, Objectives{Rational(3), Rational(3)});
    const auto one = nondominated_sort(same);
    REQUIRE(one.size() == 1);
    CHECK(one[0].size() == 5);
    const auto cd = crowding_distance(same, one[0]);
    CHECK(std::isinf(cd.front()));
}

TEST_CASE("evaluation cache") {
    const auto& z = zeno();
    Evaluator ev(z.task, zeno_lines(), SearchLimits{}, z.model.additive, 20);
    Rng rng = stream_for(3, 0, 0);
    const Genome g = random_init(zeno_lines(), z.task.init, InitParams{}, rng);
    const auto first = ev.evaluate(g);
    const auto calls = ev.planner_calls();
    const auto second = ev.evaluate(g);
    CHECK(first == second);
    CHECK(ev.planner_calls() == calls);

    // counters do not depend on whether another evaluator already filled the plan cache
    auto cache = std::make_shared<PlanCache>(z.task, SearchLimits{});
    Evaluator warm(z.task, zeno_lines(), cache, z.model.additive, 20);
    warm.evaluate(g);
    Evaluator shared(z.task, zeno_lines(), cache, z.model.additive, 20);
    shared.evaluate(g);
    CHECK(shared.planner_calls() == calls);
    CHECK(shared.backtracks() == ev.backtracks());
}

TEST_CASE("comma selection never keeps a parent") {
    const auto& z = zeno();
    EngineParams p;
    p.gens = 3;
    p.lambda = 30;
    Evaluator ev(z.task, zeno_lines(), p.limits, std::nullopt, p.n_max_hard);
    const RunResult r = run_engine(p, ev);
    REQUIRE(r.generations.size() == 4);
    for (const auto& s : r.generations) CHECK(s.best_fitness >= Rational(8));
    CHECK(r.population.size() == p.mu);

    std::uint64_t next_id = 1000;
    const auto children = es_step(r.population, p, ev, 4, next_id);
    std::set<std::uint64_t> parents;
    for (const auto& ind : r.population) parents.insert(ind.id);
    for (const auto& c : children) CHECK_FALSE(parents.count(c.id));
    CHECK(children.size() == p.mu);
    for (std::size_t i = 1; i < children.size(); ++i) CHECK(children[i - 1].fitness <= children[i].fitness);
}

TEST_CASE("engine configuration errors") {
    const auto& z = zeno();
    Evaluator ev(z.task, zeno_lines(), SearchLimits{}, std::nullopt, 20);
    EngineParams p;
    p.lambda = 5;
    CHECK_THROWS_AS(run_engine(p, ev), ConfigError);
    p = EngineParams{};
    p.mu = 0;
    CHECK_THROWS_AS(run_engine(p, ev), ConfigError);
}

TEST_CASE("fixed seeds give identical runs") {
    const auto& z = zeno();
    for (EngineKind kind : {EngineKind::es, EngineKind::nsga2}) {
        EngineParams p;
        p.engine = kind;
        p.gens = 2;
        p.pop = 20;
        p.lambda = 20;
        p.seed = 42;
        auto run = [&] {
            Evaluator ev(z.task, zeno_lines(), p.limits, z.model.additive, p.n_max_hard);
            return gen_stats_csv(run_engine(p, ev).generations);
        };
        CHECK(run() == run());
    }
}
