#include <doctest.h>

#include <random>

#include "dae/errors.hpp"
#include "dae/oracle.hpp"
#include "dae/planner.hpp"
#include "support.hpp"

using namespace dae;
using testing::zeno;

namespace {

WorldState random_state(const GroundTask& task, std::size_t steps, std::mt19937_64& rng) {
    WorldState s = task.init;
    for (std::size_t i = 0; i < steps; ++i) {
        std::vector<ActionId> options;
        for (const auto& a : task.actions)
            if (applicable(s, a)) options.push_back(a.id);
        s = apply(s, task.actions[options[std::uniform_int_distribution<std::size_t>(0, options.size() - 1)(rng)]]);
    }
    return s;
}

/// Minimum makespan by exhaustive enumeration: the oracle with every city worth 0
/// reports a single point whose makespan is the optimum.
std::optional<Ticks> enumerated_optimum(const GroundTask& task, const WorldState& init, const std::vector<AtomId>& goal,
                                        std::size_t length) {
    GroundTask sub = task;
    sub.init = init;
    sub.goal = goal;
    OracleBounds bounds;
    bounds.max_sequence_length = length;
    const auto front = brute_force_pareto(sub, CostModel{}, bounds);
    if (front.empty()) return std::nullopt;
    return front.points().front().makespan;
}

}  // namespace

TEST_CASE("applicable and apply") {
    const auto& z = zeno();
    const auto& task = z.task;
    const auto& fly = task.actions[z.action("fly-short", {"plane1", "City0", "City1"})];
    CHECK(applicable(task.init, fly));
    const auto after = apply(task.init, fly);
    CHECK_FALSE(after.contains(z.atom("at", {"plane1", "City0"})));
    CHECK(after.contains(z.atom("at", {"plane1", "City1"})));
    CHECK_THROWS_AS(apply(after, fly), NotApplicable);

    GroundAction noop;
    CHECK(applicable(after, noop));
    CHECK(apply(after, noop) == after);

    const auto& board = task.actions[z.action("board", {"person1", "plane1", "City0"})];
    const auto& debark = task.actions[z.action("debark", {"person1", "plane1", "City0"})];
    CHECK(apply(apply(task.init, board), debark) == task.init);
}

TEST_CASE("heuristic") {
    const auto& z = zeno();
    const auto& task = z.task;
    CHECK(heuristic(task.init, std::vector<AtomId>{z.atom("at", {"plane1", "City0"})}, task) == 0);
    // adders of (at plane1 City1) are short flights from City0 and City4
    CHECK(heuristic(task.init, std::vector<AtomId>{z.atom("at", {"plane1", "City1"})}, task) == 4);
    CHECK(heuristic(task.init, std::vector<AtomId>{z.atom("at", {"plane1", "City3"})}, task) == 12);

    const auto d = parse_domain(R"(
(define (domain g) (:requirements :typing) (:types t) (:predicates (p ?x - t) (q ?x - t))
  (:action a :parameters (?x - t) :precondition (p ?x) :effect (p ?x)))
)");
    const auto task2 = ground(d, parse_problem("(define (problem g) (:domain g) (:objects o - t) (:init (p o) (q o)) "
                                               "(:goal (q o)))",
                                               d));
    WorldState bare(task2.atom_count());
    CHECK_THROWS_AS(heuristic(bare, task2.goal, task2), GoalUnsupportable);
}

TEST_CASE("solve mini-Zeno directly") {
    const auto& task = zeno().task;
    const auto r = solve({&task, task.init, task.goal}, SearchLimits{});
    REQUIRE(r.solved());
    CHECK(r.proven_optimal);
    CHECK(r.makespan == 8);
    CHECK(validate(task, r.schedule, task.init).empty());
    CHECK(apply_sequence(task, r.sequence, task.init).contains_all(task.goal));
    CHECK(evaluate_cost(task, r.schedule, task.init, zeno().model.additive) == Rational(800));

    // determinism, with and without shared tables
    const PlannerContext ctx(task);
    const auto again = solve({&task, task.init, task.goal}, SearchLimits{}, &ctx);
    CHECK(again.sequence == r.sequence);
    CHECK(again.backtracks == r.backtracks);
    CHECK(again.nodes == r.nodes);
}

TEST_CASE("trivial and unreachable goals") {
    const auto& z = zeno();
    const auto& task = z.task;
    const auto r = solve({&task, task.init, {z.atom("at", {"plane1", "City0"})}}, SearchLimits{});
    REQUIRE(r.solved());
    CHECK(r.sequence.empty());
    CHECK(r.makespan == 0);

    // City9 exists but no link touches it, so grounding prunes its atoms
    const auto& d = z.model.domain;
    auto text = mini_zeno_problem_text();
    text.replace(text.find("City4 - city"), 12, "City4 City9 - city");
    const auto task9 = ground(d, parse_problem(text, d));
    const AtomId far = task9.find_atom({"at", {"person1", "City9"}});
    REQUIRE(far == task9.atom_count());
    const auto u = solve({&task9, task9.init, {far}}, SearchLimits{});
    CHECK(u.outcome == PlanOutcome::unsolvable);

    // a person who is nowhere cannot be moved anywhere
    WorldState lost = task.init;
    lost.erase(z.atom("at", {"person1", "City0"}));
    const auto v = solve({&task, lost, {z.atom("at", {"person1", "City4"})}}, SearchLimits{});
    CHECK(v.outcome == PlanOutcome::unsolvable);
    CHECK(v.backtracks == 0);
}

TEST_CASE("backtrack limit and makespan bound") {
    const auto& task = zeno().task;
    SearchLimits tight;
    tight.max_backtracks = 0;
    const auto r = solve({&task, task.init, task.goal}, tight);
    CHECK(r.backtracks <= 1);
    if (r.solved()) CHECK_FALSE(r.proven_optimal);

    SearchLimits bounded;
    bounded.max_makespan_bound = 7;
    CHECK_FALSE(solve({&task, task.init, task.goal}, bounded).solved());
}

TEST_CASE("monotone in the backtrack limit") {
    const auto& z = zeno();
    const auto& task = z.task;
    const std::vector<AtomId> goal{z.atom("at", {"person1", "City3"}), z.atom("at", {"person2", "City2"}),
                                   z.atom("at", {"plane1", "City1"})};
    Ticks previous = std::numeric_limits<Ticks>::max();
    for (std::uint64_t limit : {10, 100, 1000, 10000, 100000}) {
        SearchLimits l;
        l.max_backtracks = limit;
        const auto r = solve({&task, task.init, goal}, l);
        const Ticks ms = r.solved() ? r.makespan : std::numeric_limits<Ticks>::max();
        CHECK(ms <= previous);
        previous = ms;
    }
    CHECK(previous == 20);
}

TEST_CASE("optimal on random sub-problems, against enumeration") {
    const auto& z = zeno();
    const auto& task = z.task;
    std::mt19937_64 rng(2024);
    const PlannerContext ctx(task);
    const std::size_t length = 6;
    int solved = 0;
    for (int trial = 0; trial < 40; ++trial) {
        const WorldState from = random_state(task, trial % 7, rng);
        const WorldState to = random_state(task, 1 + trial % 5, rng);
        // a goal of one or two `at` atoms of the target state
        std::vector<AtomId> goal;
        for (AtomId p : to.atoms())
            if (task.atoms[p].predicate == "at" && !from.contains(p)) goal.push_back(p);
        if (goal.empty()) continue;
        std::shuffle(goal.begin(), goal.end(), rng);
        goal.resize(std::min<std::size_t>(goal.size(), 1 + trial % 2));
        std::sort(goal.begin(), goal.end());

        SearchLimits limits;
        limits.max_sequence_length = length;
        limits.max_backtracks = 1'000'000;
        const auto r = solve({&task, from, goal}, limits, &ctx);
        const auto best = enumerated_optimum(task, from, goal, length);
        CHECK(r.solved() == best.has_value());
        if (!r.solved()) continue;
        ++solved;
        CHECK(r.proven_optimal);
        CHECK(r.makespan == *best);
        CHECK(validate(task, r.schedule, from).empty());
        CHECK(apply_sequence(task, r.sequence, from).contains_all(goal));
        CHECK(r.sequence.size() <= length);
    }
    CHECK(solved >= 20);
}
