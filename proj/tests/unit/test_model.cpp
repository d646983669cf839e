#include <doctest.h>

#include <algorithm>
#include <fstream>
#include <set>
#include <sstream>

#include "dae/errors.hpp"
#include "dae/model.hpp"
#include "dae/task.hpp"
#include "support.hpp"

using namespace dae;

namespace {

std::string slurp(const std::string& path) {
    std::ifstream in(path);
    REQUIRE(in);
    std::ostringstream s;
    s << in.rdbuf();
    return s.str();
}

const char* kTiny = R"(
(define (domain tiny)
  (:requirements :typing :durative-actions)
  (:types plane city)
  (:predicates (at ?x - plane ?c - city))
  (:durative-action fly
    :parameters (?p - plane ?a ?b - city)
    :duration (= ?duration 5/2)
    :condition (at start (at ?p ?a))
    :effect (and (at start (not (at ?p ?a))) (at end (at ?p ?b)))))
)";

}  // namespace

TEST_CASE("minimal domain parses to one predicate and one operator") {
    const auto d = parse_domain(kTiny);
    CHECK(d.name == "tiny");
    CHECK(d.predicates.size() == 1);
    REQUIRE(d.operators.size() == 1);
    CHECK(d.operators[0].duration == Rational(5, 2));
    CHECK(d.operators[0].pre.size() == 1);
    CHECK(d.operators[0].del.size() == 1);
    CHECK(d.operators[0].add.size() == 1);
}

TEST_CASE("unsupported constructs are named") {
    const std::string cond = R"(
(define (domain c) (:requirements :typing)
  (:types t) (:predicates (p ?x - t) (q ?x - t))
  (:action a :parameters (?x - t) :precondition (p ?x)
    :effect (when (p ?x) (q ?x)))))";
    CHECK_THROWS_AS(parse_domain(cond), UnsupportedFeature);
    try {
        parse_domain(cond);
    } catch (const UnsupportedFeature& e) {
        CHECK(e.construct().find("conditional") != std::string::npos);
    }
    CHECK_THROWS_AS(parse_domain("(define (domain x) (:requirements :typing) (:functions (f)))"), UnsupportedFeature);
    CHECK_THROWS_AS(parse_domain("(define (domain x) (:predicates (p ?x)))"), UnsupportedFeature);
}

TEST_CASE("malformed input is a syntax error with a position") {
    CHECK_THROWS_AS(parse_domain("(define (domain x)"), SyntaxError);
    CHECK_THROWS_AS(parse_domain("(domain x)"), SyntaxError);
}

TEST_CASE("zeno-travel domain file") {
    const auto d = parse_domain(slurp(DAE_DATA_DIR "/zeno/domain.pddl"));
    std::set<std::string> preds, types;
    for (const auto& p : d.predicates) preds.insert(p.name);
    for (const auto& t : d.types) types.insert(t.name);
    CHECK(preds == std::set<std::string>{"at", "in", "fuel-level", "next"});
    CHECK(types == std::set<std::string>{"aircraft", "person", "city", "flevel"});
    CHECK(d.operators.size() == 5);
    CHECK(parse_domain(to_pddl(d)) == d);

    const auto p = parse_problem(slurp(DAE_DATA_DIR "/zeno/problem.pddl"), d);
    CHECK(parse_problem(to_pddl(p), d) == p);
    const auto task = ground(d, p);
    CHECK(task.actions.size() > 0);
}

TEST_CASE("mini-Zeno problem") {
    const auto& z = testing::zeno();
    CHECK(z.model.problem.objects.size() == 10);
    CHECK(z.model.problem.goal.size() == 5);
    CHECK(parse_domain(to_pddl(z.model.domain)) == z.model.domain);
    CHECK(parse_problem(to_pddl(z.model.problem), z.model.domain) == z.model.problem);
}

TEST_CASE("bundled texts match the data directory") {
    CHECK(mini_zeno_domain_text() == slurp(DAE_DATA_DIR "/mini-zeno/domain.pddl"));
    CHECK(mini_zeno_problem_text() == slurp(DAE_DATA_DIR "/mini-zeno/problem.pddl"));
    CHECK(mini_zeno_invariants_text() == slurp(DAE_DATA_DIR "/mini-zeno/invariants.txt"));
    CHECK(mini_zeno_cost_text(CostMode::additive) == slurp(DAE_DATA_DIR "/mini-zeno/cost-additive.txt"));
    CHECK(mini_zeno_cost_text(CostMode::max) == slurp(DAE_DATA_DIR "/mini-zeno/cost-max.txt"));
}

TEST_CASE("problem edge cases") {
    const auto d = parse_domain(kTiny);
    const auto empty = parse_problem("(define (problem e) (:domain tiny) (:objects p - plane c - city) "
                                     "(:init (at p c)) (:goal (and)))",
                                     d);
    CHECK(empty.goal.empty());
    CHECK_THROWS_AS(parse_problem("(define (problem e) (:domain tiny) (:objects p - plane c - city) "
                                  "(:init (at p c)) (:goal (at p nowhere)))",
                                  d),
                    UnknownSymbol);
}

TEST_CASE("invariants file") {
    const auto& d = testing::zeno().model.domain;
    const auto inv = parse_invariants("station-predicate at\nexclusive at 1\n", d);
    CHECK(inv.station_predicates == std::vector<std::string>{"at"});
    CHECK(inv.exclusivity == std::map<std::string, std::size_t>{{"at", 1}});
    CHECK_THROWS_AS(parse_invariants("# nothing\n", d), MissingStationPredicates);
    CHECK_THROWS_AS(parse_invariants("station-predicate at\nexclusive at 3\n", d), SyntaxError);
    CHECK_THROWS_AS(parse_invariants("station-predicate nope\n", d), UnknownSymbol);
}

TEST_CASE("cost file") {
    const auto cm = parse_cost("mode max\nvalue City1 100\nvalue City2 2.5\n");
    CHECK(cm.mode == CostMode::max);
    CHECK(cm.value_of("City1") == Rational(100));
    CHECK(cm.value_of("City2") == Rational(5, 2));
    CHECK(cm.value_of("City0") == Rational(0));
}

TEST_CASE("mini-Zeno grounding counts") {
    // board and debark: 3 persons x 2 planes x 5 cities; fly: 2 planes x 12 directed links
    const auto& task = testing::zeno().task;
    std::size_t board = 0, debark = 0, fly = 0;
    for (const auto& a : task.actions) {
        if (a.name == "board") ++board;
        if (a.name == "debark") ++debark;
        if (a.name.rfind("fly", 0) == 0) ++fly;
    }
    CHECK(board == 30);
    CHECK(debark == 30);
    CHECK(fly == 24);
    CHECK(task.actions.size() == 84);
    CHECK(task.time_scale == 1);

    // lexicographic action order, atoms inside the universe
    for (std::size_t i = 1; i < task.actions.size(); ++i) {
        const auto& a = task.actions[i - 1];
        const auto& b = task.actions[i];
        CHECK(std::tie(a.name, a.args) < std::tie(b.name, b.args));
    }
    for (const auto& a : task.actions)
        for (const auto* set : {&a.pre, &a.add, &a.del})
            for (AtomId p : *set) CHECK(p < task.atom_count());
}

TEST_CASE("grounding drops actions unreachable under the delete relaxation") {
    const auto d = parse_domain(kTiny);
    const auto p = parse_problem("(define (problem q) (:domain tiny) (:objects p1 - plane a b c - city) "
                                 "(:init (at p1 a)) (:goal (at p1 b)))",
                                 d);
    const auto task = ground(d, p);
    // the plane starts at a and any city can be reached from anywhere, so all 9 remain
    CHECK(task.actions.size() == 9);
    CHECK(task.time_scale == 2);
    for (const auto& a : task.actions) CHECK(a.dur == 5);

    const auto none = parse_problem("(define (problem q) (:domain tiny) (:objects a b - city) (:init) (:goal (and)))", d);
    CHECK(ground(d, none).actions.empty());
}

TEST_CASE("grounding prunes flights out of a city no plane can reach") {
    const auto d = parse_domain(R"(
(define (domain links) (:requirements :typing)
  (:types plane city)
  (:predicates (at ?p - plane ?c - city) (link ?a ?b - city))
  (:action fly :parameters (?p - plane ?a ?b - city)
    :precondition (and (at ?p ?a) (link ?a ?b))
    :effect (and (not (at ?p ?a)) (at ?p ?b))))
)");
    const auto p = parse_problem("(define (problem q) (:domain links) (:objects p1 - plane a b x y - city) "
                                 "(:init (at p1 a) (link a b) (link b a) (link x y)) (:goal (at p1 b)))",
                                 d);
    const auto task = ground(d, p);
    // fixpoint by hand: at(p1,a) -> at(p1,b); link x y is static but at(p1,x) is never reached
    std::set<std::string> labels;
    for (const auto& a : task.actions) labels.insert(a.label());
    CHECK(labels == std::set<std::string>{"(fly p1 a b)", "(fly p1 b a)"});
}

TEST_CASE("grounding is deterministic") {
    const auto& z = testing::zeno();
    const auto again = ground(z.model.domain, z.model.problem);
    REQUIRE(again.actions.size() == z.task.actions.size());
    for (std::size_t i = 0; i < again.actions.size(); ++i) CHECK(again.actions[i].label() == z.task.actions[i].label());
}
