#include <doctest.h>

#include <random>

#include "dae/errors.hpp"
#include "dae/stations.hpp"
#include "support.hpp"

using namespace dae;
using testing::zeno;

namespace {

const GoalLines& zeno_lines() {
    static const GoalLines lines(zeno().task, zeno().model.invariants);
    return lines;
}

Station full(std::initializer_list<ValueIndex> values) {
    Station st;
    for (ValueIndex v : values) st.entries.push_back({v, true});
    return st;
}

Station random_station(const GoalLines& lines, std::mt19937_64& rng, double p_active = 0.8) {
    Station st;
    for (const auto& line : lines.lines())
        st.entries.push_back({static_cast<ValueIndex>(uniform_index(rng, 0, line.domain.size() - 1)),
                              uniform_real(rng) < p_active});
    return st;
}

bool within(const Station& st, const Neighbors& nb, std::size_t d_max) {
    return distance(nb.left, st) <= d_max && distance(st, nb.right) <= d_max;
}

}  // namespace

TEST_CASE("mini-Zeno goal lines") {
    const auto& lines = zeno_lines();
    REQUIRE(lines.size() == 5);
    for (const auto& line : lines.lines()) {
        CHECK(line.predicate == "at");
        CHECK(line.key_position == 0);
        CHECK(line.domain == std::vector<std::string>{"City0", "City1", "City2", "City3", "City4"});
        CHECK(line.domain[line.goal_value] == "City4");
    }
    const auto start = project(zeno().task.init, lines);
    for (const auto& v : start) CHECK(v == ValueIndex{0});
    CHECK(goal_atoms(goal_station(lines), lines) == zeno().task.goal);
}

TEST_CASE("distance") {
    // a station-vs-station analogue of a long table: two of fifteen keys change
    Station init, next;
    for (int i = 0; i < 15; ++i) {
        init.entries.push_back({static_cast<ValueIndex>(i % 4), true});
        next.entries.push_back({static_cast<ValueIndex>(i % 4), true});
    }
    next.entries[0].value = 9;
    next.entries[11].value = 9;
    CHECK(distance(init, next) == 2);
    CHECK(distance(init, init) == 0);

    // masked targets do not count, missing sources do
    Station masked = next;
    masked.entries[0].active = false;
    CHECK(distance(init, masked) == 1);
    Assignment partial = values_of(init);
    partial[3].reset();
    CHECK(distance(partial, init) == 1);

    const auto& lines = zeno_lines();
    CHECK(distance(zeno().task.init, goal_station(lines), lines) == 5);
    CHECK(distance(zeno().task.init, full({0, 0, 0, 0, 0}), lines) == 0);
}

TEST_CASE("triangle inequality on fully active stations") {
    const auto& lines = zeno_lines();
    std::mt19937_64 rng(3);
    for (int i = 0; i < 20000; ++i) {
        const auto a = random_station(lines, rng, 1.0);
        const auto b = random_station(lines, rng, 1.0);
        const auto c = random_station(lines, rng, 1.0);
        CHECK(distance(a, c) <= distance(a, b) + distance(b, c));
    }
}

TEST_CASE("consistency") {
    const auto& lines = zeno_lines();
    CHECK(is_consistent(full({0, 1, 2, 3, 4}), lines));
    CHECK_FALSE(is_consistent(full({0, 1, 2, 3}), lines));
    CHECK_FALSE(is_consistent(full({0, 1, 2, 3, 5}), lines));
    Station none = full({0, 0, 0, 0, 0});
    for (auto& e : none.entries) e.active = false;
    CHECK(is_consistent(none, lines));

    // a goal naming person1 twice gives two lines with the same key
    const auto& d = zeno().model.domain;
    auto text = mini_zeno_problem_text();
    text.replace(text.find("(at person2 City4)"), 18, "(at person1 City2)");
    const auto task = ground(d, parse_problem(text, d));
    const GoalLines twice(task, zeno().model.invariants);
    Station st;
    for (const auto& line : twice.lines()) st.entries.push_back({line.goal_value, true});
    CHECK_FALSE(is_consistent(st, twice));
    for (std::size_t i = 0; i < twice.size(); ++i)
        if (twice[i].key == "person1") {
            st.entries[i].active = false;
            break;
        }
    CHECK(is_consistent(st, twice));
}

TEST_CASE("random_init") {
    const auto& lines = zeno_lines();
    const auto& init = zeno().task.init;
    std::mt19937_64 rng(17);
    InitParams p;
    for (int i = 0; i < 1000; ++i) {
        const Genome g = random_init(lines, init, p, rng);
        CHECK(g.size() >= p.n_min);
        CHECK(g.size() <= p.n_max);
        Assignment left = project(init, lines);
        for (const auto& st : g.stations) {
            CHECK(is_consistent(st, lines));
            CHECK(distance(left, st) <= p.d_max);
            left = values_of(st);
        }
        CHECK(distance(left, goal_station(lines)) <= p.d_max);
    }

    // without masking the last column is the goal
    p.p_mask = 0;
    for (int i = 0; i < 200; ++i) CHECK(random_init(lines, init, p, rng).stations.back() == goal_station(lines));
}

TEST_CASE("random_init placement bounds") {
    const auto& lines = zeno_lines();
    const auto& init = zeno().task.init;
    std::mt19937_64 rng(1);
    // five lines fit in two columns of three moves each
    InitParams two{2, 2, 3, 0, 0.0};
    for (int i = 0; i < 100; ++i) CHECK(random_init(lines, init, two, rng).size() == 2);
    InitParams one{1, 1, 1, 0, 0.1};
    CHECK_THROWS_AS(random_init(lines, init, one, rng), InitInfeasible);

    // extra moves respect the column cap: with d_max = 1 and n = 5, one move per column
    InitParams tight{5, 5, 1, 4, 0.0};
    for (int i = 0; i < 100; ++i) {
        const Genome g = random_init(lines, init, tight, rng);
        Assignment left = project(init, lines);
        for (const auto& st : g.stations) {
            CHECK(distance(left, st) <= 1);
            left = values_of(st);
        }
    }
}

TEST_CASE("mutate_station") {
    const auto& lines = zeno_lines();
    const auto& init = zeno().task.init;
    std::mt19937_64 rng(9);

    Station none = full({1, 1, 1, 1, 1});
    for (auto& e : none.entries) e.active = false;
    Neighbors nb{project(init, lines), goal_station(lines)};
    const StationRates change_only{1, 0, 0};
    CHECK(mutate_station(none, lines, 3, nb, rng, change_only) == none);

    // one active entry pinned by both neighbours at d_max = 0
    Station one = none;
    one.entries[0] = {2, true};
    Neighbors pinned{values_of(full({2, 0, 0, 0, 0})), one};
    CHECK(mutate_station(one, lines, 0, pinned, rng, change_only) == one);

    for (int i = 0; i < 10000; ++i) {
        const Genome g = random_init(lines, init, InitParams{}, rng);
        const std::size_t k = uniform_index(rng, 0, g.size() - 1);
        const auto around = neighbors_of(g, k, lines, init);
        const Station out = mutate_station(g.stations[k], lines, 3, around, rng);
        CHECK(is_consistent(out, lines));
        CHECK(within(out, around, 3));
    }
}

TEST_CASE("legal values keep both neighbour distances") {
    const auto& lines = zeno_lines();
    const auto& init = zeno().task.init;
    std::mt19937_64 rng(4);
    for (int i = 0; i < 2000; ++i) {
        const Genome g = random_init(lines, init, InitParams{}, rng);
        const std::size_t k = uniform_index(rng, 0, g.size() - 1);
        const auto nb = neighbors_of(g, k, lines, init);
        const std::size_t line = uniform_index(rng, 0, lines.size() - 1);
        for (ValueIndex v : legal_values(g.stations[k], line, lines, 3, nb)) {
            Station probe = g.stations[k];
            probe.entries[line] = {v, true};
            CHECK(is_consistent(probe, lines));
            CHECK(within(probe, nb, 3));
        }
    }
}

TEST_CASE("a gap wider than d_max may keep its width") {
    const auto& lines = zeno_lines();
    const Neighbors nb{project(zeno().task.init, lines), goal_station(lines)};
    // still at init: five changes away from the goal
    const Station stuck = full({0, 0, 0, 0, 0});
    REQUIRE(distance(stuck, nb.right) == 5);
    CHECK(legal_values(stuck, 0, lines, 3, nb) == std::vector<ValueIndex>{0, 1, 2, 3, 4});
    // within d_max the strict rule applies: line 0 cannot leave the goal value
    const Station closer = full({4, 4, 0, 0, 0});
    CHECK(legal_values(closer, 0, lines, 3, nb) == std::vector<ValueIndex>{4});
}

TEST_CASE("add and delete") {
    const auto& lines = zeno_lines();
    const auto& init = zeno().task.init;
    std::mt19937_64 rng(12);

    const Genome empty;
    const Genome one = mutate_add(empty, lines, init, 3, 20, rng);
    REQUIRE(one.size() == 1);
    CHECK(distance(project(init, lines), one.stations[0]) <= 3);
    CHECK(distance(project(init, lines), one.stations[0]) >= 1);
    CHECK(distance(one.stations[0], goal_station(lines)) <= 5);
    CHECK(mutate_del(one, rng).empty());
    CHECK(mutate_del(empty, rng).empty());

    Genome g = random_init(lines, init, InitParams{}, rng);
    for (int i = 0; i < 10000; ++i) {
        if (g.size() >= 20 || uniform_real(rng) < 0.3) g = mutate_del(g, rng);
        const std::size_t at = uniform_index(rng, 0, g.size());
        const Genome h = mutate_add_at(g, at, lines, init, 3, 20, rng);
        REQUIRE(h.size() == g.size() + 1);
        CHECK(is_consistent(h.stations[at], lines));
        const auto nb = neighbors_of(h, at, lines, init);
        CHECK(distance(nb.left, h.stations[at]) <= 3);
        g = h;
    }
    Genome capped;
    capped.stations.assign(20, goal_station(lines));
    CHECK(mutate_add(capped, lines, init, 3, 20, rng).size() == 20);
}

TEST_CASE("genome dump") {
    const auto& lines = zeno_lines();
    Genome g;
    g.stations.push_back(full({1, 0, 0, 0, 4}));
    g.stations[0].entries[1].active = false;
    const std::string text = dump(g, lines);
    CHECK(text.rfind("station 1\n  1: at ", 0) == 0);
    CHECK(text.find("-> City1\n") != std::string::npos);
    CHECK(text.find("2: at " + lines[1].key + " -> #masked\n") != std::string::npos);
}
