#include "dae/harness.hpp"

#include <chrono>
#include <fstream>
#include <iomanip>
#include <mutex>
#include <sstream>
#include <thread>

#include <json.hpp>

#include "dae/errors.hpp"
#include "dae/stations.hpp"
#include "dae/task.hpp"

namespace dae {

std::string to_string(ObjectiveMode mode) { return mode == ObjectiveMode::makespan ? "makespan" : "makespan+cost"; }

namespace {

std::string read_file(const std::filesystem::path& path, const char* what) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError(std::string("cannot read ") + what + " file '" + path.string() + "'");
    std::ostringstream text;
    text << in.rdbuf();
    return text.str();
}

void write_file(const std::filesystem::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    out << text;
    if (!out) throw ConfigError("cannot write '" + path.string() + "'");
}

std::string run_dir(std::size_t run) {
    std::ostringstream name;
    name << "run-" << std::setw(2) << std::setfill('0') << run + 1;
    return name.str();
}

std::size_t first_generation(const RunResult& result, const ParetoPoint& p) {
    for (const auto& g : result.generations)
        if (g.front.contains(p.makespan, p.cost)) return g.generation;
    return result.generations.empty() ? 0 : result.generations.back().generation;
}

std::string gen_fronts_csv(const std::vector<GenerationStats>& stats) {
    std::ostringstream out;
    out << "generation,makespan,cost\n";
    for (const auto& s : stats)
        for (const auto& p : s.front.points()) out << s.generation << "," << p.makespan << "," << to_string(p.cost) << "\n";
    return out.str();
}

RunReport execute(const ExperimentConfig& cfg, std::size_t run, const GroundTask& task, const GoalLines& lines,
                  const std::optional<CostModel>& cost, const std::shared_ptr<PlanCache>& cache) {
    const auto t0 = std::chrono::steady_clock::now();
    EngineParams params = cfg.engine;
    params.seed = run_seed(cfg.seed, run);
    Evaluator ev(task, lines, cache, cost, params.n_max_hard);
    RunResult result = run_engine(params, ev);

    RunReport r;
    r.run = run;
    r.seed = params.seed;
    const EvalResult& best = *result.best.eval;
    r.feasible = best.feasible;
    if (best.feasible) {
        r.best_makespan = best.total_makespan;
        r.best_cost = best.total_cost;
        r.best_plan = format_plan(task, *best.global_schedule);
    }
    if (cost)
        for (const auto& p : result.front.points()) r.front.push_back({p.makespan, p.cost, first_generation(result, p)});
    r.generations = std::move(result.generations);
    r.planner_calls = ev.planner_calls();
    r.backtracks = ev.backtracks();
    r.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return r;
}

}  // namespace

Instance load_instance(const ExperimentConfig& cfg) {
    if (cfg.runs == 0) throw ConfigError("runs must be at least 1");
    if (cfg.objective == ObjectiveMode::makespan_cost && !cfg.cost)
        throw ConfigError("objective makespan+cost needs a cost file");
    Instance inst;
    inst.domain = parse_domain(read_file(cfg.domain, "domain"));
    inst.problem = parse_problem(read_file(cfg.problem, "problem"), inst.domain);
    inst.invariants = parse_invariants(read_file(cfg.invariants, "invariants"), inst.domain);
    if (cfg.cost) inst.cost = parse_cost(read_file(*cfg.cost, "cost"));
    return inst;
}

std::uint64_t run_seed(std::uint64_t master, std::size_t run) { return master + run; }

ExperimentReport run_experiment(const ExperimentConfig& cfg, std::shared_ptr<PlanCache> cache) {
    const auto t0 = std::chrono::steady_clock::now();
    const Instance inst = load_instance(cfg);
    const GroundTask task = ground(inst.domain, inst.problem);
    const GoalLines lines(task, inst.invariants);
    const std::optional<CostModel> cost =
        cfg.objective == ObjectiveMode::makespan_cost ? inst.cost : std::optional<CostModel>{};
    if (!cache) cache = std::make_shared<PlanCache>(task, cfg.engine.limits);
    if (!(cache->limits() == cfg.engine.limits)) throw ConfigError("plan cache was built for other search limits");

    ExperimentReport report;
    report.runs.resize(cfg.runs);
    std::vector<std::exception_ptr> errors(cfg.runs);
    auto attempt = [&](std::size_t run) {
        try {
            report.runs[run] = execute(cfg, run, task, lines, cost, cache);
        } catch (...) {
            errors[run] = std::current_exception();
        }
    };
    if (cfg.jobs <= 1) {
        for (std::size_t run = 0; run < cfg.runs; ++run) attempt(run);
    } else {
        std::mutex m;
        std::size_t next = 0;
        std::vector<std::jthread> workers;
        for (std::size_t j = 0; j < std::min(cfg.jobs, cfg.runs); ++j)
            workers.emplace_back([&] {
                for (;;) {
                    std::size_t run;
                    {
                        std::lock_guard lock(m);
                        if (next == cfg.runs) return;
                        run = next++;
                    }
                    attempt(run);
                }
            });
    }
    for (std::size_t run = 0; run < cfg.runs; ++run) {
        if (!errors[run]) continue;
        try {
            std::rethrow_exception(errors[run]);
        } catch (const std::exception& e) {
            throw Error("run " + std::to_string(run + 1) + ": " + e.what());
        }
    }
    report.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

    if (!cfg.out.empty()) {
        std::filesystem::create_directories(cfg.out);
        for (const auto& r : report.runs) {
            const auto dir = cfg.out / run_dir(r.run);
            std::filesystem::create_directories(dir);
            write_file(dir / "gen_stats.csv", gen_stats_csv(r.generations));
            write_file(dir / "gen_fronts.csv", gen_fronts_csv(r.generations));
            write_file(dir / "best_plan.txt", r.feasible ? r.best_plan : "; no feasible plan\n");
        }
        write_file(cfg.out / "front.csv", front_csv(report));
        write_file(cfg.out / "summary.json", summary_json(cfg, report));
        nlohmann::json timing;
        timing["wall_seconds"] = report.seconds;
        for (const auto& r : report.runs) timing["run_seconds"].push_back(r.seconds);
        write_file(cfg.out / "timing.json", timing.dump(2) + "\n");
    }
    return report;
}

std::string front_csv(const ExperimentReport& report) {
    std::ostringstream out;
    out << "makespan,cost,run,generation\n";
    for (const auto& r : report.runs)
        for (const auto& p : r.front)
            out << p.makespan << "," << to_string(p.cost) << "," << r.run + 1 << "," << p.generation << "\n";
    return out.str();
}

std::string summary_json(const ExperimentConfig& cfg, const ExperimentReport& report) {
    nlohmann::ordered_json j;
    j["engine"] = cfg.engine.engine == EngineKind::es ? "es" : "nsga2";
    j["objective"] = to_string(cfg.objective);
    j["seed"] = cfg.seed;
    j["runs"] = nlohmann::ordered_json::array();
    const bool multi = cfg.objective == ObjectiveMode::makespan_cost;
    std::uint64_t calls = 0, backtracks = 0;
    for (const auto& r : report.runs) {
        nlohmann::ordered_json run;
        run["run"] = r.run + 1;
        run["seed"] = r.seed;
        run["feasible"] = r.feasible;
        if (r.feasible) {
            run["best_makespan"] = r.best_makespan;
            if (multi) run["best_cost"] = to_string(r.best_cost);
        } else {
            run["best_makespan"] = nullptr;
        }
        if (multi) {
            run["front"] = nlohmann::ordered_json::array();
            for (const auto& p : r.front)
                run["front"].push_back(
                    {{"makespan", p.makespan}, {"cost", to_string(p.cost)}, {"generation", p.generation}});
        }
        run["planner_calls"] = r.planner_calls;
        run["backtracks"] = r.backtracks;
        j["runs"].push_back(std::move(run));
        calls += r.planner_calls;
        backtracks += r.backtracks;
    }
    j["planner_calls"] = calls;
    j["backtracks"] = backtracks;
    return j.dump(2) + "\n";
}

std::string mini_zeno_domain_text() {
    return R"PDDL(; Transportation domain with three flight lengths. Boarding and debarking
; are instantaneous so that route lengths alone determine the makespan.
(define (domain mini-zeno)
  (:requirements :typing :durative-actions)
  (:types locatable city - object
          plane person - locatable)
  (:predicates (at ?x - locatable ?c - city)
               (in ?p - person ?a - plane)
               (short-link ?from - city ?to - city)
               (medium-link ?from - city ?to - city)
               (long-link ?from - city ?to - city))
  (:durative-action board
    :parameters (?p - person ?a - plane ?c - city)
    :duration (= ?duration 0)
    :condition (and (at start (at ?p ?c)) (over all (at ?a ?c)))
    :effect (and (at start (not (at ?p ?c))) (at end (in ?p ?a))))
  (:durative-action debark
    :parameters (?p - person ?a - plane ?c - city)
    :duration (= ?duration 0)
    :condition (and (at start (in ?p ?a)) (over all (at ?a ?c)))
    :effect (and (at start (not (in ?p ?a))) (at end (at ?p ?c))))
  (:durative-action fly-short
    :parameters (?a - plane ?from - city ?to - city)
    :duration (= ?duration 4)
    :condition (and (at start (at ?a ?from)) (over all (short-link ?from ?to)))
    :effect (and (at start (not (at ?a ?from))) (at end (at ?a ?to))))
  (:durative-action fly-medium
    :parameters (?a - plane ?from - city ?to - city)
    :duration (= ?duration 8)
    :condition (and (at start (at ?a ?from)) (over all (medium-link ?from ?to)))
    :effect (and (at start (not (at ?a ?from))) (at end (at ?a ?to))))
  (:durative-action fly-long
    :parameters (?a - plane ?from - city ?to - city)
    :duration (= ?duration 12)
    :condition (and (at start (at ?a ?from)) (over all (long-link ?from ?to)))
    :effect (and (at start (not (at ?a ?from))) (at end (at ?a ?to)))))
)PDDL";
}

std::string mini_zeno_problem_text() {
    return R"PDDL((define (problem mini-zeno-1)
  (:domain mini-zeno)
  (:objects City0 City1 City2 City3 City4 - city
            plane1 plane2 - plane
            person1 person2 person3 - person)
  (:init (at plane1 City0) (at plane2 City0)
         (at person1 City0) (at person2 City0) (at person3 City0)
         (short-link City0 City1) (short-link City1 City0)
         (short-link City1 City4) (short-link City4 City1)
         (medium-link City0 City2) (medium-link City2 City0)
         (medium-link City2 City4) (medium-link City4 City2)
         (long-link City0 City3) (long-link City3 City0)
         (long-link City3 City4) (long-link City4 City3))
  (:goal (and (at person1 City4) (at person2 City4) (at person3 City4)
              (at plane1 City4) (at plane2 City4))))
)PDDL";
}

std::string mini_zeno_invariants_text() {
    return R"INV(# stations are built from `at` facts; an object is at one place at a time
station-predicate at
exclusive at 1
)INV";
}

std::string mini_zeno_cost_text(CostMode mode) {
    if (mode == CostMode::max)
        return R"COST(mode max
value City1 100
value City2 10
value City3 1
)COST";
    return R"COST(mode additive
value City1 100
value City2 10
value City3 1
)COST";
}

MiniZeno build_mini_zeno() {
    MiniZeno z;
    z.domain = parse_domain(mini_zeno_domain_text());
    z.problem = parse_problem(mini_zeno_problem_text(), z.domain);
    z.invariants = parse_invariants(mini_zeno_invariants_text(), z.domain);
    z.additive = parse_cost(mini_zeno_cost_text(CostMode::additive));
    z.max = parse_cost(mini_zeno_cost_text(CostMode::max));
    return z;
}

}  // namespace dae
