// dae: command-line front end.
//
//   dae solve   --domain D --problem P [--max-backtracks N]
//   dae evolve  --domain D --problem P --invariants I [--engine es|nsga2 --cost C] --runs R --out DIR
//   dae pareto  --domain D --problem P --invariants I --cost C --runs R --out DIR
//   dae oracle  --domain D --problem P --cost C [--oracle-length L]
//
// Every option may also come from a key=value file given with --config;
// options on the command line win.

#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "dae/errors.hpp"
#include "dae/harness.hpp"
#include "dae/oracle.hpp"
#include "dae/planner.hpp"
#include "dae/task.hpp"

namespace {

struct Options {
    std::string domain, problem, invariants, cost, out;
    std::string engine = "es";
    std::size_t mu = 10, lambda = 70, pop = 100, gens = 30, runs = 1, jobs = 1;
    std::uint64_t seed = 1;
    std::uint64_t max_backtracks = dae::SearchLimits{}.max_backtracks;
    std::size_t max_length = dae::SearchLimits{}.max_sequence_length;
    std::size_t oracle_length = dae::OracleBounds{}.max_sequence_length;
    bool guided_add = false;
};

dae::ExperimentConfig to_config(const Options& o, bool pareto) {
    dae::ExperimentConfig cfg;
    cfg.domain = o.domain;
    cfg.problem = o.problem;
    cfg.invariants = o.invariants;
    if (!o.cost.empty()) cfg.cost = o.cost;
    cfg.engine.engine = pareto || o.engine == "nsga2" ? dae::EngineKind::nsga2 : dae::EngineKind::es;
    cfg.objective =
        cfg.engine.engine == dae::EngineKind::nsga2 ? dae::ObjectiveMode::makespan_cost : dae::ObjectiveMode::makespan;
    cfg.engine.mu = o.mu;
    cfg.engine.lambda = o.lambda;
    cfg.engine.pop = o.pop;
    cfg.engine.gens = o.gens;
    cfg.engine.limits.max_backtracks = o.max_backtracks;
    cfg.engine.limits.max_sequence_length = o.max_length;
    cfg.engine.guided_add = o.guided_add;
    cfg.runs = o.runs;
    cfg.seed = o.seed;
    cfg.out = o.out;
    cfg.jobs = o.jobs;
    return cfg;
}

std::string slurp(const std::string& path, const char* what) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw dae::ConfigError(std::string("cannot read ") + what + " file '" + path + "'");
    std::ostringstream s;
    s << in.rdbuf();
    return s.str();
}

dae::GroundTask load_task(const Options& o) {
    if (o.domain.empty() || o.problem.empty()) throw dae::ConfigError("--domain and --problem are required");
    const auto domain = dae::parse_domain(slurp(o.domain, "domain"));
    return dae::ground(domain, dae::parse_problem(slurp(o.problem, "problem"), domain));
}

void write(const std::filesystem::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    out << text;
    if (!out) throw dae::ConfigError("cannot write '" + path.string() + "'");
}

int cmd_solve(const Options& o) {
    const auto task = load_task(o);
    dae::SearchLimits limits;
    limits.max_backtracks = o.max_backtracks;
    limits.max_sequence_length = o.max_length;
    const auto plan = dae::solve(dae::SubProblem{&task, task.init, task.goal}, limits);
    std::cout << "outcome " << dae::to_string(plan.outcome) << "\n"
              << "backtracks " << plan.backtracks << "\n";
    if (!plan.solved()) return 2;
    std::cout << "makespan " << dae::to_string(task.to_time(plan.makespan)) << "\n"
              << "proven_optimal " << (plan.proven_optimal ? "yes" : "no") << "\n"
              << dae::format_plan(task, plan.schedule);
    if (!o.out.empty()) {
        std::filesystem::create_directories(o.out);
        write(std::filesystem::path(o.out) / "best_plan.txt", dae::format_plan(task, plan.schedule));
    }
    return 0;
}

int cmd_evolve(const Options& o, bool pareto) {
    const auto cfg = to_config(o, pareto);
    const auto report = dae::run_experiment(cfg);
    for (const auto& r : report.runs) {
        std::cout << "run " << r.run + 1 << " seed " << r.seed;
        if (r.feasible)
            std::cout << " makespan " << r.best_makespan;
        else
            std::cout << " infeasible";
        if (cfg.objective == dae::ObjectiveMode::makespan_cost) {
            std::cout << " front";
            for (const auto& p : r.front) std::cout << " (" << p.makespan << "," << dae::to_string(p.cost) << ")";
        }
        std::cout << "\n";
    }
    std::cerr << "wall time " << report.seconds << " s\n";
    return 0;
}

int cmd_oracle(const Options& o) {
    if (o.cost.empty()) throw dae::ConfigError("oracle needs --cost");
    const auto task = load_task(o);
    const auto cm = dae::parse_cost(slurp(o.cost, "cost"));
    dae::OracleBounds bounds;
    bounds.max_sequence_length = o.oracle_length;
    dae::OracleStats stats;
    const auto front = dae::brute_force_pareto(task, cm, bounds, &stats);
    std::ostringstream csv;
    csv << "makespan,cost,run,generation\n";
    for (const auto& p : front.points()) {
        std::cout << "(" << p.makespan << "," << dae::to_string(p.cost) << ")\n";
        csv << p.makespan << "," << dae::to_string(p.cost) << ",0,0\n";
    }
    std::cerr << "nodes " << stats.nodes << ", goal schedules " << stats.goal_schedules << "\n";
    if (!o.out.empty()) {
        std::filesystem::create_directories(o.out);
        write(std::filesystem::path(o.out) / "front.csv", csv.str());
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Divide-and-Evolve temporal planner"};
    app.set_config("--config", "", "key=value file; command-line options take precedence");
    app.require_subcommand(1);
    Options o;
    app.add_option("--domain", o.domain, "PDDL domain file");
    app.add_option("--problem", o.problem, "PDDL problem file");
    app.add_option("--invariants", o.invariants, "station predicates and exclusivity");
    app.add_option("--cost", o.cost, "city values and cost mode");
    app.add_option("--engine", o.engine, "es or nsga2")->check(CLI::IsMember({"es", "nsga2"}));
    app.add_option("--mu", o.mu, "ES parents");
    app.add_option("--lambda", o.lambda, "ES children");
    app.add_option("--pop", o.pop, "NSGA-II population");
    app.add_option("--gens", o.gens, "generations");
    app.add_option("--runs", o.runs, "independent runs");
    app.add_option("--seed", o.seed, "master seed; run r uses seed + r");
    app.add_option("--max-backtracks", o.max_backtracks, "planner backtrack limit per sub-problem");
    app.add_option("--max-length", o.max_length, "planner sequence length cap");
    app.add_option("--oracle-length", o.oracle_length, "oracle sequence length cap");
    app.add_option("--jobs", o.jobs, "runs executed concurrently");
    app.add_flag("--guided-add", o.guided_add, "insert stations before the hardest sub-problem");
    app.add_option("--out", o.out, "output directory");

    auto* solve = app.add_subcommand("solve", "run the embedded planner on the whole problem")->fallthrough();
    auto* evolve = app.add_subcommand("evolve", "evolve station sequences")->fallthrough();
    auto* pareto = app.add_subcommand("pareto", "NSGA-II on makespan and cost")->fallthrough();
    auto* oracle = app.add_subcommand("oracle", "exhaustive Pareto front")->fallthrough();
    CLI11_PARSE(app, argc, argv);

    try {
        if (solve->parsed()) return cmd_solve(o);
        if (evolve->parsed()) return cmd_evolve(o, false);
        if (pareto->parsed()) return cmd_evolve(o, true);
        if (oracle->parsed()) return cmd_oracle(o);
    } catch (const dae::ConfigError& e) {
        std::cerr << "configuration error: " << e.what() << "\n";
        return 64;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
