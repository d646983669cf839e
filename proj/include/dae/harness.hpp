#pragma once

// Experiment plumbing: instance loading, the bundled mini-Zeno benchmark, and
// multi-run experiments with reproducible on-disk logs.

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "dae/evolve.hpp"
#include "dae/model.hpp"
#include "dae/oracle.hpp"

namespace dae {

enum class ObjectiveMode { makespan, makespan_cost };

std::string to_string(ObjectiveMode mode);

struct ExperimentConfig {
    std::filesystem::path domain;
    std::filesystem::path problem;
    std::filesystem::path invariants;
    std::optional<std::filesystem::path> cost;
    ObjectiveMode objective = ObjectiveMode::makespan;
    /// engine.seed is ignored; each run gets run_seed(seed, run)
    EngineParams engine;
    std::size_t runs = 1;
    std::uint64_t seed = 1;
    /// empty: nothing is written
    std::filesystem::path out;
    /// runs executed at once; 1 is sequential
    std::size_t jobs = 1;
};

struct Instance {
    DomainModel domain;
    ProblemModel problem;
    InvariantSpec invariants;
    std::optional<CostModel> cost;
};

/// Reads and parses the referenced files. Throws ConfigError for missing files,
/// runs == 0, or a makespan+cost objective without a cost file.
Instance load_instance(const ExperimentConfig& cfg);

/// Seed of run r (0-based): master + r, so master 1 gives seeds 1, 2, ...
std::uint64_t run_seed(std::uint64_t master, std::size_t run);

struct FrontEntry {
    Ticks makespan = 0;
    Rational cost;
    /// first generation whose population front held this point
    std::size_t generation = 0;
};

struct RunReport {
    std::size_t run = 0;
    std::uint64_t seed = 0;
    bool feasible = false;
    Ticks best_makespan = 0;
    Rational best_cost;
    std::string best_plan;
    /// final population's non-dominated (makespan, cost) pairs; empty for makespan only
    std::vector<FrontEntry> front;
    std::vector<GenerationStats> generations;
    std::uint64_t planner_calls = 0;
    std::uint64_t backtracks = 0;
    double seconds = 0;
};

struct ExperimentReport {
    std::vector<RunReport> runs;
    double seconds = 0;
};

/// Runs cfg.runs independent runs and, when cfg.out is set, writes
///   front.csv, summary.json (deterministic) and timing.json at the top,
///   run-NN/gen_stats.csv, run-NN/gen_fronts.csv and run-NN/best_plan.txt per run.
/// Errors from a run are rethrown with the run number prefixed. A plan cache
/// built for the same task and limits may be passed in to reuse solves.
ExperimentReport run_experiment(const ExperimentConfig& cfg, std::shared_ptr<PlanCache> cache = nullptr);

/// The deterministic parts of a report.
std::string summary_json(const ExperimentConfig& cfg, const ExperimentReport& report);
std::string front_csv(const ExperimentReport& report);

struct MiniZeno {
    DomainModel domain;
    ProblemModel problem;
    InvariantSpec invariants;
    CostModel additive;
    CostModel max;
};

/// Five cities, two planes and three persons at City0, everyone to City4
/// through City1 (legs of 4), City2 (8) or City3 (12). City values 100, 10, 1.
MiniZeno build_mini_zeno();

/// Source texts of the bundled instance, identical to data/mini-zeno.
std::string mini_zeno_domain_text();
std::string mini_zeno_problem_text();
std::string mini_zeno_invariants_text();
std::string mini_zeno_cost_text(CostMode mode);

}  // namespace dae
