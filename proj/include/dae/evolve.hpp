#pragma once

// The evolutionary layer: decoding genomes through the sub-planner, fitness
// and objectives, variation operators, and the (mu,lambda)-ES and NSGA-II
// engines.

#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "dae/oracle.hpp"
#include "dae/planner.hpp"
#include "dae/schedule.hpp"
#include "dae/stations.hpp"

namespace dae {

struct EvalResult {
    bool feasible = false;
    std::optional<std::size_t> fail_index;
    std::size_t remaining_after_failure = 0;
    std::vector<PlanResult> sub_plans;
    std::vector<Ticks> sub_makespans;
    /// empty without a cost model
    std::vector<Rational> sub_costs;
    std::optional<Schedule> global_schedule;
    Ticks total_makespan = 0;
    Rational total_cost;
};

/// Splits a genome into sub-problems and solves them in order. `solver` is
/// called once per sub-problem; decode stops at the first one not solved.
using SubSolver = std::function<PlanResult(const SubProblem&)>;
EvalResult decode(const Genome& g, const GroundTask& task, const GoalLines& lines, const SubSolver& solver,
                  const CostEvaluator* costs = nullptr);
EvalResult decode(const Genome& g, const GroundTask& task, const GoalLines& lines, const SearchLimits& limits,
                  const CostEvaluator* costs = nullptr);

/// Unit penalties, each above any feasible value of its objective given the
/// genome length cap and the planner's sequence-length cap.
struct Penalty {
    Rational makespan_unit;
    Rational cost_unit;
};

Penalty penalty_for(const GroundTask& task, const SearchLimits& limits, std::size_t n_max_hard,
                    const CostEvaluator* costs = nullptr);

/// Feasible: (total makespan + sum of sub-makespans) / 2.
/// Infeasible: unit * (1 + remaining sub-problems).
Rational fitness_single(const EvalResult& e, const Penalty& penalty);

struct Objectives {
    Rational f1;
    Rational f2;
    bool operator==(const Objectives&) const = default;
};

/// f1 = fitness_single; f2 = total cost + mean cost of the sub-plans with a
/// positive makespan.
Objectives objectives_multi(const EvalResult& e, const Penalty& penalty);

struct OperatorRates {
    double p_crossover = 0.25;
    double p_mutation = 0.75;
    /// conditional on mutation
    double p_add = 0.25;
    double p_del = 0.25;
    double p_station = 0.50;
    StationRates station;
};

enum class EngineKind { es, nsga2 };

struct EngineParams {
    EngineKind engine = EngineKind::es;
    std::size_t mu = 10;
    std::size_t lambda = 70;
    std::size_t pop = 100;
    std::size_t gens = 30;
    OperatorRates rates;
    InitParams init;
    SearchLimits limits;
    std::size_t n_max_hard = 20;
    std::uint64_t seed = 1;
    /// Add inserts in front of the hardest sub-problem instead of uniformly
    bool guided_add = false;
};

/// Independent stream for one individual of one generation.
Rng stream_for(std::uint64_t seed, std::uint64_t generation, std::uint64_t index);

/// Uniform cut ranks u in [0, |a|], v in [0, |b|]; children a[..u]+b[v..] and
/// b[..v]+a[u..], truncated to n_max_hard.
std::pair<Genome, Genome> crossover_1pt(const Genome& a, const Genome& b, std::size_t n_max_hard, Rng& rng);
/// Deterministic form for fixed cut ranks.
std::pair<Genome, Genome> crossover_at(const Genome& a, const Genome& b, std::size_t u, std::size_t v,
                                       std::size_t n_max_hard);

/// Planner results by (state, goal) for one task and one set of limits. The
/// planner is deterministic, so evaluators of different runs may share one,
/// also from several threads, as long as their tasks are grounded from the
/// same domain and problem.
class PlanCache {
public:
    PlanCache(const GroundTask& task, const SearchLimits& limits);

    const PlanResult& solve(const SubProblem& sub);
    const SearchLimits& limits() const { return limits_; }
    std::size_t size() const { return solved_.size(); }

private:
    SearchLimits limits_;
    PlannerContext context_;
    std::mutex mutex_;
    std::map<std::pair<WorldState, std::vector<AtomId>>, PlanResult> solved_;
};

/// Caches decodes by genome. Planner calls and backtracks are counted per
/// request, cached or not. Not thread safe.
class Evaluator {
public:
    Evaluator(const GroundTask& task, const GoalLines& lines, const SearchLimits& limits,
              std::optional<CostModel> cm, std::size_t n_max_hard);
    Evaluator(const GroundTask& task, const GoalLines& lines, std::shared_ptr<PlanCache> cache,
              std::optional<CostModel> cm, std::size_t n_max_hard);

    std::shared_ptr<const EvalResult> evaluate(const Genome& g);

    const GroundTask& task() const { return task_; }
    const GoalLines& lines() const { return lines_; }
    const Penalty& penalty() const { return penalty_; }
    const CostEvaluator* costs() const { return costs_ ? &*costs_ : nullptr; }

    std::uint64_t evaluations() const { return evaluations_; }
    std::uint64_t planner_calls() const { return planner_calls_; }
    std::uint64_t backtracks() const { return backtracks_; }

private:
    const GroundTask& task_;
    const GoalLines& lines_;
    std::shared_ptr<PlanCache> cache_;
    std::optional<CostEvaluator> costs_;
    Penalty penalty_;
    std::unordered_map<std::string, std::shared_ptr<const EvalResult>> decoded_;
    std::uint64_t evaluations_ = 0;
    std::uint64_t planner_calls_ = 0;
    std::uint64_t backtracks_ = 0;
};

struct Individual {
    Genome genome;
    std::shared_ptr<const EvalResult> eval;
    Rational fitness;
    Objectives objectives;
    /// creation order within a run
    std::uint64_t id = 0;
};

/// Station mutation applied to each station with probability 1/len.
Genome mutate_stations(const Genome& g, const GoalLines& lines, const WorldState& init, std::size_t d_max, Rng& rng,
                       const StationRates& rates);

/// One mutation drawn from the Add/Del/station split.
Genome mutate(const Genome& g, const EvalResult* eval, const Evaluator& ev, const EngineParams& p, Rng& rng);

/// Comma selection: mu best of lambda children by fitness, then total
/// makespan, then creation order.
std::vector<Individual> es_step(const std::vector<Individual>& parents, const EngineParams& p, Evaluator& ev,
                                std::size_t generation, std::uint64_t& next_id);

/// Fronts of indices, best first. a dominates b iff a <= b on both and < on one.
std::vector<std::vector<std::size_t>> nondominated_sort(const std::vector<Objectives>& points);
/// Crowding distance of each member of `front`, boundary points infinite.
std::vector<double> crowding_distance(const std::vector<Objectives>& points, const std::vector<std::size_t>& front);

std::vector<Individual> nsga2_step(const std::vector<Individual>& pop, const EngineParams& p, Evaluator& ev,
                                   std::size_t generation, std::uint64_t& next_id);

struct GenerationStats {
    std::size_t generation = 0;
    Rational best_fitness;
    std::size_t feasible = 0;
    double mean_length = 0;
    std::uint64_t planner_calls = 0;
    std::uint64_t backtracks = 0;
    /// raw (makespan, cost) pairs of the feasible members, non-dominated
    ParetoFront front;
};

struct RunResult {
    std::vector<Individual> population;
    std::vector<GenerationStats> generations;
    /// best by fitness (ES) or by f1 then f2 (NSGA-II)
    Individual best;
    ParetoFront front;
};

/// Generation 0 is the random initial population; `gens` steps follow.
RunResult run_engine(const EngineParams& p, Evaluator& ev);

/// Header and rows of the per-generation CSV.
std::string gen_stats_csv(const std::vector<GenerationStats>& stats);

}  // namespace dae
