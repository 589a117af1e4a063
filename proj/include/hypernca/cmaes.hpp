#pragma once

// CMA-ES with weighted recombination, rank-one + rank-mu covariance update and
// cumulative step-size adaptation (Hansen's tutorial formulation). Fitness is
// maximised; ranking is by descending fitness with ties broken by ascending
// genome index, so an update depends only on the set of (genome, fitness)
// pairs and never on the order evaluations arrive in.

#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace hypernca {

using Genome = std::vector<double>;

/// Fitness assigned to failed or non-finite evaluations.
inline constexpr double kFitnessFloor = -1e6;

/// Strategy constants derived from dimension and population size.
struct CmaConstants {
  int lambda = 0;
  int mu = 0;
  std::vector<double> weights;  ///< mu positive weights summing to 1
  double mu_eff = 0;
  double c_sigma = 0;
  double d_sigma = 0;
  double c_c = 0;
  double c_1 = 0;
  double c_mu = 0;
  double chi_n = 0;  ///< E||N(0, I)||

  static CmaConstants standard(int dimension, int lambda);
  friend bool operator==(const CmaConstants&, const CmaConstants&) = default;
};

struct EsState {
  int dimension = 0;
  CmaConstants constants;
  std::vector<double> mean;
  double sigma = 0;
  std::vector<double> covariance;    ///< d x d, row-major
  std::vector<double> eigenvectors;  ///< B, d x d row-major, columns are eigenvectors
  std::vector<double> axis_lengths;  ///< D, square roots of the eigenvalues of C
  std::vector<double> p_sigma;
  std::vector<double> p_c;
  std::int64_t generation = 0;
  std::int64_t eigen_generation = 0;  ///< generation at which B, D were computed

  static EsState initial(std::span<const double> mean, double sigma0, int lambda);

  void validate() const;
  friend bool operator==(const EsState&, const EsState&) = default;
};

struct EvalRecord {
  std::size_t genome_index = 0;
  double fitness = 0;
  std::int64_t steps = 0;          ///< environment steps consumed, if known
  std::uint64_t env_seed = 0;
};

/// lambda samples mean + sigma * B * D * z, z ~ N(0, I), drawn from `seed`.
std::vector<Genome> ask(const EsState& state, std::uint64_t seed);

/// One CMA-ES update from a fully evaluated population.
EsState tell(const EsState& state, std::span<const Genome> population,
             std::span<const EvalRecord> evals);

/// Smallest eigenvalue and max |C - C^T| of the state's covariance.
struct CovarianceHealth {
  double min_eigenvalue = 0;
  double max_asymmetry = 0;
};
CovarianceHealth covariance_health(const EsState& state);

struct EarlyStopRule {
  int check_generation = 200;
  double mean_fitness_floor = 0;
  friend bool operator==(const EarlyStopRule&, const EarlyStopRule&) = default;
};

struct RunOptions {
  int lambda = 64;
  double sigma0 = 0.1;
  int max_generations = 1000;
  std::optional<double> target_fitness;
  std::optional<EarlyStopRule> early_stop;
  std::uint64_t seed = 0;
  int workers = 1;
  bool evaluate_mean = true;  ///< score the distribution mean every generation
};

struct GenerationStats {
  int generation = 0;  ///< 1-based, counted across restarts
  int restart = 0;
  double best_fitness = 0;
  double mean_fitness = 0;
  double sigma = 0;
  double mean_solution_fitness = 0;  ///< NaN when not evaluated
  double wall_ms = 0;
};

struct RunResult {
  Genome best_genome;
  double best_fitness = kFitnessFloor;
  Genome mean_solution;
  double mean_solution_fitness = kFitnessFloor;
  std::vector<GenerationStats> history;
  std::vector<int> restart_generations;  ///< generations after which a reset happened
  EsState final_state;
};

/// Must be safe to call concurrently; `index` is the genome's population slot.
using FitnessFn = std::function<double(std::span<const double> genome, std::size_t index)>;

/// Calls fitness(population[i], i) for all i on `workers` threads; failures map
/// to kFitnessFloor. Results are indexed by genome, independent of scheduling.
std::vector<double> evaluate_population(std::span<const Genome> population,
                                        const FitnessFn& fitness, int workers);

/// ask -> evaluate -> tell until the target is reached or the generation
/// budget is spent, restarting from `initial_mean` when the early-stop rule
/// fires. `on_generation` (optional) observes each generation's stats.
RunResult run(std::span<const double> initial_mean, const FitnessFn& fitness,
              const RunOptions& options,
              const std::function<void(const GenerationStats&)>& on_generation = {});

}  // namespace hypernca
