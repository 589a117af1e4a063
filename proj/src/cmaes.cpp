#include "hypernca/cmaes.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>
#include <thread>

#include "hypernca/errors.hpp"
#include "hypernca/rng.hpp"

namespace hypernca {

namespace {

using RowMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using MatMap = Eigen::Map<RowMatrix>;
using ConstMatMap = Eigen::Map<const RowMatrix>;
using VecMap = Eigen::Map<Eigen::VectorXd>;
using ConstVecMap = Eigen::Map<const Eigen::VectorXd>;

// Generations between eigendecompositions of C.
std::int64_t eigen_interval(const EsState& s) {
  const auto& k = s.constants;
  const double gap = 1.0 / ((k.c_1 + k.c_mu) * s.dimension * 10.0);
  return std::max<std::int64_t>(1, static_cast<std::int64_t>(std::floor(gap)));
}

void decompose(EsState& s) {
  const int d = s.dimension;
  Eigen::SelfAdjointEigenSolver<RowMatrix> solver(ConstMatMap(s.covariance.data(), d, d));
  if (solver.info() != Eigen::Success) {
    throw NumericError("covariance eigendecomposition failed at generation " +
                       std::to_string(s.generation));
  }
  const Eigen::VectorXd& values = solver.eigenvalues();
  if (values.minCoeff() <= 0.0) {
    throw NumericError("covariance lost positive definiteness at generation " +
                       std::to_string(s.generation) + " (min eigenvalue " +
                       std::to_string(values.minCoeff()) + ")");
  }
  MatMap(s.eigenvectors.data(), d, d) = solver.eigenvectors();
  for (int i = 0; i < d; ++i) s.axis_lengths[i] = std::sqrt(values[i]);
  s.eigen_generation = s.generation;
}

}  // namespace

CmaConstants CmaConstants::standard(int dimension, int lambda) {
  if (dimension < 1) throw ConfigError("CMA-ES dimension must be >= 1");
  if (lambda < 2) throw ConfigError("optimizer.population must be >= 2");
  CmaConstants k;
  const double n = dimension;
  k.lambda = lambda;
  k.mu = lambda / 2;
  k.weights.resize(static_cast<std::size_t>(k.mu));
  for (int i = 0; i < k.mu; ++i) {
    k.weights[i] = std::log((lambda + 1) / 2.0) - std::log(i + 1.0);
  }
  const double sum = std::accumulate(k.weights.begin(), k.weights.end(), 0.0);
  double sum_sq = 0;
  for (double& w : k.weights) {
    w /= sum;
    sum_sq += w * w;
  }
  k.mu_eff = 1.0 / sum_sq;
  k.c_sigma = (k.mu_eff + 2.0) / (n + k.mu_eff + 5.0);
  k.d_sigma =
      1.0 + 2.0 * std::max(0.0, std::sqrt((k.mu_eff - 1.0) / (n + 1.0)) - 1.0) + k.c_sigma;
  k.c_c = (4.0 + k.mu_eff / n) / (n + 4.0 + 2.0 * k.mu_eff / n);
  k.c_1 = 2.0 / ((n + 1.3) * (n + 1.3) + k.mu_eff);
  k.c_mu = std::min(1.0 - k.c_1, 2.0 * (k.mu_eff - 2.0 + 1.0 / k.mu_eff) /
                                     ((n + 2.0) * (n + 2.0) + k.mu_eff));
  k.chi_n = std::sqrt(n) * (1.0 - 1.0 / (4.0 * n) + 1.0 / (21.0 * n * n));
  return k;
}

EsState EsState::initial(std::span<const double> mean, double sigma0, int lambda) {
  if (!(sigma0 > 0.0) || !std::isfinite(sigma0)) {
    throw ConfigError("optimizer.sigma0 must be a positive finite number");
  }
  EsState s;
  s.dimension = static_cast<int>(mean.size());
  s.constants = CmaConstants::standard(s.dimension, lambda);
  s.mean.assign(mean.begin(), mean.end());
  s.sigma = sigma0;
  const auto d = static_cast<std::size_t>(s.dimension);
  s.covariance.assign(d * d, 0.0);
  s.eigenvectors.assign(d * d, 0.0);
  for (std::size_t i = 0; i < d; ++i) {
    s.covariance[i * d + i] = 1.0;
    s.eigenvectors[i * d + i] = 1.0;
  }
  s.axis_lengths.assign(d, 1.0);
  s.p_sigma.assign(d, 0.0);
  s.p_c.assign(d, 0.0);
  return s;
}

void EsState::validate() const {
  const auto d = static_cast<std::size_t>(dimension);
  if (dimension < 1 || mean.size() != d || covariance.size() != d * d ||
      eigenvectors.size() != d * d || axis_lengths.size() != d || p_sigma.size() != d ||
      p_c.size() != d) {
    throw ShapeError("inconsistent CMA-ES state dimensions");
  }
  if (!(sigma > 0.0)) throw NumericError("CMA-ES step size must be positive");
}

std::vector<Genome> ask(const EsState& state, std::uint64_t seed) {
  state.validate();
  const int d = state.dimension;
  const ConstMatMap b(state.eigenvectors.data(), d, d);
  const ConstVecMap axes(state.axis_lengths.data(), d);
  const ConstVecMap mean(state.mean.data(), d);
  Rng rng(seed);
  Eigen::VectorXd z(d);
  std::vector<Genome> population(static_cast<std::size_t>(state.constants.lambda));
  for (auto& x : population) {
    for (int i = 0; i < d; ++i) z[i] = rng.normal();
    const Eigen::VectorXd sample = mean + state.sigma * (b * axes.cwiseProduct(z));
    x.assign(sample.data(), sample.data() + d);
  }
  return population;
}

EsState tell(const EsState& state, std::span<const Genome> population,
             std::span<const EvalRecord> evals) {
  state.validate();
  const auto& k = state.constants;
  const int d = state.dimension;
  const auto lambda = static_cast<std::size_t>(k.lambda);
  if (population.size() != lambda || evals.size() != lambda) {
    throw ShapeError("tell expects " + std::to_string(lambda) + " genomes and evaluations, got " +
                     std::to_string(population.size()) + " and " + std::to_string(evals.size()));
  }
  std::vector<char> seen(lambda, 0);
  for (const auto& e : evals) {
    if (e.genome_index >= lambda || seen[e.genome_index]) {
      throw ContractError("evaluation records must cover each genome index exactly once");
    }
    if (!std::isfinite(e.fitness)) throw NumericError("non-finite fitness passed to tell");
    seen[e.genome_index] = 1;
  }
  for (const auto& x : population) {
    if (x.size() != static_cast<std::size_t>(d)) throw ShapeError("genome dimension mismatch");
  }

  std::vector<EvalRecord> ranked(evals.begin(), evals.end());
  std::sort(ranked.begin(), ranked.end(), [](const EvalRecord& a, const EvalRecord& b) {
    if (a.fitness != b.fitness) return a.fitness > b.fitness;
    return a.genome_index < b.genome_index;
  });

  EsState next = state;
  const ConstVecMap mean(state.mean.data(), d);
  RowMatrix steps(k.mu, d);  // y_i = (x_i - m) / sigma for the selected genomes
  for (int i = 0; i < k.mu; ++i) {
    steps.row(i) = (ConstVecMap(population[ranked[i].genome_index].data(), d) - mean).transpose() /
                   state.sigma;
  }
  Eigen::VectorXd y_w = Eigen::VectorXd::Zero(d);
  for (int i = 0; i < k.mu; ++i) y_w += k.weights[i] * steps.row(i).transpose();

  VecMap(next.mean.data(), d) = mean + state.sigma * y_w;

  const ConstMatMap b(state.eigenvectors.data(), d, d);
  const ConstVecMap axes(state.axis_lengths.data(), d);
  const Eigen::VectorXd inv_sqrt_c_yw = b * (b.transpose() * y_w).cwiseQuotient(axes);

  VecMap p_sigma(next.p_sigma.data(), d);
  p_sigma = (1.0 - k.c_sigma) * p_sigma +
            std::sqrt(k.c_sigma * (2.0 - k.c_sigma) * k.mu_eff) * inv_sqrt_c_yw;
  const double ps_norm = p_sigma.norm();
  const double decay = 1.0 - std::pow(1.0 - k.c_sigma, 2.0 * static_cast<double>(state.generation + 1));
  const bool h_sigma = ps_norm / std::sqrt(decay) / k.chi_n < 1.4 + 2.0 / (d + 1.0);

  VecMap p_c(next.p_c.data(), d);
  p_c = (1.0 - k.c_c) * p_c +
        (h_sigma ? std::sqrt(k.c_c * (2.0 - k.c_c) * k.mu_eff) : 0.0) * y_w;

  MatMap c(next.covariance.data(), d, d);
  RowMatrix rank_mu = RowMatrix::Zero(d, d);
  for (int i = 0; i < k.mu; ++i) {
    rank_mu.noalias() += k.weights[i] * steps.row(i).transpose() * steps.row(i);
  }
  const double stall = h_sigma ? 0.0 : k.c_c * (2.0 - k.c_c);
  c = (1.0 - k.c_1 - k.c_mu) * c + k.c_1 * (p_c * p_c.transpose() + stall * c) + k.c_mu * rank_mu;
  c = (0.5 * (c + c.transpose())).eval();

  next.sigma = state.sigma * std::exp(std::min(1.0, (k.c_sigma / k.d_sigma) * (ps_norm / k.chi_n - 1.0)));
  if (!std::isfinite(next.sigma) || !(next.sigma > 0.0)) {
    throw NumericError("step size degenerated at generation " + std::to_string(next.generation));
  }
  next.generation = state.generation + 1;
  if (next.generation - next.eigen_generation >= eigen_interval(next)) decompose(next);
  return next;
}

CovarianceHealth covariance_health(const EsState& state) {
  const int d = state.dimension;
  const ConstMatMap c(state.covariance.data(), d, d);
  CovarianceHealth h;
  h.max_asymmetry = (c - c.transpose()).cwiseAbs().maxCoeff();
  Eigen::SelfAdjointEigenSolver<RowMatrix> solver(c, Eigen::EigenvaluesOnly);
  h.min_eigenvalue = solver.eigenvalues().minCoeff();
  return h;
}

std::vector<double> evaluate_population(std::span<const Genome> population,
                                        const FitnessFn& fitness, int workers) {
  std::vector<double> results(population.size(), kFitnessFloor);
  auto eval_one = [&](std::size_t i) {
    double f = kFitnessFloor;
    try {
      f = fitness(population[i], i);
    } catch (const std::exception&) {
      f = kFitnessFloor;
    }
    results[i] = std::isfinite(f) ? f : kFitnessFloor;
  };
  const std::size_t n_threads =
      std::min<std::size_t>(population.size(), static_cast<std::size_t>(std::max(1, workers)));
  if (n_threads <= 1) {
    for (std::size_t i = 0; i < population.size(); ++i) eval_one(i);
    return results;
  }
  std::atomic<std::size_t> next{0};
  {
    std::vector<std::jthread> pool;
    pool.reserve(n_threads);
    for (std::size_t t = 0; t < n_threads; ++t) {
      pool.emplace_back([&] {
        for (std::size_t i = next.fetch_add(1); i < population.size(); i = next.fetch_add(1)) {
          eval_one(i);
        }
      });
    }
  }
  return results;
}

RunResult run(std::span<const double> initial_mean, const FitnessFn& fitness,
              const RunOptions& options,
              const std::function<void(const GenerationStats&)>& on_generation) {
  if (options.lambda < 2) throw ConfigError("optimizer.population must be >= 2");
  if (options.max_generations < 1) throw ConfigError("optimizer.max_generations must be >= 1");
  if (options.early_stop && options.early_stop->check_generation < 1) {
    throw ConfigError("optimizer.early_stop.check_generation must be >= 1");
  }
  using Clock = std::chrono::steady_clock;

  RunResult result;
  int restart = 0;
  EsState state = EsState::initial(initial_mean, options.sigma0, options.lambda);
  int local_generation = 0;
  const double nan = std::numeric_limits<double>::quiet_NaN();

  for (int generation = 1; generation <= options.max_generations; ++generation) {
    const auto t0 = Clock::now();
    ++local_generation;
    const std::uint64_t ask_seed =
        derive_seed(derive_seed(options.seed, static_cast<std::uint64_t>(restart)),
                    static_cast<std::uint64_t>(local_generation));
    const auto population = ask(state, ask_seed);
    const auto scores = evaluate_population(population, fitness, options.workers);

    GenerationStats stats;
    stats.generation = generation;
    stats.restart = restart;
    stats.sigma = state.sigma;
    stats.mean_solution_fitness = nan;
    std::size_t best_index = 0;
    double sum = 0;
    for (std::size_t i = 0; i < scores.size(); ++i) {
      sum += scores[i];
      if (scores[i] > scores[best_index]) best_index = i;
    }
    stats.best_fitness = scores[best_index];
    stats.mean_fitness = sum / static_cast<double>(scores.size());
    if (stats.best_fitness > result.best_fitness || result.best_genome.empty()) {
      result.best_fitness = stats.best_fitness;
      result.best_genome = population[best_index];
    }
    if (options.evaluate_mean) {
      const std::vector<Genome> mean_only{state.mean};
      const double f = evaluate_population(mean_only, fitness, 1).front();
      stats.mean_solution_fitness = f;
      if (f > result.mean_solution_fitness || result.mean_solution.empty()) {
        result.mean_solution_fitness = f;
        result.mean_solution = state.mean;
      }
    }

    const bool reached = options.target_fitness && stats.best_fitness >= *options.target_fitness;
    const bool poor = !reached && options.early_stop &&
                      local_generation == options.early_stop->check_generation &&
                      stats.mean_fitness < options.early_stop->mean_fitness_floor;
    if (!reached && !poor) {
      std::vector<EvalRecord> evals(scores.size());
      for (std::size_t i = 0; i < scores.size(); ++i) evals[i] = {i, scores[i], 0, 0};
      state = tell(state, population, evals);
    }
    stats.wall_ms = std::chrono::duration<double, std::milli>(Clock::now() - t0).count();
    result.history.push_back(stats);
    if (on_generation) on_generation(stats);
    if (reached) break;
    if (poor) {
      result.restart_generations.push_back(generation);
      ++restart;
      local_generation = 0;
      state = EsState::initial(initial_mean, options.sigma0, options.lambda);
    }
  }
  result.final_state = std::move(state);
  return result;
}

}  // namespace hypernca
