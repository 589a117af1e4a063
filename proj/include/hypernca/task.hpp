#pragma once

// Binds a RunConfig to a genome codec and a fitness function.

#include <cstdint>
#include <span>
#include <vector>

#include "hypernca/cmaes.hpp"
#include "hypernca/config.hpp"
#include "hypernca/envs.hpp"
#include "hypernca/metamorphosis.hpp"
#include "hypernca/nca.hpp"
#include "hypernca/policy.hpp"
#include "hypernca/substrate.hpp"

namespace hypernca {

double sphere(std::span<const double> x);      ///< -sum x^2
double rosenbrock(std::span<const double> x);  ///< negated Rosenbrock, maximum 0 at (1, ..., 1)

class Task {
 public:
  explicit Task(RunConfig config);  // validates

  const RunConfig& config() const { return config_; }
  std::size_t genome_size() const { return genome_size_; }
  /// Sphere starts at all ones, everything else at zero.
  Genome initial_mean() const;

  bool has_policy() const { return !config_.is_benchmark(); }
  const PolicySpec& policy_spec() const { return policy_spec_; }
  /// Initial NCA substrate (NCA genomes only).
  const Substrate& seed_substrate() const { return seed_; }

  NcaGenome nca_genome(std::span<const double> genome) const;
  /// Policy after `nca.steps` developmental steps (NCA), generated by the
  /// hypernetwork, or read directly from the genome.
  Policy decode(std::span<const double> genome) const;
  Policy decode(std::span<const double> genome, int nca_steps) const;

  /// One episode on M1 (walker) or the plain environment.
  double episode_return(const Policy& policy, std::uint64_t env_seed,
                        const StepObserver& observer = {}) const;

  /// Training fitness: benchmark value, the mean return over `task.episodes`
  /// episodes with env seeds env_seed + k, or the staged multi-morphology
  /// sum when metamorphosis is enabled.
  double fitness(std::span<const double> genome) const;

  MorphEvaluator morph_evaluator(int episodes) const;

 private:
  void check_length(std::span<const double> genome) const;

  RunConfig config_;
  std::size_t genome_size_ = 0;
  PolicySpec policy_spec_;
  EnvSpec env_spec_;
  Substrate seed_;
};

}  // namespace hypernca
