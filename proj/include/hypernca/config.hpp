#pragma once

// Run configuration: a flat `dotted.key = value` text format.
//
//   # comment
//   task.env = lander2d
//   optimizer.population = 64
//
// `to_text` emits every key in sorted order with shortest round-trip number
// formatting; this canonical form is what checkpoints embed. The key table is
// documented in README.md.

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "hypernca/cmaes.hpp"
#include "hypernca/envs.hpp"
#include "hypernca/linear_hyper.hpp"
#include "hypernca/metamorphosis.hpp"
#include "hypernca/nca.hpp"
#include "hypernca/substrate.hpp"

namespace hypernca {

enum class TaskKind { CartPole, Lander2D, PlanarWalker, Sphere, Rosenbrock };
enum class GenomeKind { Nca, LinearHyper, Direct };

std::string to_string(TaskKind k);
std::string to_string(GenomeKind k);

struct RunConfig {
  // task.*
  TaskKind task = TaskKind::CartPole;
  std::uint64_t env_seed = 0;
  int episodes = 1;       ///< training episodes per evaluation, env seeds env_seed + k
  int max_steps = 0;      ///< 0 = environment default
  int dimension = 10;     ///< benchmark tasks only

  // genome.*, nca.*, hyper.*
  GenomeKind genome = GenomeKind::Nca;
  NcaConfig nca;
  int nca_steps = 20;
  int hyper_embeddings = 1;
  int hyper_embedding_dim = 1;

  // policy.*, seed.*
  std::vector<int> layer_sizes;  ///< empty = {obs, obs, action}
  SeedSpec seed = UniformRandomSeed{0};

  // optimizer.*
  int population = 64;
  double sigma0 = 0.1;
  int max_generations = 300;
  std::optional<double> target_fitness;
  std::optional<EarlyStopRule> early_stop;
  bool evaluate_mean = true;

  // metamorph.*
  bool metamorph = false;
  std::vector<Stage> schedule{{MorphologyId::M1, 10}, {MorphologyId::M2, 20}, {MorphologyId::M3, 20}};
  std::vector<double> stage_weights{1.0, 1.0, 1.0};

  // run.*
  std::uint64_t master_seed = 0;
  int workers = 1;
  std::string output_dir = "out";

  bool is_benchmark() const { return task == TaskKind::Sphere || task == TaskKind::Rosenbrock; }
  EnvSpec env_spec() const;  ///< throws for benchmark tasks
  /// Policy layer sizes with the default filled in.
  std::vector<int> resolved_layer_sizes() const;

  /// Cross-field checks; error messages name the offending key.
  void validate() const;

  friend bool operator==(const RunConfig&, const RunConfig&) = default;
};

/// Parses `key = value` lines; unknown keys and malformed values throw
/// ConfigError naming the key. The result is validated.
RunConfig parse_config(const std::string& text);
RunConfig load_config(const std::string& path);

/// Canonical key-sorted text.
std::string to_text(const RunConfig& config);

/// Shortest decimal form that parses back to the same double.
std::string format_double(double v);

}  // namespace hypernca
