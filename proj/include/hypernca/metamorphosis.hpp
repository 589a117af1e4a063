#pragma once

// Staged development of one NCA genome across walker morphologies: grow,
// read out a policy for the first morphology, keep developing the same
// substrate for the next one, and so on.

#include <array>
#include <functional>
#include <span>
#include <vector>

#include "hypernca/envs.hpp"
#include "hypernca/nca.hpp"
#include "hypernca/policy.hpp"
#include "hypernca/substrate.hpp"

namespace hypernca {

struct Stage {
  MorphologyId morphology = MorphologyId::M1;
  int steps = 1;  ///< developmental steps before this stage's read-out
  friend bool operator==(const Stage&, const Stage&) = default;
};

/// Throws ConfigError unless non-empty, all steps positive, morphologies distinct.
void validate_schedule(std::span<const Stage> schedule);

/// (M1, 10), (M2, 20), (M3, 20).
std::vector<Stage> standard_schedule();

/// Cumulative step count at each stage's read-out.
std::vector<int> readout_steps(std::span<const Stage> schedule);

struct StagedDevelopment {
  std::vector<int> readout_steps;
  std::vector<Substrate> stage_substrates;  ///< substrate at each read-out
  std::vector<Policy> policies;
  std::vector<Substrate> trajectory;        ///< every step from the seed, if requested
};

StagedDevelopment staged_develop(const NcaGenome& g, const Substrate& seed,
                                 std::span<const Stage> schedule, const PolicySpec& spec,
                                 bool record_trajectory = false);

/// Reward of `policy` on a morphology.
using MorphEvaluator = std::function<double(const Policy& policy, MorphologyId morphology)>;

/// Mean walker return over `episodes` rollouts with env seeds spec.env_seed + k.
MorphEvaluator walker_evaluator(const EnvSpec& spec, int episodes, int max_steps = 0);

/// Weighted sum over stages of evaluator(policy_i, morphology_i); empty
/// weights mean all ones.
double fitness_multi(const NcaGenome& g, const Substrate& seed, std::span<const Stage> schedule,
                     const PolicySpec& spec, const MorphEvaluator& evaluator,
                     std::span<const double> weights = {});

struct CrossEvalMatrix {
  std::vector<MorphologyId> morphologies;
  std::vector<double> values;  ///< row-major; (i, j) = stage-i policy on morphology j

  int size() const { return static_cast<int>(morphologies.size()); }
  double at(int i, int j) const { return values[static_cast<std::size_t>(i) * size() + j]; }
  /// Rows whose diagonal entry is >= every other entry in the row.
  int diagonal_dominant_rows() const;
};

CrossEvalMatrix cross_evaluate(const NcaGenome& g, const Substrate& seed,
                               std::span<const Stage> schedule, const PolicySpec& spec,
                               const MorphEvaluator& evaluator);

/// Symmetric eigendecomposition by cyclic Jacobi rotations. Eigenvalues are
/// sorted descending; column k of `vectors` (row-major n x n) pairs with
/// values[k].
struct SymmetricEigen {
  std::vector<double> values;
  std::vector<double> vectors;
};
SymmetricEigen jacobi_eigen(std::vector<double> a, int n);

struct PcaResult {
  std::vector<std::array<double, 3>> points;  ///< one per snapshot
  std::array<double, 3> explained_variance{};
  double total_variance = 0;
  std::vector<std::array<double, 3>> loadings;  ///< per input dimension
};

/// Projects centered snapshots onto their top three principal components.
/// Components are taken from the smaller of the Gram and covariance
/// matrices; each component's largest-magnitude loading is made positive.
/// Components with no variance project to zero. Variances use the n - 1
/// normalization.
PcaResult pca_trajectory(const std::vector<std::vector<double>>& snapshots);

}  // namespace hypernca
