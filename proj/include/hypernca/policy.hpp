#pragma once

#include <cstddef>
#include <span>
#include <variant>
#include <vector>

#include "hypernca/substrate.hpp"

namespace hypernca {

enum class ActionMode {
  Continuous,  ///< final tanh activations are the action
  Discrete,    ///< argmax of final activations, ties to the lowest index
};

/// Bias-free tanh MLP. `layer_sizes` = {inputs, layer1 outputs, ..., outputs}.
struct PolicySpec {
  std::vector<int> layer_sizes;
  ActionMode action_mode = ActionMode::Continuous;

  void validate() const;
  std::size_t num_layers() const { return layer_sizes.size() - 1; }
  std::size_t param_count() const;
  int input_dim() const { return layer_sizes.front(); }
  int output_dim() const { return layer_sizes.back(); }

  friend bool operator==(const PolicySpec&, const PolicySpec&) = default;
};

/// Row-major rows x cols matrix.
struct Matrix {
  int rows = 0;
  int cols = 0;
  std::vector<double> data;

  Matrix() = default;
  Matrix(int r, int c) : rows(r), cols(c), data(static_cast<std::size_t>(r) * c, 0.0) {}
  double& operator()(int r, int c) { return data[static_cast<std::size_t>(r) * cols + c]; }
  double operator()(int r, int c) const { return data[static_cast<std::size_t>(r) * cols + c]; }

  friend bool operator==(const Matrix&, const Matrix&) = default;
};

using Action = std::variant<int, std::vector<double>>;

struct Policy {
  PolicySpec spec;
  std::vector<Matrix> weights;  ///< weights[i] is n_i x n_{i+1}

  /// All weights concatenated layer by layer, row-major.
  std::vector<double> flatten() const;
};

/// Reads matrix i as the top-left n_i x n_{i+1} block of read-out layer i.
/// Cells outside each block are ignored.
Policy materialize(const Readout& readout, const PolicySpec& spec);

/// Builds a policy from a flat vector in `Policy::flatten` order.
Policy policy_from_flat(std::span<const double> params, const PolicySpec& spec);

/// Final-layer activations tanh(... tanh(obs * W0) ... * Wk).
std::vector<double> forward(const Policy& p, std::span<const double> obs);

/// Lowest index of the maximum.
int argmax(std::span<const double> values);

/// forward() mapped to an action according to the spec's action mode.
Action act(const Policy& p, std::span<const double> obs);

}  // namespace hypernca
