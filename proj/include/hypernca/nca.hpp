#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "hypernca/substrate.hpp"

namespace hypernca {

enum class UpdateMode {
  Residual,  ///< state + tanh(rule output)
  Replace,   ///< tanh(rule output)
};

/// Architecture of the cellular automaton rule: `conv_layers` kernel-3 3D
/// convolutions (the first C -> H, the rest H -> H, each followed by tanh),
/// then a per-cell dense H -> C map.
struct NcaConfig {
  int channels = 4;
  int hidden_channels = 8;
  int conv_layers = 1;
  bool use_bias = false;
  UpdateMode update_mode = UpdateMode::Residual;

  void validate() const;
  friend bool operator==(const NcaConfig&, const NcaConfig&) = default;
};

/// Genome length for `config`: 27*C*H + (conv_layers-1)*27*H*H + H*C,
/// plus one bias per conv output and per dense output when enabled.
std::size_t param_count(const NcaConfig& config);

/// Flat parameter vector of an NCA rule.
///
/// Layout, in order: for each conv layer, weights [27][in][H] (taps in
/// lexicographic (dl, di, dj) order) followed by H biases if enabled; then
/// the dense weights [H][C] followed by C biases if enabled.
struct NcaGenome {
  NcaConfig config;
  std::vector<double> params;

  NcaGenome() = default;
  NcaGenome(NcaConfig cfg, std::vector<double> p);  // validates length and finiteness
  static NcaGenome zeros(const NcaConfig& cfg);
};

/// Offsets of each parameter block inside an NCA genome.
struct NcaLayout {
  struct Conv {
    int in_channels;
    std::size_t weights;
    std::size_t bias;  // == npos without bias
  };
  static constexpr std::size_t npos = static_cast<std::size_t>(-1);

  std::vector<Conv> convs;
  std::size_t dense_weights = 0;
  std::size_t dense_bias = npos;
  std::size_t total = 0;

  explicit NcaLayout(const NcaConfig& config);
};

/// One synchronous update of every cell.
Substrate step(const Substrate& s, const NcaGenome& g);

/// `steps`-fold application of `step`. When `snapshots` is non-null it receives
/// steps + 1 substrates, the first being `s0`.
Substrate develop(const Substrate& s0, const NcaGenome& g, int steps,
                  std::vector<Substrate>* snapshots = nullptr);

}  // namespace hypernca
