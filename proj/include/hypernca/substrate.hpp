#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <variant>
#include <vector>

namespace hypernca {

/// Dimensions of the developmental grid: C channels over an L x W x W volume.
struct SubstrateShape {
  int channels = 1;
  int layers = 1;
  int width = 1;

  std::size_t layer_cells() const {
    return static_cast<std::size_t>(width) * static_cast<std::size_t>(width);
  }
  /// Cells of one channel (L * W * W).
  std::size_t volume() const { return static_cast<std::size_t>(layers) * layer_cells(); }
  std::size_t cell_count() const { return static_cast<std::size_t>(channels) * volume(); }

  /// Row-major offset of [c, l, i, j].
  std::size_t index(int c, int l, int i, int j) const {
    return ((static_cast<std::size_t>(c) * layers + l) * width + i) * width + j;
  }

  void validate() const;

  friend bool operator==(const SubstrateShape&, const SubstrateShape&) = default;
};

/// Shape that can hold a bias-free feedforward policy with the given layer sizes.
/// `layer_sizes` lists the input width followed by each layer's output width.
SubstrateShape shape_for_policy(std::span<const int> layer_sizes, int channels);

struct UniformRandomSeed {
  std::uint64_t rng_seed = 0;
  friend bool operator==(const UniformRandomSeed&, const UniformRandomSeed&) = default;
};

struct CenterImpulseSeed {
  double value = 1.0;
  friend bool operator==(const CenterImpulseSeed&, const CenterImpulseSeed&) = default;
};

using SeedSpec = std::variant<UniformRandomSeed, CenterImpulseSeed>;

/// Cell states in row-major [c, l, i, j] order.
struct Substrate {
  SubstrateShape shape;
  std::vector<double> cells;

  Substrate() = default;
  explicit Substrate(SubstrateShape s);  // zero-filled

  double& at(int c, int l, int i, int j) { return cells[shape.index(c, l, i, j)]; }
  double at(int c, int l, int i, int j) const { return cells[shape.index(c, l, i, j)]; }

  bool all_finite() const;

  friend bool operator==(const Substrate&, const Substrate&) = default;
};

Substrate seed(const SubstrateShape& shape, const SeedSpec& spec);

/// The channel-0 slice, an [L, W, W] array.
struct Readout {
  int layers = 0;
  int width = 0;
  std::vector<double> values;

  double at(int l, int i, int j) const {
    return values[(static_cast<std::size_t>(l) * width + i) * width + j];
  }
};

Readout readout_channel(const Substrate& s);

}  // namespace hypernca
