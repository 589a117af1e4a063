#include "hypernca/substrate.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "hypernca/errors.hpp"
#include "hypernca/rng.hpp"

namespace hypernca {

void SubstrateShape::validate() const {
  if (channels < 1 || layers < 1 || width < 1) {
    throw ShapeError("substrate shape must be positive, got C=" + std::to_string(channels) +
                     " L=" + std::to_string(layers) + " W=" + std::to_string(width));
  }
}

SubstrateShape shape_for_policy(std::span<const int> layer_sizes, int channels) {
  if (layer_sizes.size() < 2) {
    throw ShapeError("policy needs an input size and at least one layer, got " +
                     std::to_string(layer_sizes.size()) + " entries");
  }
  for (int n : layer_sizes) {
    if (n < 1) throw ShapeError("layer sizes must be positive");
  }
  SubstrateShape shape{channels, static_cast<int>(layer_sizes.size()) - 1,
                       *std::max_element(layer_sizes.begin(), layer_sizes.end())};
  shape.validate();
  return shape;
}

Substrate::Substrate(SubstrateShape s) : shape(s) {
  shape.validate();
  cells.assign(shape.cell_count(), 0.0);
}

bool Substrate::all_finite() const {
  return std::all_of(cells.begin(), cells.end(), [](double v) { return std::isfinite(v); });
}

Substrate seed(const SubstrateShape& shape, const SeedSpec& spec) {
  Substrate s(shape);
  if (const auto* uniform = std::get_if<UniformRandomSeed>(&spec)) {
    Rng rng(uniform->rng_seed);
    for (double& v : s.cells) v = rng.uniform(-1.0, 1.0);
  } else {
    const auto& impulse = std::get<CenterImpulseSeed>(spec);
    s.at(0, shape.layers / 2, shape.width / 2, shape.width / 2) = impulse.value;
  }
  return s;
}

Readout readout_channel(const Substrate& s) {
  Readout r;
  r.layers = s.shape.layers;
  r.width = s.shape.width;
  const auto first = s.cells.begin();
  r.values.assign(first, first + static_cast<std::ptrdiff_t>(s.shape.volume()));
  return r;
}

}  // namespace hypernca
