#include "hypernca/nca.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "hypernca/errors.hpp"
#include "hypernca/kernels.hpp"

namespace hypernca {

namespace {
constexpr std::size_t kTaps = 27;
}

void NcaConfig::validate() const {
  if (channels < 1) throw ConfigError("nca.channels must be >= 1");
  if (hidden_channels < 1) throw ConfigError("nca.hidden_channels must be >= 1");
  if (conv_layers < 1) throw ConfigError("nca.conv_layers must be >= 1");
}

NcaLayout::NcaLayout(const NcaConfig& config) {
  config.validate();
  const std::size_t c = static_cast<std::size_t>(config.channels);
  const std::size_t h = static_cast<std::size_t>(config.hidden_channels);
  std::size_t offset = 0;
  for (int k = 0; k < config.conv_layers; ++k) {
    const std::size_t in = k == 0 ? c : h;
    Conv conv{static_cast<int>(in), offset, npos};
    offset += kTaps * in * h;
    if (config.use_bias) {
      conv.bias = offset;
      offset += h;
    }
    convs.push_back(conv);
  }
  dense_weights = offset;
  offset += h * c;
  if (config.use_bias) {
    dense_bias = offset;
    offset += c;
  }
  total = offset;
}

std::size_t param_count(const NcaConfig& config) { return NcaLayout(config).total; }

NcaGenome::NcaGenome(NcaConfig cfg, std::vector<double> p) : config(cfg), params(std::move(p)) {
  const std::size_t want = param_count(config);
  if (params.size() != want) {
    throw ShapeError("NCA genome has " + std::to_string(params.size()) +
                     " parameters, config requires " + std::to_string(want));
  }
  if (!std::all_of(params.begin(), params.end(), [](double v) { return std::isfinite(v); })) {
    throw NumericError("NCA genome contains non-finite parameters");
  }
}

NcaGenome NcaGenome::zeros(const NcaConfig& cfg) {
  return NcaGenome(cfg, std::vector<double>(param_count(cfg), 0.0));
}

namespace {

// Scratch buffers for repeated steps over one substrate shape.
class Stepper {
 public:
  Stepper(const SubstrateShape& shape, const NcaGenome& g)
      : shape_(shape), genome_(g), layout_(g.config), grid_{shape.layers, shape.width} {
    const std::size_t cells = grid_.cells();
    state_.resize(cells * shape.channels);
    hidden_a_.resize(cells * g.config.hidden_channels);
    hidden_b_.resize(cells * g.config.hidden_channels);
    delta_.resize(cells * shape.channels);
  }

  void run(Substrate& s, int step_index) {
    const auto& k = kernels::active();
    const std::size_t cells = grid_.cells();
    const int c = shape_.channels;
    const int h = genome_.config.hidden_channels;
    const double* p = genome_.params.data();

    // [c][cell] -> [cell][c]
    for (int ch = 0; ch < c; ++ch) {
      const double* src = s.cells.data() + static_cast<std::size_t>(ch) * cells;
      for (std::size_t n = 0; n < cells; ++n) state_[n * c + ch] = src[n];
    }

    const double* in = state_.data();
    double* out = hidden_a_.data();
    for (const auto& conv : layout_.convs) {
      kernels::ConvTaps taps{conv.in_channels, h, p + conv.weights,
                             conv.bias == NcaLayout::npos ? nullptr : p + conv.bias};
      k.conv3d_tanh(grid_, taps, in, out);
      in = out;
      out = (out == hidden_a_.data()) ? hidden_b_.data() : hidden_a_.data();
    }
    k.pointwise_linear(cells, h, c, p + layout_.dense_weights,
                       layout_.dense_bias == NcaLayout::npos ? nullptr : p + layout_.dense_bias,
                       in, delta_.data());

    k.tanh_inplace(delta_.data(), delta_.size());

    const bool residual = genome_.config.update_mode == UpdateMode::Residual;
    bool finite = true;
    for (int ch = 0; ch < c; ++ch) {
      double* dst = s.cells.data() + static_cast<std::size_t>(ch) * cells;
      for (std::size_t n = 0; n < cells; ++n) {
        const double d = delta_[n * c + ch];
        dst[n] = residual ? dst[n] + d : d;
        finite = finite && std::isfinite(dst[n]);
      }
    }
    if (!finite) {
      throw NumericError("non-finite substrate value at developmental step " +
                         std::to_string(step_index));
    }
  }

 private:
  SubstrateShape shape_;
  const NcaGenome& genome_;
  NcaLayout layout_;
  kernels::Grid grid_;
  std::vector<double> state_, hidden_a_, hidden_b_, delta_;
};

}  // namespace

Substrate step(const Substrate& s, const NcaGenome& g) { return develop(s, g, 1); }

Substrate develop(const Substrate& s0, const NcaGenome& g, int steps,
                  std::vector<Substrate>* snapshots) {
  if (steps < 0) throw ConfigError("developmental steps must be >= 0");
  if (g.config.channels != s0.shape.channels) {
    throw ConfigError("NCA has " + std::to_string(g.config.channels) +
                      " channels but substrate has " + std::to_string(s0.shape.channels));
  }
  Substrate s = s0;
  if (snapshots) {
    snapshots->clear();
    snapshots->reserve(static_cast<std::size_t>(steps) + 1);
    snapshots->push_back(s);
  }
  if (steps == 0) return s;
  Stepper stepper(s.shape, g);
  for (int t = 1; t <= steps; ++t) {
    stepper.run(s, t);
    if (snapshots) snapshots->push_back(s);
  }
  return s;
}

}  // namespace hypernca
