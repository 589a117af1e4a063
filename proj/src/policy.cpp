#include "hypernca/policy.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "hypernca/errors.hpp"
#include "hypernca/kernels.hpp"

namespace hypernca {

void PolicySpec::validate() const {
  if (layer_sizes.size() < 2) {
    throw ShapeError("policy needs at least an input and an output size");
  }
  for (int n : layer_sizes) {
    if (n < 1) throw ShapeError("policy layer sizes must be positive");
  }
}

std::size_t PolicySpec::param_count() const {
  std::size_t total = 0;
  for (std::size_t i = 0; i + 1 < layer_sizes.size(); ++i) {
    total += static_cast<std::size_t>(layer_sizes[i]) * layer_sizes[i + 1];
  }
  return total;
}

std::vector<double> Policy::flatten() const {
  std::vector<double> out;
  out.reserve(spec.param_count());
  for (const auto& m : weights) out.insert(out.end(), m.data.begin(), m.data.end());
  return out;
}

Policy materialize(const Readout& readout, const PolicySpec& spec) {
  spec.validate();
  if (static_cast<std::size_t>(readout.layers) != spec.num_layers()) {
    throw ShapeError("read-out has " + std::to_string(readout.layers) + " layers, policy needs " +
                     std::to_string(spec.num_layers()));
  }
  const int widest = *std::max_element(spec.layer_sizes.begin(), spec.layer_sizes.end());
  if (readout.width < widest) {
    throw ShapeError("read-out width " + std::to_string(readout.width) +
                     " is smaller than the widest policy layer " + std::to_string(widest));
  }
  Policy p{spec, {}};
  p.weights.reserve(spec.num_layers());
  for (std::size_t l = 0; l < spec.num_layers(); ++l) {
    Matrix m(spec.layer_sizes[l], spec.layer_sizes[l + 1]);
    for (int r = 0; r < m.rows; ++r) {
      for (int c = 0; c < m.cols; ++c) m(r, c) = readout.at(static_cast<int>(l), r, c);
    }
    p.weights.push_back(std::move(m));
  }
  return p;
}

Policy policy_from_flat(std::span<const double> params, const PolicySpec& spec) {
  spec.validate();
  if (params.size() != spec.param_count()) {
    throw ShapeError("flat policy has " + std::to_string(params.size()) +
                     " values, spec needs " + std::to_string(spec.param_count()));
  }
  Policy p{spec, {}};
  std::size_t offset = 0;
  for (std::size_t l = 0; l < spec.num_layers(); ++l) {
    Matrix m(spec.layer_sizes[l], spec.layer_sizes[l + 1]);
    std::copy_n(params.begin() + static_cast<std::ptrdiff_t>(offset), m.data.size(),
                m.data.begin());
    offset += m.data.size();
    p.weights.push_back(std::move(m));
  }
  return p;
}

std::vector<double> forward(const Policy& p, std::span<const double> obs) {
  if (obs.size() != static_cast<std::size_t>(p.spec.input_dim())) {
    throw ShapeError("observation has " + std::to_string(obs.size()) +
                     " values, policy expects " + std::to_string(p.spec.input_dim()));
  }
  if (!std::all_of(obs.begin(), obs.end(), [](double v) { return std::isfinite(v); })) {
    throw NumericError("non-finite observation");
  }
  const auto& k = kernels::active();
  std::vector<double> h(obs.begin(), obs.end());
  std::vector<double> next;
  for (const auto& w : p.weights) {
    next.resize(static_cast<std::size_t>(w.cols));
    k.matvec_tanh(h.data(), w.rows, w.data.data(), w.cols, next.data());
    h.swap(next);
  }
  return h;
}

int argmax(std::span<const double> values) {
  if (values.empty()) throw ShapeError("argmax of an empty vector");
  return static_cast<int>(std::max_element(values.begin(), values.end()) - values.begin());
}

Action act(const Policy& p, std::span<const double> obs) {
  auto out = forward(p, obs);
  if (p.spec.action_mode == ActionMode::Discrete) return argmax(out);
  return out;
}

}  // namespace hypernca
