#include "hypernca/linear_hyper.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "hypernca/errors.hpp"

namespace hypernca {

void LinearHyperConfig::validate() const {
  if (num_embeddings < 1 || embedding_dim < 1 || target_param_count < 1) {
    throw ConfigError("linear hypernetwork sizes must be positive");
  }
  if (target_param_count % num_embeddings != 0) {
    throw ConfigError("number of embeddings (" + std::to_string(num_embeddings) +
                      ") must divide the target parameter count (" +
                      std::to_string(target_param_count) + ")");
  }
}

std::size_t baseline_param_count(const LinearHyperConfig& config) {
  config.validate();
  const auto n = static_cast<std::size_t>(config.num_embeddings);
  const auto e = static_cast<std::size_t>(config.embedding_dim);
  return n * e + e * static_cast<std::size_t>(config.chunk_size());
}

LinearHyperGenome::LinearHyperGenome(LinearHyperConfig cfg, std::vector<double> p)
    : config(cfg), params(std::move(p)) {
  const std::size_t want = baseline_param_count(config);
  if (params.size() != want) {
    throw ShapeError("hypernetwork genome has " + std::to_string(params.size()) +
                     " parameters, config requires " + std::to_string(want));
  }
  if (!std::all_of(params.begin(), params.end(), [](double v) { return std::isfinite(v); })) {
    throw NumericError("hypernetwork genome contains non-finite parameters");
  }
}

std::vector<double> generate(const LinearHyperGenome& g) {
  const auto& cfg = g.config;
  const std::size_t want = baseline_param_count(cfg);
  if (g.params.size() != want) throw ShapeError("hypernetwork genome length mismatch");
  const int n = cfg.num_embeddings;
  const int e = cfg.embedding_dim;
  const int m = cfg.chunk_size();
  const double* embeddings = g.params.data();
  const double* gen = embeddings + static_cast<std::size_t>(n) * e;

  std::vector<double> out(static_cast<std::size_t>(cfg.target_param_count), 0.0);
  for (int i = 0; i < n; ++i) {
    double* chunk = out.data() + static_cast<std::size_t>(i) * m;
    const double* z = embeddings + static_cast<std::size_t>(i) * e;
    for (int k = 0; k < e; ++k) {
      const double zk = z[k];
      const double* row = gen + static_cast<std::size_t>(k) * m;
      for (int c = 0; c < m; ++c) chunk[c] += zk * row[c];
    }
  }
  return out;
}

}  // namespace hypernca
