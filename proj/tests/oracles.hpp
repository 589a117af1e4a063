#pragma once

// Slow, independent reference computations used by the tests.

#include <cmath>
#include <cstddef>
#include <vector>

#include "hypernca/nca.hpp"
#include "hypernca/policy.hpp"
#include "hypernca/rng.hpp"
#include "hypernca/substrate.hpp"

namespace oracle {

using hypernca::NcaConfig;
using hypernca::Substrate;

/// Parameter tensors of the rule in genome order, as (rows, cols) pairs.
inline std::vector<std::size_t> rule_tensor_sizes(const NcaConfig& c) {
  std::vector<std::size_t> sizes;
  int in = c.channels;
  for (int k = 0; k < c.conv_layers; ++k) {
    sizes.push_back(static_cast<std::size_t>(3 * 3 * 3) * in * c.hidden_channels);
    if (c.use_bias) sizes.push_back(c.hidden_channels);
    in = c.hidden_channels;
  }
  sizes.push_back(static_cast<std::size_t>(c.hidden_channels) * c.channels);
  if (c.use_bias) sizes.push_back(c.channels);
  return sizes;
}

inline std::size_t rule_param_count(const NcaConfig& c) {
  std::size_t n = 0;
  for (auto s : rule_tensor_sizes(c)) n += s;
  return n;
}

/// One NCA step by explicit loops over the 27-neighbourhood on the
/// [c][l][i][j] layout, reading weights by index arithmetic.
inline Substrate nca_step(const Substrate& s, const std::vector<double>& p, const NcaConfig& c) {
  const int L = s.shape.layers, W = s.shape.width, C = s.shape.channels, H = c.hidden_channels;
  // feature maps [ch][l][i][j]
  std::vector<double> feat(s.cells);
  int in = C;
  std::size_t off = 0;
  for (int k = 0; k < c.conv_layers; ++k) {
    std::vector<double> next(static_cast<std::size_t>(H) * L * W * W, 0.0);
    for (int o = 0; o < H; ++o) {
      for (int l = 0; l < L; ++l) {
        for (int i = 0; i < W; ++i) {
          for (int j = 0; j < W; ++j) {
            double acc = 0.0;
            for (int a = 0; a < 3; ++a) {
              for (int b = 0; b < 3; ++b) {
                for (int e = 0; e < 3; ++e) {
                  const int nl = l + a - 1, ni = i + b - 1, nj = j + e - 1;
                  if (nl < 0 || nl >= L || ni < 0 || ni >= W || nj < 0 || nj >= W) continue;
                  const int tap = a * 9 + b * 3 + e;
                  for (int ch = 0; ch < in; ++ch) {
                    const double w = p[off + (static_cast<std::size_t>(tap) * in + ch) * H + o];
                    acc += w * feat[((static_cast<std::size_t>(ch) * L + nl) * W + ni) * W + nj];
                  }
                }
              }
            }
            if (c.use_bias) acc += p[off + static_cast<std::size_t>(27) * in * H + o];
            next[((static_cast<std::size_t>(o) * L + l) * W + i) * W + j] = std::tanh(acc);
          }
        }
      }
    }
    off += static_cast<std::size_t>(27) * in * H + (c.use_bias ? H : 0);
    feat = std::move(next);
    in = H;
  }
  Substrate out = s;
  const std::size_t vol = s.shape.volume();
  for (int ch = 0; ch < C; ++ch) {
    for (std::size_t n = 0; n < vol; ++n) {
      double acc = 0.0;
      for (int h = 0; h < H; ++h) acc += p[off + static_cast<std::size_t>(h) * C + ch] * feat[h * vol + n];
      if (c.use_bias) acc += p[off + static_cast<std::size_t>(H) * C + ch];
      const double d = std::tanh(acc);
      double& cell = out.cells[ch * vol + n];
      cell = c.update_mode == hypernca::UpdateMode::Residual ? cell + d : d;
    }
  }
  return out;
}

/// h_{k+1} = tanh(h_k W_k) with W_k[r][c] read from the policy's row-major data.
inline std::vector<double> forward(const hypernca::Policy& p, std::vector<double> h) {
  for (const auto& m : p.weights) {
    std::vector<double> next(m.cols, 0.0);
    for (int c = 0; c < m.cols; ++c) {
      double acc = 0.0;
      for (int r = 0; r < m.rows; ++r) acc += h[r] * m.data[static_cast<std::size_t>(r) * m.cols + c];
      next[c] = std::tanh(acc);
    }
    h = std::move(next);
  }
  return h;
}

inline std::vector<double> random_vector(hypernca::Rng& rng, std::size_t n, double scale = 1.0) {
  std::vector<double> v(n);
  for (auto& x : v) x = scale * rng.uniform(-1.0, 1.0);
  return v;
}

inline double max_abs_diff(const std::vector<double>& a, const std::vector<double>& b) {
  double m = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) m = std::max(m, std::abs(a[k] - b[k]));
  return m;
}

}  // namespace oracle
