// AArch64 Advanced SIMD variant; two double lanes per register.
#include <arm_neon.h>

#include <algorithm>
#include <cmath>

#include "hypernca/kernels.hpp"
#include "neighborhood.hpp"

namespace hypernca::kernels {
namespace {

constexpr int kLanes = 2;
constexpr int kMaxBlocks = 8;

void conv3d_tanh_neon(Grid grid, const ConvTaps& taps, const double* in, double* out) {
  const int cin = taps.in_channels;
  const int cout = taps.out_channels;
  const int blocks = cout / kLanes;
  const int vec_end = blocks * kLanes;
  std::size_t cell = 0;
  for (int l = 0; l < grid.layers; ++l) {
    for (int i = 0; i < grid.width; ++i) {
      for (int j = 0; j < grid.width; ++j, ++cell) {
        const auto nb = detail::neighborhood(grid, l, i, j);
        double* dst = out + cell * cout;

        for (int b0 = 0; b0 < blocks; b0 += kMaxBlocks) {
          const int nblk = std::min(kMaxBlocks, blocks - b0);
          float64x2_t acc[kMaxBlocks];
          for (int q = 0; q < nblk; ++q) {
            acc[q] = taps.bias ? vld1q_f64(taps.bias + (b0 + q) * kLanes) : vdupq_n_f64(0.0);
          }
          for (int k = 0; k < nb.count; ++k) {
            const double* src = in + nb.cell[k] * cin;
            const double* w = taps.weights + static_cast<std::size_t>(nb.tap[k]) * cin * cout;
            for (int c = 0; c < cin; ++c) {
              const float64x2_t v = vdupq_n_f64(src[c]);
              const double* wrow = w + static_cast<std::size_t>(c) * cout + b0 * kLanes;
              for (int q = 0; q < nblk; ++q) {
                acc[q] = vfmaq_f64(acc[q], v, vld1q_f64(wrow + q * kLanes));
              }
            }
          }
          for (int q = 0; q < nblk; ++q) vst1q_f64(dst + (b0 + q) * kLanes, acc[q]);
        }

        for (int o = vec_end; o < cout; ++o) {
          double a = taps.bias ? taps.bias[o] : 0.0;
          for (int k = 0; k < nb.count; ++k) {
            const double* src = in + nb.cell[k] * cin;
            const double* w = taps.weights + static_cast<std::size_t>(nb.tap[k]) * cin * cout;
            for (int c = 0; c < cin; ++c) a += src[c] * w[static_cast<std::size_t>(c) * cout + o];
          }
          dst[o] = a;
        }
        for (int o = 0; o < cout; ++o) dst[o] = std::tanh(dst[o]);
      }
    }
  }
}

void pointwise_linear_neon(std::size_t n_cells, int cin, int cout, const double* weights,
                           const double* bias, const double* in, double* out) {
  const int vec_end = cout / kLanes * kLanes;
  for (std::size_t n = 0; n < n_cells; ++n) {
    const double* src = in + n * cin;
    double* dst = out + n * cout;
    for (int o = 0; o < vec_end; o += kLanes) {
      float64x2_t acc = bias ? vld1q_f64(bias + o) : vdupq_n_f64(0.0);
      for (int c = 0; c < cin; ++c) {
        acc = vfmaq_f64(acc, vdupq_n_f64(src[c]),
                        vld1q_f64(weights + static_cast<std::size_t>(c) * cout + o));
      }
      vst1q_f64(dst + o, acc);
    }
    for (int o = vec_end; o < cout; ++o) {
      double a = bias ? bias[o] : 0.0;
      for (int c = 0; c < cin; ++c) a += src[c] * weights[static_cast<std::size_t>(c) * cout + o];
      dst[o] = a;
    }
  }
}

void matvec_tanh_neon(const double* x, int n_in, const double* w, int n_out, double* y) {
  const int vec_end = n_out / kLanes * kLanes;
  for (int o = 0; o < vec_end; o += kLanes) {
    float64x2_t acc = vdupq_n_f64(0.0);
    for (int i = 0; i < n_in; ++i) {
      acc = vfmaq_f64(acc, vdupq_n_f64(x[i]),
                      vld1q_f64(w + static_cast<std::size_t>(i) * n_out + o));
    }
    vst1q_f64(y + o, acc);
  }
  for (int o = vec_end; o < n_out; ++o) {
    double a = 0.0;
    for (int i = 0; i < n_in; ++i) a += x[i] * w[static_cast<std::size_t>(i) * n_out + o];
    y[o] = a;
  }
  for (int o = 0; o < n_out; ++o) y[o] = std::tanh(y[o]);
}

void tanh_inplace_neon(double* x, std::size_t n) {
  for (std::size_t k = 0; k < n; ++k) x[k] = std::tanh(x[k]);
}

}  // namespace

const KernelTable* neon_table() {
  static const KernelTable table{Backend::Neon, conv3d_tanh_neon, pointwise_linear_neon,
                                 matvec_tanh_neon, tanh_inplace_neon};
  return &table;
}

}  // namespace hypernca::kernels
