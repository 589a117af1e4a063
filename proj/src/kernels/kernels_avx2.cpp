// Compiled with -mavx2 -mfma; only reached after a runtime CPU check.
#include <immintrin.h>

#include <algorithm>
#include <cmath>

#include "hypernca/kernels.hpp"
#include "neighborhood.hpp"

namespace hypernca::kernels {
namespace {

constexpr int kLanes = 4;
constexpr int kMaxBlocks = 4;  // accumulators kept in registers per pass

// tanh(x) = sign(x) * (1 - 2 / (exp(2|x|) + 1)); exp by range reduction to
// |r| <= ln2/2 and a degree-13 Taylor polynomial. Absolute error ~1e-16.
inline __m256d tanh4(__m256d x) {
  const __m256d sign_mask = _mm256_set1_pd(-0.0);
  const __m256d sign = _mm256_and_pd(x, sign_mask);
  // Operand order keeps NaN: minpd returns its second operand when either is NaN.
  const __m256d y = _mm256_min_pd(_mm256_set1_pd(40.0),
                                  _mm256_mul_pd(_mm256_andnot_pd(sign_mask, x), _mm256_set1_pd(2.0)));

  const __m256d n = _mm256_round_pd(_mm256_mul_pd(y, _mm256_set1_pd(1.4426950408889634)),
                                    _MM_FROUND_TO_NEAREST_INT | _MM_FROUND_NO_EXC);
  __m256d r = _mm256_fnmadd_pd(n, _mm256_set1_pd(6.93147180369123816490e-01), y);
  r = _mm256_fnmadd_pd(n, _mm256_set1_pd(1.90821492927058770002e-10), r);

  static constexpr double kInvFact[] = {
      1.0 / 6227020800.0, 1.0 / 479001600.0, 1.0 / 39916800.0, 1.0 / 3628800.0, 1.0 / 362880.0,
      1.0 / 40320.0,      1.0 / 5040.0,      1.0 / 720.0,      1.0 / 120.0,     1.0 / 24.0,
      1.0 / 6.0,          0.5,               1.0,              1.0};
  __m256d p = _mm256_set1_pd(kInvFact[0]);
  for (int k = 1; k < 14; ++k) p = _mm256_fmadd_pd(p, r, _mm256_set1_pd(kInvFact[k]));

  const __m128i ni = _mm256_cvtpd_epi32(n);
  const __m256i bits = _mm256_slli_epi64(_mm256_add_epi64(_mm256_cvtepi32_epi64(ni), _mm256_set1_epi64x(1023)), 52);
  const __m256d e = _mm256_mul_pd(p, _mm256_castsi256_pd(bits));

  const __m256d one = _mm256_set1_pd(1.0);
  const __m256d t = _mm256_sub_pd(one, _mm256_div_pd(_mm256_set1_pd(2.0), _mm256_add_pd(e, one)));
  return _mm256_or_pd(t, sign);
}

void tanh_inplace_avx2(double* x, std::size_t n) {
  std::size_t k = 0;
  for (; k + kLanes <= n; k += kLanes) _mm256_storeu_pd(x + k, tanh4(_mm256_loadu_pd(x + k)));
  if (k < n) {
    alignas(32) double buf[kLanes] = {0.0, 0.0, 0.0, 0.0};
    for (std::size_t m = k; m < n; ++m) buf[m - k] = x[m];
    _mm256_store_pd(buf, tanh4(_mm256_load_pd(buf)));
    for (std::size_t m = k; m < n; ++m) x[m] = buf[m - k];
  }
}

struct TapRange {
  int lo, hi;  // inclusive offsets in {-1, 0, 1} that stay inside [0, n)
};

inline TapRange tap_range(int x, int n) { return {x > 0 ? -1 : 0, x + 1 < n ? 1 : 0}; }

// NB blocks of four output channels accumulated in registers. Two
// accumulator sets alternate across input channels to shorten FMA chains.
template <int NB>
void conv_blocks(Grid grid, const ConvTaps& taps, const double* in, int l, int i, int j, int b0,
                 double* dst) {
  const int cin = taps.in_channels;
  const int cout = taps.out_channels;
  __m256d acc0[NB], acc1[NB];
  for (int q = 0; q < NB; ++q) {
    acc0[q] = taps.bias ? _mm256_loadu_pd(taps.bias + (b0 + q) * kLanes) : _mm256_setzero_pd();
    acc1[q] = _mm256_setzero_pd();
  }
  const TapRange rl = tap_range(l, grid.layers), ri = tap_range(i, grid.width),
                 rj = tap_range(j, grid.width);
  for (int dl = rl.lo; dl <= rl.hi; ++dl) {
    for (int di = ri.lo; di <= ri.hi; ++di) {
      const std::size_t row = (static_cast<std::size_t>(l + dl) * grid.width + (i + di)) * grid.width;
      const int tap_row = (dl + 1) * 9 + (di + 1) * 3 + 1;
      for (int dj = rj.lo; dj <= rj.hi; ++dj) {
        const double* src = in + (row + j + dj) * cin;
        const double* w = taps.weights + static_cast<std::size_t>(tap_row + dj) * cin * cout + b0 * kLanes;
        int c = 0;
        for (; c + 1 < cin; c += 2) {
          const __m256d v0 = _mm256_broadcast_sd(src + c);
          const __m256d v1 = _mm256_broadcast_sd(src + c + 1);
          const double* w0 = w + static_cast<std::size_t>(c) * cout;
          const double* w1 = w0 + cout;
          for (int q = 0; q < NB; ++q) {
            acc0[q] = _mm256_fmadd_pd(v0, _mm256_loadu_pd(w0 + q * kLanes), acc0[q]);
            acc1[q] = _mm256_fmadd_pd(v1, _mm256_loadu_pd(w1 + q * kLanes), acc1[q]);
          }
        }
        if (c < cin) {
          const __m256d v0 = _mm256_broadcast_sd(src + c);
          const double* w0 = w + static_cast<std::size_t>(c) * cout;
          for (int q = 0; q < NB; ++q) {
            acc0[q] = _mm256_fmadd_pd(v0, _mm256_loadu_pd(w0 + q * kLanes), acc0[q]);
          }
        }
      }
    }
  }
  for (int q = 0; q < NB; ++q) {
    _mm256_storeu_pd(dst + (b0 + q) * kLanes, _mm256_add_pd(acc0[q], acc1[q]));
  }
}

void conv3d_tanh_avx2(Grid grid, const ConvTaps& taps, const double* in, double* out) {
  const int cin = taps.in_channels;
  const int cout = taps.out_channels;
  const int blocks = cout / kLanes;
  const int vec_end = blocks * kLanes;
  std::size_t cell = 0;
  for (int l = 0; l < grid.layers; ++l) {
    for (int i = 0; i < grid.width; ++i) {
      for (int j = 0; j < grid.width; ++j, ++cell) {
        double* dst = out + cell * cout;

        for (int b0 = 0; b0 < blocks; b0 += kMaxBlocks) {
          switch (std::min(kMaxBlocks, blocks - b0)) {
            case 1:
              conv_blocks<1>(grid, taps, in, l, i, j, b0, dst);
              break;
            case 2:
              conv_blocks<2>(grid, taps, in, l, i, j, b0, dst);
              break;
            case 3:
              conv_blocks<3>(grid, taps, in, l, i, j, b0, dst);
              break;
            default:
              conv_blocks<4>(grid, taps, in, l, i, j, b0, dst);
              break;
          }
        }

        if (vec_end < cout) {
          const auto nb = detail::neighborhood(grid, l, i, j);
          for (int o = vec_end; o < cout; ++o) {
            double a = taps.bias ? taps.bias[o] : 0.0;
            for (int k = 0; k < nb.count; ++k) {
              const double* src = in + nb.cell[k] * cin;
              const double* w = taps.weights + static_cast<std::size_t>(nb.tap[k]) * cin * cout;
              for (int c = 0; c < cin; ++c) a += src[c] * w[static_cast<std::size_t>(c) * cout + o];
            }
            dst[o] = a;
          }
        }
        tanh_inplace_avx2(dst, static_cast<std::size_t>(cout));
      }
    }
  }
}

void pointwise_linear_avx2(std::size_t n_cells, int cin, int cout, const double* weights,
                           const double* bias, const double* in, double* out) {
  const int vec_end = cout / kLanes * kLanes;
  for (std::size_t n = 0; n < n_cells; ++n) {
    const double* src = in + n * cin;
    double* dst = out + n * cout;
    for (int o = 0; o < vec_end; o += kLanes) {
      __m256d acc = bias ? _mm256_loadu_pd(bias + o) : _mm256_setzero_pd();
      for (int c = 0; c < cin; ++c) {
        acc = _mm256_fmadd_pd(_mm256_broadcast_sd(src + c),
                              _mm256_loadu_pd(weights + static_cast<std::size_t>(c) * cout + o),
                              acc);
      }
      _mm256_storeu_pd(dst + o, acc);
    }
    for (int o = vec_end; o < cout; ++o) {
      double a = bias ? bias[o] : 0.0;
      for (int c = 0; c < cin; ++c) a += src[c] * weights[static_cast<std::size_t>(c) * cout + o];
      dst[o] = a;
    }
  }
}

void matvec_tanh_avx2(const double* x, int n_in, const double* w, int n_out, double* y) {
  const int vec_end = n_out / kLanes * kLanes;
  for (int o = 0; o < vec_end; o += kLanes) {
    __m256d acc = _mm256_setzero_pd();
    for (int i = 0; i < n_in; ++i) {
      acc = _mm256_fmadd_pd(_mm256_broadcast_sd(x + i),
                            _mm256_loadu_pd(w + static_cast<std::size_t>(i) * n_out + o), acc);
    }
    _mm256_storeu_pd(y + o, acc);
  }
  for (int o = vec_end; o < n_out; ++o) {
    double a = 0.0;
    for (int i = 0; i < n_in; ++i) a += x[i] * w[static_cast<std::size_t>(i) * n_out + o];
    y[o] = a;
  }
  tanh_inplace_avx2(y, static_cast<std::size_t>(n_out));
}

}  // namespace

const KernelTable* avx2_table() {
  static const KernelTable table{Backend::Avx2, conv3d_tanh_avx2, pointwise_linear_avx2,
                                 matvec_tanh_avx2, tanh_inplace_avx2};
  return &table;
}

}  // namespace hypernca::kernels
