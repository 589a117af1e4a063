#include <cmath>
#include <vector>

#include "hypernca/kernels.hpp"
#include "neighborhood.hpp"

namespace hypernca::kernels {
namespace {

void conv3d_tanh_scalar(Grid grid, const ConvTaps& taps, const double* in, double* out) {
  const int cin = taps.in_channels;
  const int cout = taps.out_channels;
  std::vector<double> acc(static_cast<std::size_t>(cout));
  std::size_t cell = 0;
  for (int l = 0; l < grid.layers; ++l) {
    for (int i = 0; i < grid.width; ++i) {
      for (int j = 0; j < grid.width; ++j, ++cell) {
        for (int o = 0; o < cout; ++o) acc[o] = taps.bias ? taps.bias[o] : 0.0;
        const auto nb = detail::neighborhood(grid, l, i, j);
        for (int k = 0; k < nb.count; ++k) {
          const double* src = in + nb.cell[k] * cin;
          const double* w = taps.weights + static_cast<std::size_t>(nb.tap[k]) * cin * cout;
          for (int c = 0; c < cin; ++c) {
            const double v = src[c];
            const double* wrow = w + static_cast<std::size_t>(c) * cout;
            for (int o = 0; o < cout; ++o) acc[o] += v * wrow[o];
          }
        }
        double* dst = out + cell * cout;
        for (int o = 0; o < cout; ++o) dst[o] = std::tanh(acc[o]);
      }
    }
  }
}

void pointwise_linear_scalar(std::size_t n_cells, int cin, int cout, const double* weights,
                             const double* bias, const double* in, double* out) {
  for (std::size_t n = 0; n < n_cells; ++n) {
    const double* src = in + n * cin;
    double* dst = out + n * cout;
    for (int o = 0; o < cout; ++o) dst[o] = bias ? bias[o] : 0.0;
    for (int c = 0; c < cin; ++c) {
      const double v = src[c];
      const double* wrow = weights + static_cast<std::size_t>(c) * cout;
      for (int o = 0; o < cout; ++o) dst[o] += v * wrow[o];
    }
  }
}

void matvec_tanh_scalar(const double* x, int n_in, const double* w, int n_out, double* y) {
  for (int o = 0; o < n_out; ++o) y[o] = 0.0;
  for (int i = 0; i < n_in; ++i) {
    const double v = x[i];
    const double* wrow = w + static_cast<std::size_t>(i) * n_out;
    for (int o = 0; o < n_out; ++o) y[o] += v * wrow[o];
  }
  for (int o = 0; o < n_out; ++o) y[o] = std::tanh(y[o]);
}

void tanh_inplace_scalar(double* x, std::size_t n) {
  for (std::size_t k = 0; k < n; ++k) x[k] = std::tanh(x[k]);
}

}  // namespace

const KernelTable& scalar_table() {
  static const KernelTable table{Backend::Scalar, conv3d_tanh_scalar, pointwise_linear_scalar,
                                 matvec_tanh_scalar, tanh_inplace_scalar};
  return table;
}

}  // namespace hypernca::kernels
