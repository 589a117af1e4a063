#pragma once

// Arithmetic inner loops of NCA development and policy evaluation.
//
// Each kernel exists as a scalar reference and as SIMD variants (AVX2+FMA on
// x86-64, NEON on AArch64). One table is selected at startup from the CPU's
// capabilities; HYPERNCA_KERNELS=scalar|avx2|neon overrides the choice.
// Variants agree with the scalar reference to rounding (FMA contraction and
// lane grouping differ), which the kernel tests bound at 1e-12.

#include <cstddef>
#include <string_view>
#include <vector>

namespace hypernca::kernels {

enum class Backend { Scalar, Avx2, Neon };

std::string_view backend_name(Backend b);

/// An L x W x W grid of cells; tensors over it are cell-major [cell][channel].
struct Grid {
  int layers = 1;
  int width = 1;
  std::size_t cells() const {
    return static_cast<std::size_t>(layers) * static_cast<std::size_t>(width) *
           static_cast<std::size_t>(width);
  }
};

/// Kernel-3, zero-padded 3D convolution.
/// `weights` is packed [27][in_channels][out_channels], with the 27 taps in
/// lexicographic (dl, di, dj) order over {-1, 0, 1}^3. `bias` may be null.
struct ConvTaps {
  int in_channels = 0;
  int out_channels = 0;
  const double* weights = nullptr;
  const double* bias = nullptr;
};

struct KernelTable {
  Backend backend;

  /// out[cell][o] = tanh(bias[o] + sum over valid taps and input channels).
  void (*conv3d_tanh)(Grid grid, const ConvTaps& taps, const double* in, double* out);

  /// Per-cell linear map, no activation: out[n][o] = bias[o] + sum_c in[n][c] * w[c][o].
  void (*pointwise_linear)(std::size_t n_cells, int in_channels, int out_channels,
                           const double* weights, const double* bias, const double* in,
                           double* out);

  /// y[o] = tanh(sum_i x[i] * w[i][o]) with w row-major n_in x n_out.
  void (*matvec_tanh)(const double* x, int n_in, const double* w, int n_out, double* y);

  /// x[k] = tanh(x[k]).
  void (*tanh_inplace)(double* x, std::size_t n);
};

const KernelTable& scalar_table();
const KernelTable* avx2_table();  // null when not compiled in
const KernelTable* neon_table();  // null when not compiled in

/// Backends that are compiled in and supported by this CPU.
std::vector<Backend> available_backends();

/// The table used by the library.
const KernelTable& active();

/// Switches the process-wide table. Returns false if `b` is unavailable.
bool set_backend(Backend b);

}  // namespace hypernca::kernels
