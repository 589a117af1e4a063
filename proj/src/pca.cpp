#include <algorithm>
#include <cmath>
#include <numeric>

#include "hypernca/errors.hpp"
#include "hypernca/metamorphosis.hpp"

namespace hypernca {

SymmetricEigen jacobi_eigen(std::vector<double> a, int n) {
  if (n < 1 || a.size() != static_cast<std::size_t>(n) * n) {
    throw ShapeError("jacobi_eigen: matrix must be n x n");
  }
  const auto at = [n](std::vector<double>& m, int r, int c) -> double& {
    return m[static_cast<std::size_t>(r) * n + c];
  };
  std::vector<double> v(static_cast<std::size_t>(n) * n, 0.0);
  for (int i = 0; i < n; ++i) at(v, i, i) = 1.0;

  for (int sweep = 0; sweep < 100; ++sweep) {
    double off = 0.0;
    double diag = 0.0;
    for (int r = 0; r < n; ++r) {
      diag += at(a, r, r) * at(a, r, r);
      for (int c = r + 1; c < n; ++c) off += at(a, r, c) * at(a, r, c);
    }
    if (off == 0.0 || off <= 1e-32 * diag) break;

    for (int p = 0; p < n - 1; ++p) {
      for (int q = p + 1; q < n; ++q) {
        const double apq = at(a, p, q);
        if (apq == 0.0) continue;
        const double theta = (at(a, q, q) - at(a, p, p)) / (2.0 * apq);
        const double t = (theta >= 0 ? 1.0 : -1.0) / (std::abs(theta) + std::sqrt(theta * theta + 1.0));
        const double c = 1.0 / std::sqrt(t * t + 1.0);
        const double s = t * c;
        for (int k = 0; k < n; ++k) {
          const double akp = at(a, k, p);
          const double akq = at(a, k, q);
          at(a, k, p) = c * akp - s * akq;
          at(a, k, q) = s * akp + c * akq;
        }
        for (int k = 0; k < n; ++k) {
          const double apk = at(a, p, k);
          const double aqk = at(a, q, k);
          at(a, p, k) = c * apk - s * aqk;
          at(a, q, k) = s * apk + c * aqk;
        }
        for (int k = 0; k < n; ++k) {
          const double vkp = at(v, k, p);
          const double vkq = at(v, k, q);
          at(v, k, p) = c * vkp - s * vkq;
          at(v, k, q) = s * vkp + c * vkq;
        }
      }
    }
  }

  std::vector<int> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](int x, int y) { return at(a, x, x) > at(a, y, y); });
  SymmetricEigen out;
  out.values.resize(n);
  out.vectors.resize(static_cast<std::size_t>(n) * n);
  for (int k = 0; k < n; ++k) {
    out.values[k] = at(a, order[k], order[k]);
    for (int r = 0; r < n; ++r) out.vectors[static_cast<std::size_t>(r) * n + k] = at(v, r, order[k]);
  }
  return out;
}

PcaResult pca_trajectory(const std::vector<std::vector<double>>& snapshots) {
  const int n = static_cast<int>(snapshots.size());
  if (n < 2) throw ShapeError("pca_trajectory: need at least 2 snapshots");
  const int d = static_cast<int>(snapshots.front().size());
  if (d < 1) throw ShapeError("pca_trajectory: empty snapshot");
  for (const auto& s : snapshots) {
    if (static_cast<int>(s.size()) != d) throw ShapeError("pca_trajectory: snapshot sizes differ");
  }

  std::vector<double> x(static_cast<std::size_t>(n) * d);
  for (int j = 0; j < d; ++j) {
    double mean = 0.0;
    for (int i = 0; i < n; ++i) mean += snapshots[i][j];
    mean /= n;
    for (int i = 0; i < n; ++i) x[static_cast<std::size_t>(i) * d + j] = snapshots[i][j] - mean;
  }
  const auto X = [&](int i, int j) { return x[static_cast<std::size_t>(i) * d + j]; };

  PcaResult out;
  out.points.assign(n, {0.0, 0.0, 0.0});
  out.loadings.assign(d, {0.0, 0.0, 0.0});
  for (double v : x) out.total_variance += v * v;
  out.total_variance /= (n - 1);

  const bool use_gram = n <= d;
  const int m = use_gram ? n : d;
  std::vector<double> sym(static_cast<std::size_t>(m) * m, 0.0);
  for (int r = 0; r < m; ++r) {
    for (int c = r; c < m; ++c) {
      double acc = 0.0;
      if (use_gram) {
        for (int k = 0; k < d; ++k) acc += X(r, k) * X(c, k);
      } else {
        for (int k = 0; k < n; ++k) acc += X(k, r) * X(k, c);
      }
      sym[static_cast<std::size_t>(r) * m + c] = acc;
      sym[static_cast<std::size_t>(c) * m + r] = acc;
    }
  }
  const SymmetricEigen eig = jacobi_eigen(std::move(sym), m);
  const double top = eig.values.empty() ? 0.0 : eig.values[0];

  for (int k = 0; k < std::min(3, m); ++k) {
    const double lambda = eig.values[k];
    if (!(lambda > 0.0) || lambda <= top * 1e-13) continue;
    std::vector<double> loading(d);
    if (use_gram) {
      const double inv = 1.0 / std::sqrt(lambda);
      for (int j = 0; j < d; ++j) {
        double acc = 0.0;
        for (int i = 0; i < n; ++i) acc += X(i, j) * eig.vectors[static_cast<std::size_t>(i) * m + k];
        loading[j] = acc * inv;
      }
    } else {
      for (int j = 0; j < d; ++j) loading[j] = eig.vectors[static_cast<std::size_t>(j) * m + k];
    }
    int arg = 0;
    for (int j = 1; j < d; ++j) {
      if (std::abs(loading[j]) > std::abs(loading[arg])) arg = j;
    }
    if (loading[arg] < 0) {
      for (double& v : loading) v = -v;
    }
    for (int j = 0; j < d; ++j) out.loadings[j][k] = loading[j];
    for (int i = 0; i < n; ++i) {
      double acc = 0.0;
      for (int j = 0; j < d; ++j) acc += X(i, j) * loading[j];
      out.points[i][k] = acc;
    }
    out.explained_variance[k] = lambda / (n - 1);
  }
  return out;
}

}  // namespace hypernca
