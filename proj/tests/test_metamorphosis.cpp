#include <doctest.h>

#include <Eigen/Dense>
#include <cmath>

#include "hypernca/errors.hpp"
#include "hypernca/metamorphosis.hpp"
#include "oracles.hpp"

using namespace hypernca;

namespace {

const PolicySpec kSpec{{28, 28, 28, 8}, ActionMode::Continuous};
const NcaConfig kNca{2, 4, 1, false, UpdateMode::Residual};

NcaGenome random_genome(Rng& rng) { return NcaGenome(kNca, oracle::random_vector(rng, param_count(kNca), 0.3)); }

Substrate walker_seed() { return seed(shape_for_policy(kSpec.layer_sizes, kNca.channels), UniformRandomSeed{3}); }

// Projections from a dense eigendecomposition of the covariance matrix.
std::vector<std::array<double, 3>> eigen_pca(const std::vector<std::vector<double>>& snaps) {
  const int n = static_cast<int>(snaps.size()), d = static_cast<int>(snaps[0].size());
  Eigen::MatrixXd x(n, d);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < d; ++j) x(i, j) = snaps[i][j];
  }
  x.rowwise() -= x.colwise().mean();
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(x.transpose() * x);
  std::vector<std::array<double, 3>> out(n, {0.0, 0.0, 0.0});
  for (int k = 0; k < std::min(3, d); ++k) {
    const Eigen::VectorXd v = es.eigenvectors().col(d - 1 - k);
    const Eigen::VectorXd p = x * v;
    for (int i = 0; i < n; ++i) out[i][k] = p[i];
  }
  return out;
}

}  // namespace

TEST_CASE("schedule validation and read-out steps") {
  const auto s = standard_schedule();
  CHECK(readout_steps(s) == std::vector<int>{10, 30, 50});
  CHECK_NOTHROW(validate_schedule(s));
  CHECK_THROWS_AS(validate_schedule(std::vector<Stage>{}), ConfigError);
  CHECK_THROWS_AS(validate_schedule(std::vector<Stage>{{MorphologyId::M1, 0}}), ConfigError);
  CHECK_THROWS_AS(validate_schedule(std::vector<Stage>{{MorphologyId::M1, 3}, {MorphologyId::M1, 4}}),
                  ConfigError);
}

TEST_CASE("staged development chains substrates") {
  Rng rng(1);
  const auto g = random_genome(rng);
  const auto s0 = walker_seed();
  const auto dev = staged_develop(g, s0, standard_schedule(), kSpec, true);
  CHECK(dev.readout_steps == std::vector<int>{10, 30, 50});
  REQUIRE(dev.policies.size() == 3);
  REQUIRE(dev.trajectory.size() == 51);
  const int steps[] = {10, 30, 50};
  for (int k = 0; k < 3; ++k) {
    const auto direct = develop(s0, g, steps[k]);
    CHECK(dev.stage_substrates[k] == direct);
    CHECK(dev.trajectory[steps[k]] == direct);
    CHECK(dev.policies[k].flatten() == materialize(readout_channel(direct), kSpec).flatten());
  }
  CHECK(dev.trajectory.front() == s0);
}

TEST_CASE("zero genome grows three identical policies") {
  const auto s0 = walker_seed();
  const auto dev = staged_develop(NcaGenome::zeros(kNca), s0, standard_schedule(), kSpec);
  const auto seed_policy = materialize(readout_channel(s0), kSpec).flatten();
  for (const auto& p : dev.policies) CHECK(p.flatten() == seed_policy);
}

TEST_CASE("fitness_multi sums stage rewards") {
  const auto s0 = walker_seed();
  const auto g = NcaGenome::zeros(kNca);
  const MorphEvaluator zero = [](const Policy&, MorphologyId) { return 0.0; };
  CHECK(fitness_multi(g, s0, standard_schedule(), kSpec, zero) == 0.0);
  const MorphEvaluator by_morph = [](const Policy&, MorphologyId m) {
    return m == MorphologyId::M1 ? 1.5 : m == MorphologyId::M2 ? 20.0 : 300.0;
  };
  CHECK(fitness_multi(g, s0, standard_schedule(), kSpec, by_morph) == 321.5);
  const std::vector<double> w{2.0, 0.0, 1.0};
  CHECK(fitness_multi(g, s0, standard_schedule(), kSpec, by_morph, w) == 303.0);
}

TEST_CASE("fitness_multi equals separately recomputed rollouts") {
  Rng rng(2);
  const auto g = random_genome(rng);
  const auto s0 = walker_seed();
  auto spec = EnvSpec::make(EnvId::PlanarWalker, 4);
  const auto eval = walker_evaluator(spec, 1, 150);
  const auto dev = staged_develop(g, s0, standard_schedule(), kSpec);
  double want = 0.0;
  const MorphologyId ids[] = {MorphologyId::M1, MorphologyId::M2, MorphologyId::M3};
  for (int k = 0; k < 3; ++k) want += rollout(spec, MorphologySpec::standard(ids[k]), dev.policies[k], 150);
  CHECK(fitness_multi(g, s0, standard_schedule(), kSpec, eval) == want);
}

TEST_CASE("cross evaluation with stub rewards") {
  Rng rng(3);
  const auto g = random_genome(rng);
  const auto s0 = walker_seed();
  const auto dev = staged_develop(g, s0, standard_schedule(), kSpec);
  // reward = (stage index + 1) * 10, recognised from the policy itself
  const MorphEvaluator stub = [&](const Policy& p, MorphologyId) {
    for (int k = 0; k < 3; ++k) {
      if (p.flatten() == dev.policies[k].flatten()) return (k + 1) * 10.0;
    }
    return -1.0;
  };
  const auto m = cross_evaluate(g, s0, standard_schedule(), kSpec, stub);
  REQUIRE(m.size() == 3);
  for (int i = 0; i < 3; ++i) {
    for (int j = 0; j < 3; ++j) CHECK(m.at(i, j) == (i + 1) * 10.0);
  }
  CHECK(m.diagonal_dominant_rows() == 3);

  CrossEvalMatrix t{{MorphologyId::M1, MorphologyId::M2, MorphologyId::M3},
                    {5, 1, 1, 9, 2, 0, 0, 0, 7}};
  CHECK(t.diagonal_dominant_rows() == 2);
}

TEST_CASE("jacobi eigendecomposition") {
  Rng rng(4);
  for (int trial = 0; trial < 10; ++trial) {
    const int n = 2 + static_cast<int>(rng() % 9);
    Eigen::MatrixXd a = Eigen::MatrixXd::Random(n, n);
    a = (a + a.transpose()).eval();
    std::vector<double> flat(static_cast<std::size_t>(n) * n);
    for (int r = 0; r < n; ++r) {
      for (int c = 0; c < n; ++c) flat[static_cast<std::size_t>(r) * n + c] = a(r, c);
    }
    const auto eig = jacobi_eigen(flat, n);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(a);
    for (int k = 0; k < n; ++k) CHECK(eig.values[k] == doctest::Approx(es.eigenvalues()[n - 1 - k]).epsilon(1e-12));
    for (int k = 0; k < n; ++k) {
      Eigen::VectorXd v(n);
      for (int r = 0; r < n; ++r) v[r] = eig.vectors[static_cast<std::size_t>(r) * n + k];
      CHECK((a * v - eig.values[k] * v).norm() <= 1e-11);
    }
  }
}

TEST_CASE("pca degenerate inputs") {
  const std::vector<std::vector<double>> same(4, std::vector<double>{1.0, 2.0, 3.0});
  for (const auto& p : pca_trajectory(same).points) CHECK(p == std::array<double, 3>{0.0, 0.0, 0.0});

  const std::vector<std::vector<double>> two{{1.0, 0.0, 2.0, 5.0}, {3.0, 1.0, 0.0, 5.0}};
  const auto r = pca_trajectory(two);
  CHECK(r.points[0][0] == doctest::Approx(-r.points[1][0]).epsilon(1e-14));
  CHECK(std::abs(r.points[0][0]) == doctest::Approx(1.5));  // half of |(2, 1, -2, 0)|
  for (const auto& p : r.points) {
    CHECK(std::abs(p[1]) <= 1e-15);
    CHECK(std::abs(p[2]) <= 1e-15);
  }
  CHECK_THROWS_AS(pca_trajectory({{1.0}}), ShapeError);
  CHECK_THROWS_AS(pca_trajectory({{1.0, 2.0}, {1.0}}), ShapeError);
}

TEST_CASE("pca matches a dense eigendecomposition up to sign") {
  Rng rng(5);
  double worst = 0.0;
  for (int trial = 0; trial < 20; ++trial) {
    const int n = trial == 0 ? 5 : 3 + static_cast<int>(rng() % 30);
    const int d = trial == 0 ? 20 : 3 + static_cast<int>(rng() % 30);
    std::vector<std::vector<double>> snaps(n);
    for (auto& s : snaps) s = oracle::random_vector(rng, d);
    const auto got = pca_trajectory(snaps);
    const auto want = eigen_pca(snaps);
    for (int k = 0; k < 3; ++k) {
      double same = 0.0, flipped = 0.0;
      for (int i = 0; i < n; ++i) {
        same = std::max(same, std::abs(got.points[i][k] - want[i][k]));
        flipped = std::max(flipped, std::abs(got.points[i][k] + want[i][k]));
      }
      worst = std::max(worst, std::min(same, flipped));
    }
    CHECK(got.explained_variance[0] >= got.explained_variance[1]);
    CHECK(got.explained_variance[1] >= got.explained_variance[2]);
    CHECK(got.explained_variance[0] + got.explained_variance[1] + got.explained_variance[2] <=
          got.total_variance * (1 + 1e-12));
  }
  CHECK(worst <= 1e-9);
}

TEST_CASE("pca sign convention: largest loading positive") {
  Rng rng(6);
  std::vector<std::vector<double>> snaps(8);
  for (auto& s : snaps) s = oracle::random_vector(rng, 5);
  const auto r = pca_trajectory(snaps);
  for (int k = 0; k < 3; ++k) {
    double best = 0.0;
    for (const auto& l : r.loadings) {
      if (std::abs(l[k]) > std::abs(best)) best = l[k];
    }
    CHECK(best > 0.0);
  }
  auto shifted = snaps;
  for (auto& s : shifted) {
    for (double& v : s) v += 4.0;
  }
  const auto r2 = pca_trajectory(shifted);
  for (std::size_t i = 0; i < snaps.size(); ++i) {
    for (int k = 0; k < 3; ++k) CHECK(r2.points[i][k] == doctest::Approx(r.points[i][k]).epsilon(1e-9));
  }
}
