#include <doctest.h>

#include <cmath>
#include <set>

#include "hypernca/envs.hpp"
#include "hypernca/errors.hpp"
#include "oracles.hpp"

using namespace hypernca;

namespace {

Policy zero_policy(const EnvSpec& spec) {
  const PolicySpec ps{{spec.obs_dim, spec.obs_dim, spec.action_dim}, spec.action_mode};
  return policy_from_flat(std::vector<double>(ps.param_count(), 0.0), ps);
}

double non_leg_potential(const std::vector<double>& o) {
  return -100.0 * std::hypot(o[0], o[1]) - 100.0 * std::hypot(o[2], o[3]) - 100.0 * std::abs(o[4]);
}

}  // namespace

TEST_CASE("spec dimensions") {
  const auto cp = EnvSpec::make(EnvId::CartPole);
  CHECK(cp.obs_dim == 4);
  CHECK(cp.action_dim == 2);
  CHECK(cp.max_steps == 500);
  const auto ld = EnvSpec::make(EnvId::Lander2D);
  CHECK(ld.obs_dim == 8);
  CHECK(ld.action_dim == 4);
  CHECK(ld.action_mode == ActionMode::Discrete);
  const auto wk = EnvSpec::make(EnvId::PlanarWalker);
  CHECK(wk.obs_dim == 28);
  CHECK(wk.action_dim == 8);
  CHECK(wk.action_mode == ActionMode::Continuous);
  CHECK(wk.max_steps == 1000);
  CHECK(env_id_from_string("lander2d") == EnvId::Lander2D);
  CHECK_THROWS_AS(env_id_from_string("ant"), ConfigError);
}

TEST_CASE("reset is deterministic per seed") {
  for (EnvId id : {EnvId::CartPole, EnvId::Lander2D, EnvId::PlanarWalker}) {
    const auto spec = EnvSpec::make(id, 5);
    CHECK(make_env(spec)->reset() == make_env(spec)->reset());
  }
}

TEST_CASE("lander terrain depends on the seed, pad is flat") {
  Lander2D a(EnvSpec::make(EnvId::Lander2D, 1)), b(EnvSpec::make(EnvId::Lander2D, 2));
  a.reset();
  b.reset();
  CHECK(a.terrain() != b.terrain());
  for (double x = a.pad_left(); x <= a.pad_right(); x += 0.25) CHECK(a.terrain_height(x) == Lander2D::kPadY);
}

TEST_CASE("lander engine costs") {
  Lander2D env(EnvSpec::make(EnvId::Lander2D, 3));
  env.reset();
  auto r = env.step(Action{2});
  CHECK(r.terms.main_engine == -0.3);
  CHECK(r.terms.side_engine == 0.0);
  r = env.step(Action{1});
  CHECK(r.terms.side_engine == -0.03);
  CHECK(r.terms.main_engine == 0.0);
  r = env.step(Action{0});
  CHECK(r.terms.main_engine == 0.0);
  CHECK(r.terms.side_engine == 0.0);
  CHECK(r.reward == r.terms.shaping + r.terms.main_engine + r.terms.side_engine + r.terms.terminal);
}

TEST_CASE("lander engine penalties accumulate linearly") {
  Lander2D env(EnvSpec::make(EnvId::Lander2D, 4));
  env.reset();
  Rng rng(1);
  int main_frames = 0, side_frames = 0;
  double main_total = 0.0, side_total = 0.0;
  for (int t = 0; t < 1000; ++t) {
    const int a = static_cast<int>(rng() % 4);
    const auto r = env.step(Action{a});
    main_frames += a == 2;
    side_frames += a == 1 || a == 3;
    main_total += r.terms.main_engine;
    side_total += r.terms.side_engine;
    if (r.done) break;
  }
  CHECK(main_total == doctest::Approx(-0.3 * main_frames).epsilon(1e-12));
  CHECK(side_total == doctest::Approx(-0.03 * side_frames).epsilon(1e-12));
}

TEST_CASE("lander touchdown: +10 per leg, then +100 at rest") {
  Lander2D env(EnvSpec::make(EnvId::Lander2D, 0));
  env.reset();
  Lander2D::Body b;
  b.x = Lander2D::kWorldWidth / 2.0;
  b.y = Lander2D::resting_height(Lander2D::kPadY) + 0.12;
  env.place(b);
  double terminal = 0.0;
  bool saw_contact = false;
  std::vector<double> last;
  for (int t = 0; t < 300; ++t) {
    const auto before = last;
    const auto r = env.step(Action{0});
    if (!saw_contact && r.observation[6] > 0.5 && r.observation[7] > 0.5) {
      saw_contact = true;
      REQUIRE_FALSE(before.empty());
      const double leg_part = r.terms.shaping - (non_leg_potential(r.observation) - non_leg_potential(before));
      CHECK(leg_part == doctest::Approx(20.0).epsilon(1e-12));
    }
    last = r.observation;
    terminal += r.terms.terminal;
    if (r.done) break;
  }
  CHECK(saw_contact);
  CHECK(terminal == 100.0);
}

TEST_CASE("lander crash costs 100") {
  Lander2D env(EnvSpec::make(EnvId::Lander2D, 0));
  env.reset();
  Lander2D::Body b;
  b.x = Lander2D::kWorldWidth / 2.0;
  b.y = Lander2D::kPadY + 2.0;
  b.vy = -8.0;
  env.place(b);
  double terminal = 0.0;
  for (int t = 0; t < 200; ++t) {
    const auto r = env.step(Action{0});
    terminal += r.terms.terminal;
    if (r.done) break;
  }
  CHECK(terminal == -100.0);
  CHECK_THROWS_AS(env.step(Action{0}), ContractError);
}

TEST_CASE("random lander policies give varied returns") {
  const auto spec = EnvSpec::make(EnvId::Lander2D, 0);
  const PolicySpec ps{{8, 8, 4}, ActionMode::Discrete};
  Rng rng(5);
  std::set<double> returns;
  for (int k = 0; k < 64; ++k) {
    returns.insert(rollout(spec, std::nullopt, policy_from_flat(oracle::random_vector(rng, ps.param_count()), ps)));
  }
  CHECK(returns.size() >= 2);
}

TEST_CASE("cartpole zero policy regression") {
  const auto spec = EnvSpec::make(EnvId::CartPole, 0);
  const double r = rollout(spec, std::nullopt, zero_policy(spec));
  CHECK(r == 10.0);
  CHECK(rollout(spec, std::nullopt, zero_policy(spec)) == r);

  CartPole env(spec);
  env.reset();
  StepResult s;
  do {
    s = env.step(Action{0});
  } while (!s.done);
  CHECK_THROWS_AS(env.step(Action{0}), ContractError);
  CartPole fresh(spec);
  fresh.reset();
  CHECK_THROWS_AS(fresh.step(Action{5}), ShapeError);
}

TEST_CASE("cartpole initial state range") {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    CartPole env(EnvSpec::make(EnvId::CartPole, seed));
    for (double v : env.reset()) {
      CHECK(v > -0.05);
      CHECK(v < 0.05);
    }
  }
}

TEST_CASE("walker morphologies") {
  const auto m3 = MorphologySpec::standard(MorphologyId::M3);
  PlanarWalker w3(EnvSpec::make(EnvId::PlanarWalker), m3);
  w3.reset();
  CHECK(w3.segment_lengths(0) == std::array<double, 2>{0.2, 0.2});
  CHECK(w3.segment_lengths(1) == std::array<double, 2>{0.2, 0.2});
  CHECK(w3.segment_lengths(2) == std::array<double, 2>{0.4, 0.4});
  CHECK(w3.segment_lengths(3) == std::array<double, 2>{0.4, 0.4});

  PlanarWalker w2(EnvSpec::make(EnvId::PlanarWalker), MorphologySpec::standard(MorphologyId::M2));
  CHECK(w2.segment_lengths(0) == std::array<double, 2>{0.2, 0.2});
  CHECK(w2.segment_lengths(1) == std::array<double, 2>{0.4, 0.4});
  CHECK(w2.segment_lengths(2) == std::array<double, 2>{0.4, 0.4});
  CHECK(w2.segment_lengths(3) == std::array<double, 2>{0.2, 0.2});

  const auto m1 = MorphologySpec::standard(MorphologyId::M1);
  for (double s : m1.leg_scale) CHECK(s == 1.0);
  for (bool on : m1.actuator_enabled) CHECK(on);
  CHECK(morphology_from_string("M2") == MorphologyId::M2);
  CHECK_THROWS_AS(morphology_from_string("M4"), ConfigError);
}

TEST_CASE("walker reward telescopes to the torso displacement") {
  PlanarWalker env(EnvSpec::make(EnvId::PlanarWalker, 2), MorphologySpec::standard(MorphologyId::M1));
  env.reset();
  const double x0 = env.torso().x;
  Rng rng(3);
  double total = 0.0;
  StepResult r;
  do {
    r = env.step(Action{oracle::random_vector(rng, 8)});
    total += r.reward;
    for (double v : r.observation) REQUIRE(std::isfinite(v));
  } while (!r.done);
  CHECK(std::abs(total - (env.torso().x - x0)) <= 1e-9);
  CHECK_THROWS_AS(env.step(Action{std::vector<double>(8, 0.0)}), ContractError);
  PlanarWalker fresh(EnvSpec::make(EnvId::PlanarWalker), MorphologySpec{});
  fresh.reset();
  CHECK_THROWS_AS(fresh.step(Action{1}), ShapeError);
  CHECK_THROWS_AS(fresh.step(Action{std::vector<double>(7, 0.0)}), ShapeError);
}

TEST_CASE("walker passive drift") {
  const auto spec = EnvSpec::make(EnvId::PlanarWalker, 0);
  const auto zero = zero_policy(spec);
  CHECK(std::abs(rollout(spec, MorphologySpec::standard(MorphologyId::M1), zero)) <= 0.01);
  CHECK(std::abs(rollout(spec, MorphologySpec::standard(MorphologyId::M2), zero)) <= 0.01);
  // The front-truncated body tips forward onto its short legs and slides a little.
  CHECK(std::abs(rollout(spec, MorphologySpec::standard(MorphologyId::M3), zero)) <= 0.5);
}

TEST_CASE("disabled actuators ignore commands") {
  auto morph = MorphologySpec::standard(MorphologyId::M1);
  morph.actuator_enabled[0] = false;
  morph.actuator_enabled[5] = false;
  PlanarWalker a(EnvSpec::make(EnvId::PlanarWalker, 1), morph), b(EnvSpec::make(EnvId::PlanarWalker, 1), morph);
  a.reset();
  b.reset();
  Rng rng(4);
  for (int t = 0; t < 200; ++t) {
    auto u = oracle::random_vector(rng, 8);
    auto v = u;
    v[0] = 0.0;
    v[5] = -0.9;
    const auto ra = a.step(Action{u});
    const auto rb = b.step(Action{v});
    REQUIRE(ra.observation == rb.observation);
  }
  CHECK(a.joint_angles()[0] == b.joint_angles()[0]);
}

TEST_CASE("rollout is pure and checks dimensions") {
  const auto spec = EnvSpec::make(EnvId::PlanarWalker, 9);
  const PolicySpec ps{{28, 12, 8}, ActionMode::Continuous};
  Rng rng(6);
  const auto pol = policy_from_flat(oracle::random_vector(rng, ps.param_count()), ps);
  const auto m = MorphologySpec::standard(MorphologyId::M2);
  CHECK(rollout(spec, m, pol, 300) == rollout(spec, m, pol, 300));
  const PolicySpec wrong{{28, 12, 7}, ActionMode::Continuous};
  CHECK_THROWS_AS(rollout(spec, m, policy_from_flat(std::vector<double>(wrong.param_count(), 0.0), wrong)),
                  ShapeError);
  const PolicySpec discrete{{28, 8}, ActionMode::Discrete};
  CHECK_THROWS_AS(rollout(spec, m, policy_from_flat(std::vector<double>(discrete.param_count(), 0.0), discrete)),
                  ShapeError);
}
