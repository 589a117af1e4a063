#include <cmath>
#include <numbers>

#include "hypernca/envs.hpp"
#include "hypernca/errors.hpp"
#include "hypernca/rng.hpp"

namespace hypernca {

namespace {
constexpr double kGravity = 9.8;
constexpr double kMassCart = 1.0;
constexpr double kMassPole = 0.1;
constexpr double kTotalMass = kMassCart + kMassPole;
constexpr double kHalfLength = 0.5;
constexpr double kPoleMassLength = kMassPole * kHalfLength;
constexpr double kForce = 10.0;
constexpr double kTau = 0.02;
constexpr double kThetaLimit = 12.0 * 2.0 * std::numbers::pi / 360.0;
constexpr double kXLimit = 2.4;
}  // namespace

CartPole::CartPole(EnvSpec spec) : spec_(spec) {}

std::vector<double> CartPole::reset() {
  Rng rng(spec_.env_seed);
  for (double& v : state_) v = rng.uniform(-0.05, 0.05);
  t_ = 0;
  done_ = false;
  return {state_.begin(), state_.end()};
}

StepResult CartPole::step(const Action& action) {
  if (done_) throw ContractError("CartPole::step called after the episode ended");
  const int* a = std::get_if<int>(&action);
  if (!a || *a < 0 || *a > 1) throw ShapeError("CartPole expects a discrete action in {0, 1}");

  auto [x, x_dot, theta, theta_dot] = state_;
  const double force = *a == 1 ? kForce : -kForce;
  const double cos_t = std::cos(theta);
  const double sin_t = std::sin(theta);
  const double temp = (force + kPoleMassLength * theta_dot * theta_dot * sin_t) / kTotalMass;
  const double theta_acc =
      (kGravity * sin_t - cos_t * temp) /
      (kHalfLength * (4.0 / 3.0 - kMassPole * cos_t * cos_t / kTotalMass));
  const double x_acc = temp - kPoleMassLength * theta_acc * cos_t / kTotalMass;

  x += kTau * x_dot;
  x_dot += kTau * x_acc;
  theta += kTau * theta_dot;
  theta_dot += kTau * theta_acc;
  state_ = {x, x_dot, theta, theta_dot};
  ++t_;

  const bool failed = x < -kXLimit || x > kXLimit || theta < -kThetaLimit || theta > kThetaLimit;
  done_ = failed || t_ >= spec_.max_steps;
  return {{state_.begin(), state_.end()}, 1.0, done_, {}};
}

}  // namespace hypernca
