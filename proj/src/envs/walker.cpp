#include <algorithm>
#include <cmath>
#include <numbers>

#include "hypernca/envs.hpp"
#include "hypernca/errors.hpp"
#include "hypernca/rng.hpp"

namespace hypernca {

namespace {

constexpr double kGravity = 9.81;
constexpr double kTorsoMass = 6.0;
constexpr double kTorsoInertia = 2.0;
constexpr double kTorsoHalfLength = 0.5;  // hips sit at the torso ends
constexpr double kBellyDepth = 0.05;

constexpr double kServoGain = 10.0;     // 1/s, joint rate per rad of error
constexpr double kMaxJointRate = 5.0;   // rad/s

constexpr double kGroundStiffness = 4000.0;
constexpr double kGroundDamping = 150.0;
constexpr double kGroundFriction = 300.0;  // viscous, capped by mu * normal force
constexpr double kFrictionMu = 1.0;
constexpr double kMaxNormalForce = 150.0;  // per contact; stands in for actuator torque limits

// Torso velocities are clamped to keep observations finite under any command.
constexpr double kVelocityClamp = 50.0;

constexpr double hip_offset(int leg) { return leg < 2 ? kTorsoHalfLength : -kTorsoHalfLength; }

}  // namespace

PlanarWalker::PlanarWalker(EnvSpec spec, MorphologySpec morph) : spec_(spec), morph_(morph) {
  for (double s : morph_.leg_scale) {
    if (!(s >= 0.0 && s <= 1.0)) throw ConfigError("leg length scale must lie in [0, 1]");
  }
}

std::array<double, 2> PlanarWalker::segment_lengths(int leg) const {
  const double l = kSegmentLength * morph_.leg_scale.at(static_cast<std::size_t>(leg));
  return {l, l};
}

std::vector<double> PlanarWalker::reset() {
  Rng rng(spec_.env_seed);
  for (double& q : q_) q = rng.uniform(-0.02, 0.02);
  qdot_.fill(0.0);
  target_.fill(0.0);
  contact_.fill(false);
  double longest = 0.0;
  for (int k = 0; k < kLegs; ++k) {
    const auto seg = segment_lengths(k);
    longest = std::max(longest, seg[0] + seg[1]);
  }
  torso_ = {};
  torso_.y = std::max(longest, kBellyDepth) + 0.02;
  t_ = 0;
  done_ = false;
  return observe();
}

PlanarWalker::Point PlanarWalker::foot(int leg) const {
  const auto seg = segment_lengths(leg);
  const double hx = hip_offset(leg);
  const double c = std::cos(torso_.pitch), s = std::sin(torso_.pitch);
  const double hip_x = torso_.x + hx * c;
  const double hip_y = torso_.y + hx * s;
  const double hip_vx = torso_.vx - torso_.omega * hx * s;
  const double hip_vy = torso_.vy + torso_.omega * hx * c;
  const double th1 = torso_.pitch + q_[2 * leg];
  const double th2 = th1 + q_[2 * leg + 1];
  const double w1 = torso_.omega + qdot_[2 * leg];
  const double w2 = w1 + qdot_[2 * leg + 1];
  return {hip_x + seg[0] * std::sin(th1) + seg[1] * std::sin(th2),
          hip_y - seg[0] * std::cos(th1) - seg[1] * std::cos(th2),
          hip_vx + seg[0] * std::cos(th1) * w1 + seg[1] * std::cos(th2) * w2,
          hip_vy + seg[0] * std::sin(th1) * w1 + seg[1] * std::sin(th2) * w2};
}

void PlanarWalker::substep(double dt) {
  for (int a = 0; a < kActuators; ++a) {
    const double goal = morph_.actuator_enabled[a] ? target_[a] : 0.0;
    qdot_[a] = std::clamp(kServoGain * (goal - q_[a]), -kMaxJointRate, kMaxJointRate);
    q_[a] += qdot_[a] * dt;
  }

  double fx = 0.0, fy = -kTorsoMass * kGravity, torque = 0.0;
  auto apply_contact = [&](const Point& p) -> bool {
    const double pen = -p.y;
    if (pen <= 0.0) return false;
    const double fn =
        std::clamp(kGroundStiffness * pen - kGroundDamping * p.vy, 0.0, kMaxNormalForce);
    const double ft = std::clamp(-kGroundFriction * p.vx, -kFrictionMu * fn, kFrictionMu * fn);
    const double rx = p.x - torso_.x, ry = p.y - torso_.y;
    fx += ft;
    fy += fn;
    torque += rx * fn - ry * ft;
    return true;
  };
  for (int k = 0; k < kLegs; ++k) contact_[k] = apply_contact(foot(k));

  const double c = std::cos(torso_.pitch), s = std::sin(torso_.pitch);
  for (double end : {kTorsoHalfLength, -kTorsoHalfLength}) {
    const double lx = end, ly = -kBellyDepth;
    const double rx = c * lx - s * ly, ry = s * lx + c * ly;
    apply_contact({torso_.x + rx, torso_.y + ry, torso_.vx - torso_.omega * ry,
                   torso_.vy + torso_.omega * rx});
  }

  torso_.vx = std::clamp(torso_.vx + fx / kTorsoMass * dt, -kVelocityClamp, kVelocityClamp);
  torso_.vy = std::clamp(torso_.vy + fy / kTorsoMass * dt, -kVelocityClamp, kVelocityClamp);
  torso_.omega =
      std::clamp(torso_.omega + torque / kTorsoInertia * dt, -kVelocityClamp, kVelocityClamp);
  torso_.x += torso_.vx * dt;
  torso_.y += torso_.vy * dt;
  torso_.pitch += torso_.omega * dt;
}

std::vector<double> PlanarWalker::observe() const {
  std::vector<double> o;
  o.reserve(28);
  o.push_back(torso_.y);
  o.push_back(std::sin(torso_.pitch));
  o.push_back(std::cos(torso_.pitch));
  o.push_back(torso_.vx);
  o.push_back(torso_.vy);
  o.push_back(torso_.omega);
  for (double q : q_) o.push_back(q);
  for (double qd : qdot_) o.push_back(qd / kMaxJointRate);
  for (bool c : contact_) o.push_back(c ? 1.0 : 0.0);
  const double phase = 2.0 * std::numbers::pi * (t_ * kControlDt) / kClockPeriod;
  o.push_back(std::sin(phase));
  o.push_back(std::cos(phase));
  return o;
}

StepResult PlanarWalker::step(const Action& action) {
  if (done_) throw ContractError("PlanarWalker::step called after the episode ended");
  const auto* a = std::get_if<std::vector<double>>(&action);
  if (!a || a->size() != static_cast<std::size_t>(kActuators)) {
    throw ShapeError("PlanarWalker expects 8 continuous actions");
  }
  for (int k = 0; k < kActuators; ++k) {
    const double u = std::clamp((*a)[k], -1.0, 1.0);
    target_[k] = u * (k % 2 == 0 ? kHipRange : kKneeRange);
  }
  const double x_before = torso_.x;
  const double dt = kControlDt / kSubsteps;
  for (int s = 0; s < kSubsteps; ++s) substep(dt);
  ++t_;
  done_ = t_ >= spec_.max_steps;
  return {observe(), torso_.x - x_before, done_, {}};
}

}  // namespace hypernca
