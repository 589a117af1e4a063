#include <algorithm>
#include <cmath>

#include "hypernca/envs.hpp"
#include "hypernca/errors.hpp"
#include "hypernca/rng.hpp"

namespace hypernca {

namespace {

constexpr double kGravity = 10.0;
constexpr double kMass = 5.0;
constexpr double kInertia = 2.0;
constexpr double kMainAccel = 25.0;   // along the hull's up axis
constexpr double kSideAccel = 1.0;    // along the hull's right axis
constexpr double kSideAngular = 2.0;  // rad/s^2
constexpr int kSubsteps = 5;
constexpr double kInitialSpeed = 4.0;  // initial velocity components drawn from U(-4, 4)

// Leg tips in hull coordinates and their ground contact model.
constexpr double kLegAway = 0.75;
constexpr double kLegDown = 0.85;
constexpr double kLegStiffness = 500.0;
constexpr double kLegDamping = 50.0;
constexpr double kLegFriction = 50.0;  // viscous, capped by mu * normal force
constexpr double kFrictionMu = 1.0;
// A leg meeting the ground faster than this breaks and counts as a crash.
constexpr double kMaxTouchdownSpeed = 3.0;

// Rest detection: both legs down and nearly still for this many frames.
constexpr int kRestFrames = 25;
constexpr double kRestSpeed = 0.1;
constexpr double kRestSpin = 0.1;

constexpr double kVelocityClamp = 100.0;

struct Vec2 {
  double x, y;
};

constexpr std::array<Vec2, 6> kHull{{{-0.47, 0.57},
                                     {-0.57, 0.0},
                                     {-0.57, -0.33},
                                     {0.57, -0.33},
                                     {0.57, 0.0},
                                     {0.47, 0.57}}};
constexpr std::array<Vec2, 2> kLegTips{{{-kLegAway, -kLegDown}, {kLegAway, -kLegDown}}};

Vec2 to_world(const Lander2D::Body& b, Vec2 local) {
  const double c = std::cos(b.angle), s = std::sin(b.angle);
  return {b.x + c * local.x - s * local.y, b.y + s * local.x + c * local.y};
}

}  // namespace

Lander2D::Lander2D(EnvSpec spec) : spec_(spec) {}

double Lander2D::resting_height(double ground_y) {
  return ground_y + kLegDown - kMass * kGravity / (2.0 * kLegStiffness);
}

double Lander2D::terrain_height(double x) const {
  if (x <= terrain_x_.front()) return terrain_y_.front();
  if (x >= terrain_x_.back()) return terrain_y_.back();
  const double step = kWorldWidth / (kChunks - 1);
  const int k = std::min(kChunks - 2, static_cast<int>(x / step));
  const double f = (x - terrain_x_[k]) / step;
  return terrain_y_[k] + f * (terrain_y_[k + 1] - terrain_y_[k]);
}

std::vector<double> Lander2D::reset() {
  Rng rng(spec_.env_seed);
  std::array<double, kChunks> raw{};
  for (double& h : raw) h = rng.uniform(0.0, kWorldHeight / 2.0);
  for (int k = 0; k < kChunks; ++k) terrain_x_[k] = kWorldWidth / (kChunks - 1) * k;
  for (int k = kChunks / 2 - 2; k <= kChunks / 2 + 2; ++k) raw[k] = kPadY;
  for (int k = 0; k < kChunks; ++k) {
    const double left = raw[std::max(0, k - 1)];
    const double right = raw[std::min(kChunks - 1, k + 1)];
    terrain_y_[k] = (left + raw[k] + right) / 3.0;
  }
  for (int k = kChunks / 2 - 1; k <= kChunks / 2 + 1; ++k) terrain_y_[k] = kPadY;
  pad_x1_ = terrain_x_[kChunks / 2 - 1];
  pad_x2_ = terrain_x_[kChunks / 2 + 1];

  body_ = {};
  body_.x = kWorldWidth / 2.0;
  body_.y = kWorldHeight;
  body_.vx = rng.uniform(-kInitialSpeed, kInitialSpeed);
  body_.vy = rng.uniform(-kInitialSpeed, kInitialSpeed);

  t_ = 0;
  still_frames_ = 0;
  leg_broken_ = false;
  done_ = false;
  const auto obs = observe();
  prev_shaping_ = shaping(obs);
  return obs;
}

void Lander2D::place(const Body& body) {
  body_ = body;
  still_frames_ = 0;
  prev_shaping_ = shaping(observe());
}

std::array<bool, 2> Lander2D::leg_contacts() const {
  std::array<bool, 2> out{};
  for (int k = 0; k < 2; ++k) {
    const Vec2 p = to_world(body_, kLegTips[k]);
    out[k] = p.y <= terrain_height(p.x);
  }
  return out;
}

std::vector<double> Lander2D::observe() const {
  const auto legs = leg_contacts();
  return {
      (body_.x - kWorldWidth / 2.0) / (kWorldWidth / 2.0),
      (body_.y - resting_height(kPadY)) / (kWorldHeight / 2.0),
      body_.vx * (kWorldWidth / 2.0) / kFps,
      body_.vy * (kWorldHeight / 2.0) / kFps,
      body_.angle,
      20.0 * body_.omega / kFps,
      legs[0] ? 1.0 : 0.0,
      legs[1] ? 1.0 : 0.0,
  };
}

double Lander2D::shaping(const std::vector<double>& o) const {
  return -100.0 * std::hypot(o[0], o[1]) - 100.0 * std::hypot(o[2], o[3]) -
         100.0 * std::abs(o[4]) + kLegContactBonus * o[6] + kLegContactBonus * o[7];
}

bool Lander2D::hull_touches_ground() const {
  const auto below = [&](Vec2 local, double margin) {
    const Vec2 p = to_world(body_, local);
    return p.y < terrain_height(p.x) - margin;
  };
  return std::any_of(kHull.begin(), kHull.end(), [&](Vec2 v) { return below(v, 0.0); });
}

StepResult Lander2D::step(const Action& action) {
  if (done_) throw ContractError("Lander2D::step called after the episode ended");
  const int* a = std::get_if<int>(&action);
  if (!a || *a < 0 || *a > 3) throw ShapeError("Lander2D expects a discrete action in {0..3}");
  const bool main_engine = *a == 2;
  const bool left_engine = *a == 1;
  const bool right_engine = *a == 3;

  const double dt = 1.0 / kFps / kSubsteps;
  for (int s = 0; s < kSubsteps; ++s) {
    const double c = std::cos(body_.angle), sn = std::sin(body_.angle);
    double fx = 0.0, fy = -kMass * kGravity, torque = 0.0;
    if (main_engine) {
      fx += -sn * kMass * kMainAccel;
      fy += c * kMass * kMainAccel;
    }
    if (left_engine || right_engine) {
      const double dir = left_engine ? 1.0 : -1.0;
      fx += dir * c * kMass * kSideAccel;
      fy += dir * sn * kMass * kSideAccel;
      torque += -dir * kInertia * kSideAngular;
    }
    for (const Vec2& tip : kLegTips) {
      const Vec2 p = to_world(body_, tip);
      const double ground = terrain_height(p.x);
      const double pen = ground - p.y;
      if (pen <= 0.0) continue;
      const double rx = p.x - body_.x, ry = p.y - body_.y;
      const double pvx = body_.vx - body_.omega * ry;
      const double pvy = body_.vy + body_.omega * rx;
      if (-pvy > kMaxTouchdownSpeed) leg_broken_ = true;
      const double fn = std::max(0.0, kLegStiffness * pen - kLegDamping * pvy);
      const double ft = std::clamp(-kLegFriction * pvx, -kFrictionMu * fn, kFrictionMu * fn);
      fx += ft;
      fy += fn;
      torque += rx * fn - ry * ft;
    }
    body_.vx = std::clamp(body_.vx + fx / kMass * dt, -kVelocityClamp, kVelocityClamp);
    body_.vy = std::clamp(body_.vy + fy / kMass * dt, -kVelocityClamp, kVelocityClamp);
    body_.omega = std::clamp(body_.omega + torque / kInertia * dt, -kVelocityClamp, kVelocityClamp);
    body_.x += body_.vx * dt;
    body_.y += body_.vy * dt;
    body_.angle += body_.omega * dt;
  }
  ++t_;

  StepResult r;
  r.observation = observe();
  const double now = shaping(r.observation);
  r.terms.shaping = now - prev_shaping_;
  prev_shaping_ = now;
  r.terms.main_engine = main_engine ? -kMainEngineCost : 0.0;
  r.terms.side_engine = (left_engine || right_engine) ? -kSideEngineCost : 0.0;

  const bool legs_down = r.observation[6] > 0.5 && r.observation[7] > 0.5;
  const bool still = std::hypot(body_.vx, body_.vy) < kRestSpeed && std::abs(body_.omega) < kRestSpin;
  still_frames_ = legs_down && still ? still_frames_ + 1 : 0;

  if (leg_broken_ || hull_touches_ground() || std::abs(r.observation[0]) >= 1.0) {
    r.terms.terminal = kCrashPenalty;
    done_ = true;
  } else if (still_frames_ >= kRestFrames) {
    r.terms.terminal = kRestBonus;
    done_ = true;
  }
  if (t_ >= spec_.max_steps) done_ = true;
  r.done = done_;
  r.reward = r.terms.shaping + r.terms.main_engine + r.terms.side_engine + r.terms.terminal;
  return r;
}

}  // namespace hypernca
