#pragma once

// Deterministic, dependency-free control tasks. Every episode is a pure
// function of (EnvSpec, MorphologySpec, actions): the env seed fixes initial
// state and terrain.

#include <array>
#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "hypernca/policy.hpp"

namespace hypernca {

enum class EnvId { CartPole, Lander2D, PlanarWalker };

std::string to_string(EnvId id);
EnvId env_id_from_string(const std::string& name);

struct EnvSpec {
  EnvId id = EnvId::CartPole;
  int obs_dim = 0;
  int action_dim = 0;  ///< number of discrete actions, or continuous action length
  ActionMode action_mode = ActionMode::Discrete;
  int max_steps = 0;
  std::uint64_t env_seed = 0;

  /// Default dimensions and episode length of a task.
  static EnvSpec make(EnvId id, std::uint64_t env_seed = 0);
};

enum class MorphologyId { M1, M2, M3 };

std::string to_string(MorphologyId id);
MorphologyId morphology_from_string(const std::string& name);

/// Walker body variant. Legs: 0 front-left, 1 front-right, 2 back-left,
/// 3 back-right. Actuators 2k (hip) and 2k+1 (knee) belong to leg k.
struct MorphologySpec {
  MorphologyId id = MorphologyId::M1;
  std::array<double, 4> leg_scale{1.0, 1.0, 1.0, 1.0};
  std::array<bool, 8> actuator_enabled{true, true, true, true, true, true, true, true};

  /// M1: intact. M2: front-left and back-right legs at half length.
  /// M3: both front legs at half length.
  static MorphologySpec standard(MorphologyId id);
};

/// Lander reward decomposition of one step; components sum to the reward.
struct RewardTerms {
  double shaping = 0;      ///< change of the potential (distance, speed, tilt, leg contacts)
  double main_engine = 0;  ///< -0.3 per frame fired
  double side_engine = 0;  ///< -0.03 per frame fired
  double terminal = 0;     ///< -100 crash / +100 at rest
};

struct StepResult {
  std::vector<double> observation;
  double reward = 0;
  bool done = false;
  RewardTerms terms;  ///< populated by Lander2D only
};

class Environment {
 public:
  virtual ~Environment() = default;
  virtual const EnvSpec& spec() const = 0;
  virtual std::vector<double> reset() = 0;
  /// Throws ContractError when called after the episode ended.
  virtual StepResult step(const Action& action) = 0;
};

std::unique_ptr<Environment> make_env(const EnvSpec& spec,
                                      const std::optional<MorphologySpec>& morph = std::nullopt);

/// Classic cart-pole (Barto, Sutton & Anderson), Euler integration at 50 Hz.
class CartPole final : public Environment {
 public:
  explicit CartPole(EnvSpec spec);
  const EnvSpec& spec() const override { return spec_; }
  std::vector<double> reset() override;
  StepResult step(const Action& action) override;

  std::array<double, 4> state() const { return state_; }

 private:
  EnvSpec spec_;
  std::array<double, 4> state_{};
  int t_ = 0;
  bool done_ = false;
};

/// Planar lander: rigid hull with two spring-damper legs over a seeded
/// piecewise-linear terrain, four discrete actions (noop, left engine, main
/// engine, right engine), 50 Hz control with semi-implicit Euler substeps.
class Lander2D final : public Environment {
 public:
  static constexpr double kWorldWidth = 20.0;
  static constexpr double kWorldHeight = 40.0 / 3.0;
  static constexpr int kChunks = 11;
  static constexpr double kPadY = kWorldHeight / 4.0;
  static constexpr double kFps = 50.0;
  static constexpr double kMainEngineCost = 0.3;
  static constexpr double kSideEngineCost = 0.03;
  static constexpr double kCrashPenalty = -100.0;
  static constexpr double kRestBonus = 100.0;
  static constexpr double kLegContactBonus = 10.0;

  struct Body {
    double x = 0, y = 0, angle = 0, vx = 0, vy = 0, omega = 0;
  };

  explicit Lander2D(EnvSpec spec);
  const EnvSpec& spec() const override { return spec_; }
  std::vector<double> reset() override;
  StepResult step(const Action& action) override;

  double terrain_height(double x) const;
  const std::array<double, kChunks>& terrain() const { return terrain_y_; }
  double pad_left() const { return pad_x1_; }
  double pad_right() const { return pad_x2_; }
  /// Height of the body centre when both legs just touch flat ground at y.
  static double resting_height(double ground_y);

  const Body& body() const { return body_; }
  /// Replaces the body state mid-episode (tests and scripted scenarios).
  void place(const Body& body);
  std::array<bool, 2> leg_contacts() const;

 private:
  std::vector<double> observe() const;
  double shaping(const std::vector<double>& obs) const;
  bool hull_touches_ground() const;

  EnvSpec spec_;
  std::array<double, kChunks> terrain_x_{};
  std::array<double, kChunks> terrain_y_{};
  double pad_x1_ = 0, pad_x2_ = 0;
  Body body_;
  double prev_shaping_ = 0;
  int still_frames_ = 0;
  bool leg_broken_ = false;
  int t_ = 0;
  bool done_ = false;
};

/// Planar quadruped: a rigid torso carried by four two-segment legs whose
/// hip/knee angles track position targets. Feet and torso ends interact with
/// flat ground through spring-damper contacts with regularised Coulomb
/// friction. Reward per step = torso forward displacement.
class PlanarWalker final : public Environment {
 public:
  static constexpr int kLegs = 4;
  static constexpr int kActuators = 8;
  static constexpr double kSegmentLength = 0.4;  // thigh and shin at scale 1
  static constexpr double kHipRange = 0.7;
  static constexpr double kKneeRange = 0.7;
  static constexpr double kControlDt = 0.02;
  static constexpr int kSubsteps = 10;
  static constexpr double kClockPeriod = 1.0;  // seconds, phase inputs

  struct Torso {
    double x = 0, y = 0, pitch = 0, vx = 0, vy = 0, omega = 0;
  };

  PlanarWalker(EnvSpec spec, MorphologySpec morph);
  const EnvSpec& spec() const override { return spec_; }
  std::vector<double> reset() override;
  StepResult step(const Action& action) override;

  const MorphologySpec& morphology() const { return morph_; }
  const Torso& torso() const { return torso_; }
  /// Thigh and shin lengths of leg k.
  std::array<double, 2> segment_lengths(int leg) const;
  const std::array<double, kActuators>& joint_angles() const { return q_; }

 private:
  struct Point {
    double x, y, vx, vy;
  };
  std::vector<double> observe() const;
  Point foot(int leg) const;
  void substep(double dt);

  EnvSpec spec_;
  MorphologySpec morph_;
  Torso torso_;
  std::array<double, kActuators> q_{};
  std::array<double, kActuators> qdot_{};
  std::array<double, kActuators> target_{};
  std::array<bool, kLegs> contact_{};
  int t_ = 0;
  bool done_ = false;
};

/// Per-step observer for trajectory dumps: (t, observation, action, reward).
using StepObserver =
    std::function<void(int t, std::span<const double> obs, const Action& action, double reward)>;

/// Runs one episode of `policy` and returns the summed reward. `max_steps`
/// <= 0 uses the spec's episode length.
double rollout(const EnvSpec& spec, const std::optional<MorphologySpec>& morph,
               const Policy& policy, int max_steps = 0, const StepObserver& observer = {});

}  // namespace hypernca
