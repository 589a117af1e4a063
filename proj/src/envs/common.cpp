#include <cmath>
#include <string>

#include "hypernca/envs.hpp"
#include "hypernca/errors.hpp"

namespace hypernca {

std::string to_string(EnvId id) {
  switch (id) {
    case EnvId::CartPole:
      return "cartpole";
    case EnvId::Lander2D:
      return "lander2d";
    case EnvId::PlanarWalker:
      return "walker";
  }
  return "unknown";
}

EnvId env_id_from_string(const std::string& name) {
  for (EnvId id : {EnvId::CartPole, EnvId::Lander2D, EnvId::PlanarWalker}) {
    if (to_string(id) == name) return id;
  }
  throw ConfigError("unknown environment '" + name + "' (expected cartpole, lander2d or walker)");
}

EnvSpec EnvSpec::make(EnvId id, std::uint64_t env_seed) {
  switch (id) {
    case EnvId::CartPole:
      return {id, 4, 2, ActionMode::Discrete, 500, env_seed};
    case EnvId::Lander2D:
      return {id, 8, 4, ActionMode::Discrete, 1000, env_seed};
    case EnvId::PlanarWalker:
      return {id, 28, 8, ActionMode::Continuous, 1000, env_seed};
  }
  throw ConfigError("unknown environment id");
}

std::string to_string(MorphologyId id) {
  switch (id) {
    case MorphologyId::M1:
      return "M1";
    case MorphologyId::M2:
      return "M2";
    case MorphologyId::M3:
      return "M3";
  }
  return "unknown";
}

MorphologyId morphology_from_string(const std::string& name) {
  for (MorphologyId id : {MorphologyId::M1, MorphologyId::M2, MorphologyId::M3}) {
    if (to_string(id) == name) return id;
  }
  throw ConfigError("unknown morphology '" + name + "' (expected M1, M2 or M3)");
}

MorphologySpec MorphologySpec::standard(MorphologyId id) {
  MorphologySpec m;
  m.id = id;
  switch (id) {
    case MorphologyId::M1:
      break;
    case MorphologyId::M2:
      m.leg_scale = {0.5, 1.0, 1.0, 0.5};
      break;
    case MorphologyId::M3:
      m.leg_scale = {0.5, 0.5, 1.0, 1.0};
      break;
  }
  return m;
}

std::unique_ptr<Environment> make_env(const EnvSpec& spec,
                                      const std::optional<MorphologySpec>& morph) {
  if (morph && spec.id != EnvId::PlanarWalker) {
    throw ConfigError("morphologies only apply to the walker environment");
  }
  switch (spec.id) {
    case EnvId::CartPole:
      return std::make_unique<CartPole>(spec);
    case EnvId::Lander2D:
      return std::make_unique<Lander2D>(spec);
    case EnvId::PlanarWalker:
      return std::make_unique<PlanarWalker>(
          spec, morph.value_or(MorphologySpec::standard(MorphologyId::M1)));
  }
  throw ConfigError("unknown environment id");
}

double rollout(const EnvSpec& spec, const std::optional<MorphologySpec>& morph,
               const Policy& policy, int max_steps, const StepObserver& observer) {
  if (policy.spec.input_dim() != spec.obs_dim || policy.spec.output_dim() != spec.action_dim) {
    throw ShapeError("policy maps " + std::to_string(policy.spec.input_dim()) + " -> " +
                     std::to_string(policy.spec.output_dim()) + " but " + to_string(spec.id) +
                     " needs " + std::to_string(spec.obs_dim) + " -> " +
                     std::to_string(spec.action_dim));
  }
  if (policy.spec.action_mode != spec.action_mode) {
    throw ShapeError("policy action mode does not match " + to_string(spec.id));
  }
  auto env = make_env(spec, morph);
  const int limit = max_steps > 0 ? max_steps : spec.max_steps;
  auto obs = env->reset();
  double total = 0.0;
  for (int t = 0; t < limit; ++t) {
    const Action a = act(policy, obs);
    auto r = env->step(a);
    if (observer) observer(t, obs, a, r.reward);
    total += r.reward;
    obs = std::move(r.observation);
    if (r.done) break;
  }
  return total;
}

}  // namespace hypernca
