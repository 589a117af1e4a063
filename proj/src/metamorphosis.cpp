#include "hypernca/metamorphosis.hpp"

#include <cmath>
#include <string>

#include "hypernca/errors.hpp"

namespace hypernca {

void validate_schedule(std::span<const Stage> schedule) {
  if (schedule.empty()) throw ConfigError("schedule must not be empty");
  for (std::size_t i = 0; i < schedule.size(); ++i) {
    if (schedule[i].steps < 1) throw ConfigError("schedule steps must be positive");
    for (std::size_t j = 0; j < i; ++j) {
      if (schedule[i].morphology == schedule[j].morphology) {
        throw ConfigError("schedule morphologies must be distinct");
      }
    }
  }
}

std::vector<Stage> standard_schedule() {
  return {{MorphologyId::M1, 10}, {MorphologyId::M2, 20}, {MorphologyId::M3, 20}};
}

std::vector<int> readout_steps(std::span<const Stage> schedule) {
  std::vector<int> out;
  int total = 0;
  for (const auto& st : schedule) {
    total += st.steps;
    out.push_back(total);
  }
  return out;
}

StagedDevelopment staged_develop(const NcaGenome& g, const Substrate& seed,
                                 std::span<const Stage> schedule, const PolicySpec& spec,
                                 bool record_trajectory) {
  validate_schedule(schedule);
  StagedDevelopment out;
  out.readout_steps = readout_steps(schedule);
  if (record_trajectory) out.trajectory.push_back(seed);
  Substrate current = seed;
  for (const auto& st : schedule) {
    std::vector<Substrate> snaps;
    current = develop(current, g, st.steps, record_trajectory ? &snaps : nullptr);
    if (record_trajectory) {
      // develop() records the starting state too; it is already present.
      out.trajectory.insert(out.trajectory.end(), snaps.begin() + 1, snaps.end());
    }
    out.policies.push_back(materialize(readout_channel(current), spec));
    out.stage_substrates.push_back(current);
  }
  return out;
}

MorphEvaluator walker_evaluator(const EnvSpec& spec, int episodes, int max_steps) {
  if (spec.id != EnvId::PlanarWalker) throw ConfigError("walker_evaluator: spec is not the walker");
  if (episodes < 1) throw ConfigError("walker_evaluator: episodes must be >= 1");
  return [spec, episodes, max_steps](const Policy& policy, MorphologyId morph) {
    double total = 0.0;
    for (int k = 0; k < episodes; ++k) {
      EnvSpec s = spec;
      s.env_seed = spec.env_seed + static_cast<std::uint64_t>(k);
      total += rollout(s, MorphologySpec::standard(morph), policy, max_steps);
    }
    return total / episodes;
  };
}

double fitness_multi(const NcaGenome& g, const Substrate& seed, std::span<const Stage> schedule,
                     const PolicySpec& spec, const MorphEvaluator& evaluator,
                     std::span<const double> weights) {
  if (!weights.empty() && weights.size() != schedule.size()) {
    throw ConfigError("fitness_multi: need one weight per stage");
  }
  const auto dev = staged_develop(g, seed, schedule, spec);
  double total = 0.0;
  for (std::size_t i = 0; i < schedule.size(); ++i) {
    const double w = weights.empty() ? 1.0 : weights[i];
    total += w * evaluator(dev.policies[i], schedule[i].morphology);
  }
  return total;
}

int CrossEvalMatrix::diagonal_dominant_rows() const {
  int count = 0;
  for (int i = 0; i < size(); ++i) {
    bool dominant = true;
    for (int j = 0; j < size(); ++j) {
      if (j != i && at(i, j) > at(i, i)) dominant = false;
    }
    if (dominant) ++count;
  }
  return count;
}

CrossEvalMatrix cross_evaluate(const NcaGenome& g, const Substrate& seed,
                               std::span<const Stage> schedule, const PolicySpec& spec,
                               const MorphEvaluator& evaluator) {
  const auto dev = staged_develop(g, seed, schedule, spec);
  CrossEvalMatrix m;
  for (const auto& st : schedule) m.morphologies.push_back(st.morphology);
  const int n = m.size();
  m.values.resize(static_cast<std::size_t>(n) * n);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      const double r = evaluator(dev.policies[i], m.morphologies[j]);
      if (!std::isfinite(r)) throw NumericError("cross_evaluate: non-finite reward");
      m.values[static_cast<std::size_t>(i) * n + j] = r;
    }
  }
  return m;
}

}  // namespace hypernca
