#include "hypernca/task.hpp"

#include <string>

#include "hypernca/errors.hpp"
#include "hypernca/linear_hyper.hpp"

namespace hypernca {

double sphere(std::span<const double> x) {
  double s = 0.0;
  for (double v : x) s += v * v;
  return -s;
}

double rosenbrock(std::span<const double> x) {
  double s = 0.0;
  for (std::size_t i = 0; i + 1 < x.size(); ++i) {
    const double a = x[i + 1] - x[i] * x[i];
    const double b = 1.0 - x[i];
    s += 100.0 * a * a + b * b;
  }
  return -s;
}

Task::Task(RunConfig config) : config_(std::move(config)) {
  config_.validate();
  if (config_.is_benchmark()) {
    genome_size_ = static_cast<std::size_t>(config_.dimension);
    return;
  }
  env_spec_ = config_.env_spec();
  policy_spec_ = PolicySpec{config_.resolved_layer_sizes(), env_spec_.action_mode};
  switch (config_.genome) {
    case GenomeKind::Nca:
      genome_size_ = param_count(config_.nca);
      seed_ = seed(shape_for_policy(policy_spec_.layer_sizes, config_.nca.channels), config_.seed);
      break;
    case GenomeKind::LinearHyper:
      genome_size_ = baseline_param_count(
          {config_.hyper_embeddings, config_.hyper_embedding_dim,
           static_cast<int>(policy_spec_.param_count())});
      break;
    case GenomeKind::Direct:
      genome_size_ = policy_spec_.param_count();
      break;
  }
}

Genome Task::initial_mean() const {
  const double v = config_.task == TaskKind::Sphere ? 1.0 : 0.0;
  return Genome(genome_size_, v);
}

void Task::check_length(std::span<const double> genome) const {
  if (genome.size() != genome_size_) {
    throw ShapeError("genome has " + std::to_string(genome.size()) + " values, task expects " +
                     std::to_string(genome_size_));
  }
}

NcaGenome Task::nca_genome(std::span<const double> genome) const {
  if (config_.genome != GenomeKind::Nca) throw ContractError("task genome is not an NCA");
  check_length(genome);
  return NcaGenome(config_.nca, Genome(genome.begin(), genome.end()));
}

Policy Task::decode(std::span<const double> genome) const { return decode(genome, config_.nca_steps); }

Policy Task::decode(std::span<const double> genome, int nca_steps) const {
  if (!has_policy()) throw ContractError("benchmark tasks have no policy");
  check_length(genome);
  switch (config_.genome) {
    case GenomeKind::Nca:
      return materialize(readout_channel(develop(seed_, nca_genome(genome), nca_steps)), policy_spec_);
    case GenomeKind::LinearHyper: {
      LinearHyperGenome g({config_.hyper_embeddings, config_.hyper_embedding_dim,
                           static_cast<int>(policy_spec_.param_count())},
                          Genome(genome.begin(), genome.end()));
      return policy_from_flat(generate(g), policy_spec_);
    }
    case GenomeKind::Direct:
      return policy_from_flat(genome, policy_spec_);
  }
  throw ContractError("unknown genome kind");
}

double Task::episode_return(const Policy& policy, std::uint64_t env_seed,
                            const StepObserver& observer) const {
  EnvSpec spec = env_spec_;
  spec.env_seed = env_seed;
  std::optional<MorphologySpec> morph;
  if (spec.id == EnvId::PlanarWalker) morph = MorphologySpec::standard(MorphologyId::M1);
  return rollout(spec, morph, policy, 0, observer);
}

MorphEvaluator Task::morph_evaluator(int episodes) const { return walker_evaluator(env_spec_, episodes); }

double Task::fitness(std::span<const double> genome) const {
  if (config_.task == TaskKind::Sphere) {
    check_length(genome);
    return sphere(genome);
  }
  if (config_.task == TaskKind::Rosenbrock) {
    check_length(genome);
    return rosenbrock(genome);
  }
  if (config_.metamorph) {
    return fitness_multi(nca_genome(genome), seed_, config_.schedule, policy_spec_,
                         morph_evaluator(config_.episodes), config_.stage_weights);
  }
  const Policy policy = decode(genome);
  double total = 0.0;
  for (int k = 0; k < config_.episodes; ++k) {
    total += episode_return(policy, config_.env_seed + static_cast<std::uint64_t>(k));
  }
  return total / config_.episodes;
}

}  // namespace hypernca
