#include "hypernca/config.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

#include "hypernca/errors.hpp"

namespace hypernca {

namespace {

std::string trim(const std::string& s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> parts;
  std::string item;
  std::istringstream in(s);
  while (std::getline(in, item, sep)) parts.push_back(trim(item));
  return parts;
}

// Typed access to parsed entries; every read consumes its key so leftovers
// can be reported as unknown.
class Entries {
 public:
  explicit Entries(std::map<std::string, std::string> values) : values_(std::move(values)) {}

  std::optional<std::string> take(const std::string& key) {
    auto it = values_.find(key);
    if (it == values_.end()) return std::nullopt;
    std::string v = it->second;
    values_.erase(it);
    return v;
  }

  template <typename T>
  void integer(const std::string& key, T& out) {
    if (auto v = take(key)) out = parse_integer<T>(key, *v);
  }

  void real(const std::string& key, double& out) {
    if (auto v = take(key)) out = parse_real(key, *v);
  }

  std::optional<double> optional_real(const std::string& key) {
    if (auto v = take(key)) return parse_real(key, *v);
    return std::nullopt;
  }

  void boolean(const std::string& key, bool& out) {
    if (auto v = take(key)) {
      if (*v == "true" || *v == "1") {
        out = true;
      } else if (*v == "false" || *v == "0") {
        out = false;
      } else {
        throw ConfigError(key + ": expected true or false, got '" + *v + "'");
      }
    }
  }

  void leftovers() const {
    if (!values_.empty()) throw ConfigError("unknown config key '" + values_.begin()->first + "'");
  }

  template <typename T>
  static T parse_integer(const std::string& key, const std::string& text) {
    T value{};
    const auto* end = text.data() + text.size();
    auto [ptr, ec] = std::from_chars(text.data(), end, value);
    if (ec != std::errc() || ptr != end) {
      throw ConfigError(key + ": expected an integer, got '" + text + "'");
    }
    return value;
  }

  static double parse_real(const std::string& key, const std::string& text) {
    double value = 0;
    const auto* end = text.data() + text.size();
    auto [ptr, ec] = std::from_chars(text.data(), end, value);
    if (ec != std::errc() || ptr != end || !std::isfinite(value)) {
      throw ConfigError(key + ": expected a finite number, got '" + text + "'");
    }
    return value;
  }

 private:
  std::map<std::string, std::string> values_;
};

TaskKind task_from_string(const std::string& s) {
  for (TaskKind k : {TaskKind::CartPole, TaskKind::Lander2D, TaskKind::PlanarWalker,
                     TaskKind::Sphere, TaskKind::Rosenbrock}) {
    if (to_string(k) == s) return k;
  }
  throw ConfigError("task.env: unknown task '" + s + "'");
}

GenomeKind genome_from_string(const std::string& s) {
  for (GenomeKind k : {GenomeKind::Nca, GenomeKind::LinearHyper, GenomeKind::Direct}) {
    if (to_string(k) == s) return k;
  }
  throw ConfigError("genome.kind: unknown genome kind '" + s + "'");
}

template <typename T>
std::string join(const std::vector<T>& values) {
  std::string out;
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (i) out += ",";
    if constexpr (std::is_floating_point_v<T>) {
      out += format_double(values[i]);
    } else {
      out += std::to_string(values[i]);
    }
  }
  return out;
}

}  // namespace

std::string to_string(TaskKind k) {
  switch (k) {
    case TaskKind::CartPole:
      return "cartpole";
    case TaskKind::Lander2D:
      return "lander2d";
    case TaskKind::PlanarWalker:
      return "walker";
    case TaskKind::Sphere:
      return "sphere";
    case TaskKind::Rosenbrock:
      return "rosenbrock";
  }
  return "unknown";
}

std::string to_string(GenomeKind k) {
  switch (k) {
    case GenomeKind::Nca:
      return "nca";
    case GenomeKind::LinearHyper:
      return "linear_hyper";
    case GenomeKind::Direct:
      return "direct";
  }
  return "unknown";
}

std::string format_double(double v) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  if (ec != std::errc()) throw NumericError("cannot format number");
  return std::string(buf, ptr);
}

EnvSpec RunConfig::env_spec() const {
  EnvId id;
  switch (task) {
    case TaskKind::CartPole:
      id = EnvId::CartPole;
      break;
    case TaskKind::Lander2D:
      id = EnvId::Lander2D;
      break;
    case TaskKind::PlanarWalker:
      id = EnvId::PlanarWalker;
      break;
    default:
      throw ConfigError("task.env: " + to_string(task) + " is not an environment");
  }
  auto spec = EnvSpec::make(id, env_seed);
  if (max_steps > 0) spec.max_steps = max_steps;
  return spec;
}

std::vector<int> RunConfig::resolved_layer_sizes() const {
  if (!layer_sizes.empty()) return layer_sizes;
  const auto spec = env_spec();
  return {spec.obs_dim, spec.obs_dim, spec.action_dim};
}

void RunConfig::validate() const {
  if (population < 2) throw ConfigError("optimizer.population must be >= 2");
  if (!(sigma0 > 0.0)) throw ConfigError("optimizer.sigma0 must be > 0");
  if (max_generations < 1) throw ConfigError("optimizer.max_generations must be >= 1");
  if (early_stop && early_stop->check_generation < 1) {
    throw ConfigError("optimizer.early_stop.check_generation must be >= 1");
  }
  if (workers < 1) throw ConfigError("run.workers must be >= 1");
  if (episodes < 1) throw ConfigError("task.episodes must be >= 1");
  if (max_steps < 0) throw ConfigError("task.max_steps must be >= 0");
  if (nca_steps < 0) throw ConfigError("nca.steps must be >= 0");

  if (is_benchmark()) {
    if (dimension < 1) throw ConfigError("task.dimension must be >= 1");
    if (genome != GenomeKind::Direct) {
      throw ConfigError("genome.kind: benchmark tasks require the direct genome");
    }
    if (metamorph) throw ConfigError("metamorph.enabled: only valid for the walker task");
    return;
  }

  const auto spec = env_spec();
  const auto sizes = resolved_layer_sizes();
  PolicySpec{sizes, spec.action_mode}.validate();
  if (sizes.front() != spec.obs_dim || sizes.back() != spec.action_dim) {
    throw ConfigError("policy.layers: must start with " + std::to_string(spec.obs_dim) +
                      " and end with " + std::to_string(spec.action_dim) + " for " +
                      to_string(task));
  }
  switch (genome) {
    case GenomeKind::Nca:
      nca.validate();
      break;
    case GenomeKind::LinearHyper: {
      LinearHyperConfig hc{hyper_embeddings, hyper_embedding_dim,
                           static_cast<int>(PolicySpec{sizes, spec.action_mode}.param_count())};
      try {
        hc.validate();
      } catch (const ConfigError& e) {
        throw ConfigError(std::string("hyper.num_embeddings: ") + e.what());
      }
      break;
    }
    case GenomeKind::Direct:
      break;
  }
  if (metamorph) {
    if (task != TaskKind::PlanarWalker) {
      throw ConfigError("metamorph.enabled: only valid for the walker task");
    }
    if (genome != GenomeKind::Nca) throw ConfigError("metamorph.enabled: requires genome.kind = nca");
    try {
      validate_schedule(schedule);
    } catch (const ConfigError& e) {
      throw ConfigError(std::string("metamorph.schedule: ") + e.what());
    }
    if (stage_weights.size() != schedule.size()) {
      throw ConfigError("metamorph.weights: need one weight per stage");
    }
  }
}

RunConfig parse_config(const std::string& text) {
  std::map<std::string, std::string> values;
  std::istringstream in(text);
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw ConfigError("line " + std::to_string(line_no) + ": expected 'key = value'");
    }
    const std::string key = trim(line.substr(0, eq));
    if (key.empty()) throw ConfigError("line " + std::to_string(line_no) + ": empty key");
    if (!values.emplace(key, trim(line.substr(eq + 1))).second) {
      throw ConfigError("duplicate config key '" + key + "'");
    }
  }

  Entries e(std::move(values));
  RunConfig c;
  if (auto v = e.take("task.env")) c.task = task_from_string(*v);
  e.integer("task.env_seed", c.env_seed);
  e.integer("task.episodes", c.episodes);
  e.integer("task.max_steps", c.max_steps);
  e.integer("task.dimension", c.dimension);

  if (auto v = e.take("genome.kind")) c.genome = genome_from_string(*v);
  e.integer("nca.channels", c.nca.channels);
  e.integer("nca.hidden_channels", c.nca.hidden_channels);
  e.integer("nca.conv_layers", c.nca.conv_layers);
  e.boolean("nca.use_bias", c.nca.use_bias);
  if (auto v = e.take("nca.update_mode")) {
    if (*v == "residual") {
      c.nca.update_mode = UpdateMode::Residual;
    } else if (*v == "replace") {
      c.nca.update_mode = UpdateMode::Replace;
    } else {
      throw ConfigError("nca.update_mode: expected residual or replace, got '" + *v + "'");
    }
  }
  e.integer("nca.steps", c.nca_steps);
  e.integer("hyper.num_embeddings", c.hyper_embeddings);
  e.integer("hyper.embedding_dim", c.hyper_embedding_dim);

  if (auto v = e.take("policy.layers")) {
    c.layer_sizes.clear();
    for (const auto& part : split(*v, ',')) {
      c.layer_sizes.push_back(Entries::parse_integer<int>("policy.layers", part));
    }
  }

  const std::string seed_mode = e.take("seed.mode").value_or("uniform");
  if (seed_mode == "uniform") {
    UniformRandomSeed s;
    e.integer("seed.rng_seed", s.rng_seed);
    c.seed = s;
  } else if (seed_mode == "impulse") {
    CenterImpulseSeed s;
    e.real("seed.value", s.value);
    c.seed = s;
  } else {
    throw ConfigError("seed.mode: expected uniform or impulse, got '" + seed_mode + "'");
  }

  e.integer("optimizer.population", c.population);
  e.real("optimizer.sigma0", c.sigma0);
  e.integer("optimizer.max_generations", c.max_generations);
  c.target_fitness = e.optional_real("optimizer.target_fitness");
  {
    auto check = e.take("optimizer.early_stop.check_generation");
    auto floor = e.optional_real("optimizer.early_stop.mean_fitness_floor");
    if (check.has_value() != floor.has_value()) {
      throw ConfigError(
          "optimizer.early_stop: check_generation and mean_fitness_floor must be set together");
    }
    if (check) {
      c.early_stop = EarlyStopRule{
          Entries::parse_integer<int>("optimizer.early_stop.check_generation", *check), *floor};
    }
  }
  e.boolean("optimizer.evaluate_mean", c.evaluate_mean);

  e.boolean("metamorph.enabled", c.metamorph);
  if (auto v = e.take("metamorph.schedule")) {
    c.schedule.clear();
    for (const auto& part : split(*v, ',')) {
      const auto colon = part.find(':');
      if (colon == std::string::npos) {
        throw ConfigError("metamorph.schedule: expected entries like M1:10, got '" + part + "'");
      }
      Stage st;
      try {
        st.morphology = morphology_from_string(trim(part.substr(0, colon)));
      } catch (const ConfigError& err) {
        throw ConfigError(std::string("metamorph.schedule: ") + err.what());
      }
      st.steps = Entries::parse_integer<int>("metamorph.schedule", trim(part.substr(colon + 1)));
      c.schedule.push_back(st);
    }
  }
  if (auto v = e.take("metamorph.weights")) {
    c.stage_weights.clear();
    for (const auto& part : split(*v, ',')) {
      c.stage_weights.push_back(Entries::parse_real("metamorph.weights", part));
    }
  }

  e.integer("run.seed", c.master_seed);
  e.integer("run.workers", c.workers);
  if (auto v = e.take("run.output_dir")) c.output_dir = *v;

  e.leftovers();
  c.validate();
  return c;
}

RunConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read config file '" + path + "'");
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_config(buf.str());
}

std::string to_text(const RunConfig& c) {
  std::map<std::string, std::string> kv;
  kv["task.env"] = to_string(c.task);
  kv["task.env_seed"] = std::to_string(c.env_seed);
  kv["task.episodes"] = std::to_string(c.episodes);
  kv["task.max_steps"] = std::to_string(c.max_steps);
  kv["task.dimension"] = std::to_string(c.dimension);
  kv["genome.kind"] = to_string(c.genome);
  kv["nca.channels"] = std::to_string(c.nca.channels);
  kv["nca.hidden_channels"] = std::to_string(c.nca.hidden_channels);
  kv["nca.conv_layers"] = std::to_string(c.nca.conv_layers);
  kv["nca.use_bias"] = c.nca.use_bias ? "true" : "false";
  kv["nca.update_mode"] = c.nca.update_mode == UpdateMode::Residual ? "residual" : "replace";
  kv["nca.steps"] = std::to_string(c.nca_steps);
  kv["hyper.num_embeddings"] = std::to_string(c.hyper_embeddings);
  kv["hyper.embedding_dim"] = std::to_string(c.hyper_embedding_dim);
  if (!c.layer_sizes.empty()) kv["policy.layers"] = join(c.layer_sizes);
  if (const auto* u = std::get_if<UniformRandomSeed>(&c.seed)) {
    kv["seed.mode"] = "uniform";
    kv["seed.rng_seed"] = std::to_string(u->rng_seed);
  } else {
    kv["seed.mode"] = "impulse";
    kv["seed.value"] = format_double(std::get<CenterImpulseSeed>(c.seed).value);
  }
  kv["optimizer.population"] = std::to_string(c.population);
  kv["optimizer.sigma0"] = format_double(c.sigma0);
  kv["optimizer.max_generations"] = std::to_string(c.max_generations);
  if (c.target_fitness) kv["optimizer.target_fitness"] = format_double(*c.target_fitness);
  if (c.early_stop) {
    kv["optimizer.early_stop.check_generation"] = std::to_string(c.early_stop->check_generation);
    kv["optimizer.early_stop.mean_fitness_floor"] = format_double(c.early_stop->mean_fitness_floor);
  }
  kv["optimizer.evaluate_mean"] = c.evaluate_mean ? "true" : "false";
  kv["metamorph.enabled"] = c.metamorph ? "true" : "false";
  {
    std::string sched;
    for (std::size_t i = 0; i < c.schedule.size(); ++i) {
      if (i) sched += ",";
      sched += to_string(c.schedule[i].morphology) + ":" + std::to_string(c.schedule[i].steps);
    }
    kv["metamorph.schedule"] = sched;
  }
  kv["metamorph.weights"] = join(c.stage_weights);
  kv["run.seed"] = std::to_string(c.master_seed);
  kv["run.workers"] = std::to_string(c.workers);
  kv["run.output_dir"] = c.output_dir;

  std::string out;
  for (const auto& [k, v] : kv) out += k + " = " + v + "\n";
  return out;
}

}  // namespace hypernca
