#include "hypernca/app.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <ostream>
#include <sstream>
#include <thread>

#include "hypernca/errors.hpp"
#include "hypernca/task.hpp"

namespace hypernca {

namespace fs = std::filesystem;

namespace {

std::ofstream open_out(const fs::path& path) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw FormatError("cannot write '" + path.string() + "'");
  return out;
}

template <typename Fn>
void parallel_for(std::size_t n, int workers, Fn&& fn) {
  const std::size_t threads = std::min<std::size_t>(static_cast<std::size_t>(std::max(1, workers)), n);
  if (threads <= 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::exception_ptr> errors(threads);
  {
    std::vector<std::jthread> pool;
    for (std::size_t t = 0; t < threads; ++t) {
      pool.emplace_back([&, t] {
        try {
          for (std::size_t i = next++; i < n; i = next++) fn(i);
        } catch (...) {
          errors[t] = std::current_exception();
        }
      });
    }
  }
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
}

std::string pad3(int v) {
  char buf[16];
  std::snprintf(buf, sizeof(buf), "%03d", v);
  return buf;
}

}  // namespace

int resolve_workers(std::optional<int> flag, int config_value) {
  if (flag) {
    if (*flag < 1) throw ConfigError("--workers must be >= 1");
    return *flag;
  }
  if (const char* env = std::getenv("HYPERNCA_WORKERS"); env && *env) {
    char* end = nullptr;
    const long v = std::strtol(env, &end, 10);
    if (*end != '\0' || v < 1) throw ConfigError("HYPERNCA_WORKERS must be a positive integer");
    return static_cast<int>(v);
  }
  return config_value;
}

std::vector<std::uint64_t> parse_seed_list(const std::string& text) {
  const auto parse = [&](const std::string& s) {
    std::size_t used = 0;
    unsigned long long v = 0;
    try {
      v = std::stoull(s, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used == 0 || used != s.size() || s.front() == '-') {
      throw ConfigError("--seeds: cannot parse '" + text + "'");
    }
    return static_cast<std::uint64_t>(v);
  };
  std::vector<std::uint64_t> seeds;
  if (const auto colon = text.find(':'); colon != std::string::npos) {
    const auto lo = parse(text.substr(0, colon));
    const auto hi = parse(text.substr(colon + 1));
    if (hi <= lo) throw ConfigError("--seeds: empty range '" + text + "'");
    for (auto s = lo; s < hi; ++s) seeds.push_back(s);
    return seeds;
  }
  std::stringstream in(text);
  std::string item;
  while (std::getline(in, item, ',')) seeds.push_back(parse(item));
  if (seeds.empty()) throw ConfigError("--seeds: empty list");
  return seeds;
}

std::vector<std::uint64_t> default_eval_seeds(int episodes) {
  if (episodes < 1) throw ConfigError("--episodes must be >= 1");
  std::vector<std::uint64_t> seeds;
  for (int k = 0; k < episodes; ++k) seeds.push_back(1000 + static_cast<std::uint64_t>(k));
  return seeds;
}

std::string format_mean_std(double mean, double std) {
  char buf[96];
  std::snprintf(buf, sizeof(buf), "%.2f \xC2\xB1 %.2f", mean, std);
  return buf;
}

TrainOutputs cmd_train(const RunConfig& config, const fs::path& out_dir, std::ostream* log) {
  const Task task(config);
  fs::create_directories(out_dir);
  TrainOutputs out;
  out.best_checkpoint = out_dir / "best.ckpt";
  out.mean_checkpoint = out_dir / "mean.ckpt";
  out.fitness_csv = out_dir / "fitness.csv";
  out.timing_csv = out_dir / "timing.csv";

  auto fitness_file = open_out(out.fitness_csv);
  auto timing_file = open_out(out.timing_csv);
  fitness_file << "generation,restart,best_fitness,mean_fitness,sigma,mean_solution_fitness\n";
  timing_file << "generation,wall_ms\n";

  RunOptions opts;
  opts.lambda = config.population;
  opts.sigma0 = config.sigma0;
  opts.max_generations = config.max_generations;
  opts.target_fitness = config.target_fitness;
  opts.early_stop = config.early_stop;
  opts.seed = config.master_seed;
  opts.workers = config.workers;
  opts.evaluate_mean = config.evaluate_mean;

  if (log) {
    *log << "task " << to_string(config.task) << ", genome " << to_string(config.genome) << " ("
         << task.genome_size() << " parameters";
    if (task.has_policy()) *log << ", policy " << task.policy_spec().param_count() << " weights";
    *log << "), population " << config.population << ", workers " << config.workers << "\n";
  }

  const FitnessFn fitness = [&task](std::span<const double> g, std::size_t) { return task.fitness(g); };
  out.result = run(task.initial_mean(), fitness, opts, [&](const GenerationStats& s) {
    fitness_file << s.generation << ',' << s.restart << ',' << format_double(s.best_fitness) << ','
                 << format_double(s.mean_fitness) << ',' << format_double(s.sigma) << ','
                 << format_double(s.mean_solution_fitness) << '\n';
    timing_file << s.generation << ',' << format_double(s.wall_ms) << '\n';
    if (log) {
      char buf[160];
      std::snprintf(buf, sizeof(buf), "gen %4d  best %.4f  mean %.4f  sigma %.4g  mean-solution %.4f\n",
                    s.generation, s.best_fitness, s.mean_fitness, s.sigma, s.mean_solution_fitness);
      *log << buf << std::flush;
    }
  });

  const auto generations = static_cast<std::uint64_t>(out.result.history.size());
  Checkpoint best{config, out.result.best_genome, out.result.best_fitness, generations,
                  out.result.final_state};
  write_checkpoint(out.best_checkpoint, best);
  Checkpoint mean{config, out.result.mean_solution, out.result.mean_solution_fitness, generations,
                  std::nullopt};
  if (mean.genome.empty()) mean.genome = out.result.final_state.mean;
  write_checkpoint(out.mean_checkpoint, mean);
  if (log) {
    *log << "best fitness " << format_double(out.result.best_fitness) << " after " << generations
         << " generations; wrote " << out.best_checkpoint.string() << "\n";
  }
  return out;
}

EvalSummary summarize(std::vector<std::uint64_t> seeds, std::vector<double> returns) {
  if (returns.empty()) throw ConfigError("no episodes to summarize");
  EvalSummary s;
  double sum = 0.0;
  for (double r : returns) sum += r;
  s.mean = sum / static_cast<double>(returns.size());
  double var = 0.0;
  for (double r : returns) var += (r - s.mean) * (r - s.mean);
  s.std = std::sqrt(var / static_cast<double>(returns.size()));
  s.min = *std::min_element(returns.begin(), returns.end());
  s.max = *std::max_element(returns.begin(), returns.end());
  s.seeds = std::move(seeds);
  s.returns = std::move(returns);
  return s;
}

EvalSummary cmd_eval(const Checkpoint& ckpt, const std::vector<std::uint64_t>& seeds,
                     const fs::path& out_dir, int workers,
                     const std::optional<fs::path>& trajectory_csv) {
  const Task task(ckpt.config);
  if (!task.has_policy()) throw ConfigError("eval: benchmark checkpoints have no policy");
  if (seeds.empty()) throw ConfigError("eval: no seeds");
  const Policy policy = task.decode(ckpt.genome);
  std::vector<double> returns(seeds.size());

  if (trajectory_csv) {
    if (trajectory_csv->has_parent_path()) fs::create_directories(trajectory_csv->parent_path());
    auto traj = open_out(*trajectory_csv);
    const auto spec = ckpt.config.env_spec();
    traj << "episode,t";
    for (int i = 0; i < spec.obs_dim; ++i) traj << ",obs" << i;
    if (spec.action_mode == ActionMode::Discrete) {
      traj << ",action";
    } else {
      for (int i = 0; i < spec.action_dim; ++i) traj << ",action" << i;
    }
    traj << ",reward\n";
    for (std::size_t e = 0; e < seeds.size(); ++e) {
      returns[e] = task.episode_return(
          policy, seeds[e],
          [&](int t, std::span<const double> obs, const Action& action, double reward) {
            traj << e << ',' << t;
            for (double v : obs) traj << ',' << format_double(v);
            if (const int* a = std::get_if<int>(&action)) {
              traj << ',' << *a;
            } else {
              for (double v : std::get<std::vector<double>>(action)) traj << ',' << format_double(v);
            }
            traj << ',' << format_double(reward) << '\n';
          });
    }
  } else {
    parallel_for(seeds.size(), workers, [&](std::size_t e) { returns[e] = task.episode_return(policy, seeds[e]); });
  }

  EvalSummary s = summarize(seeds, returns);
  fs::create_directories(out_dir);
  auto eval = open_out(out_dir / "eval.csv");
  eval << "episodes,mean,std,min,max\n"
       << s.returns.size() << ',' << format_double(s.mean) << ',' << format_double(s.std) << ','
       << format_double(s.min) << ',' << format_double(s.max) << '\n';
  auto episodes = open_out(out_dir / "episodes.csv");
  episodes << "episode,seed,return\n";
  for (std::size_t e = 0; e < s.returns.size(); ++e) {
    episodes << e << ',' << s.seeds[e] << ',' << format_double(s.returns[e]) << '\n';
  }
  return s;
}

MetamorphOutputs cmd_metamorph(const Checkpoint& ckpt, const fs::path& out_dir, int episodes) {
  const Task task(ckpt.config);
  const RunConfig& cfg = ckpt.config;
  if (cfg.task != TaskKind::PlanarWalker || cfg.genome != GenomeKind::Nca) {
    throw ConfigError("metamorph: checkpoint must hold an NCA genome for the walker task");
  }
  const NcaGenome g = task.nca_genome(ckpt.genome);
  MetamorphOutputs out;
  out.development = staged_develop(g, task.seed_substrate(), cfg.schedule, task.policy_spec(), true);
  out.matrix = cross_evaluate(g, task.seed_substrate(), cfg.schedule, task.policy_spec(),
                              task.morph_evaluator(episodes));

  const auto& pols = out.development.policies;
  std::vector<std::vector<double>> flat;
  for (const auto& p : pols) flat.push_back(p.flatten());
  for (std::size_t a = 0; a < flat.size(); ++a) {
    for (std::size_t b = a + 1; b < flat.size(); ++b) {
      double d2 = 0.0;
      for (std::size_t k = 0; k < flat[a].size(); ++k) d2 += (flat[a][k] - flat[b][k]) * (flat[a][k] - flat[b][k]);
      out.pairwise_l2.push_back(std::sqrt(d2));
    }
  }

  std::vector<std::vector<double>> snapshots;
  for (const auto& s : out.development.trajectory) {
    snapshots.push_back(materialize(readout_channel(s), task.policy_spec()).flatten());
  }
  out.pca = pca_trajectory(snapshots);
  out.pca_labels.push_back("seed");
  for (const auto& st : cfg.schedule) {
    for (int k = 0; k < st.steps; ++k) out.pca_labels.push_back(to_string(st.morphology));
  }

  fs::create_directories(out_dir);
  auto cross = open_out(out_dir / "cross_eval.csv");
  cross << "policy";
  for (auto m : out.matrix.morphologies) cross << ',' << to_string(m);
  cross << '\n';
  for (int i = 0; i < out.matrix.size(); ++i) {
    cross << to_string(out.matrix.morphologies[i]);
    for (int j = 0; j < out.matrix.size(); ++j) cross << ',' << format_double(out.matrix.at(i, j));
    cross << '\n';
  }

  auto dist = open_out(out_dir / "stage_distances.csv");
  dist << "policy_a,policy_b,readout_step_a,readout_step_b,l2\n";
  std::size_t idx = 0;
  for (std::size_t a = 0; a < pols.size(); ++a) {
    for (std::size_t b = a + 1; b < pols.size(); ++b) {
      dist << to_string(cfg.schedule[a].morphology) << ',' << to_string(cfg.schedule[b].morphology) << ','
           << out.development.readout_steps[a] << ',' << out.development.readout_steps[b] << ','
           << format_double(out.pairwise_l2[idx++]) << '\n';
    }
  }

  auto pca = open_out(out_dir / "pca.csv");
  pca << "step,morphology,x,y,z\n";
  for (std::size_t i = 0; i < out.pca.points.size(); ++i) {
    const auto& p = out.pca.points[i];
    pca << i << ',' << out.pca_labels[i] << ',' << format_double(p[0]) << ',' << format_double(p[1])
        << ',' << format_double(p[2]) << '\n';
  }
  return out;
}

LayerImage to_image(const Matrix& m) {
  LayerImage img;
  img.rows = m.rows;
  img.cols = m.cols;
  img.min = *std::min_element(m.data.begin(), m.data.end());
  img.max = *std::max_element(m.data.begin(), m.data.end());
  img.pixels.resize(m.data.size());
  const double range = img.max - img.min;
  for (std::size_t k = 0; k < m.data.size(); ++k) {
    img.pixels[k] = range > 0.0
                        ? static_cast<std::uint8_t>(std::lround(255.0 * (m.data[k] - img.min) / range))
                        : std::uint8_t{128};
  }
  return img;
}

std::vector<LayerImage> cmd_inspect(const Checkpoint& ckpt, std::optional<int> steps,
                                    const fs::path& out_dir) {
  const Task task(ckpt.config);
  if (!task.has_policy()) throw ConfigError("inspect: benchmark checkpoints have no policy");
  std::vector<Policy> snapshots;
  if (ckpt.config.genome == GenomeKind::Nca) {
    int total = ckpt.config.nca_steps;
    if (ckpt.config.metamorph) total = readout_steps(ckpt.config.schedule).back();
    if (steps) total = *steps;
    if (total < 0) throw ConfigError("--steps must be >= 0");
    std::vector<Substrate> subs;
    develop(task.seed_substrate(), task.nca_genome(ckpt.genome), total, &subs);
    for (const auto& s : subs) snapshots.push_back(materialize(readout_channel(s), task.policy_spec()));
  } else {
    snapshots.push_back(task.decode(ckpt.genome));
  }

  fs::create_directories(out_dir);
  auto norm = open_out(out_dir / "normalization.csv");
  norm << "step,layer,rows,cols,min,max\n";
  std::vector<LayerImage> images;
  for (std::size_t step = 0; step < snapshots.size(); ++step) {
    const auto& pol = snapshots[step];
    for (std::size_t layer = 0; layer < pol.weights.size(); ++layer) {
      LayerImage img = to_image(pol.weights[layer]);
      img.step = static_cast<int>(step);
      img.layer = static_cast<int>(layer);
      const std::string stem = "step" + pad3(img.step) + "_layer" + std::to_string(img.layer);

      std::ofstream pgm(out_dir / (stem + ".pgm"), std::ios::binary | std::ios::trunc);
      if (!pgm) throw FormatError("cannot write image in '" + out_dir.string() + "'");
      pgm << "P5\n" << img.cols << ' ' << img.rows << "\n255\n";
      pgm.write(reinterpret_cast<const char*>(img.pixels.data()), static_cast<std::streamsize>(img.pixels.size()));

      auto raw = open_out(out_dir / (stem + ".csv"));
      const Matrix& m = pol.weights[layer];
      for (int r = 0; r < m.rows; ++r) {
        for (int c = 0; c < m.cols; ++c) raw << (c ? "," : "") << format_double(m(r, c));
        raw << '\n';
      }
      norm << img.step << ',' << img.layer << ',' << img.rows << ',' << img.cols << ','
           << format_double(img.min) << ',' << format_double(img.max) << '\n';
      images.push_back(std::move(img));
    }
  }
  return images;
}

}  // namespace hypernca
