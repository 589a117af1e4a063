// Acceptance suite. `acceptance` runs every criterion, `acceptance N` runs one.
// Prints one PASS/FAIL line per criterion and exits non-zero on any failure.

#include <Eigen/Dense>
#include <algorithm>
#include <array>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <sstream>
#include <string>

#include "hypernca/app.hpp"
#include "hypernca/checkpoint.hpp"
#include "hypernca/cmaes.hpp"
#include "hypernca/config.hpp"
#include "hypernca/kernels.hpp"
#include "hypernca/linear_hyper.hpp"
#include "hypernca/metamorphosis.hpp"
#include "hypernca/nca.hpp"
#include "hypernca/task.hpp"
#include "oracles.hpp"

using namespace hypernca;
namespace fs = std::filesystem;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string num(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / "hypernca_acceptance" / name;
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream s;
  s << in.rdbuf();
  return s.str();
}

RunConfig load(const std::string& name) { return load_config(fs::path(HYPERNCA_CONFIG_DIR) / name); }

NcaConfig random_config(Rng& rng) {
  NcaConfig c;
  c.channels = 1 + static_cast<int>(rng() % 4);
  c.hidden_channels = 1 + static_cast<int>(rng() % 9);
  c.conv_layers = 1 + static_cast<int>(rng() % 3);
  c.use_bias = rng() % 2;
  c.update_mode = rng() % 2 ? UpdateMode::Residual : UpdateMode::Replace;
  return c;
}

Outcome locality() {
  Rng rng(101);
  std::size_t violations = 0, checked = 0;
  for (int pair = 0; pair < 200; ++pair) {
    auto c = random_config(rng);
    if (pair % 2 == 0) c.conv_layers = 1;
    const NcaGenome g(c, oracle::random_vector(rng, param_count(c), 0.5));
    const SubstrateShape shape{c.channels, 1 + static_cast<int>(rng() % 8), 1 + static_cast<int>(rng() % 10)};
    const auto s = seed(shape, UniformRandomSeed{rng()});
    const int l0 = static_cast<int>(rng() % shape.layers);
    const int i0 = static_cast<int>(rng() % shape.width), j0 = static_cast<int>(rng() % shape.width);
    auto p = s;
    p.at(static_cast<int>(rng() % c.channels), l0, i0, j0) += 0.5 + rng.uniform(0.0, 1.0);
    for (int k = 1; k <= 3; ++k) {
      // Each conv layer widens the neighbourhood of one step by a cell.
      const int radius = k * c.conv_layers;
      const auto a = develop(s, g, k), b = develop(p, g, k);
      for (int ch = 0; ch < shape.channels; ++ch) {
        for (int l = 0; l < shape.layers; ++l) {
          for (int i = 0; i < shape.width; ++i) {
            for (int j = 0; j < shape.width; ++j) {
              if (std::max({std::abs(l - l0), std::abs(i - i0), std::abs(j - j0)}) <= radius) continue;
              ++checked;
              if (a.at(ch, l, i, j) != b.at(ch, l, i, j)) ++violations;
            }
          }
        }
      }
    }
  }
  return {violations == 0 && checked > 0,
          std::to_string(violations) + " changed cells outside the cone of " + std::to_string(checked)};
}

Outcome step_oracle() {
  Rng rng(102);
  double worst = 0.0;
  for (int trial = 0; trial < 50; ++trial) {
    const auto c = random_config(rng);
    const SubstrateShape shape{c.channels, 1 + static_cast<int>(rng() % 5), 1 + static_cast<int>(rng() % 9)};
    const auto s = seed(shape, UniformRandomSeed{rng()});
    const NcaGenome g(c, oracle::random_vector(rng, param_count(c), 0.5));
    worst = std::max(worst, oracle::max_abs_diff(step(s, g).cells, oracle::nca_step(s, g.params, c).cells));
  }
  return {worst <= 1e-12, "max abs diff " + num(worst) + " (tolerance 1e-12)"};
}

Outcome cmaes_benchmarks() {
  RunOptions sphere_opts;
  sphere_opts.lambda = 16;
  sphere_opts.sigma0 = 0.1;
  sphere_opts.max_generations = 300;
  sphere_opts.target_fitness = -1e-10;
  sphere_opts.seed = 1;
  const auto s = run(std::vector<double>(10, 1.0), [](std::span<const double> x, std::size_t) { return sphere(x); },
                     sphere_opts);

  RunOptions rosen_opts;
  rosen_opts.lambda = 16;
  rosen_opts.sigma0 = 0.1;
  rosen_opts.max_generations = 3000;
  rosen_opts.target_fitness = -1e-7;
  rosen_opts.seed = 1;
  const auto r = run(std::vector<double>(5, 0.0),
                     [](std::span<const double> x, std::size_t) { return rosenbrock(x); }, rosen_opts);

  const bool pass = s.best_fitness > -1e-10 && s.history.size() <= 300 && r.best_fitness > -1e-6 &&
                    r.history.size() <= 3000;
  return {pass, "sphere " + num(s.best_fitness) + " at generation " + std::to_string(s.history.size()) +
                    ", rosenbrock " + num(r.best_fitness) + " at generation " + std::to_string(r.history.size())};
}

Outcome worker_invariance() {
  auto cfg = load("cartpole.cfg");
  cfg.max_generations = 30;
  cfg.target_fitness.reset();
  cfg.early_stop.reset();
  cfg.workers = 1;
  const auto a = cmd_train(cfg, scratch("workers1"));
  cfg.workers = 8;
  const auto b = cmd_train(cfg, scratch("workers8"));
  const auto ta = slurp(a.fitness_csv), tb = slurp(b.fitness_csv);
  const bool pass = ta == tb && a.result.history.size() == 30;
  return {pass, std::string(ta == tb ? "identical" : "different") + " fitness.csv (" +
                    std::to_string(ta.size()) + " bytes, " + std::to_string(a.result.history.size()) +
                    " generations)"};
}

Outcome compression() {
  const NcaConfig defaults;
  const std::vector<int> walker{28, 28, 28, 8};
  const PolicySpec walker_spec{walker, ActionMode::Continuous};
  const double walker_ratio = static_cast<double>(walker_spec.param_count()) / param_count(defaults);

  std::vector<int> deep(30, 28);
  deep.push_back(8);
  const PolicySpec deep_spec{deep, ActionMode::Continuous};
  const double deep_ratio = static_cast<double>(deep_spec.param_count()) / param_count(defaults);

  Rng rng(105);
  const NcaGenome g(defaults, oracle::random_vector(rng, param_count(defaults), 0.1));
  const auto grown = develop(seed(shape_for_policy(deep, defaults.channels), UniformRandomSeed{7}), g, 20);
  const auto policy = materialize(readout_channel(grown), deep_spec);
  bool shapes_ok = policy.weights.size() == 30;
  for (std::size_t k = 0; k < policy.weights.size() && shapes_ok; ++k) {
    shapes_ok = policy.weights[k].rows == deep[k] && policy.weights[k].cols == deep[k + 1];
  }
  bool finite = true;
  for (double w : policy.flatten()) finite = finite && std::isfinite(w);
  const auto out = forward(policy, oracle::random_vector(rng, 28));
  for (double v : out) finite = finite && std::isfinite(v);

  const bool pass = walker_spec.param_count() == 1792 && walker_ratio >= 2.0 && deep_spec.param_count() >= 20000 &&
                    deep_ratio >= 10.0 && shapes_ok && finite && out.size() == 8;
  return {pass, "genome " + std::to_string(param_count(defaults)) + "; walker 1792 params ratio " +
                    num(walker_ratio) + "; deep " + std::to_string(deep_spec.param_count()) + " params ratio " +
                    num(deep_ratio) + (shapes_ok && finite ? ", shapes ok, finite" : ", bad shape or non-finite")};
}

Outcome baseline_counts() {
  const auto a = baseline_param_count({32, 8, 1792});
  const auto b = baseline_param_count({24, 7, 288});
  return {a == 704 && b == 252, std::to_string(a) + " and " + std::to_string(b)};
}

Outcome desk_solves() {
  const auto seeds = default_eval_seeds(100);

  const auto cart_cfg = load("cartpole.cfg");
  const auto cart = cmd_train(cart_cfg, scratch("cartpole"));
  const auto cart_eval = cmd_eval(read_checkpoint(cart.best_checkpoint), seeds, scratch("cartpole_eval"), 1);

  const auto lander_cfg = load("lander2d.cfg");
  const auto lander = cmd_train(lander_cfg, scratch("lander"));
  const auto lander_eval = cmd_eval(read_checkpoint(lander.best_checkpoint), seeds, scratch("lander_eval"), 1);
  const Task lander_task(lander_cfg);
  const auto spec = lander_task.policy_spec();
  const auto zero = policy_from_flat(std::vector<double>(spec.param_count(), 0.0), spec);
  double zero_mean = 0.0;
  for (auto s : seeds) zero_mean += lander_task.episode_return(zero, s);
  zero_mean /= static_cast<double>(seeds.size());

  const bool pass = cart_cfg.population == 64 && cart.result.history.size() <= 300 && cart_eval.mean >= 195.0 &&
                    lander_eval.mean >= zero_mean + 300.0;
  return {pass, "cartpole " + format_mean_std(cart_eval.mean, cart_eval.std) + " after " +
                    std::to_string(cart.result.history.size()) + " generations; lander " +
                    format_mean_std(lander_eval.mean, lander_eval.std) + " vs zero policy " + num(zero_mean)};
}

Outcome metamorphosis() {
  const auto cfg = load("walker_metamorph.cfg");
  const auto trained = cmd_train(cfg, scratch("walker"));
  const auto ckpt = read_checkpoint(trained.best_checkpoint);
  const auto out = cmd_metamorph(ckpt, scratch("walker_metamorph"), cfg.episodes);

  bool distances = out.pairwise_l2.size() == 3;
  for (double d : out.pairwise_l2) distances = distances && d > 0.0;
  const int dominant = out.matrix.diagonal_dominant_rows();

  // Read-outs at the cumulative steps, and each one equals plain development to that step.
  const Task task(cfg);
  const auto g = task.nca_genome(ckpt.genome);
  bool readouts = out.development.readout_steps == std::vector<int>{10, 30, 50};
  for (int k = 0; k < 3 && readouts; ++k) {
    const auto s = develop(task.seed_substrate(), g, out.development.readout_steps[k]);
    readouts = s == out.development.stage_substrates[k] &&
               materialize(readout_channel(s), task.policy_spec()).flatten() ==
                   out.development.policies[k].flatten();
  }

  std::string row_text;
  for (int i = 0; i < 3; ++i) {
    row_text += " [";
    for (int j = 0; j < 3; ++j) row_text += (j ? " " : "") + num(out.matrix.at(i, j));
    row_text += "]";
  }
  return {distances && dominant >= 2 && readouts,
          "L2 " + num(out.pairwise_l2[0]) + "/" + num(out.pairwise_l2[1]) + "/" + num(out.pairwise_l2[2]) + "; " +
              std::to_string(dominant) + " of 3 rows diagonal-dominant;" + row_text + "; read-outs " +
              (readouts ? "10/30/50" : "wrong")};
}

Outcome pca_oracle() {
  Rng rng(109);
  double worst = 0.0;
  for (int trial = 0; trial < 20; ++trial) {
    const int n = 3 + static_cast<int>(rng() % 50);
    const int d = 3 + static_cast<int>(rng() % 40);
    std::vector<std::vector<double>> snaps(n);
    for (auto& s : snaps) s = oracle::random_vector(rng, d);
    const auto got = pca_trajectory(snaps);

    Eigen::MatrixXd x(n, d);
    for (int i = 0; i < n; ++i) {
      for (int j = 0; j < d; ++j) x(i, j) = snaps[i][j];
    }
    x.rowwise() -= x.colwise().mean();
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(x.transpose() * x);
    for (int k = 0; k < 3; ++k) {
      const Eigen::VectorXd proj = x * es.eigenvectors().col(d - 1 - k);
      double same = 0.0, flipped = 0.0;
      for (int i = 0; i < n; ++i) {
        same = std::max(same, std::abs(got.points[i][k] - proj[i]));
        flipped = std::max(flipped, std::abs(got.points[i][k] + proj[i]));
      }
      worst = std::max(worst, std::min(same, flipped));
    }
  }
  return {worst <= 1e-9, "max projection diff " + num(worst) + " (tolerance 1e-9)"};
}

Outcome persistence() {
  Rng rng(110);
  const auto dir = scratch("checkpoints");
  int identical = 0;
  for (int k = 0; k < 100; ++k) {
    const auto cfg_text = (k % 2 ? "task.env = cartpole\npolicy.layers = 4,4,2\n"
                                 : "task.env = walker\npolicy.layers = 28,28,28,8\nmetamorph.enabled = true\n") +
                          std::string("run.seed = ") + std::to_string(rng() % 100000) + "\n";
    RunConfig cfg = parse_config(cfg_text);
    cfg.sigma0 = rng.uniform(1e-3, 1.0);
    const Task task(cfg);
    Checkpoint c{cfg, oracle::random_vector(rng, task.genome_size()), rng.normal() * 100, rng() % 1000,
                 std::nullopt};
    if (k % 3 == 0) c.state = EsState::initial(c.genome, cfg.sigma0, cfg.population);
    const auto path = dir / ("c" + std::to_string(k) + ".ckpt");
    write_checkpoint(path, c);
    const auto back = read_checkpoint(path);
    const auto again = dir / ("c" + std::to_string(k) + "_again.ckpt");
    write_checkpoint(again, back);
    if (back == c && slurp(path) == slurp(again)) ++identical;
  }
  return {identical == 100, std::to_string(identical) + " of 100 identical"};
}

struct Criterion {
  const char* name;
  std::function<Outcome()> check;
};

}  // namespace

int main(int argc, char** argv) {
  const std::array<Criterion, 10> criteria{{
      {"nca locality", locality},
      {"nca step oracle", step_oracle},
      {"cma-es sphere and rosenbrock", cmaes_benchmarks},
      {"worker-count invariance", worker_invariance},
      {"genomic compression", compression},
      {"baseline parameter formula", baseline_counts},
      {"desk-scale solves", desk_solves},
      {"metamorphosis", metamorphosis},
      {"pca oracle", pca_oracle},
      {"checkpoint persistence", persistence},
  }};

  std::vector<int> selected;
  if (argc > 1) {
    for (int a = 1; a < argc; ++a) selected.push_back(std::atoi(argv[a]));
  } else {
    for (int k = 1; k <= 10; ++k) selected.push_back(k);
  }

  std::printf("kernels: %s\n", std::string(kernels::backend_name(kernels::active().backend)).c_str());
  int failures = 0;
  for (int id : selected) {
    if (id < 1 || id > 10) {
      std::fprintf(stderr, "no criterion %d\n", id);
      return 2;
    }
    const auto& c = criteria[id - 1];
    const auto start = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = c.check();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    std::printf("%s criterion %d (%s): %s [%.1f s]\n", o.pass ? "PASS" : "FAIL", id, c.name, o.detail.c_str(), secs);
    std::fflush(stdout);
    if (!o.pass) ++failures;
  }
  return failures == 0 ? 0 : 1;
}
