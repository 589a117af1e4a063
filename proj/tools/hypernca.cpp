// hypernca: train, evaluate and inspect NCA-grown policies.

#include <CLI11.hpp>

#include <filesystem>
#include <iostream>
#include <optional>
#include <string>

#include "hypernca/app.hpp"
#include "hypernca/checkpoint.hpp"
#include "hypernca/config.hpp"
#include "hypernca/errors.hpp"
#include "hypernca/kernels.hpp"

namespace fs = std::filesystem;
using namespace hypernca;

int main(int argc, char** argv) {
  CLI::App app{"Neuroevolution of policies grown by a 3D neural cellular automaton"};
  app.require_subcommand(1);

  std::string config_path, checkpoint_path, out_dir, seeds_text, trajectory;
  std::optional<int> workers, episodes, steps;

  auto* train = app.add_subcommand("train", "evolve a genome with CMA-ES");
  train->add_option("--config", config_path, "config file")->required();
  train->add_option("--workers", workers, "evaluation threads");
  train->add_option("--out", out_dir, "output directory (default: run.output_dir)");

  auto* eval = app.add_subcommand("eval", "roll out a checkpoint's policy");
  eval->add_option("--checkpoint", checkpoint_path, "checkpoint file")->required();
  eval->add_option("--episodes", episodes, "episodes with seeds 1000, 1001, ... (default 100)");
  eval->add_option("--seeds", seeds_text, "seed list a,b,c or half-open range a:b");
  eval->add_option("--workers", workers, "evaluation threads");
  eval->add_option("--out", out_dir, "output directory (default: eval)");
  eval->add_option("--trajectory", trajectory, "per-step CSV dump");

  auto* meta = app.add_subcommand("metamorph", "cross-evaluate staged policies and project their trajectory");
  meta->add_option("--checkpoint", checkpoint_path, "checkpoint file")->required();
  meta->add_option("--episodes", episodes, "episodes per matrix entry (default: task.episodes)");
  meta->add_option("--out", out_dir, "output directory (default: metamorph)");

  auto* inspect = app.add_subcommand("inspect", "write policy weight images per developmental step");
  inspect->add_option("--checkpoint", checkpoint_path, "checkpoint file")->required();
  inspect->add_option("--steps", steps, "developmental steps (default: nca.steps)");
  inspect->add_option("--out", out_dir, "output directory (default: inspect)");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*train) {
      RunConfig cfg = load_config(config_path);
      cfg.workers = resolve_workers(workers, cfg.workers);
      if (!out_dir.empty()) cfg.output_dir = out_dir;
      std::cout << "kernels: " << kernels::backend_name(kernels::active().backend) << "\n";
      cmd_train(cfg, cfg.output_dir, &std::cout);
    } else if (*eval) {
      const Checkpoint ckpt = read_checkpoint(checkpoint_path);
      if (!seeds_text.empty() && episodes) throw ConfigError("use either --seeds or --episodes");
      const auto seeds = seeds_text.empty() ? default_eval_seeds(episodes.value_or(100))
                                            : parse_seed_list(seeds_text);
      const int w = resolve_workers(workers, ckpt.config.workers);
      std::optional<fs::path> traj;
      if (!trajectory.empty()) traj = trajectory;
      const auto s = cmd_eval(ckpt, seeds, out_dir.empty() ? "eval" : out_dir, w, traj);
      std::cout << "reward " << format_mean_std(s.mean, s.std) << " over " << s.returns.size()
                << " episodes (min " << format_double(s.min) << ", max " << format_double(s.max) << ")\n";
    } else if (*meta) {
      const Checkpoint ckpt = read_checkpoint(checkpoint_path);
      const auto out = cmd_metamorph(ckpt, out_dir.empty() ? "metamorph" : out_dir,
                                     episodes.value_or(ckpt.config.episodes));
      const auto& m = out.matrix;
      std::cout << "policy";
      for (auto id : m.morphologies) std::cout << '\t' << to_string(id);
      std::cout << '\n';
      for (int i = 0; i < m.size(); ++i) {
        std::cout << to_string(m.morphologies[i]) << " (step " << out.development.readout_steps[i] << ")";
        for (int j = 0; j < m.size(); ++j) std::cout << '\t' << format_double(m.at(i, j));
        std::cout << '\n';
      }
      std::cout << "diagonal-dominant rows: " << m.diagonal_dominant_rows() << " of " << m.size() << '\n';
      std::cout << "stage distances:";
      for (double d : out.pairwise_l2) std::cout << ' ' << format_double(d);
      std::cout << "\nPCA variance explained: " << format_double(out.pca.explained_variance[0]) << ", "
                << format_double(out.pca.explained_variance[1]) << ", "
                << format_double(out.pca.explained_variance[2]) << " of "
                << format_double(out.pca.total_variance) << '\n';
    } else if (*inspect) {
      const Checkpoint ckpt = read_checkpoint(checkpoint_path);
      const fs::path dir = out_dir.empty() ? "inspect" : out_dir;
      const auto images = cmd_inspect(ckpt, steps, dir);
      std::cout << "wrote " << images.size() << " images to " << dir.string() << '\n';
    }
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
