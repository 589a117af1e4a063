#pragma once

// Implementations of the CLI subcommands. Each writes its files under an
// output directory and returns what it computed so tests can call through
// without spawning the binary.

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "hypernca/checkpoint.hpp"
#include "hypernca/cmaes.hpp"
#include "hypernca/config.hpp"
#include "hypernca/metamorphosis.hpp"

namespace hypernca {

/// --workers, else HYPERNCA_WORKERS, else the config value.
int resolve_workers(std::optional<int> flag, int config_value);

/// "3" -> {3}; "1,5,9" -> {1,5,9}; "100:103" -> {100,101,102} (half-open).
std::vector<std::uint64_t> parse_seed_list(const std::string& text);
/// Evaluation seeds 1000, 1001, ... kept clear of the training seeds.
std::vector<std::uint64_t> default_eval_seeds(int episodes);

/// "252.00 ± 63.00"
std::string format_mean_std(double mean, double std);

struct TrainOutputs {
  RunResult result;
  std::filesystem::path best_checkpoint;
  std::filesystem::path mean_checkpoint;
  std::filesystem::path fitness_csv;
  std::filesystem::path timing_csv;
};

/// Runs the optimizer and writes best.ckpt, mean.ckpt, fitness.csv and
/// timing.csv into `out_dir`. Progress lines go to `log` when non-null.
TrainOutputs cmd_train(const RunConfig& config, const std::filesystem::path& out_dir,
                       std::ostream* log = nullptr);

struct EvalSummary {
  std::vector<std::uint64_t> seeds;
  std::vector<double> returns;
  double mean = 0;
  double std = 0;  ///< population standard deviation
  double min = 0;
  double max = 0;
};

EvalSummary summarize(std::vector<std::uint64_t> seeds, std::vector<double> returns);

/// Rolls out the checkpoint's policy once per seed, writes eval.csv and
/// episodes.csv, and optionally a per-step trajectory CSV.
EvalSummary cmd_eval(const Checkpoint& ckpt, const std::vector<std::uint64_t>& seeds,
                     const std::filesystem::path& out_dir, int workers,
                     const std::optional<std::filesystem::path>& trajectory_csv = std::nullopt);

struct MetamorphOutputs {
  StagedDevelopment development;
  CrossEvalMatrix matrix;
  std::vector<double> pairwise_l2;  ///< (0,1), (0,2), (1,2), ...
  PcaResult pca;
  std::vector<std::string> pca_labels;  ///< per developmental step
};

/// Cross-evaluation (cross_eval.csv), stage distances (stage_distances.csv)
/// and PCA of the per-step policy weights (pca.csv).
MetamorphOutputs cmd_metamorph(const Checkpoint& ckpt, const std::filesystem::path& out_dir,
                               int episodes);

struct LayerImage {
  int step = 0;
  int layer = 0;
  int rows = 0;
  int cols = 0;
  double min = 0;
  double max = 0;
  std::vector<std::uint8_t> pixels;
};

/// Min-max normalization to 0..255; a constant matrix maps to 128.
LayerImage to_image(const Matrix& m);

/// One PGM and raw CSV per developmental step and layer plus
/// normalization.csv. `steps` defaults to the config's development length.
std::vector<LayerImage> cmd_inspect(const Checkpoint& ckpt, std::optional<int> steps,
                                    const std::filesystem::path& out_dir);

}  // namespace hypernca
