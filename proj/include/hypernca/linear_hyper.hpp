#pragma once

#include <cstddef>
#include <vector>

namespace hypernca {

/// Linear hypernetwork: N trainable embeddings of size E, one shared E x M
/// generator matrix, M = T / N. Chunk i of the output is embedding_i * G.
struct LinearHyperConfig {
  int num_embeddings = 1;
  int embedding_dim = 1;
  int target_param_count = 1;

  void validate() const;
  int chunk_size() const { return target_param_count / num_embeddings; }
  friend bool operator==(const LinearHyperConfig&, const LinearHyperConfig&) = default;
};

/// N*E + E*(T/N).
std::size_t baseline_param_count(const LinearHyperConfig& config);

/// Embeddings [N][E] followed by the generator [E][M], both row-major.
struct LinearHyperGenome {
  LinearHyperConfig config;
  std::vector<double> params;

  LinearHyperGenome() = default;
  LinearHyperGenome(LinearHyperConfig cfg, std::vector<double> p);
};

/// The T generated target parameters.
std::vector<double> generate(const LinearHyperGenome& g);

}  // namespace hypernca
