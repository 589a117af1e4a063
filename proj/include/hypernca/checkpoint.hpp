#pragma once

// Binary checkpoint, all integers and doubles little-endian:
//
//   "HNCA"  u32 version (=1)
//   u32 config length, canonical config text
//   u64 genome length, f64 genome[...]
//   f64 best fitness, u64 generation
//   u8 has_state, then if set:
//     u32 dimension, u32 lambda, f64 sigma, i64 generation, i64 eigen_generation,
//     f64 mean[d], C[d*d], B[d*d], D[d], p_sigma[d], p_c[d]
//   u32 CRC-32 of every preceding byte

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "hypernca/cmaes.hpp"
#include "hypernca/config.hpp"

namespace hypernca {

inline constexpr std::uint32_t kCheckpointVersion = 1;

struct Checkpoint {
  RunConfig config;
  Genome genome;
  double best_fitness = kFitnessFloor;
  std::uint64_t generation = 0;
  std::optional<EsState> state;

  friend bool operator==(const Checkpoint&, const Checkpoint&) = default;
};

std::vector<std::uint8_t> encode_checkpoint(const Checkpoint& ckpt);
/// Throws FormatError on bad magic, version, length or checksum.
Checkpoint decode_checkpoint(const std::vector<std::uint8_t>& bytes);

void write_checkpoint(const std::string& path, const Checkpoint& ckpt);
Checkpoint read_checkpoint(const std::string& path);

}  // namespace hypernca
