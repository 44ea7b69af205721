#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "ivgan/tensor.hpp"
#include "ivgan/trainer.hpp"

namespace ivgan {

// Binary layout, little-endian:
//   "IVGN" | u32 version (1) | u32 tensor count |
//   per tensor: u16 name length, UTF-8 name, u8 rank, rank x u32 dims,
//               product(dims) x IEEE-754 binary64
inline constexpr char kCheckpointMagic[4] = {'I', 'V', 'G', 'N'};
inline constexpr std::uint32_t kCheckpointVersion = 1;

struct NamedTensor {
  std::string name;
  Tensor value;
  friend bool operator==(const NamedTensor&, const NamedTensor&) = default;
};

void write_tensor_file(const std::filesystem::path& path, const std::vector<NamedTensor>& tensors);
// Throws FormatError on bad magic, unknown version or truncation.
std::vector<NamedTensor> read_tensor_file(const std::filesystem::path& path);

struct Checkpoint {
  TrainerState state;
  TrainConfig config;
};

std::vector<NamedTensor> to_tensors(const TrainerState& state, const TrainConfig& config);
Checkpoint from_tensors(const std::vector<NamedTensor>& tensors);

void save_checkpoint(const TrainerState& state, const TrainConfig& config,
                     const std::filesystem::path& path);
Checkpoint load_checkpoint(const std::filesystem::path& path);

}  // namespace ivgan
