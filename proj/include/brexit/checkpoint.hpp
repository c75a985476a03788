#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "brexit/network.hpp"
#include "brexit/optimizer.hpp"

namespace brexit {

/// Resumable training state. Parameters are stored as float32 (the network keeps
/// them float-representable), optimizer moments as float64.
struct Checkpoint {
  std::string config_text;  // canonical YAML of the run configuration
  std::string config_hash;
  int generation = 0;       // generations completed
  NetworkConfig network;
  std::vector<double> parameters;
  AdamState optimizer;
  std::vector<std::uint8_t> replay_buffer;            // ReplayBuffer::to_bytes
  std::vector<std::vector<double>> population;        // self-play snapshot parameters, oldest first
};

/// Container: "BRXCKPT1" magic, u32 format version, u32 entry count, then entries of
/// (name, dtype, dims, raw little-endian data). Written to a temporary file and renamed.
void save_checkpoint(const std::filesystem::path& path, const Checkpoint& checkpoint);
std::vector<std::uint8_t> serialize_checkpoint(const Checkpoint& checkpoint);

/// Throws CheckpointError on a bad magic, version, missing entry or shape mismatch.
Checkpoint load_checkpoint(const std::filesystem::path& path);
Checkpoint deserialize_checkpoint(std::span<const std::uint8_t> bytes);

struct CheckpointError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Network with the checkpoint's architecture and parameters.
Network restore_network(const NetworkConfig& config, std::span<const double> parameters);

}  // namespace brexit
