#pragma once

#include <cstdint>
#include <string>

#include "cfea/config.hpp"
#include "cfea/params.hpp"
#include "cfea/trainer.hpp"

namespace cfea {

// Checkpoint container: fixed header (magic, format version, config hash,
// iteration, payload size), then the payload (config text, four parameter
// sets, optimizer moments, RNG state) and a CRC32 covering every payload
// byte. Arrays are little-endian IEEE-754 float64. Writes go through a
// temp file and a rename so readers never observe partial files.
inline constexpr std::uint32_t kCheckpointVersion = 1;

void save_checkpoint(const TrainState& state, const RunConfig& config, const std::string& path);

struct LoadedCheckpoint {
  TrainState state;
  RunConfig config;
  std::uint64_t config_hash = 0;
};

// Errors: CheckpointNotFoundError / CheckpointCorruptError /
// CheckpointVersionError, one per failure kind.
LoadedCheckpoint load_checkpoint(const std::string& path);

// Inference-only export: a single parameter set stored as float32.
void save_inference_params(const ParameterSet& params, const std::string& path);
ParameterSet load_inference_params(const std::string& path);

}  // namespace cfea
