#pragma once

#include <cstdint>
#include <string>

#include "cfea/adam.hpp"
#include "cfea/augment.hpp"
#include "cfea/backbone.hpp"
#include "cfea/discriminator.hpp"
#include "cfea/losses.hpp"
#include "cfea/synth.hpp"
#include "cfea/types.hpp"

namespace cfea {

// One flat key-value config file drives every command; sections mirror the
// library modules. parse is strict: unknown sections or keys are errors.
struct RunConfig {
  SynthConfig synth;

  // Preprocessing
  int source_crop_size = 600;
  int target_crop_size = 500;
  bool standardize = false;  // per-channel standardization of network inputs

  BackboneConfig backbone;

  int disc_width_enc = 16;
  int disc_width_dec = 16;
  DiscriminatorOutput disc_output_mode = DiscriminatorOutput::PatchMap;

  LossWeights weights;
  std::int64_t ema_ramp_iters = 0;  // 0: constant decay

  PixelAugmentConfig augment;

  double seg_lr = 1e-3;
  double disc_lr = 1e-4;
  int batch_size = 4;
  std::int64_t total_iterations = 100;
  std::int64_t checkpoint_every = 100;
  std::uint64_t train_seed = 1;
  AdversarialMode adversarial_mode = AdversarialMode::NonSaturating;

  void validate() const;

  DiscriminatorConfig disc_enc_config() const;
  DiscriminatorConfig disc_dec_config() const;
  AdamConfig seg_opt_config() const;
  AdamConfig disc_opt_config() const;
};

// Canonical text form (stable key order, full precision). parse(dump(c))
// reproduces c exactly.
std::string dump_config(const RunConfig& config);
RunConfig parse_config(const std::string& text);
RunConfig load_config_file(const std::string& path);

// FNV-1a over the canonical dump; embedded in checkpoints.
std::uint64_t config_hash(const RunConfig& config);

}  // namespace cfea
