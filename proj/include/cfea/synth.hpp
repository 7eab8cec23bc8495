#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "cfea/tensor.hpp"
#include "cfea/types.hpp"

namespace cfea {

// Appearance transform that turns "source camera" renders into "target
// camera" renders; masks are never touched by it.
struct ShiftProfile {
  double brightness_delta = -0.18;
  double hue_rotation_deg = 30.0;
  double contrast_factor = 0.65;
  double noise_level = 0.03;
};

struct SynthConfig {
  int n_source = 200;
  int n_target = 200;
  int n_target_test = 100;
  int image_size = 64;
  ShiftProfile shift;
  // Shape jitter for the disc/cup ellipses.
  double disc_radius_lo = 0.16;  // fraction of image size
  double disc_radius_hi = 0.26;
  double cup_ratio_lo = 0.35;    // cup semi-axes as a fraction of disc's
  double cup_ratio_hi = 0.65;
  double eccentricity = 0.2;     // max relative semi-axis imbalance
  std::uint64_t seed = 12345;

  void validate() const;
};

struct SynthSample {
  Tensor image;  // (3, S, S), [0, 1]
  LabelMask mask;
  std::pair<int, int> disc_center;
};

struct SynthDataset {
  std::vector<SynthSample> samples;
};

struct SynthOutput {
  SynthDataset source;
  SynthDataset target;
  SynthDataset target_test;
};

// Deterministic given config.seed. Every mask satisfies the cup-inside-disc
// invariant by construction; target splits additionally pass through the
// shift profile.
SynthOutput synth_generate(const SynthConfig& config);

// Applies the appearance shift to one image (exposed for tests).
Tensor apply_shift(const Tensor& image_chw, const ShiftProfile& shift, std::uint64_t seed);

// Writes <root>/{source,target,target_test}/{images,masks} plus a
// manifest.jsonl per split. Target-split manifests still reference their
// masks; training simply never reads them.
void write_synth_dataset(const SynthOutput& out, const std::string& root);

}  // namespace cfea
