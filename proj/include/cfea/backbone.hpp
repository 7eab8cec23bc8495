#pragma once

#include <cstdint>
#include <utility>

#include "cfea/net.hpp"
#include "cfea/params.hpp"
#include "cfea/types.hpp"

namespace cfea {

// U-Net style encoder-decoder. Encoder level i works at base_channels * 2^i
// channels; the bottleneck sits at base_channels * 2^depth and is the
// "encoder output" fed to the feature-level discriminator and consistency
// loss. The decoder mirrors the encoder with nearest-neighbor upsampling,
// skip concatenation and a 1x1 head followed by a per-pixel softmax.
struct BackboneConfig {
  int input_size = 128;
  int depth = 4;
  int base_channels = 16;
  int num_classes = kNumClasses;  // fixed at 3

  void validate() const;
  int encoder_channels() const { return base_channels << depth; }
  int encoder_size() const { return input_size >> depth; }
};

ParameterSet init_backbone(const BackboneConfig& config, std::uint64_t seed);

// Total trainable scalars for a config (matches init_backbone).
std::int64_t backbone_parameter_count(const BackboneConfig& config);

struct BackboneOutputs {
  Var encoder_feature;  // (N, C_e, H_e, W_e)
  Var prediction;       // (N, 3, H, W), per-pixel simplex
};

// Builds the forward graph on a batched input (N, 3, H, W).
BackboneOutputs backbone_forward_graph(const VarMap& params, const Var& input,
                                       const BackboneConfig& config);

// Single-image inference; no gradient bookkeeping.
std::pair<EncoderFeature, SoftPrediction> forward(const ParameterSet& params,
                                                  const ImageTensor& image,
                                                  const BackboneConfig& config);

}  // namespace cfea
