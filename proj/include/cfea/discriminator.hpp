#pragma once

#include <cstdint>

#include "cfea/net.hpp"
#include "cfea/params.hpp"

namespace cfea {

enum class DiscriminatorOutput { PatchMap, Scalar };

// Small strided convolutional domain classifier: `stages` stride-2 conv +
// leaky-rectifier blocks then a 1-channel head produce patch logits; scalar
// mode pools the logits before squashing. Scores are sigmoid outputs clamped
// to [1e-7, 1 - 1e-7] so log terms stay finite. Convention: score =
// probability the input comes from the TARGET domain.
struct DiscriminatorConfig {
  int input_channels = 3;
  int width = 32;
  DiscriminatorOutput output_mode = DiscriminatorOutput::PatchMap;
  int stages = 3;  // input spatial size must be >= 2^stages

  void validate() const;
};

ParameterSet init_discriminator(const DiscriminatorConfig& config, std::uint64_t seed);

std::int64_t discriminator_parameter_count(const DiscriminatorConfig& config);

// Input (N, C, H, W) with C = config.input_channels and H, W >= 8.
// Returns scores: (N, 1, H/8, W/8) in patch mode, (N, 1, 1, 1) in scalar mode.
Var discriminator_forward_graph(const VarMap& params, const Var& input,
                                const DiscriminatorConfig& config);

// Plain forward on a (C, H, W) feature; returns the score grid as a tensor.
Tensor d_forward(const ParameterSet& params, const Tensor& feature_chw,
                 const DiscriminatorConfig& config);

}  // namespace cfea
