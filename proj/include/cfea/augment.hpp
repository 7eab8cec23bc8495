#pragma once

#include <cstdint>

#include "cfea/tensor.hpp"
#include "cfea/types.hpp"

namespace cfea {

// Exact, invertible pixel permutation: horizontal flip, quarter-turn
// rotation, then circular integer translation. The same permutation applies
// to an image and to a same-shape prediction.
struct SpatialTransform {
  bool flip = false;
  int rot_quarters = 0;  // counter-clockwise quarter turns, 0..3
  int dy = 0;
  int dx = 0;

  bool is_identity() const { return !flip && rot_quarters == 0 && dy == 0 && dx == 0; }

  // Version for a grid downsampled by `factor`. Flip/rotation carry over
  // unchanged; translation is divided by the factor and rounded, or dropped
  // entirely when keep_translation is false (the encoder-level consistency
  // uses the symmetry part only).
  SpatialTransform scaled_for_grid(int factor, bool keep_translation) const;
};

inline constexpr int kMaxTranslation = 8;

// Uniform over the discrete family: flip in {0,1}, rotation in {0..3},
// translation components in [-8, 8].
SpatialTransform sample_spatial_transform(std::uint64_t seed);

// Applies the permutation to a (C, H, W) tensor. Rotations of 90/270 degrees
// require a square grid.
Tensor apply_transform(const SpatialTransform& t, const Tensor& chw);
Tensor apply_inverse_transform(const SpatialTransform& t, const Tensor& chw);

// Gaussian noise plus random multiplicative brightness and additive
// intensity shift; output re-clamped to [0, 1].
struct PixelAugmentConfig {
  double noise_sigma = 0.05;
  double brightness_lo = 0.9;
  double brightness_hi = 1.1;
  double shift_lo = -0.05;
  double shift_hi = 0.05;

  void validate() const;
};

Tensor pixel_augment(const Tensor& image_chw, const PixelAugmentConfig& config,
                     std::uint64_t seed);
ImageTensor pixel_augment(const ImageTensor& image, const PixelAugmentConfig& config,
                          std::uint64_t seed);

}  // namespace cfea
