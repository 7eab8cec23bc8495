#include "cfea/augment.hpp"

#include <cmath>

#include "cfea/error.hpp"
#include "cfea/rng.hpp"

namespace cfea {

SpatialTransform SpatialTransform::scaled_for_grid(int factor, bool keep_translation) const {
  if (factor < 1) throw InputError("scaled_for_grid: factor must be >= 1");
  SpatialTransform out = *this;
  if (keep_translation) {
    out.dy = static_cast<int>(std::lround(static_cast<double>(dy) / factor));
    out.dx = static_cast<int>(std::lround(static_cast<double>(dx) / factor));
  } else {
    out.dy = 0;
    out.dx = 0;
  }
  return out;
}

SpatialTransform sample_spatial_transform(std::uint64_t seed) {
  Rng rng(seed);
  SpatialTransform t;
  t.flip = rng.bernoulli(0.5);
  t.rot_quarters = static_cast<int>(rng.uniform_int(0, 3));
  t.dy = static_cast<int>(rng.uniform_int(-kMaxTranslation, kMaxTranslation));
  t.dx = static_cast<int>(rng.uniform_int(-kMaxTranslation, kMaxTranslation));
  return t;
}

namespace {

inline int mod(int a, int m) {
  const int r = a % m;
  return r < 0 ? r + m : r;
}

Tensor flip_h(const Tensor& x) {
  const int c = x.dim(0), h = x.dim(1), w = x.dim(2);
  Tensor out(x.shape());
  for (int ci = 0; ci < c; ++ci)
    for (int i = 0; i < h; ++i)
      for (int j = 0; j < w; ++j) out.at3(ci, i, j) = x.at3(ci, i, w - 1 - j);
  return out;
}

// One counter-clockwise quarter turn: out(r, c) = in(c, W-1-r).
Tensor rot90(const Tensor& x) {
  const int c = x.dim(0), h = x.dim(1), w = x.dim(2);
  Tensor out({c, w, h});
  for (int ci = 0; ci < c; ++ci)
    for (int i = 0; i < w; ++i)
      for (int j = 0; j < h; ++j) out.at3(ci, i, j) = x.at3(ci, j, w - 1 - i);
  return out;
}

Tensor translate(const Tensor& x, int dy, int dx) {
  const int c = x.dim(0), h = x.dim(1), w = x.dim(2);
  Tensor out(x.shape());
  for (int ci = 0; ci < c; ++ci)
    for (int i = 0; i < h; ++i)
      for (int j = 0; j < w; ++j) out.at3(ci, i, j) = x.at3(ci, mod(i - dy, h), mod(j - dx, w));
  return out;
}

void check_input(const SpatialTransform& t, const Tensor& x) {
  if (x.ndim() != 3) throw InputError("apply_transform: expects (C, H, W)");
  if ((t.rot_quarters % 2) != 0 && x.dim(1) != x.dim(2))
    throw InputError("apply_transform: quarter rotations require a square grid");
}

}  // namespace

Tensor apply_transform(const SpatialTransform& t, const Tensor& chw) {
  check_input(t, chw);
  Tensor out = chw;
  if (t.flip) out = flip_h(out);
  for (int k = 0; k < mod(t.rot_quarters, 4); ++k) out = rot90(out);
  if (t.dy != 0 || t.dx != 0) out = translate(out, t.dy, t.dx);
  return out;
}

Tensor apply_inverse_transform(const SpatialTransform& t, const Tensor& chw) {
  check_input(t, chw);
  Tensor out = chw;
  if (t.dy != 0 || t.dx != 0) out = translate(out, -t.dy, -t.dx);
  for (int k = 0; k < mod(4 - mod(t.rot_quarters, 4), 4); ++k) out = rot90(out);
  if (t.flip) out = flip_h(out);
  return out;
}

void PixelAugmentConfig::validate() const {
  if (noise_sigma < 0) throw ConfigError("PixelAugmentConfig: noise_sigma must be >= 0");
  if (brightness_hi < brightness_lo) throw ConfigError("PixelAugmentConfig: brightness range inverted");
  if (shift_hi < shift_lo) throw ConfigError("PixelAugmentConfig: shift range inverted");
}

Tensor pixel_augment(const Tensor& image_chw, const PixelAugmentConfig& config,
                     std::uint64_t seed) {
  config.validate();
  if (image_chw.ndim() != 3) throw InputError("pixel_augment: expects (C, H, W)");
  Rng rng(seed);
  const double brightness = rng.uniform(config.brightness_lo, config.brightness_hi);
  const double shift = rng.uniform(config.shift_lo, config.shift_hi);
  Tensor out = image_chw;
  for (std::int64_t i = 0; i < out.size(); ++i) {
    double v = out[i] * brightness + shift;
    if (config.noise_sigma > 0.0) v += config.noise_sigma * rng.normal();
    out[i] = std::min(std::max(v, 0.0), 1.0);
  }
  return out;
}

ImageTensor pixel_augment(const ImageTensor& image, const PixelAugmentConfig& config,
                          std::uint64_t seed) {
  return ImageTensor(pixel_augment(image.tensor(), config, seed));
}

}  // namespace cfea
