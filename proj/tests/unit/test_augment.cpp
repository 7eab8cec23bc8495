#include <doctest.h>

#include <cmath>

#include "cfea/augment.hpp"
#include "cfea/rng.hpp"

using namespace cfea;

namespace {

Tensor ramp_image(int h, int w) {
  Tensor t({3, h, w});
  for (std::int64_t i = 0; i < t.size(); ++i)
    t[i] = static_cast<double>(i % 97) / 96.0;
  return t;
}

}  // namespace

TEST_CASE("pixel_augment: neutral config is the identity") {
  PixelAugmentConfig cfg;
  cfg.noise_sigma = 0.0;
  cfg.brightness_lo = cfg.brightness_hi = 1.0;
  cfg.shift_lo = cfg.shift_hi = 0.0;
  Tensor img = ramp_image(8, 8);
  CHECK(pixel_augment(img, cfg, 5) == img);
}

TEST_CASE("pixel_augment: deterministic given seed, clamped to [0,1]") {
  PixelAugmentConfig cfg;
  Tensor img = ramp_image(16, 16);
  Tensor a = pixel_augment(img, cfg, 42);
  Tensor b = pixel_augment(img, cfg, 42);
  CHECK(a == b);
  Tensor c = pixel_augment(img, cfg, 43);
  CHECK_FALSE(a == c);
  CHECK(a.min() >= 0.0);
  CHECK(a.max() <= 1.0);
}

TEST_CASE("pixel_augment: mean stays within the statistical envelope") {
  PixelAugmentConfig cfg;  // sigma 0.05, brightness [0.9,1.1], shift [-0.05,0.05]
  Tensor img = Tensor::full({3, 16, 16}, 0.5);
  const double n = static_cast<double>(img.size());
  // |mean shift| <= |brightness-1|*0.5 + max|shift| + 3*sigma/sqrt(n)
  const double bound = 0.1 * 0.5 + 0.05 + 3.0 * cfg.noise_sigma / std::sqrt(n) + 1e-9;
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    Tensor out = pixel_augment(img, cfg, seed);
    CHECK(std::abs(out.mean() - img.mean()) <= bound);
  }
}

TEST_CASE("sample_spatial_transform: deterministic and uniform-ish") {
  CHECK(sample_spatial_transform(7).flip == sample_spatial_transform(7).flip);
  CHECK(sample_spatial_transform(7).dy == sample_spatial_transform(7).dy);
  int flips = 0;
  int rot_counts[4] = {0, 0, 0, 0};
  const int n = 1000;
  for (int s = 0; s < n; ++s) {
    SpatialTransform t = sample_spatial_transform(static_cast<std::uint64_t>(s));
    flips += t.flip ? 1 : 0;
    rot_counts[t.rot_quarters]++;
    CHECK(std::abs(t.dy) <= kMaxTranslation);
    CHECK(std::abs(t.dx) <= kMaxTranslation);
  }
  CHECK(std::abs(flips / static_cast<double>(n) - 0.5) < 0.05);
  for (int r = 0; r < 4; ++r) CHECK(rot_counts[r] > 0);
}

TEST_CASE("apply_transform: identity transform leaves input unchanged") {
  SpatialTransform id;
  Tensor img = ramp_image(12, 12);
  CHECK(apply_transform(id, img) == img);
  CHECK(apply_inverse_transform(id, img) == img);
}

TEST_CASE("apply_transform: apply then inverse restores the original") {
  Tensor img = ramp_image(16, 16);
  for (std::uint64_t seed = 0; seed < 50; ++seed) {
    SpatialTransform t = sample_spatial_transform(seed);
    CHECK(apply_inverse_transform(t, apply_transform(t, img)) == img);
  }
}

TEST_CASE("apply_transform: pure permutation preserves per-class pixel counts") {
  // One-hot prediction: counting oracle per channel.
  Tensor pred({3, 8, 8});
  Rng rng(4);
  for (int p = 0; p < 64; ++p) pred[static_cast<int>(rng.uniform_int(0, 2)) * 64 + p] = 1.0;
  double before[3], after[3];
  SpatialTransform t = sample_spatial_transform(9);
  Tensor moved = apply_transform(t, pred);
  for (int c = 0; c < 3; ++c) {
    before[c] = after[c] = 0.0;
    for (int p = 0; p < 64; ++p) {
      before[c] += pred[c * 64 + p];
      after[c] += moved[c * 64 + p];
    }
    CHECK(before[c] == after[c]);
  }
}

TEST_CASE("apply_transform: same permutation for image and prediction") {
  SpatialTransform t;
  t.flip = true;
  t.rot_quarters = 1;
  t.dy = 3;
  t.dx = -2;
  Tensor img = ramp_image(8, 8);
  Tensor pred = ramp_image(8, 8);
  Tensor mi = apply_transform(t, img);
  Tensor mp = apply_transform(t, pred);
  CHECK(mi == mp);  // identical inputs stay identical under the shared permutation
}

TEST_CASE("scaled_for_grid: rounds translation or drops it") {
  SpatialTransform t;
  t.flip = true;
  t.rot_quarters = 3;
  t.dy = 7;
  t.dx = -5;
  SpatialTransform enc = t.scaled_for_grid(4, true);
  CHECK(enc.flip == t.flip);
  CHECK(enc.rot_quarters == t.rot_quarters);
  CHECK(enc.dy == 2);   // round(7/4)
  CHECK(enc.dx == -1);  // round(-5/4)
  SpatialTransform sym = t.scaled_for_grid(4, false);
  CHECK(sym.dy == 0);
  CHECK(sym.dx == 0);
  CHECK(sym.flip == t.flip);
}

TEST_CASE("consistency alignment for an equivariant predictor") {
  // With f = per-pixel identity map, f(apply(t, x)) == apply(t, f(x)).
  Tensor x = ramp_image(8, 8);
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    SpatialTransform t = sample_spatial_transform(seed);
    Tensor lhs = apply_transform(t, x);   // f = identity
    Tensor rhs = apply_transform(t, x);
    double mse = 0.0;
    for (std::int64_t i = 0; i < lhs.size(); ++i) mse += (lhs[i] - rhs[i]) * (lhs[i] - rhs[i]);
    CHECK(mse == 0.0);
  }
}
