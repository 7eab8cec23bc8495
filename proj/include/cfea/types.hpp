#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "cfea/tensor.hpp"

namespace cfea {

inline constexpr int kNumClasses = 3;  // background, disc rim, cup
inline constexpr std::uint8_t kBackground = 0;
inline constexpr std::uint8_t kDiscRim = 1;
inline constexpr std::uint8_t kCup = 2;

// RGB image, planar (3, H, W), values in [0, 1]. Immutable once constructed.
class ImageTensor {
 public:
  explicit ImageTensor(Tensor chw);
  const Tensor& tensor() const { return t_; }
  int height() const { return t_.dim(1); }
  int width() const { return t_.dim(2); }
  int channels() const { return t_.dim(0); }

 private:
  Tensor t_;
};

// Per-pixel labels in {0, 1, 2}, shape (H, W).
class LabelMask {
 public:
  LabelMask(int height, int width);
  LabelMask(int height, int width, std::vector<std::uint8_t> labels);
  int height() const { return h_; }
  int width() const { return w_; }
  std::uint8_t at(int r, int c) const { return labels_[static_cast<std::size_t>(r) * w_ + c]; }
  void set(int r, int c, std::uint8_t v) { labels_[static_cast<std::size_t>(r) * w_ + c] = v; }
  const std::vector<std::uint8_t>& labels() const { return labels_; }

  bool operator==(const LabelMask& o) const {
    return h_ == o.h_ && w_ == o.w_ && labels_ == o.labels_;
  }

 private:
  int h_ = 0, w_ = 0;
  std::vector<std::uint8_t> labels_;
};

// Per-pixel class probabilities, (3, H, W), channel sums 1 within 1e-5.
class SoftPrediction {
 public:
  explicit SoftPrediction(Tensor chw);
  const Tensor& tensor() const { return t_; }
  int height() const { return t_.dim(1); }
  int width() const { return t_.dim(2); }

 private:
  Tensor t_;
};

// Bottleneck encoder output, (C_e, H_e, W_e), finite values.
class EncoderFeature {
 public:
  explicit EncoderFeature(Tensor chw);
  const Tensor& tensor() const { return t_; }
  int channels() const { return t_.dim(0); }
  int height() const { return t_.dim(1); }
  int width() const { return t_.dim(2); }

 private:
  Tensor t_;
};

struct MaskViolation {
  int row = 0;
  int col = 0;
  std::string rule;
};

// Checks label-set membership and the cup-enclosed-by-disc rule. Never
// throws; returns one entry per offending pixel.
std::vector<MaskViolation> validate_mask(const LabelMask& mask);

// One-hot encode a mask into (3, H, W).
Tensor one_hot(const LabelMask& mask);

// Loss balance weights and EMA decay (Eq. 10 lambdas, Eq. 3 alpha).
struct LossWeights {
  double lambda_adv_enc = 0.002;
  double lambda_adv_dec = 0.002;
  double lambda_mse_enc = 0.1;
  double lambda_mse_dec = 0.1;
  double ema_decay = 0.99;

  void validate() const;
};

}  // namespace cfea
