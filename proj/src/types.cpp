#include "cfea/types.hpp"

#include <cmath>

#include "cfea/error.hpp"

namespace cfea {

ImageTensor::ImageTensor(Tensor chw) : t_(std::move(chw)) {
  if (t_.ndim() != 3 || t_.dim(0) != 3) throw InputError("ImageTensor: expects (3, H, W)");
  if (t_.dim(1) < 8 || t_.dim(2) < 8) throw InputError("ImageTensor: height and width must be >= 8");
  for (std::int64_t i = 0; i < t_.size(); ++i) {
    const double v = t_[i];
    if (!std::isfinite(v) || v < 0.0 || v > 1.0)
      throw InputError("ImageTensor: values must be finite and in [0, 1]");
  }
}

LabelMask::LabelMask(int height, int width) : h_(height), w_(width) {
  if (height <= 0 || width <= 0) throw InputError("LabelMask: non-positive size");
  labels_.assign(static_cast<std::size_t>(height) * width, 0);
}

LabelMask::LabelMask(int height, int width, std::vector<std::uint8_t> labels)
    : h_(height), w_(width), labels_(std::move(labels)) {
  if (height <= 0 || width <= 0) throw InputError("LabelMask: non-positive size");
  if (labels_.size() != static_cast<std::size_t>(height) * width)
    throw InputError("LabelMask: label count does not match size");
}

SoftPrediction::SoftPrediction(Tensor chw) : t_(std::move(chw)) {
  if (t_.ndim() != 3 || t_.dim(0) != kNumClasses)
    throw InputError("SoftPrediction: expects (3, H, W)");
  const int h = t_.dim(1), w = t_.dim(2);
  const std::int64_t plane = static_cast<std::int64_t>(h) * w;
  for (std::int64_t p = 0; p < plane; ++p) {
    double s = 0.0;
    for (int c = 0; c < kNumClasses; ++c) {
      const double v = t_[c * plane + p];
      if (!std::isfinite(v) || v < 0.0 || v > 1.0)
        throw InputError("SoftPrediction: probabilities must be in [0, 1]");
      s += v;
    }
    if (std::abs(s - 1.0) > 1e-5)
      throw InputError("SoftPrediction: channel sum deviates from 1 by more than 1e-5");
  }
}

EncoderFeature::EncoderFeature(Tensor chw) : t_(std::move(chw)) {
  if (t_.ndim() != 3) throw InputError("EncoderFeature: expects (C, H, W)");
  if (!t_.all_finite()) throw NumericError("EncoderFeature: non-finite values");
}

std::vector<MaskViolation> validate_mask(const LabelMask& mask) {
  std::vector<MaskViolation> out;
  const int h = mask.height(), w = mask.width();
  for (int r = 0; r < h; ++r)
    for (int c = 0; c < w; ++c) {
      const std::uint8_t v = mask.at(r, c);
      if (v > kCup) {
        out.push_back({r, c, "label " + std::to_string(v) + " outside {0,1,2}"});
        continue;
      }
      if (v != kCup) continue;
      // Enclosure: a cup pixel may not touch background (out-of-bounds counts
      // as background), i.e. the disc region must surround the cup.
      const int dr[4] = {-1, 1, 0, 0};
      const int dc[4] = {0, 0, -1, 1};
      for (int k = 0; k < 4; ++k) {
        const int nr = r + dr[k], nc = c + dc[k];
        const bool background =
            nr < 0 || nr >= h || nc < 0 || nc >= w || mask.at(nr, nc) == kBackground;
        if (background) {
          out.push_back({r, c, "cup pixel not enclosed by disc region"});
          break;
        }
      }
    }
  return out;
}

Tensor one_hot(const LabelMask& mask) {
  const int h = mask.height(), w = mask.width();
  Tensor t({kNumClasses, h, w});
  const std::int64_t plane = static_cast<std::int64_t>(h) * w;
  for (std::int64_t i = 0; i < plane; ++i) t[mask.labels()[static_cast<std::size_t>(i)] * plane + i] = 1.0;
  return t;
}

void LossWeights::validate() const {
  if (lambda_adv_enc < 0 || lambda_adv_dec < 0 || lambda_mse_enc < 0 || lambda_mse_dec < 0)
    throw ConfigError("LossWeights: lambdas must be non-negative");
  if (!(ema_decay >= 0.0 && ema_decay < 1.0))
    throw ConfigError("LossWeights: ema_decay must be in [0, 1)");
}

}  // namespace cfea
