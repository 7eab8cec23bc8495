#pragma once

#include "cfea/autodiff.hpp"
#include "cfea/tensor.hpp"
#include "cfea/types.hpp"

namespace cfea {

inline constexpr double kDiceSmooth = 1e-5;
inline constexpr double kScoreClamp = 1e-7;

// How the segmentation networks attack the discriminators. NonSaturating
// minimizes -log D(source); Literal minimizes log(1 - D(source)), the form
// the min-max objective yields verbatim.
enum class AdversarialMode { NonSaturating, Literal };

// Soft dice loss in [0, 1]: 1 - mean over classes of
// (2*sum(p*g) + s) / (sum(p) + sum(g) + s) with one-hot g.
double dice_loss(const SoftPrediction& pred, const LabelMask& mask);
double dice_loss(const Tensor& pred_chw, const LabelMask& mask);

// Mean of -log(score): small when the discriminator calls source-derived
// features "target". Scores must lie in (0, 1).
double adversarial_fool_loss(const Tensor& source_scores);

// Student-side adversarial term honoring the configured mode. The literal
// form mean(log(1 - score)) is negative-valued; the default is >= 0.
double adversarial_term(const Tensor& source_scores, AdversarialMode mode);

// Binary cross-entropy with target-domain label 1, source label 0:
// -mean(log t) - mean(log(1 - s)).
double domain_classification_loss(const Tensor& target_scores, const Tensor& source_scores);

// Mean over all elements of squared differences.
double consistency_mse(const Tensor& a, const Tensor& b);

struct LossReport {
  double seg = 0.0;
  double adv_enc = 0.0;
  double adv_dec = 0.0;
  double disc_enc = 0.0;
  double disc_dec = 0.0;
  double mse_enc = 0.0;
  double mse_dec = 0.0;
  double total = 0.0;

  // Throws NumericError naming the first non-finite component.
  void check_finite() const;
};

// Weighted combination seg + l_ae*enc_term + l_ad*dec_term +
// l_me*mse_enc + l_md*mse_dec. The trainer feeds it the fool losses for the
// student objective and the discriminator losses for the reported total.
double total_loss(double seg, double enc_term, double dec_term, double mse_enc, double mse_dec,
                  const LossWeights& weights);

// Graph builders used by the trainer; same math as the plain functions.
Var fool_loss_graph(const Var& source_scores, AdversarialMode mode);
Var domain_classification_loss_graph(const Var& target_scores, const Var& source_scores);

}  // namespace cfea
