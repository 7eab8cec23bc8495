#include "cfea/losses.hpp"

#include <cmath>

#include "cfea/error.hpp"

namespace cfea {

double dice_loss(const Tensor& pred_chw, const LabelMask& mask) {
  if (pred_chw.ndim() != 3 || pred_chw.dim(0) != kNumClasses)
    throw InputError("dice_loss: prediction must be (3, H, W)");
  if (pred_chw.dim(1) != mask.height() || pred_chw.dim(2) != mask.width())
    throw InputError("dice_loss: prediction and mask shapes differ");
  Tensor p4({1, kNumClasses, pred_chw.dim(1), pred_chw.dim(2)}, std::vector<double>(pred_chw.data(), pred_chw.data() + pred_chw.size()));
  Tensor g = one_hot(mask);
  Tensor g4({1, kNumClasses, pred_chw.dim(1), pred_chw.dim(2)}, std::vector<double>(g.data(), g.data() + g.size()));
  Var loss = dice_loss_graph(make_constant(std::move(p4)), g4, kDiceSmooth);
  return loss->value[0];
}

double dice_loss(const SoftPrediction& pred, const LabelMask& mask) {
  return dice_loss(pred.tensor(), mask);
}

namespace {

void check_scores(const Tensor& s, const char* who) {
  for (std::int64_t i = 0; i < s.size(); ++i)
    if (!(s[i] > 0.0 && s[i] < 1.0))
      throw InputError(std::string(who) + ": scores must lie strictly in (0, 1)");
}

double mean_log(const Tensor& s) {
  double acc = 0.0, comp = 0.0;
  for (std::int64_t i = 0; i < s.size(); ++i) {
    double y = std::log(s[i]) - comp;
    double t = acc + y;
    comp = (t - acc) - y;
    acc = t;
  }
  return acc / static_cast<double>(s.size());
}

double mean_log1m(const Tensor& s) {
  double acc = 0.0, comp = 0.0;
  for (std::int64_t i = 0; i < s.size(); ++i) {
    double y = std::log(1.0 - s[i]) - comp;
    double t = acc + y;
    comp = (t - acc) - y;
    acc = t;
  }
  return acc / static_cast<double>(s.size());
}

}  // namespace

double adversarial_fool_loss(const Tensor& source_scores) {
  if (source_scores.size() == 0) throw InputError("adversarial_fool_loss: empty scores");
  check_scores(source_scores, "adversarial_fool_loss");
  return -mean_log(source_scores);
}

double adversarial_term(const Tensor& source_scores, AdversarialMode mode) {
  if (mode == AdversarialMode::NonSaturating) return adversarial_fool_loss(source_scores);
  check_scores(source_scores, "adversarial_term");
  return mean_log1m(source_scores);
}

double domain_classification_loss(const Tensor& target_scores, const Tensor& source_scores) {
  if (target_scores.size() == 0 || source_scores.size() == 0)
    throw InputError("domain_classification_loss: empty scores");
  check_scores(target_scores, "domain_classification_loss");
  check_scores(source_scores, "domain_classification_loss");
  return -mean_log(target_scores) - mean_log1m(source_scores);
}

double consistency_mse(const Tensor& a, const Tensor& b) {
  if (!a.same_shape(b)) throw InputError("consistency_mse: shape mismatch");
  if (a.size() == 0) throw InputError("consistency_mse: empty input");
  double acc = 0.0, comp = 0.0;
  for (std::int64_t i = 0; i < a.size(); ++i) {
    const double d = a[i] - b[i];
    double y = d * d - comp;
    double t = acc + y;
    comp = (t - acc) - y;
    acc = t;
  }
  return acc / static_cast<double>(a.size());
}

void LossReport::check_finite() const {
  struct {
    const char* name;
    double v;
  } items[] = {{"seg", seg},           {"adv_enc", adv_enc}, {"adv_dec", adv_dec},
               {"disc_enc", disc_enc}, {"disc_dec", disc_dec}, {"mse_enc", mse_enc},
               {"mse_dec", mse_dec},   {"total", total}};
  for (const auto& it : items)
    if (!std::isfinite(it.v))
      throw NumericError(std::string("non-finite loss component: ") + it.name);
}

double total_loss(double seg, double enc_term, double dec_term, double mse_enc, double mse_dec,
                  const LossWeights& weights) {
  weights.validate();
  const double vals[] = {seg, enc_term, dec_term, mse_enc, mse_dec};
  for (double v : vals)
    if (!std::isfinite(v)) throw NumericError("total_loss: non-finite component");
  return seg + weights.lambda_adv_enc * enc_term + weights.lambda_adv_dec * dec_term +
         weights.lambda_mse_enc * mse_enc + weights.lambda_mse_dec * mse_dec;
}

Var fool_loss_graph(const Var& source_scores, AdversarialMode mode) {
  if (mode == AdversarialMode::NonSaturating)
    return scale(mean_all(vlog(source_scores)), -1.0);
  // log(1 - s), minimized: the literal min-max student term.
  return mean_all(vlog(add_scalar(scale(source_scores, -1.0), 1.0)));
}

Var domain_classification_loss_graph(const Var& target_scores, const Var& source_scores) {
  Var t_term = scale(mean_all(vlog(target_scores)), -1.0);
  Var s_term = scale(mean_all(vlog(add_scalar(scale(source_scores, -1.0), 1.0))), -1.0);
  return add(t_term, s_term);
}

}  // namespace cfea
