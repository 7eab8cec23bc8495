#include "cfea/eval.hpp"

#include <cmath>
#include <cstdio>
#include <sstream>

#include <json.hpp>

#include "cfea/error.hpp"

using nlohmann::json;

namespace cfea {

LabelMask hard_mask(const Tensor& pred_chw) {
  if (pred_chw.ndim() != 3 || pred_chw.dim(0) != kNumClasses)
    throw InputError("hard_mask: expects (3, H, W)");
  const int h = pred_chw.dim(1), w = pred_chw.dim(2);
  const std::int64_t plane = static_cast<std::int64_t>(h) * w;
  LabelMask out(h, w);
  for (int r = 0; r < h; ++r)
    for (int c = 0; c < w; ++c) {
      const std::int64_t p = static_cast<std::int64_t>(r) * w + c;
      int best = 0;
      double bv = pred_chw[p];
      for (int k = 1; k < kNumClasses; ++k)
        if (pred_chw[k * plane + p] > bv) {  // strict: ties keep the lower index
          bv = pred_chw[k * plane + p];
          best = k;
        }
      out.set(r, c, static_cast<std::uint8_t>(best));
    }
  return out;
}

LabelMask hard_mask(const SoftPrediction& pred) { return hard_mask(pred.tensor()); }

namespace {

inline bool in_region(std::uint8_t label, Structure s) {
  return s == Structure::Cup ? label == kCup : (label == kDiscRim || label == kCup);
}

}  // namespace

double dice_coefficient(const LabelMask& pred, const LabelMask& truth, Structure structure) {
  if (pred.height() != truth.height() || pred.width() != truth.width())
    throw InputError("dice_coefficient: mask shapes differ");
  std::int64_t a = 0, b = 0, inter = 0;
  for (int r = 0; r < pred.height(); ++r)
    for (int c = 0; c < pred.width(); ++c) {
      const bool pa = in_region(pred.at(r, c), structure);
      const bool pb = in_region(truth.at(r, c), structure);
      a += pa;
      b += pb;
      inter += pa && pb;
    }
  if (a == 0 && b == 0) return 1.0;
  if (a == 0 || b == 0) return 0.0;
  return 2.0 * static_cast<double>(inter) / static_cast<double>(a + b);
}

double vertical_cdr(const LabelMask& mask) {
  int disc_min = -1, disc_max = -1, cup_min = -1, cup_max = -1;
  for (int r = 0; r < mask.height(); ++r)
    for (int c = 0; c < mask.width(); ++c) {
      const std::uint8_t v = mask.at(r, c);
      if (v == kDiscRim || v == kCup) {
        if (disc_min < 0) disc_min = r;
        disc_max = r;
      }
      if (v == kCup) {
        if (cup_min < 0) cup_min = r;
        cup_max = r;
      }
    }
  if (disc_min < 0) throw InputError("vertical_cdr: empty disc region");
  if (cup_min < 0) return 0.0;
  return static_cast<double>(cup_max - cup_min + 1) / static_cast<double>(disc_max - disc_min + 1);
}

EvalReport evaluate(const ParameterSet& model, const BackboneConfig& config,
                    const Dataset& test_set) {
  if (test_set.samples.empty()) throw InputError("evaluate: empty test set");
  if (!test_set.labeled()) throw InputError("evaluate: test set must be fully labeled");

  EvalReport report;
  double cup_sum = 0, cup_c = 0, disc_sum = 0, disc_c = 0, cdr_sum = 0, cdr_c = 0;
  int n_cdr = 0;
  auto kahan = [](double& sum, double& comp, double v) {
    const double y = v - comp;
    const double t = sum + y;
    comp = (t - sum) - y;
    sum = t;
  };

  for (const auto& sample : test_set.samples) {
    auto [feature, pred] = forward(model, ImageTensor(sample.image), config);
    LabelMask predicted = hard_mask(pred);
    const LabelMask& truth = *sample.mask;
    kahan(cup_sum, cup_c, dice_coefficient(predicted, truth, Structure::Cup));
    kahan(disc_sum, disc_c, dice_coefficient(predicted, truth, Structure::Disc));
    double cdr_pred = 0, cdr_true = 0;
    bool defined = true;
    try {
      cdr_pred = vertical_cdr(predicted);
      cdr_true = vertical_cdr(truth);
    } catch (const InputError&) {
      defined = false;
    }
    if (defined) {
      kahan(cdr_sum, cdr_c, std::abs(cdr_pred - cdr_true));
      ++n_cdr;
    } else {
      ++report.n_cdr_excluded;
      std::fprintf(stderr, "warning: sample excluded from CDR (empty disc region)\n");
    }
    ++report.n_samples;
  }

  report.cup_dice = cup_sum / report.n_samples;
  report.disc_dice = disc_sum / report.n_samples;
  report.cdr_mae = n_cdr > 0 ? cdr_sum / n_cdr : 0.0;
  return report;
}

std::string eval_report_json(const EvalReport& report) {
  json j;
  j["cup_dice"] = report.cup_dice;
  j["disc_dice"] = report.disc_dice;
  j["cdr_mae"] = report.cdr_mae;
  j["n_samples"] = report.n_samples;
  j["n_cdr_excluded"] = report.n_cdr_excluded;
  return j.dump(2) + "\n";
}

EvalReport eval_report_from_json(const std::string& text) {
  EvalReport r;
  try {
    json j = json::parse(text);
    r.cup_dice = j.at("cup_dice").get<double>();
    r.disc_dice = j.at("disc_dice").get<double>();
    r.cdr_mae = j.at("cdr_mae").get<double>();
    r.n_samples = j.at("n_samples").get<int>();
    r.n_cdr_excluded = j.at("n_cdr_excluded").get<int>();
  } catch (const json::exception& e) {
    throw IoError(std::string("malformed eval record: ") + e.what());
  }
  return r;
}

std::string eval_report_table(const EvalReport& report) {
  std::ostringstream out;
  char line[96];
  out << "Metric        Value\n";
  std::snprintf(line, sizeof line, "Optic Cup     %.4f\n", report.cup_dice);
  out << line;
  std::snprintf(line, sizeof line, "Optic Disk    %.4f\n", report.disc_dice);
  out << line;
  std::snprintf(line, sizeof line, "CDR           %.4f\n", report.cdr_mae);
  out << line;
  std::snprintf(line, sizeof line, "samples: %d, excluded from CDR: %d\n", report.n_samples,
                report.n_cdr_excluded);
  out << line;
  return out.str();
}

}  // namespace cfea
