#pragma once

#include <string>

#include "cfea/backbone.hpp"
#include "cfea/data.hpp"
#include "cfea/params.hpp"
#include "cfea/types.hpp"

namespace cfea {

// Per-pixel argmax; ties break toward the lower class index.
LabelMask hard_mask(const SoftPrediction& pred);
LabelMask hard_mask(const Tensor& pred_chw);

enum class Structure { Disc, Cup };

// Binary overlap 2|A∩B| / (|A| + |B|). The disc region is the union of
// labels {1, 2}; the cup region is label 2 alone. Both regions empty -> 1,
// exactly one empty -> 0.
double dice_coefficient(const LabelMask& pred, const LabelMask& truth, Structure structure);

// Vertical cup-to-disc ratio: row extent of the cup region over row extent
// of the disc region. Empty cup -> 0; empty disc -> InputError.
double vertical_cdr(const LabelMask& mask);

struct EvalReport {
  double cup_dice = 0.0;
  double disc_dice = 0.0;
  double cdr_mae = 0.0;
  int n_samples = 0;
  int n_cdr_excluded = 0;
};

// Runs the teacher backbone on every labeled sample (no augmentation),
// hard-masks the predictions and aggregates unweighted means. CDR terms use
// only samples where both predicted and true CDR are defined.
EvalReport evaluate(const ParameterSet& model, const BackboneConfig& config,
                    const Dataset& test_set);

std::string eval_report_json(const EvalReport& report);
EvalReport eval_report_from_json(const std::string& text);
std::string eval_report_table(const EvalReport& report);

}  // namespace cfea
