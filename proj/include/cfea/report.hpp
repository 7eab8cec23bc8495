#pragma once

#include <string>

#include "cfea/eval.hpp"

namespace cfea {

// Side-by-side comparison of two eval records in the Cup / Disk / CDR row
// order. Dice rows improve upward, the CDR row downward.
std::string comparison_table(const EvalReport& a, const EvalReport& b, const std::string& label_a,
                             const std::string& label_b);

// Grouped bar chart of the three metrics, rendered to an RGB PNG.
void write_comparison_chart(const std::string& path, const EvalReport& a, const EvalReport& b,
                            const std::string& label_a, const std::string& label_b);

}  // namespace cfea
