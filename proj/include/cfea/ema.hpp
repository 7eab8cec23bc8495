#pragma once

#include "cfea/params.hpp"

namespace cfea {

// Teacher starts as a deep copy of the student, iteration 0.
ParameterSet init_teacher(const ParameterSet& student);

// Element-wise teacher = alpha * teacher + (1 - alpha) * student, then the
// result is pinned into [min(teacher, student), max(teacher, student)] so the
// convexity contract holds under rounding. Increments teacher.iteration.
// No gradient state is touched; this is a plain value update.
void ema_update(ParameterSet& teacher, const ParameterSet& student, double alpha);

}  // namespace cfea
