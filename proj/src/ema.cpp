#include "cfea/ema.hpp"

#include <algorithm>

#include "cfea/error.hpp"

namespace cfea {

ParameterSet init_teacher(const ParameterSet& student) {
  ParameterSet teacher;
  for (const auto& name : student.names()) teacher.add(name, student.at(name));
  teacher.freeze();
  teacher.set_iteration(0);
  return teacher;
}

void ema_update(ParameterSet& teacher, const ParameterSet& student, double alpha) {
  if (!(alpha >= 0.0 && alpha < 1.0)) throw ConfigError("ema_update: alpha must be in [0, 1)");
  if (!teacher.same_structure(student))
    throw StructuralError("ema_update: teacher and student structures differ");
  const double beta = 1.0 - alpha;
  for (const auto& name : teacher.names()) {
    Tensor& t = teacher.at(name);
    const Tensor& s = student.at(name);
    for (std::int64_t i = 0; i < t.size(); ++i) {
      const double lo = std::min(t[i], s[i]);
      const double hi = std::max(t[i], s[i]);
      const double v = alpha * t[i] + beta * s[i];
      t[i] = std::min(std::max(v, lo), hi);
    }
  }
  teacher.set_iteration(teacher.iteration() + 1);
}

}  // namespace cfea
