#pragma once

#include <cmath>
#include <functional>

#include "cfea/tensor.hpp"

namespace cfea::testing {

// Central finite differences: independent oracle for analytic gradients.
// Returns the worst relative error max(|g_a - g_fd|) / max(1, |g_fd|) over
// the checked elements. `f` evaluates the scalar objective for a candidate
// tensor value; `analytic` is the gradient under test.
inline double max_grad_rel_error(const Tensor& x, const Tensor& analytic,
                                 const std::function<double(const Tensor&)>& f,
                                 double eps = 1e-6, int stride = 1) {
  double worst = 0.0;
  Tensor probe = x;
  for (std::int64_t i = 0; i < x.size(); i += stride) {
    const double orig = probe[i];
    probe[i] = orig + eps;
    const double fp = f(probe);
    probe[i] = orig - eps;
    const double fm = f(probe);
    probe[i] = orig;
    const double fd = (fp - fm) / (2.0 * eps);
    const double denom = std::max({1.0, std::abs(fd), std::abs(analytic[i])});
    worst = std::max(worst, std::abs(analytic[i] - fd) / denom);
  }
  return worst;
}

}  // namespace cfea::testing
