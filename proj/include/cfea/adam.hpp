#pragma once

#include <cstdint>

#include "cfea/params.hpp"

namespace cfea {

struct AdamConfig {
  double lr = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;

  void validate() const;
};

// Adaptive moment estimation with bias correction. Moment buffers mirror the
// parameter structure so checkpoints can reuse the array codec.
class AdamState {
 public:
  AdamState() = default;
  explicit AdamState(const ParameterSet& params);

  void step(ParameterSet& params, const ParameterSet& grads, const AdamConfig& config);

  std::int64_t steps() const { return t_; }
  const ParameterSet& m() const { return m_; }
  const ParameterSet& v() const { return v_; }

  // Checkpoint restore.
  void restore(ParameterSet m, ParameterSet v, std::int64_t t);

 private:
  ParameterSet m_;
  ParameterSet v_;
  std::int64_t t_ = 0;
};

}  // namespace cfea
