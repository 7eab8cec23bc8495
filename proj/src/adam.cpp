#include "cfea/adam.hpp"

#include <cmath>

#include "cfea/error.hpp"

namespace cfea {

void AdamConfig::validate() const {
  if (!(lr > 0)) throw ConfigError("AdamConfig: learning rate must be positive");
  if (!(beta1 >= 0 && beta1 < 1) || !(beta2 >= 0 && beta2 < 1))
    throw ConfigError("AdamConfig: betas must lie in [0, 1)");
  if (!(eps > 0)) throw ConfigError("AdamConfig: eps must be positive");
}

AdamState::AdamState(const ParameterSet& params) {
  for (const auto& name : params.names()) {
    m_.add(name, Tensor::zeros(params.at(name).shape()));
    v_.add(name, Tensor::zeros(params.at(name).shape()));
  }
  m_.freeze();
  v_.freeze();
}

void AdamState::step(ParameterSet& params, const ParameterSet& grads, const AdamConfig& config) {
  config.validate();
  if (!params.same_structure(grads) || !params.same_structure(m_))
    throw StructuralError("AdamState::step: structure mismatch");
  ++t_;
  const double bc1 = 1.0 - std::pow(config.beta1, static_cast<double>(t_));
  const double bc2 = 1.0 - std::pow(config.beta2, static_cast<double>(t_));
  for (const auto& name : params.names()) {
    Tensor& p = params.at(name);
    const Tensor& g = grads.at(name);
    Tensor& m = m_.at(name);
    Tensor& v = v_.at(name);
    for (std::int64_t i = 0; i < p.size(); ++i) {
      m[i] = config.beta1 * m[i] + (1.0 - config.beta1) * g[i];
      v[i] = config.beta2 * v[i] + (1.0 - config.beta2) * g[i] * g[i];
      const double mhat = m[i] / bc1;
      const double vhat = v[i] / bc2;
      p[i] -= config.lr * mhat / (std::sqrt(vhat) + config.eps);
    }
  }
}

void AdamState::restore(ParameterSet m, ParameterSet v, std::int64_t t) {
  if (!m.same_structure(v)) throw StructuralError("AdamState::restore: m/v structure mismatch");
  m_ = std::move(m);
  v_ = std::move(v);
  t_ = t;
}

}  // namespace cfea
