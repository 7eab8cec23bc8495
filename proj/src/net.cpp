#include "cfea/net.hpp"

#include <cmath>

namespace cfea {

VarMap make_var_map(const ParameterSet& params, bool requires_grad) {
  VarMap out;
  out.reserve(params.count());
  for (const auto& name : params.names()) out[name] = make_leaf(params.at(name), requires_grad);
  return out;
}

ParameterSet collect_gradients(const ParameterSet& params, const VarMap& leaves) {
  ParameterSet grads;
  for (const auto& name : params.names()) {
    const auto it = leaves.find(name);
    if (it != leaves.end() && it->second->grad_ready)
      grads.add(name, it->second->grad);
    else
      grads.add(name, Tensor::zeros(params.at(name).shape()));
  }
  grads.freeze();
  return grads;
}

Tensor he_normal(std::vector<int> shape, int fan_in, Rng& rng) {
  Tensor t(std::move(shape));
  const double std = std::sqrt(2.0 / static_cast<double>(fan_in));
  for (std::int64_t i = 0; i < t.size(); ++i) t[i] = std * rng.normal();
  return t;
}

}  // namespace cfea
