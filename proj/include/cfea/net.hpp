#pragma once

#include <string>
#include <unordered_map>

#include "cfea/autodiff.hpp"
#include "cfea/params.hpp"
#include "cfea/rng.hpp"

namespace cfea {

using VarMap = std::unordered_map<std::string, Var>;

// Wraps every array of a ParameterSet as a graph leaf. With requires_grad
// the leaves collect gradients; without, the graph treats them as constants
// (used to freeze discriminators during the segmentation step).
VarMap make_var_map(const ParameterSet& params, bool requires_grad);

// Copies accumulated leaf gradients into a structure-matched gradient set
// (zero for leaves that never received a contribution).
ParameterSet collect_gradients(const ParameterSet& params, const VarMap& leaves);

// Fan-in scaled normal weights (std = sqrt(2 / fan_in)), zero biases.
Tensor he_normal(std::vector<int> shape, int fan_in, Rng& rng);

}  // namespace cfea
