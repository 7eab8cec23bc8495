#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <vector>

#include "cfea/tensor.hpp"

namespace cfea {

// Reverse-mode autodiff over a dynamically built graph. Nodes are created in
// topological order (parents before children), so the backward pass walks
// nodes by decreasing creation id. Everything is sequential and
// deterministic: two identical graph constructions produce bit-identical
// values and gradients.
struct Node;
using Var = std::shared_ptr<Node>;

struct Node {
  Tensor value;
  Tensor grad;  // allocated on first accumulation
  bool requires_grad = false;
  bool grad_ready = false;
  std::uint64_t id = 0;
  std::vector<Var> parents;
  // Propagates this->grad into parents' grads.
  std::function<void(Node&)> backprop;

  void accumulate(const Tensor& g);
  Tensor& ensure_grad();
};

Var make_leaf(Tensor value, bool requires_grad);
Var make_constant(Tensor value);

// Elementwise.
Var add(const Var& a, const Var& b);
Var sub(const Var& a, const Var& b);
Var mul(const Var& a, const Var& b);
Var scale(const Var& a, double s);
Var add_scalar(const Var& a, double s);
Var square(const Var& a);
Var vlog(const Var& a);
Var relu(const Var& a);
Var leaky_relu(const Var& a, double negative_slope);
Var sigmoid(const Var& a);
Var clamp(const Var& a, double lo, double hi);

// Reductions (result shape {1}).
Var sum_all(const Var& a);
Var mean_all(const Var& a);

// (N, C, H, W) structural ops.
Var conv2d(const Var& x, const Var& w, const Var& b, int stride, int pad);
Var maxpool2x2(const Var& x);
Var upsample2x(const Var& x);
Var concat_channels(const Var& a, const Var& b);
Var softmax_channels(const Var& x);
Var spatial_mean(const Var& x);  // (N, C, H, W) -> (N, C, 1, 1)

// Scalar losses.
Var mse_loss(const Var& a, const Var& b);
// Soft dice over classes: pred and one-hot target are (N, C, H, W); the
// result is the mean over samples and classes of 1 - (2*inter + s)/(union + s).
Var dice_loss_graph(const Var& pred, const Tensor& one_hot_target, double smooth);

// Runs reverse-mode accumulation from a scalar root (seeds d(root)/d(root)=1).
void backward(const Var& root);

}  // namespace cfea
