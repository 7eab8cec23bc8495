#include <doctest.h>

#include <cmath>

#include "cfea/autodiff.hpp"
#include "cfea/rng.hpp"
#include "gradcheck.hpp"

using namespace cfea;
using cfea::testing::max_grad_rel_error;

namespace {

Tensor random_tensor(std::vector<int> shape, Rng& rng, double lo = -1.0, double hi = 1.0) {
  Tensor t(std::move(shape));
  for (std::int64_t i = 0; i < t.size(); ++i) t[i] = rng.uniform(lo, hi);
  return t;
}

}  // namespace

TEST_CASE("elementwise op values") {
  Var a = make_leaf(Tensor({2}, {1.0, -2.0}), true);
  Var b = make_leaf(Tensor({2}, {3.0, 5.0}), true);
  CHECK(add(a, b)->value[0] == 4.0);
  CHECK(sub(a, b)->value[1] == -7.0);
  CHECK(mul(a, b)->value[1] == -10.0);
  CHECK(relu(a)->value[1] == 0.0);
  CHECK(leaky_relu(a, 0.1)->value[1] == doctest::Approx(-0.2));
  CHECK(sigmoid(make_constant(Tensor::scalar(0.0)))->value[0] == doctest::Approx(0.5));
  CHECK(mean_all(b)->value[0] == doctest::Approx(4.0));
}

TEST_CASE("backward accumulates through shared subexpressions") {
  Var x = make_leaf(Tensor::scalar(3.0), true);
  Var y = mul(x, x);  // x^2, dy/dx = 2x = 6
  backward(y);
  CHECK(x->grad[0] == doctest::Approx(6.0));
}

TEST_CASE("conv2d matches direct convolution on a hand case") {
  // 1x1x3x3 input, 1x1x2x2 kernel, stride 1, no padding.
  Var x = make_leaf(Tensor({1, 1, 3, 3}, {1, 2, 3, 4, 5, 6, 7, 8, 9}), true);
  Var w = make_leaf(Tensor({1, 1, 2, 2}, {1, 0, 0, -1}), true);
  Var b = make_leaf(Tensor({1}, {0.5}), true);
  Var y = conv2d(x, w, b, 1, 0);
  REQUIRE(y->value.shape() == std::vector<int>{1, 1, 2, 2});
  // out(i,j) = x(i,j) - x(i+1,j+1) + 0.5
  CHECK(y->value[0] == doctest::Approx(1 - 5 + 0.5));
  CHECK(y->value[1] == doctest::Approx(2 - 6 + 0.5));
  CHECK(y->value[2] == doctest::Approx(4 - 8 + 0.5));
  CHECK(y->value[3] == doctest::Approx(5 - 9 + 0.5));
}

TEST_CASE("gradcheck: conv2d with stride and padding") {
  Rng rng(7);
  Tensor x0 = random_tensor({2, 3, 6, 6}, rng);
  Tensor w0 = random_tensor({4, 3, 3, 3}, rng);
  Tensor b0 = random_tensor({4}, rng);

  auto loss_of = [&](const Tensor& x, const Tensor& w, const Tensor& b) {
    Var vx = make_constant(x);
    Var vw = make_constant(w);
    Var vb = make_constant(b);
    Var y = conv2d(vx, vw, vb, 2, 1);
    return mean_all(square(y))->value[0];
  };

  Var vx = make_leaf(x0, true);
  Var vw = make_leaf(w0, true);
  Var vb = make_leaf(b0, true);
  backward(mean_all(square(conv2d(vx, vw, vb, 2, 1))));

  CHECK(max_grad_rel_error(x0, vx->grad, [&](const Tensor& t) { return loss_of(t, w0, b0); }) < 1e-6);
  CHECK(max_grad_rel_error(w0, vw->grad, [&](const Tensor& t) { return loss_of(x0, t, b0); }) < 1e-6);
  CHECK(max_grad_rel_error(b0, vb->grad, [&](const Tensor& t) { return loss_of(x0, w0, t); }) < 1e-6);
}

TEST_CASE("gradcheck: pool, upsample, concat, softmax, activations") {
  Rng rng(11);
  Tensor x0 = random_tensor({1, 2, 4, 4}, rng);
  Tensor y0 = random_tensor({1, 2, 4, 4}, rng);

  auto build = [](const Tensor& x, const Tensor& y) {
    Var vx = make_leaf(x, true);
    Var vy = make_leaf(y, true);
    Var h = concat_channels(upsample2x(maxpool2x2(vx)), vy);
    h = softmax_channels(leaky_relu(h, 0.3));
    Var loss = mse_loss(h, make_constant(Tensor::full({1, 4, 4, 4}, 0.25)));
    return std::tuple{loss, vx, vy};
  };

  auto [loss, vx, vy] = build(x0, y0);
  backward(loss);
  auto f_x = [&](const Tensor& t) { return std::get<0>(build(t, y0))->value[0]; };
  auto f_y = [&](const Tensor& t) { return std::get<0>(build(x0, t))->value[0]; };
  CHECK(max_grad_rel_error(x0, vx->grad, f_x) < 1e-6);
  CHECK(max_grad_rel_error(y0, vy->grad, f_y) < 1e-6);
}

TEST_CASE("gradcheck: log, sigmoid, clamp interior") {
  Rng rng(13);
  Tensor x0 = random_tensor({3, 3}, rng, 0.2, 0.8);
  auto build = [](const Tensor& x) {
    Var vx = make_leaf(x, true);
    Var y = mean_all(vlog(clamp(sigmoid(vx), 1e-7, 1.0 - 1e-7)));
    return std::pair{y, vx};
  };
  auto [loss, vx] = build(x0);
  backward(loss);
  CHECK(max_grad_rel_error(x0, vx->grad, [&](const Tensor& t) { return build(t).first->value[0]; }) <
        1e-7);
}

TEST_CASE("softmax channels sums to one") {
  Rng rng(17);
  Tensor x = random_tensor({2, 3, 5, 5}, rng, -4.0, 4.0);
  Var y = softmax_channels(make_constant(x));
  for (int n = 0; n < 2; ++n)
    for (int p = 0; p < 25; ++p) {
      double s = 0.0;
      for (int c = 0; c < 3; ++c) s += y->value[(n * 3 + c) * 25 + p];
      CHECK(s == doctest::Approx(1.0).epsilon(1e-12));
    }
}

TEST_CASE("constants block gradient flow") {
  Var x = make_leaf(Tensor::scalar(2.0), true);
  Var c = make_constant(Tensor::scalar(5.0));
  Var y = mul(x, c);
  backward(y);
  CHECK(x->grad[0] == doctest::Approx(5.0));
  CHECK_FALSE(c->grad_ready);
}

TEST_CASE("spatial_mean averages each channel") {
  Tensor x({1, 2, 2, 2}, {1, 2, 3, 4, 10, 20, 30, 40});
  Var y = spatial_mean(make_constant(x));
  CHECK(y->value[0] == doctest::Approx(2.5));
  CHECK(y->value[1] == doctest::Approx(25.0));
}
