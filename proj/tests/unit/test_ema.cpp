#include <doctest.h>

#include <cmath>

#include "cfea/ema.hpp"
#include "cfea/error.hpp"
#include "cfea/rng.hpp"

using namespace cfea;

namespace {

ParameterSet single(const std::string& name, std::vector<double> vals) {
  const int n = static_cast<int>(vals.size());
  ParameterSet p;
  p.add(name, Tensor({n}, std::move(vals)));
  p.freeze();
  return p;
}

}  // namespace

TEST_CASE("init_teacher deep-copies the student") {
  ParameterSet student = single("w", {1.0, 2.0, 3.0});
  ParameterSet teacher = init_teacher(student);
  CHECK(teacher.values_equal(student));
  CHECK(teacher.iteration() == 0);
  student.at("w")[0] = 99.0;
  CHECK(teacher.at("w")[0] == 1.0);  // unaffected by later student mutation
  CHECK(teacher.all_finite());
}

TEST_CASE("ema_update: direct substitution alpha=0.99") {
  ParameterSet teacher = single("w", {0.0});
  ParameterSet student = single("w", {1.0});
  ema_update(teacher, student, 0.99);
  CHECK(teacher.at("w")[0] == doctest::Approx(0.01).epsilon(1e-12));
  CHECK(teacher.iteration() == 1);
}

TEST_CASE("ema_update: fixpoint when teacher equals student") {
  ParameterSet teacher = single("w", {0.123456, -7.5, 42.0});
  ParameterSet student = init_teacher(teacher);
  ema_update(teacher, student, 0.7);
  CHECK(teacher.at("w")[0] == 0.123456);
  CHECK(teacher.at("w")[1] == -7.5);
  CHECK(teacher.at("w")[2] == 42.0);
}

TEST_CASE("ema_update: k-step closed form w + alpha^k (t0 - w)") {
  const double alpha = 0.9, w = 0.37, t0 = -1.25;
  const int k = 10;
  ParameterSet teacher = single("w", {t0});
  ParameterSet student = single("w", {w});
  for (int i = 0; i < k; ++i) ema_update(teacher, student, alpha);
  const double expected = w + std::pow(alpha, k) * (t0 - w);
  CHECK(std::abs(teacher.at("w")[0] - expected) < 1e-12);
  CHECK(teacher.iteration() == k);
}

TEST_CASE("ema_update: convexity and boundedness on 1000 random triples") {
  Rng rng(77);
  for (int trial = 0; trial < 1000; ++trial) {
    const double t0 = rng.uniform(-10, 10);
    const double s0 = rng.uniform(-10, 10);
    const double alpha = rng.uniform(0.0, 0.999999);
    ParameterSet teacher = single("w", {t0});
    ParameterSet student = single("w", {s0});
    ema_update(teacher, student, alpha);
    const double v = teacher.at("w")[0];
    CHECK(v >= std::min(t0, s0));
    CHECK(v <= std::max(t0, s0));
  }
}

TEST_CASE("ema_update: geometric contraction toward a frozen student") {
  // Exact-arithmetic configuration: alpha = 0.5, student = 0, teacher = 1.
  ParameterSet teacher = single("w", {1.0});
  ParameterSet student = single("w", {0.0});
  double expected = 1.0;
  for (int k = 0; k < 40; ++k) {
    ema_update(teacher, student, 0.5);
    expected *= 0.5;
    CHECK(teacher.at("w")[0] == expected);
  }
}

TEST_CASE("ema_update: boundedness over a run with drifting student") {
  Rng rng(78);
  ParameterSet teacher = single("w", {0.3});
  for (int k = 0; k < 200; ++k) {
    ParameterSet student = single("w", {rng.uniform(0.0, 1.0)});
    ema_update(teacher, student, 0.95);
    CHECK(teacher.at("w")[0] >= 0.0);
    CHECK(teacher.at("w")[0] <= 1.0);
  }
}

TEST_CASE("ema_update rejects structural mismatch and bad alpha") {
  ParameterSet teacher = single("w", {1.0});
  ParameterSet other = single("v", {1.0});
  CHECK_THROWS_AS(ema_update(teacher, other, 0.5), StructuralError);
  ParameterSet student = single("w", {1.0});
  CHECK_THROWS_AS(ema_update(teacher, student, 1.0), ConfigError);
  CHECK_THROWS_AS(ema_update(teacher, student, -0.1), ConfigError);
}
