#include <doctest.h>

#include "cfea/error.hpp"
#include "cfea/types.hpp"

using namespace cfea;

TEST_CASE("validate_mask: all-background mask is vacuously valid") {
  LabelMask m(8, 8);
  CHECK(validate_mask(m).empty());
}

TEST_CASE("validate_mask: out-of-set label is reported with coordinates") {
  LabelMask m(4, 4);
  m.set(0, 0, 5);
  auto v = validate_mask(m);
  REQUIRE(v.size() == 1);
  CHECK(v[0].row == 0);
  CHECK(v[0].col == 0);
  CHECK(v[0].rule.find("{0,1,2}") != std::string::npos);
}

TEST_CASE("validate_mask: cup pixel outside the disc violates enclosure") {
  // 8x8 by hand: proper nested blob at top-left, stray cup pixel at (6, 6).
  LabelMask m(8, 8);
  for (int r = 1; r <= 3; ++r)
    for (int c = 1; c <= 3; ++c) m.set(r, c, kDiscRim);
  m.set(2, 2, kCup);
  m.set(6, 6, kCup);
  auto v = validate_mask(m);
  REQUIRE(v.size() == 1);
  CHECK(v[0].row == 6);
  CHECK(v[0].col == 6);
  CHECK(v[0].rule.find("enclosed") != std::string::npos);
}

TEST_CASE("validate_mask: cup touching the image border counts as exposed") {
  LabelMask m(8, 8);
  for (int c = 0; c < 3; ++c) m.set(1, c, kDiscRim);
  m.set(0, 0, kCup);
  m.set(0, 1, kDiscRim);
  m.set(0, 2, kDiscRim);
  auto v = validate_mask(m);
  REQUIRE(v.size() == 1);
  CHECK(v[0].row == 0);
}

TEST_CASE("ImageTensor enforces range, shape and minimum size") {
  CHECK_THROWS_AS(ImageTensor(Tensor({3, 4, 8})), InputError);   // height < 8
  CHECK_THROWS_AS(ImageTensor(Tensor({1, 8, 8})), InputError);   // not RGB
  Tensor bad({3, 8, 8});
  bad[0] = 1.5;
  CHECK_THROWS_AS(ImageTensor(std::move(bad)), InputError);
  CHECK_NOTHROW(ImageTensor(Tensor::full({3, 8, 8}, 0.5)));
}

TEST_CASE("SoftPrediction requires per-pixel simplex within 1e-5") {
  Tensor ok({3, 8, 8});
  for (int p = 0; p < 64; ++p) {
    ok[p] = 0.2;
    ok[64 + p] = 0.5;
    ok[128 + p] = 0.3;
  }
  CHECK_NOTHROW(SoftPrediction{ok});
  Tensor bad = ok;
  bad[0] = 0.4;  // sum 1.2 at pixel 0
  CHECK_THROWS_AS(SoftPrediction(std::move(bad)), InputError);
}

TEST_CASE("one_hot round-trips labels") {
  LabelMask m(2, 2);
  m.set(0, 1, kDiscRim);
  m.set(1, 0, kCup);
  Tensor t = one_hot(m);
  CHECK(t.at3(0, 0, 0) == 1.0);
  CHECK(t.at3(1, 0, 1) == 1.0);
  CHECK(t.at3(2, 1, 0) == 1.0);
  CHECK(t.sum() == doctest::Approx(4.0));
}

TEST_CASE("LossWeights validation") {
  LossWeights w;
  CHECK_NOTHROW(w.validate());
  w.ema_decay = 1.0;
  CHECK_THROWS_AS(w.validate(), ConfigError);
  w.ema_decay = 0.99;
  w.lambda_adv_enc = -0.1;
  CHECK_THROWS_AS(w.validate(), ConfigError);
}
