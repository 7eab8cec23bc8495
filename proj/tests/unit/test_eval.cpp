#include <doctest.h>

#include "cfea/error.hpp"
#include "cfea/eval.hpp"

using namespace cfea;

namespace {

// Rectangle-labeled mask: rows [r0, r1) x cols [c0, c1).
LabelMask rect_mask(int size, int r0, int r1, int c0, int c1, std::uint8_t label,
                    const LabelMask* base = nullptr) {
  LabelMask m = base ? *base : LabelMask(size, size);
  for (int r = r0; r < r1; ++r)
    for (int c = c0; c < c1; ++c) m.set(r, c, label);
  return m;
}

}  // namespace

TEST_CASE("hard_mask: one-hot, uniform ties, plain argmax") {
  Tensor pred({3, 2, 2});
  // pixel 0: one-hot class 2; pixel 1: uniform; pixel 2: (0.2, 0.5, 0.3);
  // pixel 3: tie between classes 1 and 2.
  const double vals[3][4] = {{0, 1. / 3, 0.2, 0.2}, {0, 1. / 3, 0.5, 0.4}, {1, 1. / 3, 0.3, 0.4}};
  for (int c = 0; c < 3; ++c)
    for (int p = 0; p < 4; ++p) pred[c * 4 + p] = vals[c][p];
  LabelMask m = hard_mask(pred);
  CHECK(m.at(0, 0) == 2);
  CHECK(m.at(0, 1) == 0);  // tie -> lowest class index
  CHECK(m.at(1, 0) == 1);
  CHECK(m.at(1, 1) == 1);  // 1 vs 2 tie -> lower index 1
}

TEST_CASE("dice_coefficient: identical, disjoint, hand-counted overlap") {
  LabelMask a = rect_mask(32, 4, 14, 4, 14, kDiscRim);
  CHECK(dice_coefficient(a, a, Structure::Disc) == 1.0);

  LabelMask b = rect_mask(32, 20, 30, 20, 30, kDiscRim);
  CHECK(dice_coefficient(a, b, Structure::Disc) == 0.0);

  // 100-pixel disc regions with an 80-pixel overlap: dice 0.8 exactly.
  LabelMask gt = rect_mask(32, 0, 10, 0, 10, kDiscRim);
  LabelMask pr = rect_mask(32, 0, 10, 2, 12, kDiscRim);
  CHECK(dice_coefficient(pr, gt, Structure::Disc) == doctest::Approx(2.0 * 80 / 200).epsilon(1e-15));
}

TEST_CASE("dice_coefficient: disc region is the union of rim and cup") {
  // Prediction marks everything cup where truth has rim: disc dice is still 1.
  LabelMask truth = rect_mask(16, 4, 12, 4, 12, kDiscRim);
  LabelMask pred = rect_mask(16, 4, 12, 4, 12, kCup);
  CHECK(dice_coefficient(pred, truth, Structure::Disc) == 1.0);
  CHECK(dice_coefficient(pred, truth, Structure::Cup) == 0.0);
}

TEST_CASE("dice_coefficient: empty-region conventions and symmetry") {
  LabelMask empty(16, 16);
  CHECK(dice_coefficient(empty, empty, Structure::Cup) == 1.0);
  LabelMask cup = rect_mask(16, 2, 6, 2, 6, kCup);
  CHECK(dice_coefficient(empty, cup, Structure::Cup) == 0.0);
  CHECK(dice_coefficient(cup, empty, Structure::Cup) == 0.0);
  LabelMask other = rect_mask(16, 3, 8, 3, 8, kCup);
  CHECK(dice_coefficient(cup, other, Structure::Cup) ==
        doctest::Approx(dice_coefficient(other, cup, Structure::Cup)).epsilon(1e-15));
  CHECK_THROWS_AS(dice_coefficient(cup, LabelMask(8, 8), Structure::Cup), InputError);
}

TEST_CASE("vertical_cdr: constructed rectangle masks") {
  // Disc spans rows 10..59 (50 rows), cup rows 20..39 (20 rows): CDR 0.4.
  LabelMask m = rect_mask(64, 10, 60, 10, 40, kDiscRim);
  m = rect_mask(64, 20, 40, 15, 35, kCup, &m);
  CHECK(vertical_cdr(m) == doctest::Approx(0.4).epsilon(1e-15));

  // Cup equal to the disc extent: 1.0.
  LabelMask full = rect_mask(64, 5, 25, 5, 25, kCup);
  CHECK(vertical_cdr(full) == 1.0);

  // Empty cup, nonempty disc: 0 by convention.
  LabelMask rim_only = rect_mask(64, 5, 25, 5, 25, kDiscRim);
  CHECK(vertical_cdr(rim_only) == 0.0);

  CHECK_THROWS_AS(vertical_cdr(LabelMask(16, 16)), InputError);
}

TEST_CASE("vertical_cdr: invariant under horizontal shift and flip") {
  LabelMask m = rect_mask(64, 10, 60, 10, 30, kDiscRim);
  m = rect_mask(64, 20, 40, 12, 28, kCup, &m);
  LabelMask shifted = rect_mask(64, 10, 60, 30, 50, kDiscRim);
  shifted = rect_mask(64, 20, 40, 32, 48, kCup, &shifted);
  CHECK(vertical_cdr(m) == vertical_cdr(shifted));
  LabelMask flipped(64, 64);
  for (int r = 0; r < 64; ++r)
    for (int c = 0; c < 64; ++c) flipped.set(r, c, m.at(r, 63 - c));
  CHECK(vertical_cdr(m) == vertical_cdr(flipped));
}

TEST_CASE("eval report json round trip and table order") {
  EvalReport r;
  r.cup_dice = 0.8627;
  r.disc_dice = 0.9416;
  r.cdr_mae = 0.0481;
  r.n_samples = 400;
  r.n_cdr_excluded = 3;
  EvalReport back = eval_report_from_json(eval_report_json(r));
  CHECK(back.cup_dice == r.cup_dice);
  CHECK(back.disc_dice == r.disc_dice);
  CHECK(back.cdr_mae == r.cdr_mae);
  CHECK(back.n_samples == r.n_samples);
  CHECK(back.n_cdr_excluded == r.n_cdr_excluded);

  const std::string table = eval_report_table(r);
  const auto cup_pos = table.find("Optic Cup");
  const auto disk_pos = table.find("Optic Disk");
  const auto cdr_pos = table.find("CDR");
  REQUIRE(cup_pos != std::string::npos);
  REQUIRE(disk_pos != std::string::npos);
  REQUIRE(cdr_pos != std::string::npos);
  CHECK(cup_pos < disk_pos);
  CHECK(disk_pos < cdr_pos);

  CHECK_THROWS_AS(eval_report_from_json("{"), IoError);
}
