#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <cmath>
#include <vector>

#include "doctest.h"
#include "lineval/detect_heatmap.hpp"
#include "lineval/errors.hpp"
#include "support/oracles.hpp"
#include "support/test_rng.hpp"

using namespace lineval;
using testsupport::Rng;

namespace {

Heatmap random_sparse(Rng& rng, int w, int h, int max_true) {
  Heatmap m(w, h);
  const int n = rng.uniform_int(0, max_true);
  for (int i = 0; i < n; ++i)
    m.set(rng.uniform_int(0, w - 1), rng.uniform_int(0, h - 1));
  return m;
}

}  // namespace

TEST_CASE("rasterize: horizontal run, empty input, union idempotence") {
  const auto horizontal =
      rasterize({LineSegment2D(Vec2(0, 0), Vec2(3, 0))}, {8, 8});
  CHECK(horizontal.true_count() == 4);
  for (int x = 0; x < 4; ++x) CHECK(horizontal.at(x, 0));

  CHECK(rasterize({}, {8, 8}).true_count() == 0);

  const std::vector<LineSegment2D> segs = {
      LineSegment2D(Vec2(1, 1), Vec2(6, 4)),
      LineSegment2D(Vec2(0, 7), Vec2(7, 0))};
  std::vector<LineSegment2D> doubled = segs;
  doubled.insert(doubled.end(), segs.begin(), segs.end());
  const auto once = rasterize(segs, {8, 8});
  const auto twice = rasterize(doubled, {8, 8});
  CHECK(once.membership == twice.membership);
}

TEST_CASE("rasterize: 8-connected diagonal and off-grid clipping") {
  const auto diag = rasterize({LineSegment2D(Vec2(0, 0), Vec2(4, 4))}, {8, 8});
  for (int i = 0; i <= 4; ++i) CHECK(diag.at(i, i));
  CHECK(diag.true_count() == 5);  // pure diagonal steps, no extra pixels

  // connectivity: every marked pixel touches the next one 8-connectedly
  const auto steep = rasterize({LineSegment2D(Vec2(1, 0), Vec2(3, 7))}, {8, 8});
  std::vector<std::pair<int, int>> on;
  for (int y = 0; y < 8; ++y)
    for (int x = 0; x < 8; ++x)
      if (steep.at(x, y)) on.emplace_back(x, y);
  REQUIRE(on.size() >= 8);
  for (size_t i = 1; i < on.size(); ++i) {
    // row-major order: consecutive rows hold adjacent pixels for a steep line
    CHECK(std::abs(on[i].second - on[i - 1].second) <= 1);
  }

  // a segment reaching outside the grid is clipped, not wrapped or dropped
  const auto clipped =
      rasterize({LineSegment2D(Vec2(-5, 3), Vec2(12, 3))}, {8, 8});
  CHECK(clipped.true_count() == 8);
  for (int x = 0; x < 8; ++x) CHECK(clipped.at(x, 3));

  CHECK(rasterize({LineSegment2D(Vec2(-5, -3), Vec2(-1, -3))}, {8, 8})
            .true_count() == 0);
}

TEST_CASE("match_heatmaps: identity, far shift, dimension mismatch") {
  Heatmap a(16, 16);
  a.set(2, 3);
  a.set(9, 9);
  a.set(14, 1);

  const auto same = match_heatmaps(a, a, 2.0);
  CHECK(same.tp == 3);
  CHECK(same.fp == 0);
  CHECK(same.fn == 0);
  CHECK(same.total_assignment_cost == doctest::Approx(0.0));

  Heatmap shifted(16, 16);
  shifted.set(2, 11);
  shifted.set(9, 1);
  shifted.set(6, 9);
  const auto far = match_heatmaps(shifted, a, 2.0);
  CHECK(far.tp == 0);
  CHECK(far.fp == 3);
  CHECK(far.fn == 3);

  CHECK_THROWS_AS(match_heatmaps(Heatmap(8, 8), Heatmap(8, 9), 2.0), InputError);
}

TEST_CASE("match_heatmaps: exhaustive oracle on random sparse grids") {
  Rng rng(31);
  for (int trial = 0; trial < 300; ++trial) {
    const auto pred = random_sparse(rng, 10, 10, 12);
    const auto gt = random_sparse(rng, 10, 10, 12);
    const double d_max = rng.uniform(0.5, 6.0);

    const auto got = match_heatmaps(pred, gt, d_max);
    const auto want = testsupport::assignment_oracle(pred, gt, d_max);
    CHECK(got.tp == want.cardinality);
    CHECK(got.total_assignment_cost ==
          doctest::Approx(want.cost).epsilon(1e-9));

    CHECK(got.tp + got.fp == pred.true_count());
    CHECK(got.tp + got.fn == gt.true_count());

    // cardinality is symmetric in the two rasters
    CHECK(match_heatmaps(gt, pred, d_max).tp == got.tp);

    // growing the radius can only add candidate edges
    CHECK(match_heatmaps(pred, gt, d_max + 1.5).tp >= got.tp);
  }
}

TEST_CASE("heatmap_prf: identity, zero-tp, hand arithmetic") {
  CHECK(heatmap_prf({{5, 0, 0, 0.0}, {3, 0, 0, 0.0}}).f_score ==
        doctest::Approx(1.0));

  const auto zero = heatmap_prf({{0, 4, 6, 0.0}});
  CHECK(zero.precision == 0.0);
  CHECK(zero.recall == 0.0);
  CHECK(zero.f_score == 0.0);

  const auto hand = heatmap_prf({{8, 2, 8, 0.0}});
  CHECK(hand.precision == doctest::Approx(0.8));
  CHECK(hand.recall == doctest::Approx(0.5));
  CHECK(hand.f_score == doctest::Approx(0.6154).epsilon(1e-4));
}

TEST_CASE("default_heatmap_dmax is one percent of the diagonal") {
  CHECK(default_heatmap_dmax({640, 480}) == doctest::Approx(8.0));
  CHECK(default_heatmap_dmax({128, 128}) ==
        doctest::Approx(0.01 * std::sqrt(2.0) * 128.0));
}

TEST_CASE("heatmap_ap: perfect single threshold, disjoint, two-point toy") {
  const std::pair<int, int> size{16, 16};
  const std::vector<LineSegment2D> gt = {
      LineSegment2D(Vec2(0, 0), Vec2(7, 0)),
      LineSegment2D(Vec2(0, 8), Vec2(7, 8))};

  SUBCASE("perfect prediction at one threshold") {
    const std::vector<LineSegment2D> pred = {
        LineSegment2D(Vec2(0, 0), Vec2(7, 0), 0.9),
        LineSegment2D(Vec2(0, 8), Vec2(7, 8), 0.9)};
    CHECK(heatmap_ap({pred}, {gt}, {0.5}, 1.0, size) == doctest::Approx(1.0));
  }

  SUBCASE("never overlapping within d_max") {
    const std::vector<LineSegment2D> pred = {
        LineSegment2D(Vec2(0, 4), Vec2(7, 4), 0.9)};
    CHECK(heatmap_ap({pred}, {gt}, {0.5}, 1.0, size) == doctest::Approx(0.0));
  }

  SUBCASE("two thresholds integrate to the hand value") {
    // t=0.5 keeps only the first row: P=1, R=1/2.
    // t=0.3 adds the second row plus an 8-pixel stray: P=2/3, R=1.
    const std::vector<LineSegment2D> pred = {
        LineSegment2D(Vec2(0, 0), Vec2(7, 0), 0.9),
        LineSegment2D(Vec2(0, 8), Vec2(7, 8), 0.4),
        LineSegment2D(Vec2(0, 4), Vec2(7, 4), 0.4)};
    const auto points = heatmap_pr_points({pred}, {gt}, {0.5, 0.3}, 1.0, size);
    REQUIRE(points.size() == 2);
    CHECK(points[0].precision == doctest::Approx(1.0));
    CHECK(points[0].recall == doctest::Approx(0.5));
    CHECK(points[1].precision == doctest::Approx(2.0 / 3.0));
    CHECK(points[1].recall == doctest::Approx(1.0));

    CHECK(heatmap_ap({pred}, {gt}, {0.5, 0.3}, 1.0, size) ==
          doctest::Approx(5.0 / 6.0).epsilon(1e-9));
  }

  SUBCASE("unscored segments are rejected") {
    const std::vector<LineSegment2D> pred = {
        LineSegment2D(Vec2(0, 0), Vec2(7, 0))};
    CHECK_THROWS_AS(heatmap_ap({pred}, {gt}, {0.5}, 1.0, size), InputError);
  }

  SUBCASE("frame count mismatch is rejected") {
    CHECK_THROWS_AS(heatmap_ap({}, {gt}, {0.5}, 1.0, size), InputError);
  }
}
