#include <algorithm>
#include <limits>
#include <numeric>
#include <random>

#include "doctest.h"
#include "lanekit/matching.hpp"
#include "lanekit/metrics.hpp"
#include "support.hpp"

using namespace lanekit;

namespace {

double brute_force_best_total(const ScoreMatrix& m) {
  std::vector<std::size_t> cols(std::max(m.rows, m.cols));
  std::iota(cols.begin(), cols.end(), 0);
  double best = -1e300;
  do {
    double total = 0.0;
    for (std::size_t r = 0; r < m.rows; ++r) {
      if (cols[r] < m.cols) total += m(r, cols[r]);
    }
    best = std::max(best, total);
  } while (std::next_permutation(cols.begin(), cols.end()));
  return best;
}

SampledLane constant_lane(std::size_t n, double x) { return SampledLane(n, x); }

void check_f1_identity(const LaneCounts& c) {
  const double p = c.precision();
  const double r = c.recall();
  if (p + r > 0.0) CHECK(std::abs(c.f1() - 2.0 * p * r / (p + r)) <= 1e-12);
}

}  // namespace

TEST_SUITE("metrics") {

TEST_CASE("Hungarian assignment maximizes the total") {
  std::mt19937_64 rng(17);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int trial = 0; trial < 200; ++trial) {
    ScoreMatrix m{1 + rng() % 6, 1 + rng() % 6, {}};
    for (std::size_t i = 0; i < m.rows * m.cols; ++i) m.scores.push_back(u(rng));
    const auto a = max_weight_assignment(m);
    REQUIRE(a.size() == m.rows);
    double total = 0.0;
    std::vector<bool> used(m.cols, false);
    for (std::size_t r = 0; r < m.rows; ++r) {
      if (a[r] == kUnmatched) continue;
      CHECK_FALSE(used[a[r]]);
      used[a[r]] = true;
      total += m(r, a[r]);
    }
    CHECK(total == doctest::Approx(brute_force_best_total(m)).epsilon(1e-12));
  }
}

TEST_CASE("threshold matching prefers cardinality over total IoU") {
  // Greedy on the best pair (0.9) would leave one GT lane unmatched.
  const ScoreMatrix m{2, 2, {0.9, 0.6, 0.55, 0.0}};
  const auto match = threshold_matching(m, 0.5);
  CHECK(match[0] == 1);
  CHECK(match[1] == 0);
}

TEST_CASE("threshold matching against exhaustive enumeration") {
  std::mt19937_64 rng(23);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int trial = 0; trial < 300; ++trial) {
    ScoreMatrix m{rng() % 7, rng() % 7, {}};
    std::vector<std::vector<double>> rows(m.rows, std::vector<double>(m.cols));
    for (std::size_t r = 0; r < m.rows; ++r) {
      for (std::size_t c = 0; c < m.cols; ++c) {
        rows[r][c] = u(rng) < 0.3 ? 0.0 : u(rng);
        m.scores.push_back(rows[r][c]);
      }
    }
    const auto match = threshold_matching(m, 0.5);
    std::size_t count = 0;
    for (std::size_t r = 0; r < m.rows; ++r) {
      if (match[r] == kUnmatched) continue;
      CHECK(m(r, match[r]) > 0.5);
      ++count;
    }
    CHECK(count == lanekit::testing::exhaustive_max_matching(rows, m.cols, 0.5));
  }
}

TEST_CASE("IoU exactly at the threshold is not a match") {
  const ScoreMatrix m{1, 1, {0.5}};
  CHECK(threshold_matching(m, 0.5)[0] == kUnmatched);
}

TEST_CASE("F1 identity and edge cases") {
  CHECK(LaneCounts{0, 0, 0}.f1() == 0.0);
  CHECK(LaneCounts{5, 0, 0}.f1() == 1.0);
  CHECK(LaneCounts{0, 3, 4}.f1() == 0.0);
  const LaneCounts c{7, 3, 2};
  CHECK(c.precision() == 0.7);
  CHECK(c.recall() == doctest::Approx(7.0 / 9.0));
  check_f1_identity(c);
}

TEST_CASE("categories") {
  for (Category c : kAllCategories) {
    CHECK(parse_category(category_name(c)) == c);
    CHECK(parse_category(category_label(c)) == c);
  }
  CHECK(parse_category("crowd") == Category::kCrowded);
  CHECK(parse_category("hlight") == Category::kDazzleLight);
  CHECK(parse_category("CROSS") == Category::kCrossroad);
  CHECK(parse_category("no_line") == Category::kNoLine);
  CHECK_FALSE(parse_category("motorway").has_value());
  CHECK(category_label(Category::kDazzleLight) == "Dazzle light");
}

TEST_CASE("TuSimple self-evaluation") {
  const std::vector<double> h{160, 170, 180, 190};
  TuSimpleFrame f{h, {{100, 110, 120, 130}, {-2, 300, 310, 320}}, {}};
  f.pred_lanes = f.gt_lanes;
  const EvalReport r = tusimple_accuracy(std::span(&f, 1));
  CHECK(r.tusimple->accuracy() == 1.0);
  CHECK(r.totals.fp == 0);
  CHECK(r.totals.fn == 0);
  CHECK(r.tusimple->gt_points == 7);
}

TEST_CASE("TuSimple tolerance and absent points") {
  const std::vector<double> h(10, 0.0);
  TuSimpleFrame f{h, {constant_lane(10, 100.0)}, {constant_lane(10, 120.0)}};
  CHECK(tusimple_accuracy(std::span(&f, 1)).tusimple->accuracy() == 1.0);
  f.pred_lanes[0] = constant_lane(10, 120.5);
  const EvalReport miss = tusimple_accuracy(std::span(&f, 1));
  CHECK(miss.tusimple->accuracy() == 0.0);
  CHECK(miss.totals.fn == 1);
  CHECK(miss.totals.fp == 1);
  // A prediction marking a point absent never scores it.
  f.pred_lanes[0] = constant_lane(10, 100.0);
  f.pred_lanes[0][3] = -2.0;
  const EvalReport partial = tusimple_accuracy(std::span(&f, 1));
  CHECK(partial.tusimple->accuracy() == 0.9);
  CHECK(partial.totals.fn == 0);
  f.pred_lanes[0][4] = -2.0;
  f.pred_lanes[0][5] = -2.0;
  CHECK(tusimple_accuracy(std::span(&f, 1)).totals.fn == 1);
}

TEST_CASE("TuSimple rates and lane-order invariance") {
  const std::vector<double> h(5, 0.0);
  TuSimpleFrame f{h,
                  {constant_lane(5, 100), constant_lane(5, 300), constant_lane(5, 500)},
                  {constant_lane(5, 505), constant_lane(5, 800), constant_lane(5, 101)}};
  const EvalReport r = tusimple_accuracy(std::span(&f, 1));
  CHECK(r.totals.tp == 2);
  CHECK(r.totals.fn == 1);
  CHECK(r.totals.fp == 1);
  CHECK(r.tusimple->fn_rate(r.totals) == doctest::Approx(1.0 / 3.0));
  CHECK(r.tusimple->fp_rate(r.totals) == doctest::Approx(1.0 / 3.0));
  CHECK(r.tusimple->accuracy() == doctest::Approx(10.0 / 15.0));
  std::reverse(f.pred_lanes.begin(), f.pred_lanes.end());
  std::reverse(f.gt_lanes.begin(), f.gt_lanes.end());
  const EvalReport s = tusimple_accuracy(std::span(&f, 1));
  CHECK(s == r);
}

TEST_CASE("TuSimple rejects malformed frames") {
  TuSimpleFrame f{{1, 2, 3}, {{1, 2}}, {}};
  CHECK_THROWS_AS(tusimple_accuracy(std::span(&f, 1)), InvalidArgument);
  CHECK_THROWS_AS(tusimple_accuracy({}), InvalidArgument);
}

TEST_CASE("accuracy is monotone in the tolerance") {
  std::mt19937_64 rng(31);
  std::normal_distribution<double> n(0.0, 15.0);
  std::vector<TuSimpleFrame> frames;
  for (int i = 0; i < 20; ++i) {
    TuSimpleFrame f{std::vector<double>(20, 0.0), {}, {}};
    for (int l = 0; l < 3; ++l) {
      SampledLane g(20), p(20);
      for (int j = 0; j < 20; ++j) {
        g[j] = 200.0 * l + 100.0 + j;
        p[j] = g[j] + n(rng);
      }
      f.gt_lanes.push_back(g);
      f.pred_lanes.push_back(p);
    }
    frames.push_back(f);
  }
  double last = -1.0;
  for (double tol : {1.0, 5.0, 10.0, 20.0, 40.0, 100.0}) {
    const double acc = tusimple_accuracy(frames, {tol, 0.85}).tusimple->accuracy();
    CHECK(acc >= last);
    last = acc;
  }
  CHECK(last == 1.0);
}

TEST_CASE("CULane self-evaluation") {
  std::mt19937_64 rng(37);
  const ImageGrid grid(1640, 590);
  std::vector<CulaneFrame> frames;
  for (Category c : kAllCategories) {
    CulaneFrame f{grid, c, {}, {}};
    if (c != Category::kCrossroad) {
      for (int l = 0; l < 3; ++l) f.gt_lanes.push_back(lanekit::testing::random_lane(rng, grid, 6));
    }
    f.pred_lanes = f.gt_lanes;
    frames.push_back(f);
  }
  const EvalReport r = culane_f1(frames);
  CHECK(r.per_category.size() == 9);
  for (const CategoryResult& row : r.per_category) {
    CHECK(row.frames == 1);
    CHECK(row.counts.fp == 0);
    CHECK(row.counts.fn == 0);
    if (row.category != Category::kCrossroad) CHECK(row.counts.f1() == 1.0);
  }
  CHECK(r.totals.tp == 24);
  CHECK(r.totals.f1() == 1.0);
}

TEST_CASE("crossroad frames count false positives only") {
  const ImageGrid grid(200, 100);
  CulaneFrame f{grid, Category::kCrossroad, {}, {{{{10, 0}, {10, 99}}}, {{{50, 0}, {60, 99}}}}};
  const EvalReport r = culane_f1(std::span(&f, 1));
  CHECK(r.per_category[8].counts == LaneCounts{0, 2, 0});
  CHECK(r.totals == LaneCounts{});
  f.gt_lanes.push_back({{{1, 1}, {2, 2}}});
  CHECK_THROWS_AS(culane_frame_counts(f), InvalidArgument);
}

TEST_CASE("CULane counts match the brute-force oracle") {
  std::mt19937_64 rng(41);
  std::uniform_real_distribution<double> shift(-45.0, 45.0);
  const ImageGrid grid(320, 180);
  for (int trial = 0; trial < 40; ++trial) {
    CulaneFrame f{grid, Category::kNormal, {}, {}};
    const std::size_t n_gt = rng() % 5;
    for (std::size_t i = 0; i < n_gt; ++i) f.gt_lanes.push_back(lanekit::testing::random_lane(rng, grid, 4));
    for (const auto& g : f.gt_lanes) {
      if (rng() % 4) f.pred_lanes.push_back(lanekit::testing::shifted(g, shift(rng) / 4.0));
    }
    if (rng() % 2) f.pred_lanes.push_back(lanekit::testing::random_lane(rng, grid, 4));
    const CulaneOptions opts{10.0, 0.5};
    CAPTURE(trial);
    CHECK(culane_frame_counts(f, opts).counts == lanekit::testing::oracle_frame_counts(f, 10.0, 0.5));
  }
}

TEST_CASE("TP count does not increase with the IoU threshold") {
  std::mt19937_64 rng(43);
  const ImageGrid grid(400, 200);
  std::vector<CulaneFrame> frames;
  for (int i = 0; i < 10; ++i) {
    CulaneFrame f{grid, Category::kNormal, {}, {}};
    for (int l = 0; l < 3; ++l) {
      f.gt_lanes.push_back(lanekit::testing::random_lane(rng, grid, 5));
      f.pred_lanes.push_back(lanekit::testing::shifted(f.gt_lanes.back(), (rng() % 40) - 20.0));
    }
    frames.push_back(f);
  }
  std::uint64_t last = std::numeric_limits<std::uint64_t>::max();
  for (double t : {0.1, 0.3, 0.5, 0.7, 0.9}) {
    const EvalReport r = culane_f1(frames, {15.0, t});
    CHECK(r.totals.tp <= last);
    last = r.totals.tp;
    check_f1_identity(r.totals);
  }
}

TEST_CASE("aggregation always lists every category") {
  const EvalReport r = aggregate_by_category({});
  CHECK(r.per_category.size() == 9);
  const std::vector<FrameCounts> counts{{Category::kNight, {2, 1, 0}}, {Category::kCrossroad, {0, 3, 0}},
                                        {Category::kNight, {1, 0, 1}}};
  const EvalReport s = aggregate_by_category(counts);
  CHECK(s.per_category[2].counts == LaneCounts{3, 1, 1});
  CHECK(s.per_category[2].frames == 2);
  CHECK(s.totals == LaneCounts{3, 1, 1});
}

}
