#include <algorithm>
#include <cmath>
#include <numeric>

#include "oracles.hpp"
#include "poseval/metrics.hpp"
#include "test_util.hpp"

using namespace poseval;

namespace {

ErrorMatrix matrix(const std::vector<std::vector<double>>& rows) {
  ErrorMatrix m(rows.size(), rows.empty() ? 0 : rows[0].size());
  for (std::size_t r = 0; r < rows.size(); ++r) {
    for (std::size_t c = 0; c < rows[r].size(); ++c) m(r, c) = rows[r][c];
  }
  return m;
}

double round1(double percent) { return std::round(percent * 10.0) / 10.0; }

std::vector<double> fractions(std::initializer_list<double> percents) {
  std::vector<double> out;
  for (double p : percents) out.push_back(p / 100.0);
  return out;
}

// Single-image sweep where every (d, g) pair uses the given cost table.
CurveResult sweep_one_image(const std::vector<double>& scores, const std::vector<bool>& eligible,
                            const std::vector<std::vector<std::optional<double>>>& cost) {
  std::vector<CurveDetection> dets;
  for (double s : scores) dets.push_back({0, s});
  std::vector<std::vector<CurveGt>> gts(1);
  for (bool e : eligible) gts[0].push_back({e});
  return build_pr_curve(dets, gts, [&](std::size_t d, std::size_t g) { return cost[d][g]; });
}

}  // namespace

TEST_CASE("correctness") {
  CHECK(correctness(PoseErrorKind::MSSD, 4.9, 5.0));
  CHECK_FALSE(correctness(PoseErrorKind::MSSD, 5.0, 5.0));
  CHECK(correctness(PoseErrorKind::VSD, 0.0, 0.05));
  CHECK(correctness(PoseErrorKind::IOU2D, 0.5, 0.5));
  CHECK_FALSE(correctness(PoseErrorKind::IOU2D, 0.49, 0.5));
  CHECK_FALSE(correctness(PoseErrorKind::MSPD, std::numeric_limits<double>::infinity(), 50));
}

TEST_CASE("localization matching examples") {
  const std::vector<double> one{1.0};
  const auto m = match_localization(one, matrix({{0.0}}), PoseErrorKind::MSSD, 5.0);
  REQUIRE(m.size() == 1);
  CHECK(m[0] == LocalizationMatch{0, 0, 0.0});

  // Three estimates, two gts: the lowest-scored perfect estimate is dropped.
  const std::vector<double> scores{0.9, 0.8, 0.1};
  const auto top2 = match_localization(scores, matrix({{1, 50}, {50, 1}, {0, 0}}), PoseErrorKind::MSSD, 5.0);
  CHECK(top2.size() == 2);
  const auto bad_top = match_localization(scores, matrix({{50, 50}, {50, 50}, {0, 0}}), PoseErrorKind::MSSD, 5.0);
  CHECK(bad_top.empty());
}

TEST_CASE("greedy assignment differs from the optimal one") {
  const std::vector<double> scores{0.9, 0.5};
  const std::vector<std::vector<double>> err{{1.0, 2.0}, {1.5, 10.0}};
  const double theta = 5.0;
  // Enumerate both bijections.
  std::size_t optimal = 0;
  for (const auto& perm : std::vector<std::array<int, 2>>{{0, 1}, {1, 0}}) {
    std::size_t ok = 0;
    for (int e = 0; e < 2; ++e) ok += err[e][perm[e]] < theta;
    optimal = std::max(optimal, ok);
  }
  CHECK(optimal == 2);
  const auto greedy = match_localization(scores, matrix(err), PoseErrorKind::MSSD, theta);
  REQUIRE(greedy.size() == 1);
  CHECK(greedy[0] == LocalizationMatch{0, 0, 1.0});
  const auto ref = oracle::localization(scores, err, 2, theta, 2);
  CHECK(ref[0] == std::pair<std::size_t, int>{0, 0});
  CHECK(ref[1] == std::pair<std::size_t, int>{1, -1});
}

TEST_CASE("localization agrees with the reference on random instances") {
  oracle::Random rng(4242);
  for (int trial = 0; trial < 2000; ++trial) {
    const int n = rng.integer(0, 5), g = rng.integer(1, 3);
    std::vector<double> scores;
    std::vector<std::vector<double>> err(n, std::vector<double>(g));
    for (int e = 0; e < n; ++e) {
      scores.push_back(rng.integer(0, 3) * 0.25);
      for (int j = 0; j < g; ++j) err[e][j] = rng.integer(0, 8);
    }
    const double theta = rng.integer(1, 8);
    const std::size_t keep = static_cast<std::size_t>(rng.integer(1, 4));
    const auto got = match_localization(scores, matrix(err), PoseErrorKind::MSSD, theta, keep);
    std::vector<LocalizationMatch> want;
    for (const auto& [e, gt] : oracle::localization(scores, err, g, theta, keep)) {
      if (gt >= 0) want.push_back({e, std::size_t(gt), err[e][gt]});
    }
    CHECK(got == want);
  }
}

TEST_CASE("average recall and dataset aggregation") {
  const std::vector<std::size_t> all{4, 4, 4};
  CHECK(average_recall(all, 4) == 1.0);
  const std::vector<std::size_t> none{0, 0};
  CHECK(average_recall(none, 4) == 0.0);
  const std::vector<std::size_t> half{1, 1, 1, 1};
  CHECK(average_recall(half, 2) == 0.5);
  CHECK_ERROR_CODE(average_recall(half, 0), ErrorCode::EmptyGroundTruth);
  CHECK_ERROR_CODE(average_recall(std::vector<std::size_t>{}, 3), ErrorCode::EmptyInput);

  CHECK(ar_dataset(1, 1, 1) == 1.0);
  CHECK(ar_dataset(0.6, 0.9, 0.9) == doctest::Approx(0.8).epsilon(1e-15));
  CHECK(ar_dataset(0, 0, 0) == 0.0);
}

TEST_CASE("overall scores") {
  CHECK(round1(100 * ar_overall(fractions({77.1, 75.5, 97.6, 69.7, 74.2, 89.2, 91.5}))) == 82.1);
  CHECK(percent_1dp(ar_overall(fractions({77.1, 75.5, 97.6, 69.7, 74.2, 89.2, 91.5}))) == "82.1");
  CHECK(ar_overall(std::vector<double>{0.37}) == 0.37);
  CHECK(ar_overall(std::vector<double>{0.0, 1.0}) == 0.5);
  CHECK_ERROR_CODE(ar_overall(std::vector<double>{}), ErrorCode::EmptyInput);

  CHECK(percent_1dp(ap_overall(fractions({26.8, 41.1, 25.6}))) == "31.2");
  CHECK(percent_1dp(ap_overall(fractions({42.6, 47.4, 27.0}))) == "39.0");
  CHECK(ap_dataset_6d(1.0, 1.0) == 1.0);
  CHECK(ap_dataset(std::vector<double>{0.2, 0.4, 0.6}) == doctest::Approx(0.4).epsilon(1e-15));
  CHECK(ap_dataset(std::vector<double>{0.7}) == 0.7);
  CHECK(ap_object(std::vector<double>(10, 1.0)) == 1.0);
  CHECK_ERROR_CODE(ap_dataset(std::vector<double>{}), ErrorCode::EmptyInput);
}

TEST_CASE("overall scores commute with dataset permutation") {
  std::vector<double> v{0.771, 0.755, 0.976, 0.697, 0.742, 0.892, 0.915};
  const double ref = ar_overall(v);
  std::sort(v.begin(), v.end());
  do {
    CHECK(ar_overall(v) == ref);
    CHECK(ap_overall(v) == ref);
  } while (std::next_permutation(v.begin(), v.end()));
}

TEST_CASE("pr curve examples") {
  const auto single = sweep_one_image({1.0}, {true}, {{0.0}});
  CHECK(single.curve.points == std::vector<PrPoint>{{1.0, 1.0}});
  CHECK(ap_from_curve(single.curve) == 1.0);

  const auto fp_then_tp = sweep_one_image({0.9, 0.5}, {true}, {{std::nullopt}, {0.0}});
  CHECK(fp_then_tp.curve.points == std::vector<PrPoint>{{0.0, 0.0}, {1.0, 0.5}});
  CHECK(fp_then_tp.labels == std::vector<DetectionLabel>{DetectionLabel::FalsePositive, DetectionLabel::TruePositive});
  CHECK(ap_from_curve(fp_then_tp.curve) == doctest::Approx(0.5).epsilon(1e-15));

  const auto ignored = sweep_one_image({0.8}, {false}, {{0.0}});
  CHECK(ignored.curve.points.empty());
  CHECK(ignored.labels[0] == DetectionLabel::Ignored);
  CHECK(ignored.curve.num_gt == 0);

  CHECK(ap_from_curve(PRCurve{}) == 0.0);
}

TEST_CASE("eligible partners are preferred and ignored gts are consumed") {
  // Detection 0 passes both gts, the ineligible one with a lower cost.
  const auto r = sweep_one_image({0.9, 0.8, 0.7}, {false, true}, {{0.1, 0.5}, {0.1, std::nullopt}, {0.2, std::nullopt}});
  CHECK(r.labels[0] == DetectionLabel::TruePositive);
  CHECK(r.labels[1] == DetectionLabel::Ignored);
  CHECK(r.labels[2] == DetectionLabel::FalsePositive);
  CHECK(r.curve.num_tp == 1);
  CHECK(r.curve.num_fp == 1);
  CHECK(r.curve.num_gt == 1);
}

TEST_CASE("at most 100 detections per image are counted") {
  std::vector<CurveDetection> dets;
  for (int i = 0; i < 150; ++i) dets.push_back({0, 1.0 - i * 0.001});
  dets.push_back({1, 0.5});
  std::vector<std::vector<CurveGt>> gts{{{true}}, {{true}}};
  // The only correct detection in image 0 sits at rank 120.
  const auto r = build_pr_curve(dets, gts, [](std::size_t d, std::size_t) -> std::optional<double> {
    if (d == 119 || d == 150) return 0.0;
    return std::nullopt;
  });
  CHECK(r.labels[119] == DetectionLabel::Capped);
  CHECK(r.labels[150] == DetectionLabel::TruePositive);
  CHECK(r.curve.num_fp == 100);
  CHECK(r.curve.num_tp == 1);
  CHECK(r.curve.num_gt == 2);
}

TEST_CASE("pr sweep and AP agree with the reference on random instances") {
  oracle::Random rng(77);
  for (int trial = 0; trial < 2000; ++trial) {
    const int images = rng.integer(1, 2);
    std::vector<std::vector<CurveGt>> gts(images);
    std::vector<int> gt_image;
    std::vector<bool> gt_eligible;
    std::vector<std::size_t> first(images + 1, 0);
    for (int i = 0; i < images; ++i) {
      first[i] = gt_image.size();
      const int n = rng.integer(0, 3);
      for (int g = 0; g < n; ++g) {
        const bool e = rng.integer(0, 4) != 0;
        gts[i].push_back({e});
        gt_image.push_back(i);
        gt_eligible.push_back(e);
      }
    }
    first[images] = gt_image.size();
    const int nd = rng.integer(0, 5);
    std::vector<CurveDetection> dets;
    std::vector<double> scores;
    std::vector<int> det_image;
    std::vector<std::vector<std::optional<double>>> global(nd, std::vector<std::optional<double>>(gt_image.size()));
    for (int d = 0; d < nd; ++d) {
      const int im = rng.integer(0, images - 1);
      const double s = rng.integer(0, 4) * 0.2;
      dets.push_back({std::size_t(im), s});
      scores.push_back(s);
      det_image.push_back(im);
      for (std::size_t g = first[im]; g < first[im + 1]; ++g) {
        if (rng.integer(0, 2) != 0) global[d][g] = double(rng.integer(0, 5));
      }
    }
    const std::size_t cap = 100;
    const auto got = build_pr_curve(dets, gts, [&](std::size_t d, std::size_t g) { return global[d][first[dets[d].image] + g]; });
    if (nd == 0) {
      CHECK(got.curve.points.empty());
      continue;
    }
    const auto want = oracle::sweep(scores, det_image, gt_image, gt_eligible, global, cap);
    REQUIRE(got.labels.size() == want.labels.size());
    for (int d = 0; d < nd; ++d) CHECK(int(got.labels[d]) == int(want.labels[d]));
    REQUIRE(got.curve.points.size() == want.points.size());
    for (std::size_t i = 0; i < want.points.size(); ++i) {
      CHECK(got.curve.points[i].recall == want.points[i].first);
      CHECK(got.curve.points[i].precision == want.points[i].second);
    }
    CHECK(ap_from_curve(got.curve) == doctest::Approx(oracle::ap101(want.points)).epsilon(1e-12));
  }
}

TEST_CASE("monotone score rescaling changes nothing") {
  oracle::Random rng(8);
  for (int trial = 0; trial < 200; ++trial) {
    const int nd = rng.integer(1, 8);
    std::vector<CurveDetection> a, b;
    std::vector<std::vector<std::optional<double>>> cost(nd, std::vector<std::optional<double>>(3));
    for (int d = 0; d < nd; ++d) {
      const double s = rng.uniform(0, 1);
      a.push_back({0, s});
      b.push_back({0, std::exp(3 * s) + 7});
      for (int g = 0; g < 3; ++g) {
        if (rng.integer(0, 1)) cost[d][g] = rng.uniform(0, 1);
      }
    }
    const std::vector<std::vector<CurveGt>> gts{{{true}, {false}, {true}}};
    const PairCost c = [&](std::size_t d, std::size_t g) { return cost[d][g]; };
    const auto ra = build_pr_curve(a, gts, c);
    const auto rb = build_pr_curve(b, gts, c);
    CHECK(ra.curve == rb.curve);
    CHECK(ra.labels == rb.labels);
  }
}

TEST_CASE("adding a correct detection never lowers AP") {
  oracle::Random rng(31);
  for (int trial = 0; trial < 300; ++trial) {
    const int nd = rng.integer(0, 6);
    std::vector<CurveDetection> dets;
    std::vector<std::vector<std::optional<double>>> cost;
    for (int d = 0; d < nd; ++d) {
      dets.push_back({0, rng.uniform(0, 1)});
      cost.push_back({rng.integer(0, 1) ? std::optional<double>(0.0) : std::nullopt, std::nullopt});
    }
    const std::vector<std::vector<CurveGt>> gts{{{true}, {true}}};
    const PairCost c = [&](std::size_t d, std::size_t g) { return cost[d][g]; };
    const double before = ap_from_curve(build_pr_curve(dets, gts, c).curve);
    // The new detection is the top-scored and only correct one for gt 1.
    dets.push_back({0, 2.0});
    cost.push_back({std::nullopt, 0.0});
    CHECK(ap_from_curve(build_pr_curve(dets, gts, c).curve) >= before);
    // A top-scored incorrect one never raises it.
    const double with_tp = ap_from_curve(build_pr_curve(dets, gts, c).curve);
    dets.push_back({0, 3.0});
    cost.push_back({std::nullopt, std::nullopt});
    CHECK(ap_from_curve(build_pr_curve(dets, gts, c).curve) <= with_tp);
  }
}

TEST_CASE("mean and timing") {
  CHECK(mean(std::vector<double>{1, 2, 3, 4}) == 2.5);
  CHECK(mean(std::vector<double>{1e16, 1, -1e16, 1}) == mean(std::vector<double>{1, 1e16, 1, -1e16}));
  CHECK_ERROR_CODE(mean(std::vector<double>{}), ErrorCode::EmptyInput);

  const std::vector<ImageTime> ones{{{1, 0}, 1.0}, {{1, 1}, 1.0}};
  CHECK(mean_image_time(ones) == 1.0);
  const std::vector<ImageTime> dup{{{1, 0}, 0.8}, {{1, 0}, 1.2}};
  CHECK(mean_image_time(dup) == 1.2);
  const std::vector<std::vector<ImageTime>> two{{{{1, 0}, 2.0}}, {{{1, 0}, 4.0}, {{1, 1}, 4.0}}, {}};
  CHECK(mean_image_time(two) == 3.0);
  CHECK(mean_image_time(std::vector<ImageTime>{}) == 0.0);
}

TEST_CASE("grid config and thresholds") {
  GridConfig cfg;
  CHECK_NOTHROW(cfg.validate());
  const ThresholdGrid mssd = cfg.grid(PoseErrorKind::MSSD, 200.0, 640);
  CHECK(mssd.thresholds.front() == doctest::Approx(10.0));
  CHECK(mssd.thresholds.back() == doctest::Approx(100.0));
  CHECK(mssd.settings() == 10);
  const ThresholdGrid mspd = cfg.grid(PoseErrorKind::MSPD, 200.0, 1280);
  CHECK(mspd.thresholds.front() == doctest::Approx(10.0));
  const ThresholdGrid vsd = cfg.grid(PoseErrorKind::VSD, 200.0, 640);
  CHECK(vsd.settings() == 100);
  CHECK(vsd.taus.front() == doctest::Approx(10.0));
  CHECK(cfg.grid(PoseErrorKind::IOU2D, 200.0, 640).thresholds.front() == 0.5);

  ThresholdGrid bad{PoseErrorKind::MSSD, {2.0, 1.0}, {}};
  CHECK_ERROR_CODE(bad.validate(), ErrorCode::InvalidGrid);
  GridConfig empty = cfg;
  empty.iou_thresholds.clear();
  CHECK_ERROR_CODE(empty.validate(), ErrorCode::InvalidGrid);
}

TEST_CASE("target list") {
  TargetList t;
  t.add({1, 0}, 5, 2);
  t.add({1, 0}, 3, 1);
  t.add({2, 7}, 5, 1);
  CHECK(t.instance_count({1, 0}, 5) == 2);
  CHECK(t.instance_count({1, 0}, 9) == 0);
  CHECK(t.object_ids() == std::vector<int>{3, 5});
  CHECK(t.contains({2, 7}));
  CHECK_ERROR_CODE(t.add({1, 0}, 5, 1), ErrorCode::DuplicateTarget);
  CHECK_ERROR_CODE(t.add({1, 1}, 5, 0), ErrorCode::NonPositiveCount);
  CHECK(parse_task("det2d") == Task::Det2D);
  CHECK(to_string(Task::Loc6D) == "loc6d");
}
