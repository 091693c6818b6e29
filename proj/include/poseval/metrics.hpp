#pragma once

#include <compare>
#include <cstddef>
#include <functional>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "poseval/errors.hpp"
#include "poseval/geom.hpp"

namespace poseval {

// Instances visible from less than this fraction are not evaluation targets.
inline constexpr double kMinVisibleFraction = 0.1;
// Detections considered per image (by descending score).
inline constexpr std::size_t kMaxDetectionsPerImage = 100;
// Reference image width for MSPD thresholds: r = width / 640.
inline constexpr double kMspdReferenceWidth = 640.0;

enum class Task { Loc6D, Det6D, Det2D };

std::string_view to_string(Task task);
Task parse_task(std::string_view name);

struct ImageKey {
  int scene_id = 0;
  int im_id = 0;
  auto operator<=>(const ImageKey&) const = default;
};

struct GtInstance {
  int gt_id = 0;
  int obj_id = 0;
  RigidPose pose;
  double visib_fract = 1.0;
  Box2D bbox;

  bool eligible() const { return visib_fract >= kMinVisibleFraction; }
};

struct PoseEstimate {
  int scene_id = 0;
  int im_id = 0;
  int obj_id = 0;
  RigidPose pose;
  double score = 0.0;
  double time_s = 0.0;

  ImageKey image() const { return {scene_id, im_id}; }
};

struct Detection2D {
  int scene_id = 0;
  int im_id = 0;
  int obj_id = 0;
  Box2D bbox;
  double score = 0.0;
  double time_s = 0.0;

  ImageKey image() const { return {scene_id, im_id}; }
};

struct TargetEntry {
  int obj_id = 0;
  int inst_count = 0;
  bool operator==(const TargetEntry&) const = default;
};

// The per-image list L of (object, instance count) pairs.
class TargetList {
 public:
  // Throws Error{NonPositiveCount} or Error{DuplicateTarget}.
  void add(ImageKey image, int obj_id, int inst_count);

  const std::map<ImageKey, std::vector<TargetEntry>>& images() const noexcept { return images_; }
  bool contains(ImageKey image) const { return images_.count(image) != 0; }
  // 0 when the pair is not targeted.
  int instance_count(ImageKey image, int obj_id) const;
  // Sorted, unique object ids appearing anywhere in the list.
  std::vector<int> object_ids() const;
  std::size_t size() const noexcept { return images_.size(); }

 private:
  std::map<ImageKey, std::vector<TargetEntry>> images_;
};

// Thresholds in absolute units for one (kind, object, image): mm for MSSD and
// VSD tau, px for MSPD, unitless for VSD theta and IoU.
struct ThresholdGrid {
  PoseErrorKind kind = PoseErrorKind::MSSD;
  std::vector<double> thresholds;
  std::vector<double> taus;

  // Throws Error{InvalidGrid} unless both lists are strictly increasing and
  // thresholds is non-empty (taus non-empty iff kind is VSD).
  void validate() const;
  std::size_t settings() const { return thresholds.size() * (taus.empty() ? 1 : taus.size()); }
};

// Relative grid definition, scaled per object / image into ThresholdGrids.
struct GridConfig {
  std::vector<double> mssd_fractions{0.05, 0.10, 0.15, 0.20, 0.25, 0.30, 0.35, 0.40, 0.45, 0.50};
  std::vector<double> mspd_multiples{5, 10, 15, 20, 25, 30, 35, 40, 45, 50};
  std::vector<double> vsd_thresholds{0.05, 0.10, 0.15, 0.20, 0.25, 0.30, 0.35, 0.40, 0.45, 0.50};
  std::vector<double> vsd_tau_fractions{0.05, 0.10, 0.15, 0.20, 0.25, 0.30, 0.35, 0.40, 0.45, 0.50};
  std::vector<double> iou_thresholds{0.50, 0.55, 0.60, 0.65, 0.70, 0.75, 0.80, 0.85, 0.90, 0.95};
  double vsd_delta = 15.0;

  void validate() const;
  // Relative threshold values for `kind`, as reported.
  const std::vector<double>& relative(PoseErrorKind kind) const;
  ThresholdGrid grid(PoseErrorKind kind, double diameter, int image_width) const;

  bool operator==(const GridConfig&) const = default;
};

// e < theta for pose errors; IoU >= theta for 2D boxes.
bool correctness(PoseErrorKind kind, double value, double theta);

// Row-major estimates x ground truths.
class ErrorMatrix {
 public:
  ErrorMatrix() = default;
  ErrorMatrix(std::size_t rows, std::size_t cols, double fill = 0.0) : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }
  double operator()(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }
  double& operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

struct LocalizationMatch {
  std::size_t estimate = 0;
  std::size_t gt = 0;
  double error = 0.0;
  bool operator==(const LocalizationMatch&) const = default;
};

/// Greedy localization matching for one (image, object).
///
/// Keeps the `keep` highest-scored estimates (ties: lower best error, then
/// input order) and processes them in that order. Each estimate takes the
/// unmatched gt with the smallest error (ties: lower gt index); the pair is a
/// match only if it passes `correctness`, and only matches consume a gt.
std::vector<LocalizationMatch> match_localization(std::span<const double> scores, const ErrorMatrix& errors,
                                                  PoseErrorKind kind, double theta, std::size_t keep);

// Same with keep = number of ground truths.
std::vector<LocalizationMatch> match_localization(std::span<const double> scores, const ErrorMatrix& errors,
                                                  PoseErrorKind kind, double theta);

/// Mean over grid settings of matched / total_gt. Throws
/// Error{EmptyGroundTruth} when total_gt is 0, Error{EmptyInput} without settings.
double average_recall(std::span<const std::size_t> matched_per_setting, std::size_t total_gt);

double ar_dataset(double ar_vsd, double ar_mssd, double ar_mspd);

// Arithmetic mean, independent of input order. Throws Error{EmptyInput}.
double mean(std::span<const double> values);

double ar_overall(std::span<const double> per_dataset);

struct PrPoint {
  double recall = 0.0;
  double precision = 0.0;
  bool operator==(const PrPoint&) const = default;
};

struct PRCurve {
  std::vector<PrPoint> points;
  std::size_t num_tp = 0;
  std::size_t num_fp = 0;
  std::size_t num_gt = 0;

  bool operator==(const PRCurve&) const = default;
};

enum class DetectionLabel { TruePositive, FalsePositive, Ignored, Capped };

struct CurveDetection {
  std::size_t image = 0;  // index into the per-image gt lists
  double score = 0.0;
};

struct CurveGt {
  bool eligible = true;
};

// Cost of pairing detection d with gt g of its image when the pair is correct
// (lower is better), or nullopt when it is not.
using PairCost = std::function<std::optional<double>(std::size_t detection, std::size_t gt)>;

struct CurveResult {
  PRCurve curve;
  std::vector<DetectionLabel> labels;  // parallel to the input detections
};

/// COCO-style sweep for one object at one threshold. At most 100 detections
/// per image are kept. Detections whose only correct partner is an ineligible
/// gt are ignored; recall counts eligible gts only.
CurveResult build_pr_curve(std::span<const CurveDetection> detections, std::span<const std::vector<CurveGt>> gts,
                           const PairCost& cost);

/// 101-point interpolated AP.
double ap_from_curve(const PRCurve& curve);

double ap_object(std::span<const double> per_threshold);
double ap_dataset(std::span<const double> per_object);
double ap_dataset_6d(double ap_mssd, double ap_mspd);
double ap_overall(std::span<const double> per_dataset);

struct ImageTime {
  ImageKey image;
  double time_s = 0.0;
};

// Per-image time is the max over that image's rows; images are averaged per
// dataset, then datasets are averaged. Empty datasets are skipped; returns 0
// when nothing remains.
double mean_image_time(std::span<const std::vector<ImageTime>> per_dataset);
double mean_image_time(std::span<const ImageTime> rows);

// ---------------------------------------------------------------------------
// Reports

struct ThresholdScore {
  double theta = 0.0;  // relative grid value
  double tau = 0.0;    // relative tau for VSD, 0 otherwise
  double value = 0.0;
  bool operator==(const ThresholdScore&) const = default;
};

struct CurveRecord {
  int obj_id = 0;
  double theta = 0.0;
  PRCurve curve;
  bool operator==(const CurveRecord&) const = default;
};

struct ErrorScore {
  PoseErrorKind kind = PoseErrorKind::MSSD;
  double score = 0.0;
  std::vector<ThresholdScore> per_threshold;
  std::map<int, double> per_object;
  std::vector<CurveRecord> curves;

  bool operator==(const ErrorScore&) const = default;
};

struct DatasetScore {
  std::string name;
  double score = 0.0;
  std::vector<ErrorScore> errors;
  double mean_image_time_s = 0.0;
  std::size_t num_images = 0;
  std::size_t num_gt = 0;

  bool operator==(const DatasetScore&) const = default;
};

struct ScoreReport {
  Task task = Task::Loc6D;
  std::vector<DatasetScore> datasets;
  double overall = 0.0;
  double mean_image_time_s = 0.0;

  bool operator==(const ScoreReport&) const = default;
};

// Percent rounded to one decimal, e.g. 0.82114 -> "82.1".
std::string percent_1dp(double fraction);

}  // namespace poseval
