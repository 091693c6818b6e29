#include "poseval/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <numeric>
#include <set>
#include <string>

#include "poseval/error.hpp"

namespace poseval {

std::string_view to_string(Task task) {
  switch (task) {
    case Task::Loc6D: return "loc6d";
    case Task::Det6D: return "det6d";
    case Task::Det2D: return "det2d";
  }
  return "unknown";
}

Task parse_task(std::string_view name) {
  if (name == "loc6d") return Task::Loc6D;
  if (name == "det6d") return Task::Det6D;
  if (name == "det2d") return Task::Det2D;
  throw Error(ErrorCode::InvalidGrid, "unknown task '" + std::string(name) + "' (expected loc6d, det6d or det2d)");
}

void TargetList::add(ImageKey image, int obj_id, int inst_count) {
  if (inst_count < 1) {
    throw Error(ErrorCode::NonPositiveCount, "inst_count must be >= 1 for scene " + std::to_string(image.scene_id) +
                                                 " image " + std::to_string(image.im_id) + " object " +
                                                 std::to_string(obj_id));
  }
  auto& entries = images_[image];
  for (const auto& e : entries) {
    if (e.obj_id == obj_id) {
      throw Error(ErrorCode::DuplicateTarget, "duplicate target for scene " + std::to_string(image.scene_id) +
                                                  " image " + std::to_string(image.im_id) + " object " +
                                                  std::to_string(obj_id));
    }
  }
  entries.push_back({obj_id, inst_count});
}

int TargetList::instance_count(ImageKey image, int obj_id) const {
  const auto it = images_.find(image);
  if (it == images_.end()) return 0;
  for (const auto& e : it->second) {
    if (e.obj_id == obj_id) return e.inst_count;
  }
  return 0;
}

std::vector<int> TargetList::object_ids() const {
  std::set<int> ids;
  for (const auto& [image, entries] : images_) {
    for (const auto& e : entries) ids.insert(e.obj_id);
  }
  return {ids.begin(), ids.end()};
}

namespace {

void require_increasing(const std::vector<double>& values, const char* what, bool allow_empty) {
  if (values.empty() && !allow_empty) throw Error(ErrorCode::InvalidGrid, std::string(what) + " is empty");
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (!std::isfinite(values[i])) throw Error(ErrorCode::InvalidGrid, std::string(what) + " has a non-finite value");
    if (i > 0 && !(values[i] > values[i - 1])) {
      throw Error(ErrorCode::InvalidGrid, std::string(what) + " is not strictly increasing");
    }
  }
}

std::vector<double> scaled(const std::vector<double>& values, double factor) {
  std::vector<double> out;
  out.reserve(values.size());
  for (double v : values) out.push_back(v * factor);
  return out;
}

}  // namespace

void ThresholdGrid::validate() const {
  require_increasing(thresholds, "thresholds", false);
  require_increasing(taus, "taus", kind != PoseErrorKind::VSD);
  if (kind != PoseErrorKind::VSD && !taus.empty()) throw Error(ErrorCode::InvalidGrid, "taus are only used by VSD");
}

void GridConfig::validate() const {
  require_increasing(mssd_fractions, "mssd grid", false);
  require_increasing(mspd_multiples, "mspd grid", false);
  require_increasing(vsd_thresholds, "vsd grid", false);
  require_increasing(vsd_tau_fractions, "vsd tau grid", false);
  require_increasing(iou_thresholds, "iou grid", false);
  if (!(vsd_delta >= 0.0)) throw Error(ErrorCode::InvalidGrid, "vsd delta must be >= 0");
}

const std::vector<double>& GridConfig::relative(PoseErrorKind kind) const {
  switch (kind) {
    case PoseErrorKind::MSSD: return mssd_fractions;
    case PoseErrorKind::MSPD: return mspd_multiples;
    case PoseErrorKind::VSD: return vsd_thresholds;
    case PoseErrorKind::IOU2D: return iou_thresholds;
  }
  return mssd_fractions;
}

ThresholdGrid GridConfig::grid(PoseErrorKind kind, double diameter, int image_width) const {
  ThresholdGrid g;
  g.kind = kind;
  switch (kind) {
    case PoseErrorKind::MSSD: g.thresholds = scaled(mssd_fractions, diameter); break;
    case PoseErrorKind::MSPD: g.thresholds = scaled(mspd_multiples, image_width / kMspdReferenceWidth); break;
    case PoseErrorKind::VSD:
      g.thresholds = vsd_thresholds;
      g.taus = scaled(vsd_tau_fractions, diameter);
      break;
    case PoseErrorKind::IOU2D: g.thresholds = iou_thresholds; break;
  }
  return g;
}

bool correctness(PoseErrorKind kind, double value, double theta) {
  if (kind == PoseErrorKind::IOU2D) return value >= theta;
  return value < theta;
}

std::vector<LocalizationMatch> match_localization(std::span<const double> scores, const ErrorMatrix& errors,
                                                  PoseErrorKind kind, double theta, std::size_t keep) {
  const std::size_t n_est = scores.size();
  const std::size_t n_gt = errors.cols();
  if (errors.rows() != n_est) throw Error(ErrorCode::DimensionMismatch, "error matrix rows != number of estimates");

  std::vector<double> best_error(n_est, std::numeric_limits<double>::infinity());
  for (std::size_t e = 0; e < n_est; ++e) {
    for (std::size_t g = 0; g < n_gt; ++g) best_error[e] = std::min(best_error[e], errors(e, g));
  }

  std::vector<std::size_t> order(n_est);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    if (scores[a] != scores[b]) return scores[a] > scores[b];
    return best_error[a] < best_error[b];
  });
  order.resize(std::min(keep, n_est));

  std::vector<bool> taken(n_gt, false);
  std::vector<LocalizationMatch> matches;
  for (std::size_t e : order) {
    std::size_t best = n_gt;
    for (std::size_t g = 0; g < n_gt; ++g) {
      if (taken[g]) continue;
      if (best == n_gt || errors(e, g) < errors(e, best)) best = g;
    }
    if (best == n_gt) continue;
    if (!correctness(kind, errors(e, best), theta)) continue;
    taken[best] = true;
    matches.push_back({e, best, errors(e, best)});
  }
  return matches;
}

std::vector<LocalizationMatch> match_localization(std::span<const double> scores, const ErrorMatrix& errors,
                                                  PoseErrorKind kind, double theta) {
  return match_localization(scores, errors, kind, theta, errors.cols());
}

double average_recall(std::span<const std::size_t> matched_per_setting, std::size_t total_gt) {
  if (total_gt == 0) throw Error(ErrorCode::EmptyGroundTruth, "no eligible ground-truth instances");
  if (matched_per_setting.empty()) throw Error(ErrorCode::EmptyInput, "threshold grid has no settings");
  std::vector<double> recalls;
  recalls.reserve(matched_per_setting.size());
  for (std::size_t m : matched_per_setting) {
    recalls.push_back(static_cast<double>(m) / static_cast<double>(total_gt));
  }
  return mean(recalls);
}

double mean(std::span<const double> values) {
  if (values.empty()) throw Error(ErrorCode::EmptyInput, "cannot average an empty list");
  // Summing in sorted order makes the result independent of input order.
  std::vector<double> sorted(values.begin(), values.end());
  std::sort(sorted.begin(), sorted.end());
  double sum = 0.0;
  for (double v : sorted) sum += v;
  return sum / static_cast<double>(sorted.size());
}

double ar_dataset(double ar_vsd, double ar_mssd, double ar_mspd) {
  const double parts[] = {ar_vsd, ar_mssd, ar_mspd};
  return mean(parts);
}

double ar_overall(std::span<const double> per_dataset) { return mean(per_dataset); }

CurveResult build_pr_curve(std::span<const CurveDetection> detections, std::span<const std::vector<CurveGt>> gts,
                           const PairCost& cost) {
  CurveResult result;
  result.labels.assign(detections.size(), DetectionLabel::Capped);
  for (const auto& image_gts : gts) {
    for (const CurveGt& g : image_gts) result.curve.num_gt += g.eligible ? 1 : 0;
  }

  const auto by_score = [&](std::size_t a, std::size_t b) { return detections[a].score > detections[b].score; };
  std::vector<std::size_t> order(detections.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), by_score);

  // Keep the most confident detections of every image.
  std::vector<std::size_t> per_image(gts.size(), 0);
  std::vector<std::size_t> kept;
  kept.reserve(order.size());
  for (std::size_t d : order) {
    const std::size_t image = detections[d].image;
    if (image >= gts.size()) throw Error(ErrorCode::IndexOutOfRange, "detection refers to an unknown image");
    if (per_image[image]++ < kMaxDetectionsPerImage) kept.push_back(d);
  }

  std::vector<std::vector<bool>> taken(gts.size());
  for (std::size_t i = 0; i < gts.size(); ++i) taken[i].assign(gts[i].size(), false);

  std::size_t tp = 0;
  std::size_t fp = 0;
  const double num_gt = static_cast<double>(result.curve.num_gt);
  for (std::size_t d : kept) {
    const std::size_t image = detections[d].image;
    const auto& image_gts = gts[image];

    std::optional<std::size_t> best_eligible;
    std::optional<std::size_t> best_ignored;
    double cost_eligible = 0.0;
    double cost_ignored = 0.0;
    for (std::size_t g = 0; g < image_gts.size(); ++g) {
      if (taken[image][g]) continue;
      const std::optional<double> c = cost(d, g);
      if (!c) continue;
      if (image_gts[g].eligible) {
        if (!best_eligible || *c < cost_eligible) best_eligible = g, cost_eligible = *c;
      } else {
        if (!best_ignored || *c < cost_ignored) best_ignored = g, cost_ignored = *c;
      }
    }

    if (best_eligible) {
      taken[image][*best_eligible] = true;
      result.labels[d] = DetectionLabel::TruePositive;
      ++tp;
    } else if (best_ignored) {
      taken[image][*best_ignored] = true;
      result.labels[d] = DetectionLabel::Ignored;
      continue;
    } else {
      result.labels[d] = DetectionLabel::FalsePositive;
      ++fp;
    }
    const double recall = num_gt > 0 ? static_cast<double>(tp) / num_gt : 0.0;
    const double precision = static_cast<double>(tp) / static_cast<double>(tp + fp);
    result.curve.points.push_back({recall, precision});
  }
  result.curve.num_tp = tp;
  result.curve.num_fp = fp;
  return result;
}

double ap_from_curve(const PRCurve& curve) {
  const auto& pts = curve.points;
  // envelope[i] = max precision over points i..end
  std::vector<double> envelope(pts.size());
  double running = 0.0;
  for (std::size_t i = pts.size(); i-- > 0;) {
    running = std::max(running, pts[i].precision);
    envelope[i] = running;
  }
  double sum = 0.0;
  std::size_t i = 0;
  for (int k = 0; k <= 100; ++k) {
    const double r = k / 100.0;
    while (i < pts.size() && pts[i].recall < r) ++i;
    if (i < pts.size()) sum += envelope[i];
  }
  return sum / 101.0;
}

double ap_object(std::span<const double> per_threshold) { return mean(per_threshold); }
double ap_dataset(std::span<const double> per_object) { return mean(per_object); }

double ap_dataset_6d(double ap_mssd, double ap_mspd) {
  const double parts[] = {ap_mssd, ap_mspd};
  return mean(parts);
}

double ap_overall(std::span<const double> per_dataset) { return mean(per_dataset); }

double mean_image_time(std::span<const ImageTime> rows) {
  std::map<ImageKey, double> per_image;
  for (const ImageTime& row : rows) {
    auto [it, inserted] = per_image.try_emplace(row.image, row.time_s);
    if (!inserted) it->second = std::max(it->second, row.time_s);
  }
  if (per_image.empty()) return 0.0;
  std::vector<double> times;
  times.reserve(per_image.size());
  for (const auto& [image, t] : per_image) times.push_back(t);
  return mean(times);
}

double mean_image_time(std::span<const std::vector<ImageTime>> per_dataset) {
  std::vector<double> means;
  for (const auto& rows : per_dataset) {
    if (!rows.empty()) means.push_back(mean_image_time(rows));
  }
  return means.empty() ? 0.0 : mean(means);
}

std::string percent_1dp(double fraction) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.1f", fraction * 100.0);
  return buf;
}

}  // namespace poseval
