#include "poseval/eval.hpp"

#include <algorithm>
#include <limits>
#include <map>
#include <numeric>
#include <string>

#include "poseval/error.hpp"
#include "poseval/errors.hpp"
#include "poseval/io.hpp"
#include "poseval/parallel.hpp"
#include "poseval/render.hpp"

namespace poseval {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

template <typename Row>
std::map<ImageKey, std::vector<std::size_t>> rows_by_image(const TargetList& targets, std::span<const Row> rows) {
  std::map<ImageKey, std::vector<std::size_t>> out;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (targets.contains(rows[i].image())) out[rows[i].image()].push_back(i);
  }
  return out;
}

template <typename Row>
double dataset_time(const TargetList& targets, std::span<const Row> rows) {
  std::vector<ImageTime> times;
  for (const Row& r : rows) {
    if (targets.contains(r.image())) times.push_back({r.image(), r.time_s});
  }
  return mean_image_time(times);
}

const ImageData& image_data(const Dataset& dataset, ImageKey key) {
  const auto it = dataset.images.find(key);
  if (it == dataset.images.end()) {
    throw Error(ErrorCode::LengthMismatch, "targeted image scene " + std::to_string(key.scene_id) + " im " +
                                               std::to_string(key.im_id) + " is not loaded");
  }
  return it->second;
}

const ObjectModel& object_model(const Dataset& dataset, int obj_id) {
  const auto it = dataset.objects.find(obj_id);
  if (it == dataset.objects.end()) throw Error(ErrorCode::UnknownObject, "unknown object " + std::to_string(obj_id));
  return it->second;
}

double safe_mspd(const RigidPose& est, const RigidPose& gt, const ObjectModel& model, const CameraIntrinsics& camera) {
  try {
    return mspd(est, gt, model.mesh.vertices, model.symmetries, camera);
  } catch (const Error& e) {
    // A pose that places the model behind the camera can never be correct.
    if (e.code() == ErrorCode::NonPositiveDepth) return kInf;
    throw;
  }
}

DepthMap scene_depth_for(const ImageData& image) {
  if (image.depth) return *image.depth;
  return load_depth(read_file(image.depth_path), image.depth_scale, image.depth_path.string());
}

// --- localization ---------------------------------------------------------

struct LocCounts {
  std::size_t total_gt = 0;
  std::vector<std::size_t> mssd;
  std::vector<std::size_t> mspd;
  std::vector<std::size_t> vsd;  // theta-major, tau-minor
};

struct LocImageResult {
  std::map<int, LocCounts> per_object;
};

void add_counts(LocCounts& into, const LocCounts& from) {
  into.total_gt += from.total_gt;
  const auto add = [](std::vector<std::size_t>& a, const std::vector<std::size_t>& b) {
    if (a.empty()) a.assign(b.size(), 0);
    for (std::size_t i = 0; i < b.size(); ++i) a[i] += b[i];
  };
  add(into.mssd, from.mssd);
  add(into.mspd, from.mspd);
  add(into.vsd, from.vsd);
}

std::vector<std::size_t> count_matches(std::span<const double> scores, const ErrorMatrix& errors, PoseErrorKind kind,
                                       const std::vector<double>& thresholds, std::size_t keep) {
  std::vector<std::size_t> out;
  out.reserve(thresholds.size());
  for (double theta : thresholds) out.push_back(match_localization(scores, errors, kind, theta, keep).size());
  return out;
}

LocImageResult evaluate_loc_image(const Dataset& dataset, const ImageData& image,
                                  const std::vector<TargetEntry>& entries, std::span<const PoseEstimate> estimates,
                                  const std::vector<std::size_t>& image_rows, const GridConfig& grids) {
  LocImageResult result;
  std::optional<DepthMap> scene;

  for (const TargetEntry& entry : entries) {
    const ObjectModel& model = object_model(dataset, entry.obj_id);
    std::vector<const GtInstance*> gts;
    for (const GtInstance& g : image.gts) {
      if (g.obj_id == entry.obj_id && g.eligible()) gts.push_back(&g);
    }
    std::vector<std::size_t> rows;
    for (std::size_t r : image_rows) {
      if (estimates[r].obj_id == entry.obj_id) rows.push_back(r);
    }

    const ThresholdGrid mssd_grid = grids.grid(PoseErrorKind::MSSD, model.diameter, image.camera.width);
    const ThresholdGrid mspd_grid = grids.grid(PoseErrorKind::MSPD, model.diameter, image.camera.width);
    const ThresholdGrid vsd_grid = grids.grid(PoseErrorKind::VSD, model.diameter, image.camera.width);

    LocCounts counts;
    counts.total_gt = gts.size();
    counts.mssd.assign(mssd_grid.settings(), 0);
    counts.mspd.assign(mspd_grid.settings(), 0);
    counts.vsd.assign(vsd_grid.settings(), 0);
    const std::size_t keep = static_cast<std::size_t>(entry.inst_count);

    if (!gts.empty() && !rows.empty()) {
      // Only estimates that can survive the top-n cut need errors: everything
      // scored at least as high as the n-th best (ties included).
      std::vector<double> sorted_scores;
      for (std::size_t r : rows) sorted_scores.push_back(estimates[r].score);
      std::sort(sorted_scores.begin(), sorted_scores.end(), std::greater<>());
      const double cutoff = sorted_scores[std::min(keep, sorted_scores.size()) - 1];
      std::vector<std::size_t> candidates;
      for (std::size_t r : rows) {
        if (estimates[r].score >= cutoff) candidates.push_back(r);
      }

      const std::size_t n_est = candidates.size();
      const std::size_t n_gt = gts.size();
      std::vector<double> scores(n_est);
      ErrorMatrix mssd_err(n_est, n_gt);
      ErrorMatrix mspd_err(n_est, n_gt);
      std::vector<ErrorMatrix> vsd_err(vsd_grid.taus.size(), ErrorMatrix(n_est, n_gt));

      if (!scene) scene = scene_depth_for(image);
      if (scene->width() != image.camera.width || scene->height() != image.camera.height) {
        throw Error(ErrorCode::DimensionMismatch, "scene depth size differs from the camera image size",
                    image.depth_path.string());
      }
      std::vector<DepthMap> gt_depth;
      gt_depth.reserve(n_gt);
      for (const GtInstance* g : gts) gt_depth.push_back(rasterize_depth(model.mesh, g->pose, image.camera));

      for (std::size_t e = 0; e < n_est; ++e) {
        const PoseEstimate& est = estimates[candidates[e]];
        scores[e] = est.score;
        const DepthMap est_depth = rasterize_depth(model.mesh, est.pose, image.camera);
        for (std::size_t g = 0; g < n_gt; ++g) {
          mssd_err(e, g) = mssd(est.pose, gts[g]->pose, model.mesh.vertices, model.symmetries);
          mspd_err(e, g) = safe_mspd(est.pose, gts[g]->pose, model, image.camera);
          const auto v = vsd_from_depth(est_depth, gt_depth[g], *scene, grids.vsd_delta, vsd_grid.taus);
          for (std::size_t t = 0; t < v.size(); ++t) vsd_err[t](e, g) = v[t];
        }
      }

      counts.mssd = count_matches(scores, mssd_err, PoseErrorKind::MSSD, mssd_grid.thresholds, keep);
      counts.mspd = count_matches(scores, mspd_err, PoseErrorKind::MSPD, mspd_grid.thresholds, keep);
      for (std::size_t ti = 0; ti < vsd_grid.thresholds.size(); ++ti) {
        for (std::size_t k = 0; k < vsd_grid.taus.size(); ++k) {
          counts.vsd[ti * vsd_grid.taus.size() + k] =
              match_localization(scores, vsd_err[k], PoseErrorKind::VSD, vsd_grid.thresholds[ti], keep).size();
        }
      }
    }
    add_counts(result.per_object[entry.obj_id], counts);
  }
  return result;
}

ErrorScore recall_score(PoseErrorKind kind, const GridConfig& grids, const std::vector<std::size_t>& matched,
                        std::size_t total_gt, const std::map<int, LocCounts>& per_object,
                        std::vector<std::size_t> LocCounts::*member) {
  ErrorScore score;
  score.kind = kind;
  score.score = average_recall(matched, total_gt);
  const auto& thetas = grids.relative(kind);
  if (kind == PoseErrorKind::VSD) {
    const auto& taus = grids.vsd_tau_fractions;
    for (std::size_t ti = 0; ti < thetas.size(); ++ti) {
      for (std::size_t k = 0; k < taus.size(); ++k) {
        score.per_threshold.push_back(
            {thetas[ti], taus[k], static_cast<double>(matched[ti * taus.size() + k]) / static_cast<double>(total_gt)});
      }
    }
  } else {
    for (std::size_t ti = 0; ti < thetas.size(); ++ti) {
      score.per_threshold.push_back({thetas[ti], 0.0, static_cast<double>(matched[ti]) / static_cast<double>(total_gt)});
    }
  }
  for (const auto& [obj_id, counts] : per_object) {
    if (counts.total_gt > 0) score.per_object[obj_id] = average_recall(counts.*member, counts.total_gt);
  }
  return score;
}

// --- detection ------------------------------------------------------------

// Errors of one detection against the gts of its object in its image.
struct DetectionErrors {
  std::size_t row = 0;
  std::vector<std::size_t> gt_index;  // indices into ImageData::gts
  std::vector<std::vector<double>> values;  // [kind][gt]
};

struct DetImageResult {
  std::vector<DetectionErrors> detections;  // capped, in descending score order
};

// The 100 most confident rows of an image (ties: input order).
std::vector<std::size_t> capped_rows(std::span<const double> scores, std::vector<std::size_t> rows) {
  std::stable_sort(rows.begin(), rows.end(), [&](std::size_t a, std::size_t b) { return scores[a] > scores[b]; });
  if (rows.size() > kMaxDetectionsPerImage) rows.resize(kMaxDetectionsPerImage);
  return rows;
}

struct ObjectCurves {
  std::vector<double> ap_per_threshold;
  std::vector<PRCurve> curves;
  std::size_t num_gt = 0;
};

// Builds every PR curve of one object from precomputed pair values.
// `passes(kind_index, threshold_index, image, obj_id, value)` decides correctness.
template <typename Passes>
ObjectCurves object_curves(int obj_id, const Dataset& dataset, const TargetList& targets,
                           const std::map<ImageKey, DetImageResult>& per_image, std::span<const double> scores,
                           std::size_t kind_index, std::size_t n_thresholds, bool lower_is_better,
                           const Passes& passes) {
  std::vector<CurveDetection> detections;
  std::vector<const DetectionErrors*> refs;
  std::vector<std::vector<CurveGt>> gts;
  std::vector<ImageKey> image_keys;
  std::vector<std::vector<std::size_t>> gt_slots;  // per image: ImageData::gts index -> curve gt index

  for (const auto& [key, entries] : targets.images()) {
    const ImageData& image = image_data(dataset, key);
    const std::size_t image_index = gts.size();
    image_keys.push_back(key);
    gts.emplace_back();
    std::vector<std::size_t> slots(image.gts.size(), std::numeric_limits<std::size_t>::max());
    for (std::size_t g = 0; g < image.gts.size(); ++g) {
      if (image.gts[g].obj_id != obj_id) continue;
      slots[g] = gts.back().size();
      gts.back().push_back({image.gts[g].eligible()});
    }
    gt_slots.push_back(std::move(slots));
    if (const auto it = per_image.find(key); it != per_image.end()) {
      for (const DetectionErrors& d : it->second.detections) {
        if (d.values.empty()) continue;  // not this object
        detections.push_back({image_index, scores[d.row]});
        refs.push_back(&d);
      }
    }
  }

  ObjectCurves out;
  for (const auto& image_gts : gts) {
    for (const CurveGt& g : image_gts) out.num_gt += g.eligible ? 1 : 0;
  }

  for (std::size_t ti = 0; ti < n_thresholds; ++ti) {
    const PairCost cost = [&](std::size_t d, std::size_t g) -> std::optional<double> {
      const DetectionErrors& de = *refs[d];
      const std::size_t image_index = detections[d].image;
      // Map the curve gt index back to the detection's error column.
      for (std::size_t c = 0; c < de.gt_index.size(); ++c) {
        if (gt_slots[image_index][de.gt_index[c]] != g) continue;
        const double value = de.values[kind_index][c];
        if (!passes(kind_index, ti, image_data(dataset, image_keys[image_index]), obj_id, value)) return std::nullopt;
        return lower_is_better ? value : -value;
      }
      return std::nullopt;
    };
    CurveResult r = build_pr_curve(detections, gts, cost);
    out.ap_per_threshold.push_back(ap_from_curve(r.curve));
    out.curves.push_back(std::move(r.curve));
  }
  return out;
}

template <typename Row, typename ComputeErrors, typename Passes>
DatasetScore evaluate_detection(const Dataset& dataset, const TargetList& targets, std::span<const Row> rows,
                                const EvalOptions& options, const std::vector<PoseErrorKind>& kinds,
                                bool lower_is_better, const ComputeErrors& compute, const Passes& passes) {
  check_objects(dataset, rows);
  const auto by_image = rows_by_image(targets, rows);
  std::vector<double> scores(rows.size());
  for (std::size_t i = 0; i < rows.size(); ++i) scores[i] = rows[i].score;

  std::vector<ImageKey> keys;
  for (const auto& [key, entries] : targets.images()) keys.push_back(key);
  std::vector<DetImageResult> results(keys.size());

  parallel_for(keys.size(), options.jobs, [&](std::size_t i) {
    const ImageData& image = image_data(dataset, keys[i]);
    const auto it = by_image.find(keys[i]);
    if (it == by_image.end()) return;
    for (std::size_t r : capped_rows(scores, it->second)) {
      DetectionErrors de;
      de.row = r;
      for (std::size_t g = 0; g < image.gts.size(); ++g) {
        if (image.gts[g].obj_id == rows[r].obj_id) de.gt_index.push_back(g);
      }
      de.values = compute(rows[r], image, de.gt_index);
      if (de.values.empty()) de.values.assign(kinds.size(), {});
      results[i].detections.push_back(std::move(de));
    }
  });

  std::map<ImageKey, DetImageResult> per_image;
  for (std::size_t i = 0; i < keys.size(); ++i) per_image.emplace(keys[i], std::move(results[i]));

  const std::vector<int> objects = targets.object_ids();
  struct Job {
    std::size_t object;
    std::size_t kind;
  };
  std::vector<Job> jobs;
  for (std::size_t o = 0; o < objects.size(); ++o) {
    for (std::size_t k = 0; k < kinds.size(); ++k) jobs.push_back({o, k});
  }
  std::vector<ObjectCurves> curves(jobs.size());

  parallel_for(jobs.size(), options.jobs, [&](std::size_t j) {
    const Job& job = jobs[j];
    const int obj_id = objects[job.object];
    // Restrict the per-image records to this object's detections.
    std::map<ImageKey, DetImageResult> filtered;
    for (const auto& [key, res] : per_image) {
      DetImageResult& f = filtered[key];
      for (const DetectionErrors& d : res.detections) {
        if (rows[d.row].obj_id == obj_id) f.detections.push_back(d);
      }
    }
    curves[j] = object_curves(obj_id, dataset, targets, filtered, scores, job.kind,
                              options.grids.relative(kinds[job.kind]).size(), lower_is_better, passes);
  });

  DatasetScore ds;
  ds.name = dataset.name;
  ds.num_images = keys.size();
  ds.mean_image_time_s = dataset_time(targets, rows);

  std::vector<double> kind_scores;
  for (std::size_t k = 0; k < kinds.size(); ++k) {
    ErrorScore es;
    es.kind = kinds[k];
    const auto& thetas = options.grids.relative(kinds[k]);
    std::vector<double> object_aps;
    std::vector<std::vector<double>> per_threshold(thetas.size());
    std::size_t num_gt = 0;
    for (std::size_t j = 0; j < jobs.size(); ++j) {
      if (jobs[j].kind != k) continue;
      const ObjectCurves& oc = curves[j];
      const int obj_id = objects[jobs[j].object];
      num_gt += oc.num_gt;
      // Objects without eligible instances have no defined AP.
      if (oc.num_gt == 0) continue;
      const double ap = ap_object(oc.ap_per_threshold);
      es.per_object[obj_id] = ap;
      object_aps.push_back(ap);
      for (std::size_t ti = 0; ti < thetas.size(); ++ti) {
        per_threshold[ti].push_back(oc.ap_per_threshold[ti]);
        if (options.keep_curves) es.curves.push_back({obj_id, thetas[ti], oc.curves[ti]});
      }
    }
    if (object_aps.empty()) throw Error(ErrorCode::EmptyGroundTruth, "dataset has no eligible ground truth");
    es.score = ap_dataset(object_aps);
    for (std::size_t ti = 0; ti < thetas.size(); ++ti) {
      es.per_threshold.push_back({thetas[ti], 0.0, mean(per_threshold[ti])});
    }
    ds.num_gt = num_gt;
    kind_scores.push_back(es.score);
    ds.errors.push_back(std::move(es));
  }
  ds.score = kinds.size() == 2 ? ap_dataset_6d(kind_scores[0], kind_scores[1]) : kind_scores.front();
  return ds;
}

}  // namespace

void check_objects(const Dataset& dataset, std::span<const PoseEstimate> estimates) {
  for (const PoseEstimate& e : estimates) {
    if (!dataset.objects.count(e.obj_id)) {
      throw Error(ErrorCode::UnknownObject, "prediction for unknown object " + std::to_string(e.obj_id));
    }
  }
}

void check_objects(const Dataset& dataset, std::span<const Detection2D> detections) {
  for (const Detection2D& d : detections) {
    if (!dataset.objects.count(d.obj_id)) {
      throw Error(ErrorCode::UnknownObject, "prediction for unknown object " + std::to_string(d.obj_id));
    }
  }
}

DatasetScore evaluate_loc6d(const Dataset& dataset, const TargetList& targets,
                            std::span<const PoseEstimate> estimates, const EvalOptions& options) {
  options.grids.validate();
  check_objects(dataset, estimates);
  const auto by_image = rows_by_image(targets, estimates);

  std::vector<ImageKey> keys;
  for (const auto& [key, entries] : targets.images()) keys.push_back(key);
  std::vector<LocImageResult> results(keys.size());
  const std::vector<std::size_t> no_rows;

  parallel_for(keys.size(), options.jobs, [&](std::size_t i) {
    const ImageData& image = image_data(dataset, keys[i]);
    const auto it = by_image.find(keys[i]);
    results[i] = evaluate_loc_image(dataset, image, targets.images().at(keys[i]), estimates,
                                    it == by_image.end() ? no_rows : it->second, options.grids);
  });

  LocCounts total;
  std::map<int, LocCounts> per_object;
  for (const LocImageResult& r : results) {
    for (const auto& [obj_id, counts] : r.per_object) {
      add_counts(total, counts);
      add_counts(per_object[obj_id], counts);
    }
  }
  if (total.total_gt == 0) throw Error(ErrorCode::EmptyGroundTruth, "dataset has no eligible ground truth");

  DatasetScore ds;
  ds.name = dataset.name;
  ds.num_images = keys.size();
  ds.num_gt = total.total_gt;
  ds.mean_image_time_s = dataset_time(targets, estimates);
  ds.errors.push_back(
      recall_score(PoseErrorKind::VSD, options.grids, total.vsd, total.total_gt, per_object, &LocCounts::vsd));
  ds.errors.push_back(
      recall_score(PoseErrorKind::MSSD, options.grids, total.mssd, total.total_gt, per_object, &LocCounts::mssd));
  ds.errors.push_back(
      recall_score(PoseErrorKind::MSPD, options.grids, total.mspd, total.total_gt, per_object, &LocCounts::mspd));
  ds.score = ar_dataset(ds.errors[0].score, ds.errors[1].score, ds.errors[2].score);
  return ds;
}

DatasetScore evaluate_det6d(const Dataset& dataset, const TargetList& targets,
                            std::span<const PoseEstimate> estimates, const EvalOptions& options) {
  options.grids.validate();
  const auto compute = [&](const PoseEstimate& est, const ImageData& image, const std::vector<std::size_t>& gt_index) {
    const ObjectModel& model = object_model(dataset, est.obj_id);
    std::vector<std::vector<double>> values(2);
    for (std::size_t g : gt_index) {
      const RigidPose& gt = image.gts[g].pose;
      values[0].push_back(mssd(est.pose, gt, model.mesh.vertices, model.symmetries));
      values[1].push_back(safe_mspd(est.pose, gt, model, image.camera));
    }
    return values;
  };
  // Thresholds depend on the object diameter and the image width.
  const auto passes = [&](std::size_t kind, std::size_t ti, const ImageData& image, int obj_id, double value) {
    if (kind == 0) {
      return correctness(PoseErrorKind::MSSD, value,
                         options.grids.mssd_fractions[ti] * dataset.objects.at(obj_id).diameter);
    }
    return correctness(PoseErrorKind::MSPD, value,
                       options.grids.mspd_multiples[ti] * (image.camera.width / kMspdReferenceWidth));
  };
  return evaluate_detection(dataset, targets, estimates, options, {PoseErrorKind::MSSD, PoseErrorKind::MSPD}, true,
                            compute, passes);
}

DatasetScore evaluate_det2d(const Dataset& dataset, const TargetList& targets,
                            std::span<const Detection2D> detections, const EvalOptions& options) {
  options.grids.validate();
  const auto compute = [](const Detection2D& det, const ImageData& image, const std::vector<std::size_t>& gt_index) {
    std::vector<std::vector<double>> values(1);
    for (std::size_t g : gt_index) values[0].push_back(iou_2d(det.bbox, image.gts[g].bbox));
    return values;
  };
  const auto passes = [&](std::size_t, std::size_t ti, const ImageData&, int, double value) {
    return correctness(PoseErrorKind::IOU2D, value, options.grids.iou_thresholds[ti]);
  };
  return evaluate_detection(dataset, targets, detections, options, {PoseErrorKind::IOU2D}, false, compute, passes);
}

ScoreReport make_report(Task task, std::vector<DatasetScore> datasets) {
  if (datasets.empty()) throw Error(ErrorCode::EmptyInput, "no datasets evaluated");
  ScoreReport report;
  report.task = task;
  std::vector<double> scores;
  std::vector<double> times;
  for (const DatasetScore& d : datasets) {
    scores.push_back(d.score);
    times.push_back(d.mean_image_time_s);
  }
  report.overall = task == Task::Loc6D ? ar_overall(scores) : ap_overall(scores);
  report.mean_image_time_s = mean(times);
  report.datasets = std::move(datasets);
  return report;
}

ScoreReport evaluate_files(Task task, std::span<const EvalInput> inputs, const EvalOptions& options) {
  std::vector<DatasetScore> scores;
  for (const EvalInput& in : inputs) {
    const TargetList targets = parse_targets(read_file(in.targets), in.targets.string());
    const Dataset dataset = load_dataset(in.dataset, targets, task != Task::Det2D);
    const auto rows = parse_submission_csv(read_file(in.submission), task, in.submission.string());
    switch (task) {
      case Task::Loc6D: scores.push_back(evaluate_loc6d(dataset, targets, to_pose_estimates(rows), options)); break;
      case Task::Det6D: scores.push_back(evaluate_det6d(dataset, targets, to_pose_estimates(rows), options)); break;
      case Task::Det2D: scores.push_back(evaluate_det2d(dataset, targets, to_detections(rows), options)); break;
    }
  }
  return make_report(task, std::move(scores));
}

}  // namespace poseval
