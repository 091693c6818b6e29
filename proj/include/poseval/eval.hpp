#pragma once

#include <filesystem>
#include <span>
#include <vector>

#include "poseval/io.hpp"
#include "poseval/metrics.hpp"

namespace poseval {

struct EvalOptions {
  GridConfig grids;
  int jobs = 1;
  // Keep per-(object, threshold) PR curves in detection reports.
  bool keep_curves = true;
};

// Throws Error{UnknownObject} if a prediction names an object missing from the
// dataset models. Predictions for untargeted images are ignored.
void check_objects(const Dataset& dataset, std::span<const PoseEstimate> estimates);
void check_objects(const Dataset& dataset, std::span<const Detection2D> detections);

/// 6D localization: AR_d = mean of AR_VSD, AR_MSSD and AR_MSPD. Recall counts
/// are pooled over the whole dataset; per-object recalls are reported as a
/// breakdown only.
DatasetScore evaluate_loc6d(const Dataset& dataset, const TargetList& targets,
                            std::span<const PoseEstimate> estimates, const EvalOptions& options);

/// 6D detection: AP_d = mean of AP_MSSD and AP_MSPD, each averaged over the
/// targeted objects. VSD is not evaluated.
DatasetScore evaluate_det6d(const Dataset& dataset, const TargetList& targets,
                            std::span<const PoseEstimate> estimates, const EvalOptions& options);

/// 2D detection: AP over IoU thresholds against amodal boxes.
DatasetScore evaluate_det2d(const Dataset& dataset, const TargetList& targets,
                            std::span<const Detection2D> detections, const EvalOptions& options);

// Overall score and time as means over the datasets. Throws Error{EmptyInput}.
ScoreReport make_report(Task task, std::vector<DatasetScore> datasets);

struct EvalInput {
  std::filesystem::path dataset;
  std::filesystem::path targets;
  std::filesystem::path submission;
};

// Loads each dataset, its targets and submission from disk and scores them.
ScoreReport evaluate_files(Task task, std::span<const EvalInput> inputs, const EvalOptions& options);

}  // namespace poseval
