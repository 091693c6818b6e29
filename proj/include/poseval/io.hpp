#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "poseval/geom.hpp"
#include "poseval/metrics.hpp"
#include "poseval/render.hpp"

namespace poseval {

// --- files -----------------------------------------------------------------

// Throws Error{Io}.
std::string read_file(const std::filesystem::path& path);
void write_file(const std::filesystem::path& path, std::string_view bytes);

// Shortest decimal representation that parses back to the same double.
std::string format_double(double value);

// --- meshes ----------------------------------------------------------------

// ASCII or binary little-endian PLY. Faces with more than three vertices are
// fan-triangulated. Throws Error{MalformedHeader, IndexOutOfRange, UnsupportedEncoding}.
TriMesh parse_ply(std::string_view bytes, const std::string& source = {});
std::string write_ply_ascii(const TriMesh& mesh);
std::string write_ply_binary(const TriMesh& mesh);

// --- models_info.json ------------------------------------------------------

struct ModelInfo {
  double diameter = 0.0;
  SymmetrySpec symmetries;
};

using ModelsInfo = std::map<int, ModelInfo>;

ModelsInfo parse_models_info(std::string_view json, const std::string& source = {});
std::string write_models_info(const ModelsInfo& info);

// --- per-scene annotations -------------------------------------------------

struct SceneCameraEntry {
  CameraIntrinsics camera;
  double depth_scale = 1.0;
};

using SceneCamera = std::map<int, SceneCameraEntry>;

struct GtPose {
  int obj_id = 0;
  RigidPose pose;
};

struct GtInfo {
  double visib_fract = 1.0;
  Box2D bbox_obj;
  Box2D bbox_visib;
};

std::map<int, std::vector<GtPose>> parse_scene_gt(std::string_view json, const std::string& source = {});
std::map<int, std::vector<GtInfo>> parse_scene_gt_info(std::string_view json, const std::string& source = {});

// Image size comes from per-image "width"/"height" keys when present, else
// from `default_size` (the dataset's camera.json). Throws Error{InvalidIntrinsics}
// for skewed or non-pinhole cameras.
SceneCamera parse_scene_camera(std::string_view json, std::optional<std::pair<int, int>> default_size = std::nullopt,
                               const std::string& source = {});

// Pairs gt[i] with gt_info[i]; gt_id is the position i. Throws Error{LengthMismatch}.
std::map<int, std::vector<GtInstance>> combine_ground_truth(const std::map<int, std::vector<GtPose>>& gt,
                                                            const std::map<int, std::vector<GtInfo>>& info,
                                                            const std::string& source = {});

std::string write_scene_gt(const std::map<int, std::vector<GtPose>>& gt);
std::string write_scene_gt_info(const std::map<int, std::vector<GtInfo>>& info);
std::string write_scene_camera(const SceneCamera& camera);

// --- targets ---------------------------------------------------------------

TargetList parse_targets(std::string_view json, const std::string& source = {});
std::string write_targets(const TargetList& targets);

// --- threshold grid overrides ----------------------------------------------

// Optional keys: mssd_fractions, mspd_multiples, vsd_thresholds,
// vsd_tau_fractions, iou_thresholds (number arrays) and vsd_delta. Missing keys
// keep their defaults. Throws Error{MalformedJson, InvalidGrid}.
GridConfig parse_grid_config(std::string_view json, const std::string& source = {});
std::string write_grid_config(const GridConfig& grids);

// --- submissions -----------------------------------------------------------

inline constexpr std::string_view kPoseHeader = "scene_id,im_id,obj_id,score,R,t,time";
inline constexpr std::string_view kBoxHeader = "scene_id,im_id,obj_id,score,bbox,time";

struct SubmissionRow {
  std::size_t line = 0;
  int scene_id = 0;
  int im_id = 0;
  int obj_id = 0;
  double score = 0.0;
  std::optional<RigidPose> pose;  // pose tasks
  std::optional<Box2D> bbox;      // 2D detection
  double time_s = 0.0;

  ImageKey image() const { return {scene_id, im_id}; }
};

// Throws Error{BadHeader} or SubmissionError listing every bad line.
std::vector<SubmissionRow> parse_submission_csv(std::string_view bytes, Task task, const std::string& source = {});
std::string write_submission_csv(const std::vector<SubmissionRow>& rows, Task task);

std::vector<PoseEstimate> to_pose_estimates(const std::vector<SubmissionRow>& rows);
std::vector<Detection2D> to_detections(const std::vector<SubmissionRow>& rows);

// --- depth images ----------------------------------------------------------

struct RawDepth {
  int width = 0;
  int height = 0;
  std::vector<std::uint16_t> values;
};

// 16-bit grayscale PNG. Throws Error{UnsupportedBitDepth, DecodeError}.
RawDepth decode_depth_png(std::string_view bytes, const std::string& source = {});
std::string encode_depth_png(const RawDepth& depth);
DepthMap load_depth(std::string_view png_bytes, double depth_scale, const std::string& source = {});

// --- reports ---------------------------------------------------------------

enum class ReportFormat { Json, Csv };

std::string write_report(const ScoreReport& report, ReportFormat format);
// Inverse of the JSON writer. Throws Error{MalformedJson}.
ScoreReport parse_report(std::string_view json, const std::string& source = {});

// --- datasets --------------------------------------------------------------

struct ObjectModel {
  int obj_id = 0;
  TriMesh mesh;
  double diameter = 0.0;
  SymmetrySpec symmetry_spec;
  SymmetrySet symmetries;
};

struct ImageData {
  ImageKey key;
  CameraIntrinsics camera;
  double depth_scale = 1.0;
  std::vector<GtInstance> gts;
  std::filesystem::path depth_path;
  std::optional<DepthMap> depth;  // preloaded depth; otherwise read from depth_path
};

struct Dataset {
  std::string name;
  std::filesystem::path root;
  std::map<int, ObjectModel> objects;
  std::map<ImageKey, ImageData> images;
};

struct DatasetPaths {
  static std::filesystem::path models_dir(const std::filesystem::path& root) { return root / "models"; }
  static std::filesystem::path model_file(const std::filesystem::path& root, int obj_id);
  static std::filesystem::path models_info(const std::filesystem::path& root) { return models_dir(root) / "models_info.json"; }
  static std::filesystem::path scene_dir(const std::filesystem::path& root, int scene_id);
  static std::filesystem::path depth_file(const std::filesystem::path& root, int scene_id, int im_id);
};

/// Loads models and the targeted images of `targets`. Meshes are read only
/// when `load_meshes` is set. Throws Error for missing images or invalid files.
Dataset load_dataset(const std::filesystem::path& root, const TargetList& targets, bool load_meshes = true,
                     double max_step_fraction = kDefaultMaxStepFraction);

}  // namespace poseval
