#include <cstdio>
#include <set>
#include <string>

#include "json.hpp"

#include "poseval/error.hpp"
#include "poseval/io.hpp"

namespace poseval {

namespace fs = std::filesystem;

namespace {

std::string padded(int value) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%06d", value);
  return buf;
}

std::optional<std::pair<int, int>> dataset_image_size(const fs::path& root) {
  const fs::path path = root / "camera.json";
  if (!fs::exists(path)) return std::nullopt;
  const std::string text = read_file(path);
  try {
    const auto j = nlohmann::json::parse(text);
    if (j.contains("width") && j.contains("height")) {
      return std::make_pair(j.at("width").get<int>(), j.at("height").get<int>());
    }
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::MalformedJson, e.what(), path.string());
  }
  return std::nullopt;
}

}  // namespace

fs::path DatasetPaths::model_file(const fs::path& root, int obj_id) {
  return models_dir(root) / ("obj_" + padded(obj_id) + ".ply");
}

fs::path DatasetPaths::scene_dir(const fs::path& root, int scene_id) { return root / "test" / padded(scene_id); }

fs::path DatasetPaths::depth_file(const fs::path& root, int scene_id, int im_id) {
  return scene_dir(root, scene_id) / "depth" / (padded(im_id) + ".png");
}

Dataset load_dataset(const fs::path& root, const TargetList& targets, bool load_meshes, double max_step_fraction) {
  if (!fs::is_directory(root)) throw Error(ErrorCode::Io, "dataset directory does not exist", root.string());

  Dataset ds;
  ds.root = root;
  ds.name = fs::path(root).lexically_normal().filename().string();
  if (ds.name.empty()) ds.name = fs::path(root).lexically_normal().parent_path().filename().string();

  const fs::path info_path = DatasetPaths::models_info(root);
  const ModelsInfo info = parse_models_info(read_file(info_path), info_path.string());
  for (const auto& [obj_id, m] : info) {
    ObjectModel model;
    model.obj_id = obj_id;
    model.diameter = m.diameter;
    model.symmetry_spec = m.symmetries;
    model.symmetries = discretize_symmetries(m.symmetries, m.diameter, max_step_fraction);
    if (load_meshes) {
      const fs::path mesh_path = DatasetPaths::model_file(root, obj_id);
      model.mesh = parse_ply(read_file(mesh_path), mesh_path.string());
      try {
        model.mesh.validate();
      } catch (const Error& e) {
        throw Error(e.code(), e.detail(), mesh_path.string());
      }
    }
    ds.objects.emplace(obj_id, std::move(model));
  }

  for (int obj_id : targets.object_ids()) {
    if (!ds.objects.count(obj_id)) {
      throw Error(ErrorCode::UnknownObject, "target object " + std::to_string(obj_id) + " is not in models_info",
                  info_path.string());
    }
  }

  const auto image_size = dataset_image_size(root);
  std::set<int> scenes;
  for (const auto& [key, entries] : targets.images()) scenes.insert(key.scene_id);

  for (int scene_id : scenes) {
    const fs::path dir = DatasetPaths::scene_dir(root, scene_id);
    const fs::path gt_path = dir / "scene_gt.json";
    const fs::path info_path_scene = dir / "scene_gt_info.json";
    const fs::path cam_path = dir / "scene_camera.json";
    const auto gt = parse_scene_gt(read_file(gt_path), gt_path.string());
    const auto gt_info = parse_scene_gt_info(read_file(info_path_scene), info_path_scene.string());
    const auto cameras = parse_scene_camera(read_file(cam_path), image_size, cam_path.string());
    const auto instances = combine_ground_truth(gt, gt_info, gt_path.string());

    for (const auto& [key, entries] : targets.images()) {
      if (key.scene_id != scene_id) continue;
      const auto cam = cameras.find(key.im_id);
      if (cam == cameras.end()) {
        throw Error(ErrorCode::LengthMismatch, "targeted image " + std::to_string(key.im_id) + " has no camera entry",
                    cam_path.string());
      }
      ImageData image;
      image.key = key;
      image.camera = cam->second.camera;
      image.depth_scale = cam->second.depth_scale;
      image.depth_path = DatasetPaths::depth_file(root, scene_id, key.im_id);
      if (const auto it = instances.find(key.im_id); it != instances.end()) {
        image.gts = it->second;
      } else {
        throw Error(ErrorCode::LengthMismatch, "targeted image " + std::to_string(key.im_id) + " has no ground truth",
                    gt_path.string());
      }
      for (const GtInstance& g : image.gts) {
        if (!ds.objects.count(g.obj_id)) {
          throw Error(ErrorCode::UnknownObject, "ground truth refers to unknown object " + std::to_string(g.obj_id),
                      gt_path.string());
        }
      }
      ds.images.emplace(key, std::move(image));
    }
  }
  return ds;
}

}  // namespace poseval
