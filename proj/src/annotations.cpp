#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>
#include <string>

#include "json.hpp"

#include "poseval/error.hpp"
#include "poseval/io.hpp"

namespace poseval {

using nlohmann::json;

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::Io, "cannot open file for reading", path.string());
  std::ostringstream buffer;
  buffer << in.rdbuf();
  if (in.bad()) throw Error(ErrorCode::Io, "read failed", path.string());
  return std::move(buffer).str();
}

void write_file(const std::filesystem::path& path, std::string_view bytes) {
  if (path.has_parent_path()) {
    std::error_code ec;
    std::filesystem::create_directories(path.parent_path(), ec);
    if (ec) throw Error(ErrorCode::Io, "cannot create directory: " + ec.message(), path.parent_path().string());
  }
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::Io, "cannot open file for writing", path.string());
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw Error(ErrorCode::Io, "write failed", path.string());
}

std::string format_double(double value) {
  char buf[32];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, value);
  return std::string(buf, ptr);
}

namespace {

json parse_json(std::string_view text, const std::string& source) {
  try {
    return json::parse(text.begin(), text.end());
  } catch (const json::parse_error& e) {
    throw Error(ErrorCode::MalformedJson, e.what(), source);
  }
}

int parse_key(const std::string& key, const std::string& source) {
  int value = 0;
  const auto [ptr, ec] = std::from_chars(key.data(), key.data() + key.size(), value);
  if (ec != std::errc() || ptr != key.data() + key.size()) {
    throw Error(ErrorCode::MalformedJson, "expected an integer key, got '" + key + "'", source);
  }
  return value;
}

std::vector<double> numbers(const json& node, std::size_t expected, const char* what, const std::string& source,
                            ErrorCode code = ErrorCode::MalformedJson) {
  if (!node.is_array() || node.size() != expected) {
    throw Error(code, std::string(what) + " must be an array of " + std::to_string(expected) + " numbers", source);
  }
  std::vector<double> out;
  out.reserve(expected);
  for (const json& v : node) {
    if (!v.is_number()) throw Error(code, std::string(what) + " contains a non-number", source);
    out.push_back(v.get<double>());
  }
  return out;
}

template <typename T>
T field(const json& obj, const char* key, const std::string& source) {
  const auto it = obj.find(key);
  if (it == obj.end()) throw Error(ErrorCode::MalformedJson, std::string("missing field '") + key + "'", source);
  try {
    return it->get<T>();
  } catch (const json::exception& e) {
    throw Error(ErrorCode::MalformedJson, std::string("bad field '") + key + "': " + e.what(), source);
  }
}

Mat3 row_major(const std::vector<double>& v, std::size_t offset = 0, std::size_t stride = 3) {
  Mat3 m;
  for (int r = 0; r < 3; ++r) {
    for (int c = 0; c < 3; ++c) m(r, c) = v[offset + r * stride + c];
  }
  return m;
}

json mat_json(const Mat3& m) {
  json out = json::array();
  for (int r = 0; r < 3; ++r) {
    for (int c = 0; c < 3; ++c) out.push_back(m(r, c));
  }
  return out;
}

json vec_json(const Vec3& v) { return json::array({v.x(), v.y(), v.z()}); }

json box_json(const Box2D& b) { return json::array({b.x, b.y, b.w, b.h}); }

Box2D parse_box(const json& node, const char* what, const std::string& source) {
  const auto v = numbers(node, 4, what, source);
  return {v[0], v[1], v[2], v[3]};
}

const json& require_object(const json& node, const std::string& source) {
  if (!node.is_object()) throw Error(ErrorCode::MalformedJson, "expected a JSON object", source);
  return node;
}

}  // namespace

ModelsInfo parse_models_info(std::string_view text, const std::string& source) {
  const json root = parse_json(text, source);
  require_object(root, source);
  ModelsInfo out;
  for (const auto& [key, entry] : root.items()) {
    const int obj_id = parse_key(key, source);
    require_object(entry, source);
    ModelInfo info;
    const auto d = entry.find("diameter");
    if (d == entry.end() || !d->is_number()) {
      throw Error(ErrorCode::MissingDiameter, "object " + key + " has no numeric diameter", source);
    }
    info.diameter = d->get<double>();
    if (!(info.diameter > 0.0) || !std::isfinite(info.diameter)) {
      throw Error(ErrorCode::MissingDiameter, "object " + key + " has a non-positive diameter", source);
    }

    if (const auto it = entry.find("symmetries_discrete"); it != entry.end()) {
      if (!it->is_array()) throw Error(ErrorCode::BadSymmetryMatrix, "symmetries_discrete must be an array", source);
      for (const json& m : *it) {
        const auto v = numbers(m, 16, "discrete symmetry", source, ErrorCode::BadSymmetryMatrix);
        const double bottom[] = {v[12], v[13], v[14], v[15] - 1.0};
        for (double b : bottom) {
          if (std::abs(b) > 1e-9) {
            throw Error(ErrorCode::BadSymmetryMatrix, "object " + key + ": bottom row must be [0, 0, 0, 1]", source);
          }
        }
        const Mat3 rotation = row_major(v, 0, 4);
        const Vec3 translation(v[3], v[7], v[11]);
        if (!is_rotation(rotation) || !translation.allFinite()) {
          throw Error(ErrorCode::BadSymmetryMatrix, "object " + key + ": symmetry is not a rigid transform", source);
        }
        info.symmetries.discrete.emplace_back(rotation, translation);
      }
    }
    if (const auto it = entry.find("symmetries_continuous"); it != entry.end()) {
      if (!it->is_array()) throw Error(ErrorCode::NonUnitAxis, "symmetries_continuous must be an array", source);
      for (const json& s : *it) {
        require_object(s, source);
        const auto axis = numbers(s.value("axis", json()), 3, "axis", source, ErrorCode::NonUnitAxis);
        ContinuousSymmetry sym;
        sym.axis = Vec3(axis[0], axis[1], axis[2]);
        if (const auto off = s.find("offset"); off != s.end()) {
          const auto o = numbers(*off, 3, "offset", source);
          sym.offset = Vec3(o[0], o[1], o[2]);
        }
        if (std::abs(sym.axis.norm() - 1.0) > kAxisTolerance) {
          throw Error(ErrorCode::NonUnitAxis, "object " + key + ": continuous symmetry axis is not unit length",
                      source);
        }
        info.symmetries.continuous.push_back(sym);
      }
    }
    out.emplace(obj_id, std::move(info));
  }
  return out;
}

std::string write_models_info(const ModelsInfo& info) {
  json root = json::object();
  for (const auto& [obj_id, m] : info) {
    json entry;
    entry["diameter"] = m.diameter;
    if (!m.symmetries.discrete.empty()) {
      json list = json::array();
      for (const RigidPose& s : m.symmetries.discrete) {
        const Mat3& r = s.rotation();
        const Vec3& t = s.translation();
        list.push_back({r(0, 0), r(0, 1), r(0, 2), t.x(), r(1, 0), r(1, 1), r(1, 2), t.y(), r(2, 0), r(2, 1),
                        r(2, 2), t.z(), 0.0, 0.0, 0.0, 1.0});
      }
      entry["symmetries_discrete"] = list;
    }
    if (!m.symmetries.continuous.empty()) {
      json list = json::array();
      for (const ContinuousSymmetry& s : m.symmetries.continuous) {
        list.push_back({{"axis", vec_json(s.axis)}, {"offset", vec_json(s.offset)}});
      }
      entry["symmetries_continuous"] = list;
    }
    root[std::to_string(obj_id)] = entry;
  }
  return root.dump(1) + "\n";
}

std::map<int, std::vector<GtPose>> parse_scene_gt(std::string_view text, const std::string& source) {
  const json root = parse_json(text, source);
  require_object(root, source);
  std::map<int, std::vector<GtPose>> out;
  for (const auto& [key, list] : root.items()) {
    const int im_id = parse_key(key, source);
    if (!list.is_array()) throw Error(ErrorCode::MalformedJson, "image " + key + ": expected a list", source);
    auto& gts = out[im_id];
    for (const json& g : list) {
      require_object(g, source);
      const auto r = numbers(g.value("cam_R_m2c", json()), 9, "cam_R_m2c", source);
      const auto t = numbers(g.value("cam_t_m2c", json()), 3, "cam_t_m2c", source);
      GtPose gt;
      gt.obj_id = field<int>(g, "obj_id", source);
      const Mat3 rotation = row_major(r);
      const Vec3 translation(t[0], t[1], t[2]);
      if (!is_rotation(rotation) || !translation.allFinite()) {
        throw Error(ErrorCode::BadRotation,
                    "image " + key + " instance " + std::to_string(gts.size()) + ": cam_R_m2c is not a rotation",
                    source);
      }
      gt.pose = RigidPose(rotation, translation);
      gts.push_back(gt);
    }
  }
  return out;
}

std::map<int, std::vector<GtInfo>> parse_scene_gt_info(std::string_view text, const std::string& source) {
  const json root = parse_json(text, source);
  require_object(root, source);
  std::map<int, std::vector<GtInfo>> out;
  for (const auto& [key, list] : root.items()) {
    const int im_id = parse_key(key, source);
    if (!list.is_array()) throw Error(ErrorCode::MalformedJson, "image " + key + ": expected a list", source);
    auto& infos = out[im_id];
    for (const json& g : list) {
      require_object(g, source);
      GtInfo info;
      info.visib_fract = field<double>(g, "visib_fract", source);
      if (!(info.visib_fract >= 0.0 && info.visib_fract <= 1.0)) {
        throw Error(ErrorCode::MalformedJson, "image " + key + ": visib_fract outside [0, 1]", source);
      }
      if (const auto b = g.find("bbox_obj"); b != g.end()) info.bbox_obj = parse_box(*b, "bbox_obj", source);
      if (const auto b = g.find("bbox_visib"); b != g.end()) info.bbox_visib = parse_box(*b, "bbox_visib", source);
      infos.push_back(info);
    }
  }
  return out;
}

SceneCamera parse_scene_camera(std::string_view text, std::optional<std::pair<int, int>> default_size,
                               const std::string& source) {
  const json root = parse_json(text, source);
  require_object(root, source);
  SceneCamera out;
  for (const auto& [key, entry] : root.items()) {
    const int im_id = parse_key(key, source);
    require_object(entry, source);
    if (const auto model = entry.find("cam_model"); model != entry.end()) {
      const std::string name = model->is_string() ? model->get<std::string>() : std::string("?");
      if (name != "pinhole" && name != "PINHOLE") {
        throw Error(ErrorCode::InvalidIntrinsics, "image " + key + ": camera model '" + name + "' is not pinhole",
                    source);
      }
    }
    const auto k = numbers(entry.value("cam_K", json()), 9, "cam_K", source);
    if (k[1] != 0.0 || k[3] != 0.0 || k[6] != 0.0 || k[7] != 0.0 || k[8] != 1.0) {
      throw Error(ErrorCode::InvalidIntrinsics, "image " + key + ": cam_K must be [fx 0 cx; 0 fy cy; 0 0 1]", source);
    }
    SceneCameraEntry cam;
    cam.camera.fx = k[0];
    cam.camera.cx = k[2];
    cam.camera.fy = k[4];
    cam.camera.cy = k[5];
    if (entry.contains("width") && entry.contains("height")) {
      cam.camera.width = field<int>(entry, "width", source);
      cam.camera.height = field<int>(entry, "height", source);
    } else if (default_size) {
      cam.camera.width = default_size->first;
      cam.camera.height = default_size->second;
    } else {
      throw Error(ErrorCode::InvalidIntrinsics, "image " + key + ": image size unknown (no width/height)", source);
    }
    cam.depth_scale = entry.contains("depth_scale") ? field<double>(entry, "depth_scale", source) : 1.0;
    if (!(cam.depth_scale > 0.0)) throw Error(ErrorCode::MalformedJson, "image " + key + ": depth_scale <= 0", source);
    try {
      cam.camera.validate();
    } catch (const Error& e) {
      throw Error(e.code(), "image " + key + ": " + e.detail(), source);
    }
    out.emplace(im_id, cam);
  }
  return out;
}

std::map<int, std::vector<GtInstance>> combine_ground_truth(const std::map<int, std::vector<GtPose>>& gt,
                                                            const std::map<int, std::vector<GtInfo>>& info,
                                                            const std::string& source) {
  std::map<int, std::vector<GtInstance>> out;
  for (const auto& [im_id, poses] : gt) {
    const auto it = info.find(im_id);
    const std::size_t n_info = it == info.end() ? 0 : it->second.size();
    if (n_info != poses.size()) {
      throw Error(ErrorCode::LengthMismatch,
                  "image " + std::to_string(im_id) + ": scene_gt has " + std::to_string(poses.size()) +
                      " instances but scene_gt_info has " + std::to_string(n_info),
                  source);
    }
    auto& list = out[im_id];
    for (std::size_t i = 0; i < poses.size(); ++i) {
      GtInstance g;
      g.gt_id = static_cast<int>(i);
      g.obj_id = poses[i].obj_id;
      g.pose = poses[i].pose;
      g.visib_fract = it->second[i].visib_fract;
      g.bbox = it->second[i].bbox_obj;
      list.push_back(g);
    }
  }
  for (const auto& [im_id, infos] : info) {
    if (!gt.count(im_id) && !infos.empty()) {
      throw Error(ErrorCode::LengthMismatch, "image " + std::to_string(im_id) + " only present in scene_gt_info",
                  source);
    }
  }
  return out;
}

std::string write_scene_gt(const std::map<int, std::vector<GtPose>>& gt) {
  json root = json::object();
  for (const auto& [im_id, list] : gt) {
    json arr = json::array();
    for (const GtPose& g : list) {
      arr.push_back({{"cam_R_m2c", mat_json(g.pose.rotation())},
                     {"cam_t_m2c", vec_json(g.pose.translation())},
                     {"obj_id", g.obj_id}});
    }
    root[std::to_string(im_id)] = arr;
  }
  return root.dump(1) + "\n";
}

std::string write_scene_gt_info(const std::map<int, std::vector<GtInfo>>& info) {
  json root = json::object();
  for (const auto& [im_id, list] : info) {
    json arr = json::array();
    for (const GtInfo& g : list) {
      arr.push_back({{"visib_fract", g.visib_fract}, {"bbox_obj", box_json(g.bbox_obj)},
                     {"bbox_visib", box_json(g.bbox_visib)}});
    }
    root[std::to_string(im_id)] = arr;
  }
  return root.dump(1) + "\n";
}

std::string write_scene_camera(const SceneCamera& camera) {
  json root = json::object();
  for (const auto& [im_id, c] : camera) {
    const auto& k = c.camera;
    root[std::to_string(im_id)] = {{"cam_K", {k.fx, 0.0, k.cx, 0.0, k.fy, k.cy, 0.0, 0.0, 1.0}},
                                   {"depth_scale", c.depth_scale},
                                   {"width", k.width},
                                   {"height", k.height}};
  }
  return root.dump(1) + "\n";
}

TargetList parse_targets(std::string_view text, const std::string& source) {
  const json root = parse_json(text, source);
  if (!root.is_array()) throw Error(ErrorCode::MalformedJson, "targets must be a JSON array", source);
  TargetList targets;
  for (const json& row : root) {
    require_object(row, source);
    const ImageKey key{field<int>(row, "scene_id", source), field<int>(row, "im_id", source)};
    try {
      targets.add(key, field<int>(row, "obj_id", source), field<int>(row, "inst_count", source));
    } catch (const Error& e) {
      throw Error(e.code(), e.detail(), source);
    }
  }
  return targets;
}

std::string write_targets(const TargetList& targets) {
  json root = json::array();
  for (const auto& [image, entries] : targets.images()) {
    for (const TargetEntry& e : entries) {
      root.push_back(
          {{"scene_id", image.scene_id}, {"im_id", image.im_id}, {"obj_id", e.obj_id}, {"inst_count", e.inst_count}});
    }
  }
  return root.dump(1) + "\n";
}

GridConfig parse_grid_config(std::string_view text, const std::string& source) {
  const json root = parse_json(text, source);
  require_object(root, source);
  GridConfig grids;
  const auto list = [&](const char* key, std::vector<double>& into) {
    const auto it = root.find(key);
    if (it == root.end()) return;
    into = numbers(*it, it->is_array() ? it->size() : 0, key, source);
  };
  list("mssd_fractions", grids.mssd_fractions);
  list("mspd_multiples", grids.mspd_multiples);
  list("vsd_thresholds", grids.vsd_thresholds);
  list("vsd_tau_fractions", grids.vsd_tau_fractions);
  list("iou_thresholds", grids.iou_thresholds);
  if (root.contains("vsd_delta")) grids.vsd_delta = field<double>(root, "vsd_delta", source);
  for (const auto& [key, value] : root.items()) {
    static const char* known[] = {"mssd_fractions", "mspd_multiples", "vsd_thresholds",
                                  "vsd_tau_fractions", "iou_thresholds", "vsd_delta"};
    if (std::find(std::begin(known), std::end(known), key) == std::end(known)) {
      throw Error(ErrorCode::InvalidGrid, "unknown grid key '" + key + "'", source);
    }
  }
  try {
    grids.validate();
  } catch (const Error& e) {
    throw Error(e.code(), e.detail(), source);
  }
  return grids;
}

std::string write_grid_config(const GridConfig& grids) {
  const json root = {{"mssd_fractions", grids.mssd_fractions}, {"mspd_multiples", grids.mspd_multiples},
                     {"vsd_thresholds", grids.vsd_thresholds}, {"vsd_tau_fractions", grids.vsd_tau_fractions},
                     {"iou_thresholds", grids.iou_thresholds}, {"vsd_delta", grids.vsd_delta}};
  return root.dump(1) + "\n";
}

}  // namespace poseval
