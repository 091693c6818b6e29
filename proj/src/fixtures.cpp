#include "poseval/fixtures.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

#include "poseval/error.hpp"
#include "poseval/errors.hpp"
#include "poseval/render.hpp"

namespace poseval {

namespace fs = std::filesystem;

namespace {

constexpr double kDepthScale = 0.1;
constexpr double kRowTime = 0.125;
// Same-object instances must differ by more than this fraction of the
// diameter so the perturbed estimates cannot snap to a neighbour.
constexpr double kNeighbourMargin = 0.55;

// std::mt19937_64 output is fully specified; the distributions are not, so
// draws are derived from raw outputs directly.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }
  int below(int n) { return static_cast<int>(engine_() % static_cast<std::uint64_t>(n)); }

 private:
  std::mt19937_64 engine_;
};

Mat3 random_rotation(Rng& rng) {
  Vec3 axis;
  double norm = 0.0;
  do {
    axis = Vec3(2.0 * rng.uniform() - 1.0, 2.0 * rng.uniform() - 1.0, 2.0 * rng.uniform() - 1.0);
    norm = axis.norm();
  } while (norm < 0.1 || norm > 1.0);
  return axis_angle(axis / norm, 2.0 * std::numbers::pi * rng.uniform());
}

TriMesh prism(const std::vector<Vec2>& polygon, const std::vector<Triangle>& cap, double z0, double z1) {
  TriMesh mesh;
  const auto n = static_cast<std::uint32_t>(polygon.size());
  for (const Vec2& p : polygon) mesh.vertices.emplace_back(p.x(), p.y(), z0);
  for (const Vec2& p : polygon) mesh.vertices.emplace_back(p.x(), p.y(), z1);
  for (const Triangle& t : cap) {
    mesh.triangles.push_back({t[0], t[2], t[1]});
    mesh.triangles.push_back({t[0] + n, t[1] + n, t[2] + n});
  }
  for (std::uint32_t i = 0; i < n; ++i) {
    const std::uint32_t j = (i + 1) % n;
    mesh.triangles.push_back({i, j, j + n});
    mesh.triangles.push_back({i, j + n, i + n});
  }
  return mesh;
}

Box2D projected_box(const TriMesh& mesh, const RigidPose& pose, const CameraIntrinsics& camera) {
  const auto uv = project(camera, transform_points(pose, mesh.vertices));
  double x0 = uv[0].x(), x1 = uv[0].x(), y0 = uv[0].y(), y1 = uv[0].y();
  for (const Vec2& p : uv) {
    x0 = std::min(x0, p.x());
    x1 = std::max(x1, p.x());
    y0 = std::min(y0, p.y());
    y1 = std::max(y1, p.y());
  }
  x0 = std::floor(x0);
  y0 = std::floor(y0);
  return {x0, y0, std::ceil(x1) - x0, std::ceil(y1) - y0};
}

Box2D mask_box(const VisibilityMask& mask) {
  int x0 = mask.width(), y0 = mask.height(), x1 = -1, y1 = -1;
  for (int y = 0; y < mask.height(); ++y) {
    for (int x = 0; x < mask.width(); ++x) {
      if (!mask.at(x, y)) continue;
      x0 = std::min(x0, x);
      x1 = std::max(x1, x);
      y0 = std::min(y0, y);
      y1 = std::max(y1, y);
    }
  }
  if (x1 < 0) return {-1, -1, -1, -1};
  return {double(x0), double(y0), double(x1 - x0 + 1), double(y1 - y0 + 1)};
}

struct Placed {
  int obj_index = 0;
  RigidPose pose;
};

RigidPose perturbed(const RigidPose& pose, double diameter) {
  return RigidPose(pose.rotation(), pose.translation() + Vec3(kFixturePerturbation * diameter, 0.0, 0.0));
}

bool compatible(const Placed& candidate, const std::vector<Placed>& placed, const std::vector<FixtureObject>& objects,
                const std::vector<SymmetrySet>& syms) {
  const FixtureObject& a = objects[candidate.obj_index];
  for (const Placed& other : placed) {
    const FixtureObject& b = objects[other.obj_index];
    const double spacing = std::max(a.diameter, b.diameter);
    if ((candidate.pose.translation() - other.pose.translation()).norm() < spacing) return false;
    if (candidate.obj_index != other.obj_index) continue;
    const double margin = kNeighbourMargin * a.diameter;
    const auto& v = a.mesh.vertices;
    const auto& s = syms[candidate.obj_index];
    if (mssd(candidate.pose, other.pose, v, s) < margin) return false;
    if (mssd(perturbed(candidate.pose, a.diameter), other.pose, v, s) < margin) return false;
    if (mssd(perturbed(other.pose, a.diameter), candidate.pose, v, s) < margin) return false;
  }
  return true;
}

}  // namespace

TriMesh cube_mesh(double edge) {
  const double h = edge / 2.0;
  return prism({{-h, -h}, {h, -h}, {h, h}, {-h, h}}, {{0, 1, 2}, {0, 2, 3}}, -h, h);
}

TriMesh l_shape_mesh(double arm, double width, double depth) {
  const double c = arm / 2.0;
  const double w = width - c;
  return prism({{-c, -c}, {c, -c}, {c, w}, {w, w}, {w, c}, {-c, c}}, {{0, 1, 2}, {0, 2, 3}, {0, 3, 4}, {0, 4, 5}},
               -depth / 2.0, depth / 2.0);
}

TriMesh frustum_mesh(double bottom_half, double top_half, double height) {
  TriMesh mesh = prism({{-1, -1}, {1, -1}, {1, 1}, {-1, 1}}, {{0, 1, 2}, {0, 2, 3}}, -height / 2.0, height / 2.0);
  for (std::size_t i = 0; i < mesh.vertices.size(); ++i) {
    const double s = i < 4 ? bottom_half : top_half;
    mesh.vertices[i].x() *= s;
    mesh.vertices[i].y() *= s;
  }
  return mesh;
}

std::vector<FixtureObject> fixture_objects() {
  std::vector<FixtureObject> out;

  FixtureObject cube;
  cube.obj_id = 1;
  cube.name = "cube";
  cube.mesh = cube_mesh(120.0 / std::sqrt(3.0));
  cube.diameter = 120.0;
  out.push_back(std::move(cube));

  // Bounding box 80 x 80 x 40: opposite corners are exactly 120 apart.
  FixtureObject l_shape;
  l_shape.obj_id = 2;
  l_shape.name = "l_shape";
  l_shape.mesh = l_shape_mesh(80.0, 30.0, 40.0);
  l_shape.diameter = 120.0;
  l_shape.binary_ply = true;
  out.push_back(std::move(l_shape));

  // Bottom diagonal 2 * sqrt(2) * 25 * sqrt(2) = 100 dominates the slant.
  FixtureObject frustum;
  frustum.obj_id = 3;
  frustum.name = "frustum";
  frustum.mesh = frustum_mesh(25.0 * std::sqrt(2.0), 15.0, 40.0);
  frustum.diameter = 100.0;
  // Quarter turns about z, written with exact entries.
  for (int k = 1; k < 4; ++k) {
    Mat3 r = Mat3::Identity();
    const double c = k == 2 ? -1.0 : 0.0;
    const double s = k == 1 ? 1.0 : (k == 3 ? -1.0 : 0.0);
    r(0, 0) = c;
    r(0, 1) = -s;
    r(1, 0) = s;
    r(1, 1) = c;
    frustum.symmetries.discrete.emplace_back(r, Vec3::Zero());
  }
  out.push_back(std::move(frustum));

  for (const FixtureObject& o : out) {
    if (std::abs(mesh_diameter(o.mesh) - o.diameter) > 1e-9) {
      throw Error(ErrorCode::MissingDiameter, "fixture mesh diameter differs from its pinned value", o.name);
    }
  }
  return out;
}

FixtureLayout fixture_layout(const fs::path& root) {
  FixtureLayout l;
  l.dataset = root / "synth";
  l.targets = root / "targets.json";
  l.perfect_pose = root / "submissions" / "perfect_pose.csv";
  l.perturbed_pose = root / "submissions" / "perturbed_pose.csv";
  l.perfect_bbox = root / "submissions" / "perfect_bbox.csv";
  return l;
}

FixtureLayout write_fixtures(const fs::path& root, const FixtureOptions& options) {
  if (options.num_images <= 0) throw Error(ErrorCode::NonPositiveCount, "fixture image count must be positive");
  FixtureLayout layout = fixture_layout(root);
  const std::vector<FixtureObject> objects = fixture_objects();
  std::vector<SymmetrySet> syms;
  ModelsInfo info;
  for (const FixtureObject& o : objects) {
    syms.push_back(discretize_symmetries(o.symmetries, o.diameter));
    info[o.obj_id] = {o.diameter, o.symmetries};
    const fs::path ply = DatasetPaths::model_file(layout.dataset, o.obj_id);
    write_file(ply, o.binary_ply ? write_ply_binary(o.mesh) : write_ply_ascii(o.mesh));
  }
  write_file(DatasetPaths::models_info(layout.dataset), write_models_info(info));

  CameraIntrinsics camera{600.0, 600.0, 320.0, 240.0, 640, 480};
  write_file(layout.dataset / "camera.json",
             "{\n \"cx\": 320.0,\n \"cy\": 240.0,\n \"depth_scale\": " + format_double(kDepthScale) +
                 ",\n \"fx\": 600.0,\n \"fy\": 600.0,\n \"height\": 480,\n \"width\": 640\n}\n");

  Rng rng(options.seed);
  std::map<int, std::vector<GtPose>> scene_gt;
  std::map<int, std::vector<GtInfo>> scene_info;
  SceneCamera scene_camera;
  TargetList targets;
  std::vector<SubmissionRow> perfect_pose, perturbed_pose, perfect_bbox;
  const fs::path scene_dir = DatasetPaths::scene_dir(layout.dataset, options.scene_id);

  for (int im_id = 0; im_id < options.num_images; ++im_id) {
    std::vector<Placed> placed;
    std::vector<GtInfo> infos;
    std::vector<std::uint16_t> raw;
    // Redraw the image until at least one instance is a valid target.
    for (int attempt = 0;; ++attempt) {
      if (attempt == 100) throw Error(ErrorCode::InvalidSpec, "could not place a visible fixture instance");
      placed.clear();
      infos.clear();
      const int count = 1 + rng.below(5);
      for (int tries = 0; static_cast<int>(placed.size()) < count && tries < 200; ++tries) {
        Placed p;
        p.obj_index = rng.below(static_cast<int>(objects.size()));
        const double z = 650 + rng.below(500);
        const double u = 200 + rng.below(241);
        const double v = 160 + rng.below(161);
        const Vec3 t(std::round((u - camera.cx) * z / camera.fx), std::round((v - camera.cy) * z / camera.fy), z);
        p.pose = RigidPose(random_rotation(rng), t);
        if (compatible(p, placed, objects, syms)) placed.push_back(p);
      }

      std::vector<DepthMap> renders;
      std::vector<double> scene(static_cast<std::size_t>(camera.width) * camera.height, 0.0);
      for (const Placed& p : placed) {
        renders.push_back(rasterize_depth(objects[p.obj_index].mesh, p.pose, camera));
        const DepthMap& r = renders.back();
        for (std::size_t i = 0; i < scene.size(); ++i) {
          if (r[i] > 0.0 && (scene[i] == 0.0 || r[i] < scene[i])) scene[i] = r[i];
        }
      }
      raw.assign(scene.size(), 0);
      for (std::size_t i = 0; i < scene.size(); ++i) raw[i] = static_cast<std::uint16_t>(std::lround(scene[i] / kDepthScale));
      std::vector<double> loaded(raw.size());
      for (std::size_t i = 0; i < raw.size(); ++i) loaded[i] = raw[i] * kDepthScale;
      const DepthMap scene_depth(camera.width, camera.height, std::move(loaded));

      bool any_eligible = false;
      for (std::size_t k = 0; k < placed.size(); ++k) {
        const VisibilityMask visible = visibility_mask(renders[k], scene_depth, kDefaultVisibilityDelta);
        const std::size_t area = footprint(renders[k]).count();
        GtInfo gi;
        gi.visib_fract = area == 0 ? 0.0 : static_cast<double>(visible.count()) / static_cast<double>(area);
        gi.bbox_obj = projected_box(objects[placed[k].obj_index].mesh, placed[k].pose, camera);
        gi.bbox_visib = mask_box(visible);
        any_eligible = any_eligible || gi.visib_fract >= kMinVisibleFraction;
        infos.push_back(gi);
      }
      if (any_eligible) break;
    }

    write_file(DatasetPaths::depth_file(layout.dataset, options.scene_id, im_id),
               encode_depth_png({camera.width, camera.height, raw}));
    scene_camera[im_id] = {camera, kDepthScale};

    std::map<int, int> eligible_per_object;
    for (std::size_t k = 0; k < placed.size(); ++k) {
      const FixtureObject& o = objects[placed[k].obj_index];
      scene_gt[im_id].push_back({o.obj_id, placed[k].pose});
      scene_info[im_id].push_back(infos[k]);
      ++layout.num_instances;
      if (infos[k].visib_fract < kMinVisibleFraction) continue;
      ++layout.num_eligible;
      ++eligible_per_object[o.obj_id];

      SubmissionRow row;
      row.scene_id = options.scene_id;
      row.im_id = im_id;
      row.obj_id = o.obj_id;
      row.score = 1.0;
      row.time_s = kRowTime;
      row.pose = placed[k].pose;
      perfect_pose.push_back(row);
      row.pose = perturbed(placed[k].pose, o.diameter);
      perturbed_pose.push_back(row);
      row.pose.reset();
      row.bbox = infos[k].bbox_obj;
      perfect_bbox.push_back(row);
    }
    for (const auto& [obj_id, n] : eligible_per_object) targets.add({options.scene_id, im_id}, obj_id, n);
    ++layout.num_images;
  }

  write_file(scene_dir / "scene_gt.json", write_scene_gt(scene_gt));
  write_file(scene_dir / "scene_gt_info.json", write_scene_gt_info(scene_info));
  write_file(scene_dir / "scene_camera.json", write_scene_camera(scene_camera));
  write_file(layout.targets, write_targets(targets));
  write_file(layout.perfect_pose, write_submission_csv(perfect_pose, Task::Loc6D));
  write_file(layout.perturbed_pose, write_submission_csv(perturbed_pose, Task::Loc6D));
  write_file(layout.perfect_bbox, write_submission_csv(perfect_bbox, Task::Det2D));
  return layout;
}

}  // namespace poseval
