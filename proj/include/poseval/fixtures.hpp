#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "poseval/geom.hpp"
#include "poseval/io.hpp"

namespace poseval {

// Meshes centred on their bounding box.
TriMesh cube_mesh(double edge);
// L-shaped prism: two arms of length `arm`, width `width`, thickness `depth`.
TriMesh l_shape_mesh(double arm, double width, double depth);
// Square frustum around the z axis, four-fold symmetric.
TriMesh frustum_mesh(double bottom_half, double top_half, double height);

struct FixtureObject {
  int obj_id = 0;
  std::string name;
  TriMesh mesh;
  double diameter = 0.0;
  SymmetrySpec symmetries;
  bool binary_ply = false;
};

// The three fixture objects with pinned diameters (120, 120, 100 mm).
std::vector<FixtureObject> fixture_objects();

struct FixtureOptions {
  std::uint64_t seed = 1;
  int num_images = 24;
  int scene_id = 1;
};

struct FixtureLayout {
  std::filesystem::path dataset;
  std::filesystem::path targets;
  std::filesystem::path perfect_pose;
  std::filesystem::path perturbed_pose;
  std::filesystem::path perfect_bbox;
  int num_images = 0;
  int num_instances = 0;
  int num_eligible = 0;
};

// Relative to the root passed to write_fixtures.
FixtureLayout fixture_layout(const std::filesystem::path& root);

// Perturbed submissions shift every pose by this fraction of the diameter along x.
inline constexpr double kFixturePerturbation = 0.3;

/// Writes a seeded synthetic dataset plus reference submissions under `root`.
/// Identical seeds give byte-identical trees.
FixtureLayout write_fixtures(const std::filesystem::path& root, const FixtureOptions& options = {});

}  // namespace poseval
