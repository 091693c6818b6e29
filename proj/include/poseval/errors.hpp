#pragma once

#include <span>
#include <string_view>
#include <vector>

#include "poseval/geom.hpp"
#include "poseval/render.hpp"

namespace poseval {

enum class PoseErrorKind { MSSD, MSPD, VSD, IOU2D };

std::string_view to_string(PoseErrorKind kind);
// Accepts lower- or upper-case names; throws Error{InvalidGrid} otherwise.
PoseErrorKind parse_error_kind(std::string_view name);

// Amodal box: top-left corner and extent in pixels.
struct Box2D {
  double x = 0.0;
  double y = 0.0;
  double w = 0.0;
  double h = 0.0;

  double area() const { return w * h; }
  bool operator==(const Box2D&) const = default;
};

/// Maximum Symmetry-Aware Surface Distance in mm:
/// min over S of max over x of |est(x) - gt(S(x))|.
/// Throws Error{EmptyVertexSet}.
double mssd(const RigidPose& est, const RigidPose& gt, std::span<const Vec3> vertices, const SymmetrySet& syms);

/// Maximum Symmetry-Aware Projection Distance in pixels, the image-plane
/// analogue of mssd at the test image's native resolution.
/// Throws Error{EmptyVertexSet} or Error{NonPositiveDepth}.
double mspd(const RigidPose& est, const RigidPose& gt, std::span<const Vec3> vertices, const SymmetrySet& syms,
            const CameraIntrinsics& camera);

/// Visible Surface Discrepancy from already rendered depth maps, evaluated for
/// every tolerance in `taus` (mm). The estimate's visibility mask is extended
/// with ground-truth-visible pixels it covers, so occluded regions that both
/// poses agree on are not penalized. An empty union of the masks scores 1.
std::vector<double> vsd_from_depth(const DepthMap& est_depth, const DepthMap& gt_depth, const DepthMap& scene_depth,
                                   double delta, std::span<const double> taus);

double vsd(const RigidPose& est, const RigidPose& gt, const TriMesh& mesh, const CameraIntrinsics& camera,
           const DepthMap& scene_depth, double delta, double tau);

double iou_2d(const Box2D& a, const Box2D& b);

}  // namespace poseval
