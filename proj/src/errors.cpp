#include "poseval/errors.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <limits>
#include <string>

#include "poseval/error.hpp"

namespace poseval {

std::string_view to_string(PoseErrorKind kind) {
  switch (kind) {
    case PoseErrorKind::MSSD: return "mssd";
    case PoseErrorKind::MSPD: return "mspd";
    case PoseErrorKind::VSD: return "vsd";
    case PoseErrorKind::IOU2D: return "iou2d";
  }
  return "unknown";
}

PoseErrorKind parse_error_kind(std::string_view name) {
  std::string lower(name);
  std::transform(lower.begin(), lower.end(), lower.begin(), [](unsigned char c) { return std::tolower(c); });
  if (lower == "mssd") return PoseErrorKind::MSSD;
  if (lower == "mspd") return PoseErrorKind::MSPD;
  if (lower == "vsd") return PoseErrorKind::VSD;
  if (lower == "iou2d" || lower == "iou") return PoseErrorKind::IOU2D;
  throw Error(ErrorCode::InvalidGrid, "unknown pose error kind '" + std::string(name) + "'");
}

double mssd(const RigidPose& est, const RigidPose& gt, std::span<const Vec3> vertices, const SymmetrySet& syms) {
  if (vertices.empty()) throw Error(ErrorCode::EmptyVertexSet, "MSSD needs at least one vertex");

  // est(x) - gt(S(x)) = (Re - Rg Rs) x + (te - Rg ts - tg)
  double best = std::numeric_limits<double>::infinity();
  for (const RigidPose& sym : syms.transforms()) {
    const Mat3 m = est.rotation() - gt.rotation() * sym.rotation();
    const Vec3 c = est.translation() - (gt.rotation() * sym.translation() + gt.translation());
    double worst = 0.0;
    for (const Vec3& x : vertices) {
      worst = std::max(worst, (m * x + c).squaredNorm());
      if (worst >= best) break;
    }
    best = std::min(best, worst);
  }
  return std::sqrt(best);
}

double mspd(const RigidPose& est, const RigidPose& gt, std::span<const Vec3> vertices, const SymmetrySet& syms,
            const CameraIntrinsics& camera) {
  if (vertices.empty()) throw Error(ErrorCode::EmptyVertexSet, "MSPD needs at least one vertex");

  const std::vector<Vec2> est_px = project(camera, transform_points(est, vertices));
  double best = std::numeric_limits<double>::infinity();
  for (const RigidPose& sym : syms.transforms()) {
    const RigidPose gt_sym = compose(gt, sym);
    double worst = 0.0;
    for (std::size_t i = 0; i < vertices.size(); ++i) {
      const Vec3 p = gt_sym.apply(vertices[i]);
      if (!(p.z() > 0.0)) {
        throw Error(ErrorCode::NonPositiveDepth, "ground-truth point with z = " + std::to_string(p.z()) + " mm");
      }
      const double du = camera.fx * p.x() / p.z() + camera.cx - est_px[i].x();
      const double dv = camera.fy * p.y() / p.z() + camera.cy - est_px[i].y();
      worst = std::max(worst, du * du + dv * dv);
    }
    best = std::min(best, worst);
  }
  return std::sqrt(best);
}

std::vector<double> vsd_from_depth(const DepthMap& est_depth, const DepthMap& gt_depth, const DepthMap& scene_depth,
                                   double delta, std::span<const double> taus) {
  const auto same_dims = [](const DepthMap& a, const DepthMap& b) {
    return a.width() == b.width() && a.height() == b.height();
  };
  if (!same_dims(est_depth, gt_depth) || !same_dims(est_depth, scene_depth)) {
    throw Error(ErrorCode::DimensionMismatch, "VSD depth maps differ in size");
  }

  const VisibilityMask gt_visible = visibility_mask(gt_depth, scene_depth, delta);
  const VisibilityMask est_own = visibility_mask(est_depth, scene_depth, delta);

  std::size_t union_count = 0;
  std::vector<std::size_t> matched(taus.size(), 0);
  for (std::size_t i = 0; i < est_depth.size(); ++i) {
    const bool v_gt = gt_visible[i];
    const bool v_est = est_own[i] || (v_gt && est_depth[i] > 0.0);
    if (!v_gt && !v_est) continue;
    ++union_count;
    if (v_gt && v_est) {
      const double diff = std::abs(est_depth[i] - gt_depth[i]);
      for (std::size_t k = 0; k < taus.size(); ++k) {
        if (diff < taus[k]) ++matched[k];
      }
    }
  }

  std::vector<double> errors(taus.size(), 1.0);
  if (union_count == 0) return errors;
  for (std::size_t k = 0; k < taus.size(); ++k) {
    errors[k] = static_cast<double>(union_count - matched[k]) / static_cast<double>(union_count);
  }
  return errors;
}

double vsd(const RigidPose& est, const RigidPose& gt, const TriMesh& mesh, const CameraIntrinsics& camera,
           const DepthMap& scene_depth, double delta, double tau) {
  if (scene_depth.width() != camera.width || scene_depth.height() != camera.height) {
    throw Error(ErrorCode::DimensionMismatch, "scene depth does not match the camera image size");
  }
  const DepthMap est_depth = rasterize_depth(mesh, est, camera);
  const DepthMap gt_depth = rasterize_depth(mesh, gt, camera);
  const double taus[] = {tau};
  return vsd_from_depth(est_depth, gt_depth, scene_depth, delta, taus).front();
}

double iou_2d(const Box2D& a, const Box2D& b) {
  const double ix = std::max(0.0, std::min(a.x + a.w, b.x + b.w) - std::max(a.x, b.x));
  const double iy = std::max(0.0, std::min(a.y + a.h, b.y + b.h) - std::max(a.y, b.y));
  const double inter = ix * iy;
  // Extents measured the same way as the intersection so equal boxes give exactly 1.
  const auto extent_area = [](const Box2D& r) { return ((r.x + r.w) - r.x) * ((r.y + r.h) - r.y); };
  const double uni = extent_area(a) + extent_area(b) - inter;
  if (!(uni > 0.0)) return 0.0;
  return inter / uni;
}

}  // namespace poseval
