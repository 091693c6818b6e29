#include "poseval/geom.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include <Eigen/Geometry>

#include "poseval/error.hpp"

namespace poseval {

double orthonormality_error(const Mat3& rotation) {
  return (rotation.transpose() * rotation - Mat3::Identity()).cwiseAbs().maxCoeff();
}

bool is_rotation(const Mat3& rotation, double tolerance) {
  if (!rotation.allFinite()) return false;
  return orthonormality_error(rotation) <= tolerance && rotation.determinant() > 0.0;
}

RigidPose::RigidPose(const Mat3& rotation, const Vec3& translation)
    : rotation_(rotation), translation_(translation) {
  if (!is_rotation(rotation)) {
    throw Error(ErrorCode::InvalidRotation, "rotation is not orthonormal with determinant +1 (max |R^T R - I| = " +
                                                std::to_string(rotation.allFinite() ? orthonormality_error(rotation)
                                                                                    : INFINITY) +
                                                ")");
  }
  if (!translation.allFinite()) throw Error(ErrorCode::InvalidRotation, "translation is not finite");
}

RigidPose RigidPose::inverse() const {
  const Mat3 rt = rotation_.transpose();
  return RigidPose(Unchecked{}, rt, -(rt * translation_));
}

RigidPose compose(const RigidPose& outer, const RigidPose& inner) {
  return RigidPose(RigidPose::Unchecked{}, outer.rotation_ * inner.rotation_,
                   outer.rotation_ * inner.translation_ + outer.translation_);
}

void CameraIntrinsics::validate() const {
  if (!(fx > 0.0) || !(fy > 0.0) || !std::isfinite(fx) || !std::isfinite(fy)) {
    throw Error(ErrorCode::InvalidIntrinsics, "focal lengths must be positive and finite");
  }
  if (!std::isfinite(cx) || !std::isfinite(cy)) throw Error(ErrorCode::InvalidIntrinsics, "principal point not finite");
  if (width < 1 || height < 1) throw Error(ErrorCode::InvalidIntrinsics, "image size must be at least 1x1");
}

void TriMesh::validate() const {
  if (vertices.empty()) throw Error(ErrorCode::InvalidMesh, "mesh has no vertices");
  for (const Vec3& v : vertices) {
    if (!v.allFinite()) throw Error(ErrorCode::InvalidMesh, "mesh has non-finite vertex coordinates");
  }
  const auto n = vertices.size();
  for (const Triangle& tri : triangles) {
    for (auto index : tri) {
      if (index >= n) {
        throw Error(ErrorCode::InvalidMesh,
                    "triangle index " + std::to_string(index) + " >= vertex count " + std::to_string(n));
      }
    }
  }
}

namespace {

bool same_transform(const RigidPose& a, const RigidPose& b) {
  constexpr double kEps = 1e-9;
  return (a.rotation() - b.rotation()).cwiseAbs().maxCoeff() <= kEps &&
         (a.translation() - b.translation()).cwiseAbs().maxCoeff() <= kEps;
}

}  // namespace

SymmetrySet::SymmetrySet(std::vector<RigidPose> transforms) {
  transforms_.reserve(transforms.size() + 1);
  transforms_.push_back(RigidPose::identity());
  for (auto& candidate : transforms) {
    const bool seen = std::any_of(transforms_.begin(), transforms_.end(),
                                  [&](const RigidPose& kept) { return same_transform(kept, candidate); });
    if (!seen) transforms_.push_back(std::move(candidate));
  }
}

std::vector<Vec3> transform_points(const RigidPose& pose, std::span<const Vec3> points) {
  std::vector<Vec3> out;
  out.reserve(points.size());
  for (const Vec3& p : points) out.push_back(pose.apply(p));
  return out;
}

std::vector<Vec2> project(const CameraIntrinsics& camera, std::span<const Vec3> points_cam) {
  std::vector<Vec2> out;
  out.reserve(points_cam.size());
  for (const Vec3& p : points_cam) {
    if (!(p.z() > 0.0)) {
      throw Error(ErrorCode::NonPositiveDepth, "point with z = " + std::to_string(p.z()) + " mm cannot be projected");
    }
    out.emplace_back(camera.fx * p.x() / p.z() + camera.cx, camera.fy * p.y() / p.z() + camera.cy);
  }
  return out;
}

Mat3 axis_angle(const Vec3& axis, double angle) {
  return Eigen::AngleAxisd(angle, axis).toRotationMatrix();
}

int continuous_step_count(double max_step_fraction) {
  // Chord of a point at radius d/2 rotated by theta: d * sin(theta / 2) <= f * d.
  const double max_angle = 2.0 * std::asin(std::min(max_step_fraction, 1.0));
  const double steps = std::ceil(2.0 * std::numbers::pi / max_angle);
  return static_cast<int>(std::min<double>(kMaxContinuousSteps, steps));
}

SymmetrySet discretize_symmetries(const SymmetrySpec& spec, double diameter, double max_step_fraction) {
  if (!(diameter > 0.0) || !std::isfinite(diameter)) throw Error(ErrorCode::InvalidSpec, "diameter must be positive");
  if (!(max_step_fraction > 0.0 && max_step_fraction <= 1.0)) {
    throw Error(ErrorCode::InvalidSpec, "max_step_fraction must lie in (0, 1]");
  }
  for (const ContinuousSymmetry& sym : spec.continuous) {
    if (!sym.axis.allFinite() || std::abs(sym.axis.norm() - 1.0) > kAxisTolerance) {
      throw Error(ErrorCode::InvalidSpec, "continuous symmetry axis is not a unit vector");
    }
    if (!sym.offset.allFinite()) throw Error(ErrorCode::InvalidSpec, "continuous symmetry offset is not finite");
  }

  std::vector<RigidPose> transforms(spec.discrete.begin(), spec.discrete.end());
  const int steps = continuous_step_count(max_step_fraction);
  for (const ContinuousSymmetry& sym : spec.continuous) {
    for (int k = 1; k < steps; ++k) {
      const double angle = 2.0 * std::numbers::pi * k / steps;
      const Mat3 rotation = axis_angle(sym.axis, angle);
      // Rotation about the axis through `offset`: x -> R (x - o) + o.
      transforms.emplace_back(rotation, sym.offset - rotation * sym.offset);
    }
  }
  return SymmetrySet(std::move(transforms));
}

double mesh_diameter(const TriMesh& mesh) {
  double best = 0.0;
  const auto& v = mesh.vertices;
  for (std::size_t i = 0; i < v.size(); ++i) {
    for (std::size_t j = i + 1; j < v.size(); ++j) best = std::max(best, (v[i] - v[j]).squaredNorm());
  }
  return std::sqrt(best);
}

}  // namespace poseval
