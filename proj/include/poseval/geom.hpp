#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <vector>

#include <Eigen/Core>

namespace poseval {

using Vec2 = Eigen::Vector2d;
using Vec3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;

inline constexpr double kRotationTolerance = 1e-6;
inline constexpr double kAxisTolerance = 1e-6;

// Largest absolute entry of R^T R - I.
double orthonormality_error(const Mat3& rotation);

bool is_rotation(const Mat3& rotation, double tolerance = kRotationTolerance);

// Rigid transform x -> R x + t mapping model space (mm) to camera space (mm).
class RigidPose {
 public:
  RigidPose() : rotation_(Mat3::Identity()), translation_(Vec3::Zero()) {}

  // Throws Error{InvalidRotation} when the rotation is not orthonormal with
  // det +1 or the translation is not finite. Inputs are never re-orthonormalized.
  RigidPose(const Mat3& rotation, const Vec3& translation);

  static RigidPose identity() { return {}; }
  static RigidPose from_translation(const Vec3& t) { return RigidPose(Mat3::Identity(), t); }

  const Mat3& rotation() const noexcept { return rotation_; }
  const Vec3& translation() const noexcept { return translation_; }

  Vec3 apply(const Vec3& point) const { return rotation_ * point + translation_; }

  RigidPose inverse() const;

  bool operator==(const RigidPose& other) const {
    return rotation_ == other.rotation_ && translation_ == other.translation_;
  }

 private:
  struct Unchecked {};
  RigidPose(Unchecked, const Mat3& rotation, const Vec3& translation)
      : rotation_(rotation), translation_(translation) {}
  friend RigidPose compose(const RigidPose& outer, const RigidPose& inner);

  Mat3 rotation_;
  Vec3 translation_;
};

// outer ∘ inner: inner is applied first.
RigidPose compose(const RigidPose& outer, const RigidPose& inner);

struct CameraIntrinsics {
  double fx = 0.0;
  double fy = 0.0;
  double cx = 0.0;
  double cy = 0.0;
  int width = 0;
  int height = 0;

  // Throws Error{InvalidIntrinsics}.
  void validate() const;

  bool operator==(const CameraIntrinsics&) const = default;
};

using Triangle = std::array<std::uint32_t, 3>;

struct TriMesh {
  std::vector<Vec3> vertices;
  std::vector<Triangle> triangles;

  // Throws Error{InvalidMesh}.
  void validate() const;
};

struct ContinuousSymmetry {
  Vec3 axis = Vec3::UnitZ();
  Vec3 offset = Vec3::Zero();
};

// Raw symmetry annotation of an object.
struct SymmetrySpec {
  std::vector<RigidPose> discrete;
  std::vector<ContinuousSymmetry> continuous;
};

// Discretized symmetry transforms. The first element is always the identity.
class SymmetrySet {
 public:
  SymmetrySet() : transforms_{RigidPose::identity()} {}

  // Prepends the identity if missing and drops duplicates, keeping first occurrences.
  explicit SymmetrySet(std::vector<RigidPose> transforms);

  std::span<const RigidPose> transforms() const noexcept { return transforms_; }
  std::size_t size() const noexcept { return transforms_.size(); }

 private:
  std::vector<RigidPose> transforms_;
};

inline constexpr double kDefaultMaxStepFraction = 0.01;
inline constexpr int kMaxContinuousSteps = 64;

std::vector<Vec3> transform_points(const RigidPose& pose, std::span<const Vec3> points);

// Pinhole projection. Throws Error{NonPositiveDepth} if any z <= 0.
std::vector<Vec2> project(const CameraIntrinsics& camera, std::span<const Vec3> points_cam);

// Number of samples (including angle 0) used for one continuous axis.
int continuous_step_count(double max_step_fraction);

// identity, then discrete transforms in input order, then per continuous axis
// rotations k * 2pi / n for k = 1..n-1. Throws Error{InvalidSpec}.
SymmetrySet discretize_symmetries(const SymmetrySpec& spec, double diameter,
                                  double max_step_fraction = kDefaultMaxStepFraction);

double mesh_diameter(const TriMesh& mesh);

// Rotation by `angle` radians about a unit axis.
Mat3 axis_angle(const Vec3& axis, double angle);

}  // namespace poseval
