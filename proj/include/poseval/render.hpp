#pragma once

#include <cstdint>
#include <vector>

#include "poseval/geom.hpp"

namespace poseval {

inline constexpr double kNearPlane = 10.0;           // mm
inline constexpr double kDefaultVisibilityDelta = 15.0;  // mm

// Row-major depth in millimeters; 0 means no surface.
class DepthMap {
 public:
  DepthMap() = default;
  DepthMap(int width, int height);
  // Throws Error{DimensionMismatch} on a size mismatch, Error{DecodeError} on
  // negative or non-finite values.
  DepthMap(int width, int height, std::vector<double> values);

  int width() const noexcept { return width_; }
  int height() const noexcept { return height_; }
  std::size_t size() const noexcept { return values_.size(); }

  double at(int x, int y) const { return values_[static_cast<std::size_t>(y) * width_ + x]; }
  double& at(int x, int y) { return values_[static_cast<std::size_t>(y) * width_ + x]; }
  double operator[](std::size_t i) const { return values_[i]; }
  const std::vector<double>& values() const noexcept { return values_; }

  bool operator==(const DepthMap&) const = default;

 private:
  int width_ = 0;
  int height_ = 0;
  std::vector<double> values_;
};

class VisibilityMask {
 public:
  VisibilityMask() = default;
  VisibilityMask(int width, int height) : width_(width), height_(height), bits_(std::size_t(width) * height, 0) {}

  int width() const noexcept { return width_; }
  int height() const noexcept { return height_; }
  std::size_t size() const noexcept { return bits_.size(); }

  bool operator[](std::size_t i) const { return bits_[i] != 0; }
  void set(std::size_t i, bool value) { bits_[i] = value ? 1 : 0; }
  bool at(int x, int y) const { return bits_[static_cast<std::size_t>(y) * width_ + x] != 0; }
  std::size_t count() const;

  bool operator==(const VisibilityMask&) const = default;

 private:
  int width_ = 0;
  int height_ = 0;
  std::vector<std::uint8_t> bits_;
};

// Z-buffered rasterization of a posed mesh. Pixel (u, v) samples the image
// point (u, v) in the coordinates produced by `project`. Ties between
// triangles keep the smaller depth; shared edges are owned by the top-left rule.
DepthMap rasterize_depth(const TriMesh& mesh, const RigidPose& pose, const CameraIntrinsics& camera);

// Pixel visible iff rendered > 0 and (scene == 0 or rendered <= scene + delta).
// Throws Error{DimensionMismatch}.
VisibilityMask visibility_mask(const DepthMap& rendered, const DepthMap& scene, double delta);

// rendered > 0.
VisibilityMask footprint(const DepthMap& rendered);

}  // namespace poseval
