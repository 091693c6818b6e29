#include "poseval/render.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>

#include "poseval/error.hpp"

namespace poseval {

DepthMap::DepthMap(int width, int height)
    : width_(width), height_(height), values_(static_cast<std::size_t>(width) * height, 0.0) {}

DepthMap::DepthMap(int width, int height, std::vector<double> values)
    : width_(width), height_(height), values_(std::move(values)) {
  if (width < 0 || height < 0 || values_.size() != static_cast<std::size_t>(width) * height) {
    throw Error(ErrorCode::DimensionMismatch, "depth values do not match width * height");
  }
  for (double v : values_) {
    if (!std::isfinite(v) || v < 0.0) throw Error(ErrorCode::DecodeError, "depth values must be finite and >= 0");
  }
}

std::size_t VisibilityMask::count() const {
  return static_cast<std::size_t>(std::count(bits_.begin(), bits_.end(), std::uint8_t{1}));
}

namespace {

using Wide = __int128;

// 8 fractional bits of sub-pixel precision.
constexpr double kSubpixel = 256.0;
constexpr double kCoordLimit = 1e15;

// Snapped coordinates decide coverage; the unsnapped ones interpolate depth.
struct ScreenVertex {
  std::int64_t x;
  std::int64_t y;
  double u;
  double v;
  double z;
};

double edge_exact(const ScreenVertex& a, const ScreenVertex& b, double px, double py) {
  return (b.u - a.u) * (py - a.v) - (b.v - a.v) * (px - a.u);
}

Wide edge(const ScreenVertex& a, const ScreenVertex& b, std::int64_t px, std::int64_t py) {
  return Wide(b.x - a.x) * Wide(py - a.y) - Wide(b.y - a.y) * Wide(px - a.x);
}

// Inside is the positive side of every edge once the triangle is oriented
// with positive area; with y pointing down, "top" edges run in +x and "left"
// edges run in -y.
bool is_top_left(const ScreenVertex& a, const ScreenVertex& b) {
  const std::int64_t dx = b.x - a.x;
  const std::int64_t dy = b.y - a.y;
  return dy < 0 || (dy == 0 && dx > 0);
}

bool covers(Wide w, bool top_left) { return w > 0 || (w == 0 && top_left); }

ScreenVertex to_screen(const CameraIntrinsics& camera, const Vec3& p) {
  const double u = std::clamp(camera.fx * p.x() / p.z() + camera.cx, -kCoordLimit, kCoordLimit);
  const double v = std::clamp(camera.fy * p.y() / p.z() + camera.cy, -kCoordLimit, kCoordLimit);
  return {std::llround(u * kSubpixel), std::llround(v * kSubpixel), u, v, p.z()};
}

void raster_triangle(std::array<ScreenVertex, 3> tri, DepthMap& depth) {
  Wide area = edge(tri[0], tri[1], tri[2].x, tri[2].y);
  if (area == 0) return;
  if (area < 0) {
    std::swap(tri[1], tri[2]);
    area = -area;
  }
  const auto& [v0, v1, v2] = tri;

  const std::int64_t scale = static_cast<std::int64_t>(kSubpixel);
  const auto floor_div = [scale](std::int64_t a) { return a >= 0 ? a / scale : -((-a + scale - 1) / scale); };
  const auto ceil_div = [&](std::int64_t a) { return -floor_div(-a); };

  const std::int64_t min_x = std::max<std::int64_t>(0, ceil_div(std::min({v0.x, v1.x, v2.x})));
  const std::int64_t max_x = std::min<std::int64_t>(depth.width() - 1, floor_div(std::max({v0.x, v1.x, v2.x})));
  const std::int64_t min_y = std::max<std::int64_t>(0, ceil_div(std::min({v0.y, v1.y, v2.y})));
  const std::int64_t max_y = std::min<std::int64_t>(depth.height() - 1, floor_div(std::max({v0.y, v1.y, v2.y})));
  if (min_x > max_x || min_y > max_y) return;

  const bool tl0 = is_top_left(v1, v2);
  const bool tl1 = is_top_left(v2, v0);
  const bool tl2 = is_top_left(v0, v1);
  const bool flat = v0.z == v1.z && v1.z == v2.z;
  const double exact_area = edge_exact(v0, v1, v2.u, v2.v);
  const double iz0 = 1.0 / v0.z;
  const double iz1 = 1.0 / v1.z;
  const double iz2 = 1.0 / v2.z;

  for (std::int64_t y = min_y; y <= max_y; ++y) {
    const std::int64_t py = y * scale;
    for (std::int64_t x = min_x; x <= max_x; ++x) {
      const std::int64_t px = x * scale;
      const Wide w0 = edge(v1, v2, px, py);
      const Wide w1 = edge(v2, v0, px, py);
      const Wide w2 = edge(v0, v1, px, py);
      if (!covers(w0, tl0) || !covers(w1, tl1) || !covers(w2, tl2)) continue;

      double z = v0.z;
      if (!flat) {
        const double fx = static_cast<double>(x);
        const double fy = static_cast<double>(y);
        double b0 = edge_exact(v1, v2, fx, fy);
        double b1 = edge_exact(v2, v0, fx, fy);
        double b2 = edge_exact(v0, v1, fx, fy);
        if (exact_area != 0.0) {
          b0 /= exact_area;
          b1 /= exact_area;
          b2 /= exact_area;
        } else {
          b0 = b1 = b2 = 1.0 / 3.0;
        }
        const double inv = b0 * iz0 + b1 * iz1 + b2 * iz2;
        z = std::clamp(1.0 / inv, std::min({v0.z, v1.z, v2.z}), std::max({v0.z, v1.z, v2.z}));
      }
      double& current = depth.at(static_cast<int>(x), static_cast<int>(y));
      if (current == 0.0 || z < current) current = z;
    }
  }
}

// Sutherland-Hodgman against z >= near. Returns the vertex count (0, 3 or 4).
int clip_near(const std::array<Vec3, 3>& in, std::array<Vec3, 4>& out) {
  int n = 0;
  for (int i = 0; i < 3; ++i) {
    const Vec3& a = in[i];
    const Vec3& b = in[(i + 1) % 3];
    const bool a_in = a.z() >= kNearPlane;
    const bool b_in = b.z() >= kNearPlane;
    if (a_in) out[n++] = a;
    if (a_in != b_in) {
      const double s = (kNearPlane - a.z()) / (b.z() - a.z());
      Vec3 hit = a + s * (b - a);
      hit.z() = kNearPlane;
      out[n++] = hit;
    }
  }
  return n;
}

}  // namespace

DepthMap rasterize_depth(const TriMesh& mesh, const RigidPose& pose, const CameraIntrinsics& camera) {
  camera.validate();
  DepthMap depth(camera.width, camera.height);
  const std::vector<Vec3> cam = transform_points(pose, mesh.vertices);

  std::array<Vec3, 4> clipped;
  for (const Triangle& t : mesh.triangles) {
    const std::array<Vec3, 3> tri{cam[t[0]], cam[t[1]], cam[t[2]]};
    if (tri[0].z() <= kNearPlane && tri[1].z() <= kNearPlane && tri[2].z() <= kNearPlane) continue;
    const int n = clip_near(tri, clipped);
    for (int k = 1; k + 1 < n; ++k) {
      raster_triangle({to_screen(camera, clipped[0]), to_screen(camera, clipped[k]), to_screen(camera, clipped[k + 1])},
                      depth);
    }
  }
  return depth;
}

VisibilityMask visibility_mask(const DepthMap& rendered, const DepthMap& scene, double delta) {
  if (rendered.width() != scene.width() || rendered.height() != scene.height()) {
    throw Error(ErrorCode::DimensionMismatch, "rendered and scene depth maps differ in size");
  }
  VisibilityMask mask(rendered.width(), rendered.height());
  for (std::size_t i = 0; i < rendered.size(); ++i) {
    const double r = rendered[i];
    const double s = scene[i];
    mask.set(i, r > 0.0 && (s == 0.0 || r <= s + delta));
  }
  return mask;
}

VisibilityMask footprint(const DepthMap& rendered) {
  VisibilityMask mask(rendered.width(), rendered.height());
  for (std::size_t i = 0; i < rendered.size(); ++i) mask.set(i, rendered[i] > 0.0);
  return mask;
}

}  // namespace poseval
