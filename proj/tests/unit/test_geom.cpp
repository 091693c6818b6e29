#include <cmath>
#include <numbers>

#include "oracles.hpp"
#include "poseval/geom.hpp"
#include "test_util.hpp"

using namespace poseval;

TEST_CASE("rigid pose validation") {
  CHECK_NOTHROW(RigidPose(Mat3::Identity(), Vec3(1, 2, 3)));
  Mat3 scaled = Mat3::Identity() * 1.001;
  CHECK_ERROR_CODE(RigidPose(scaled, Vec3::Zero()), ErrorCode::InvalidRotation);
  Mat3 reflection = Mat3::Identity();
  reflection(2, 2) = -1;
  CHECK_ERROR_CODE(RigidPose(reflection, Vec3::Zero()), ErrorCode::InvalidRotation);
  CHECK_ERROR_CODE(RigidPose(Mat3::Identity(), Vec3(0, NAN, 0)), ErrorCode::InvalidRotation);

  // 1e-6 is inclusive; just above is rejected
  Mat3 near = Mat3::Identity();
  near(0, 0) = 1 + 4e-7;
  CHECK(is_rotation(near));
  near(0, 0) = 1 + 6e-7;
  CHECK_FALSE(is_rotation(near));
}

TEST_CASE("transform_points examples") {
  const std::vector<Vec3> p{{1, 2, 3}};
  CHECK(transform_points(RigidPose::identity(), p)[0] == Vec3(1, 2, 3));
  const std::vector<Vec3> origin{{0, 0, 0}};
  CHECK(transform_points(RigidPose::from_translation({10, 0, 0}), origin)[0] == Vec3(10, 0, 0));
  const std::vector<Vec3> x{{1, 0, 0}};
  const Vec3 r = transform_points(RigidPose(rot_z_exact(2), Vec3::Zero()), x)[0];
  CHECK(r == Vec3(-1, 0, 0));
  const Vec3 r2 = transform_points(RigidPose(rot_z(std::numbers::pi), Vec3::Zero()), x)[0];
  CHECK((r2 - Vec3(-1, 0, 0)).norm() < 1e-15);
}

TEST_CASE("compose and inverse properties") {
  oracle::Random rng(11);
  for (int i = 0; i < 200; ++i) {
    const RigidPose a(rng.rotation(), Vec3(rng.uniform(-500, 500), rng.uniform(-500, 500), rng.uniform(-500, 500)));
    const RigidPose b(rng.rotation(), Vec3(rng.uniform(-500, 500), rng.uniform(-500, 500), rng.uniform(-500, 500)));
    std::vector<Vec3> pts;
    for (int k = 0; k < 5; ++k) pts.emplace_back(rng.uniform(-100, 100), rng.uniform(-100, 100), rng.uniform(-100, 100));
    const auto lhs = transform_points(compose(b, a), pts);
    const auto rhs = transform_points(b, transform_points(a, pts));
    const auto back = transform_points(a.inverse(), transform_points(a, pts));
    for (std::size_t k = 0; k < pts.size(); ++k) {
      CHECK((lhs[k] - rhs[k]).norm() <= 1e-9 * std::max(1.0, rhs[k].norm()));
      CHECK((back[k] - pts[k]).norm() <= 1e-9);
    }
  }
}

TEST_CASE("project examples") {
  const CameraIntrinsics k{500, 500, 320, 240, 640, 480};
  const std::vector<Vec3> axis{{0, 0, 1000}};
  CHECK(project(k, axis)[0] == Vec2(320, 240));
  const std::vector<Vec3> off{{100, 0, 1000}};
  CHECK(project(k, off)[0] == Vec2(370, 240));
  const std::vector<Vec3> behind{{0, 0, -5}};
  CHECK_ERROR_CODE(project(k, behind), ErrorCode::NonPositiveDepth);
  const std::vector<Vec3> zero{{1, 1, 0}};
  CHECK_ERROR_CODE(project(k, zero), ErrorCode::NonPositiveDepth);
}

TEST_CASE("projection halves offsets when depth doubles") {
  const CameraIntrinsics k{572.4, 573.6, 325.3, 242.0, 640, 480};
  oracle::Random rng(5);
  for (int i = 0; i < 50; ++i) {
    const Vec3 p(rng.uniform(-100, 100), rng.uniform(-100, 100), rng.uniform(300, 2000));
    const std::vector<Vec3> pts{p, Vec3(p.x(), p.y(), 2 * p.z())};
    const auto uv = project(k, pts);
    const Vec2 c(k.cx, k.cy);
    CHECK(((uv[1] - c) - 0.5 * (uv[0] - c)).norm() < 1e-9);
  }
}

TEST_CASE("intrinsics and mesh validation") {
  CHECK_NOTHROW(CameraIntrinsics{500, 500, 320, 240, 640, 480}.validate());
  CHECK_ERROR_CODE((CameraIntrinsics{0, 500, 320, 240, 640, 480}.validate()), ErrorCode::InvalidIntrinsics);
  CHECK_ERROR_CODE((CameraIntrinsics{500, 500, 320, 240, 0, 480}.validate()), ErrorCode::InvalidIntrinsics);

  TriMesh empty;
  CHECK_ERROR_CODE(empty.validate(), ErrorCode::InvalidMesh);
  TriMesh bad;
  bad.vertices = {{0, 0, 0}, {1, 0, 0}, {0, 1, 0}};
  bad.triangles = {{0, 1, 3}};
  CHECK_ERROR_CODE(bad.validate(), ErrorCode::InvalidMesh);
  bad.triangles = {{0, 1, 2}};
  CHECK_NOTHROW(bad.validate());
  bad.vertices[1].x() = NAN;
  CHECK_ERROR_CODE(bad.validate(), ErrorCode::InvalidMesh);
}

TEST_CASE("discretize_symmetries") {
  SUBCASE("no symmetries") {
    const SymmetrySet s = discretize_symmetries({}, 100.0);
    REQUIRE(s.size() == 1);
    CHECK(s.transforms()[0] == RigidPose::identity());
  }
  SUBCASE("one discrete 180 degree rotation") {
    SymmetrySpec spec;
    spec.discrete.emplace_back(rot_z_exact(2), Vec3::Zero());
    const SymmetrySet s = discretize_symmetries(spec, 100.0);
    CHECK(s.size() == 2);
    CHECK(s.transforms()[1].rotation() == rot_z_exact(2));
  }
  SUBCASE("continuous axis step count from the chord bound") {
    const double theta = 2 * std::asin(0.01);
    const int expected = std::min(64, static_cast<int>(std::ceil(2 * std::numbers::pi / theta)));
    CHECK(continuous_step_count(0.01) == expected);
    CHECK(expected == 64);
    // A coarse fraction is below the cap: 2*asin(0.5) = 60 degrees -> 6 steps.
    CHECK(continuous_step_count(0.5) == 6);
    SymmetrySpec spec;
    spec.continuous.push_back({Vec3::UnitZ(), Vec3::Zero()});
    const SymmetrySet s = discretize_symmetries(spec, 100.0, 0.5);
    REQUIRE(s.size() == 6);
    for (std::size_t i = 1; i < s.size(); ++i) {
      const Mat3& r = s.transforms()[i].rotation();
      const double angle = std::atan2(r(1, 0), r(0, 0));
      const double expected_angle = i * 2 * std::numbers::pi / 6;
      CHECK(std::abs(std::remainder(angle - expected_angle, 2 * std::numbers::pi)) < 1e-12);
    }
    // chord bound: d * sin(step / 2) <= f * d
    const double step = 2 * std::numbers::pi / 6;
    CHECK(std::sin(step / 2) <= 0.5 + 1e-12);
  }
  SUBCASE("axis through an offset keeps the offset point fixed") {
    SymmetrySpec spec;
    spec.continuous.push_back({Vec3::UnitZ(), Vec3(10, 0, 0)});
    const SymmetrySet s = discretize_symmetries(spec, 50.0, 0.3);
    for (const RigidPose& t : s.transforms()) CHECK((t.apply(Vec3(10, 0, 5)) - Vec3(10, 0, 5)).norm() < 1e-12);
  }
  SUBCASE("non-unit axis") {
    SymmetrySpec spec;
    spec.continuous.push_back({Vec3(0, 0, 2), Vec3::Zero()});
    CHECK_ERROR_CODE(discretize_symmetries(spec, 100.0), ErrorCode::InvalidSpec);
  }
  SUBCASE("bad diameter or fraction") {
    CHECK_ERROR_CODE(discretize_symmetries({}, 0.0), ErrorCode::InvalidSpec);
    CHECK_ERROR_CODE(discretize_symmetries({}, 10.0, 0.0), ErrorCode::InvalidSpec);
    CHECK_ERROR_CODE(discretize_symmetries({}, 10.0, 1.5), ErrorCode::InvalidSpec);
  }
  SUBCASE("identity present, no duplicates") {
    SymmetrySpec spec;
    spec.discrete.emplace_back(Mat3::Identity(), Vec3::Zero());
    spec.discrete.emplace_back(rot_z_exact(2), Vec3::Zero());
    spec.discrete.emplace_back(rot_z_exact(2), Vec3::Zero());
    spec.continuous.push_back({Vec3::UnitZ(), Vec3::Zero()});
    const SymmetrySet s = discretize_symmetries(spec, 100.0);
    CHECK(s.transforms()[0] == RigidPose::identity());
    for (std::size_t i = 0; i < s.size(); ++i) {
      for (std::size_t j = i + 1; j < s.size(); ++j) {
        const double dr = (s.transforms()[i].rotation() - s.transforms()[j].rotation()).cwiseAbs().maxCoeff();
        const double dt = (s.transforms()[i].translation() - s.transforms()[j].translation()).norm();
        CHECK((dr > 1e-9 || dt > 1e-9));
      }
    }
  }
}

TEST_CASE("mesh_diameter") {
  TriMesh cube;
  for (int i = 0; i < 8; ++i) cube.vertices.emplace_back(i & 1, (i >> 1) & 1, (i >> 2) & 1);
  CHECK(mesh_diameter(cube) == doctest::Approx(std::sqrt(3.0)).epsilon(1e-15));

  TriMesh one;
  one.vertices = {{4, 5, 6}};
  CHECK(mesh_diameter(one) == 0.0);

  TriMesh two;
  two.vertices = {{0, 0, 0}, {0, 0, 5}};
  CHECK(mesh_diameter(two) == 5.0);

  oracle::Random rng(3);
  TriMesh cloud;
  for (int i = 0; i < 60; ++i) cloud.vertices.emplace_back(rng.uniform(-9, 9), rng.uniform(-9, 9), rng.uniform(-9, 9));
  CHECK(mesh_diameter(cloud) == oracle::diameter(cloud.vertices));
}
