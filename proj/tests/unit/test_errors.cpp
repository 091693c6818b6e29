#include <cmath>
#include <limits>

#include "oracles.hpp"
#include "poseval/errors.hpp"
#include "poseval/fixtures.hpp"
#include "test_util.hpp"

using namespace poseval;

namespace {

std::vector<Vec3> random_vertices(oracle::Random& rng, int n, double extent) {
  std::vector<Vec3> v;
  for (int i = 0; i < n; ++i) v.emplace_back(rng.uniform(-extent, extent), rng.uniform(-extent, extent), rng.uniform(-extent, extent));
  return v;
}

SymmetrySet z_half_turn() { return SymmetrySet({RigidPose::identity(), RigidPose(rot_z_exact(2), Vec3::Zero())}); }

const std::vector<Vec3> kBox{{-10, -10, -5}, {10, -10, -5}, {10, 10, -5}, {-10, 10, -5},
                             {-10, -10, 5},  {10, -10, 5},  {10, 10, 5},  {-10, 10, 5}};

}  // namespace

TEST_CASE("mssd examples") {
  const SymmetrySet id;
  const RigidPose pose(axis_angle(Vec3(1, 2, 3).normalized(), 0.7), Vec3(5, -3, 900));
  CHECK(mssd(pose, pose, kBox, id) == 0.0);
  CHECK(mssd(RigidPose::from_translation({3, 4, 0}), RigidPose::identity(), kBox, id) == 5.0);
  CHECK(mssd(RigidPose(rot_z_exact(2), Vec3::Zero()), RigidPose::identity(), kBox, z_half_turn()) == 0.0);
  CHECK(mssd(RigidPose(rot_z_exact(2), Vec3::Zero()), RigidPose::identity(), kBox, id) > 0.0);
  CHECK_ERROR_CODE(mssd(pose, pose, std::vector<Vec3>{}, id), ErrorCode::EmptyVertexSet);
}

TEST_CASE("mssd and mspd agree with the exhaustive oracle") {
  oracle::Random rng(11);
  const CameraIntrinsics k{572.4, 573.6, 325.3, 242.0, 640, 480};
  for (int trial = 0; trial < 200; ++trial) {
    const auto verts = random_vertices(rng, 20, 50);
    std::vector<RigidPose> s{RigidPose::identity()};
    const int extra = rng.integer(0, 5);
    for (int i = 0; i < extra; ++i) s.emplace_back(rng.rotation(), Vec3(rng.uniform(-3, 3), rng.uniform(-3, 3), rng.uniform(-3, 3)));
    const SymmetrySet syms(s);
    const RigidPose gt(rng.rotation(), Vec3(rng.uniform(-100, 100), rng.uniform(-100, 100), rng.uniform(600, 1500)));
    const RigidPose est(rng.rotation(), gt.translation() + Vec3(rng.uniform(-40, 40), rng.uniform(-40, 40), rng.uniform(-40, 40)));
    const std::vector<RigidPose> all(syms.transforms().begin(), syms.transforms().end());
    CHECK(mssd(est, gt, verts, syms) == doctest::Approx(oracle::mssd(est, gt, verts, all)).epsilon(1e-9));
    CHECK(mspd(est, gt, verts, syms, k) == doctest::Approx(oracle::mspd(est, gt, verts, all, k)).epsilon(1e-9));
  }
}

TEST_CASE("mspd examples") {
  const CameraIntrinsics k{500, 500, 320, 240, 640, 480};
  const SymmetrySet id;
  const RigidPose gt = RigidPose::from_translation({0, 0, 1000});
  const std::vector<Vec3> plane{{-20, -20, 0}, {20, -20, 0}, {0, 30, 0}};
  CHECK(mspd(gt, gt, plane, id, k) == 0.0);
  CHECK(mspd(RigidPose::from_translation({10, 0, 1000}), gt, plane, id, k) == doctest::Approx(5.0).epsilon(1e-12));
  const RigidPose est = compose(gt, RigidPose(rot_z_exact(2), Vec3::Zero()));
  CHECK(mspd(est, gt, kBox, z_half_turn(), k) == 0.0);
  CHECK_ERROR_CODE(mspd(gt, RigidPose::from_translation({0, 0, -1000}), plane, id, k), ErrorCode::NonPositiveDepth);
  CHECK_ERROR_CODE(mspd(gt, gt, std::vector<Vec3>{}, id, k), ErrorCode::EmptyVertexSet);
}

TEST_CASE("symmetry composition invariance and argument symmetry") {
  oracle::Random rng(5);
  const CameraIntrinsics k{600, 600, 320, 240, 640, 480};
  const SymmetrySet syms({RigidPose::identity(), RigidPose(rot_z_exact(1), Vec3::Zero()), RigidPose(rot_z_exact(2), Vec3::Zero()),
                          RigidPose(rot_z_exact(3), Vec3::Zero())});
  for (int trial = 0; trial < 50; ++trial) {
    const auto verts = random_vertices(rng, 30, 40);
    const RigidPose gt(rng.rotation(), Vec3(rng.uniform(-50, 50), rng.uniform(-50, 50), rng.uniform(700, 1200)));
    const RigidPose est(rng.rotation(), gt.translation() + Vec3(rng.uniform(-20, 20), rng.uniform(-20, 20), rng.uniform(-20, 20)));
    for (const RigidPose& s : syms.transforms()) {
      const RigidPose gs = compose(gt, s);
      CHECK(mssd(est, gs, verts, syms) == doctest::Approx(mssd(est, gt, verts, syms)).epsilon(1e-12));
      CHECK(mspd(est, gs, verts, syms, k) == doctest::Approx(mspd(est, gt, verts, syms, k)).epsilon(1e-12));
    }
    const SymmetrySet id;
    CHECK(mssd(est, gt, verts, id) == doctest::Approx(mssd(gt, est, verts, id)).epsilon(1e-12));
  }
}

TEST_CASE("vsd_from_depth on hand-built maps") {
  const std::vector<double> taus{20.0};
  // Left half: both render 500 and agree; right half: estimate is 100 mm off.
  std::vector<double> est(16), gt(16);
  for (int i = 0; i < 16; ++i) {
    gt[i] = 500;
    est[i] = (i % 4) < 2 ? 505 : 600;
  }
  const DepthMap e(4, 4, est), g(4, 4, gt), empty(4, 4);
  const auto half = vsd_from_depth(e, g, empty, 15, taus);
  REQUIRE(half.size() == 1);
  CHECK(half[0] == 0.5);
  CHECK(half[0] == oracle::vsd(est, gt, std::vector<double>(16, 0.0), 15, 20));

  CHECK(vsd_from_depth(g, g, empty, 15, taus)[0] == 0.0);
  CHECK(vsd_from_depth(empty, empty, empty, 15, taus)[0] == 1.0);

  std::vector<double> a(16, 0.0), b(16, 0.0);
  for (int i = 0; i < 8; ++i) a[i] = 500;
  for (int i = 8; i < 16; ++i) b[i] = 500;
  CHECK(vsd_from_depth(DepthMap(4, 4, a), DepthMap(4, 4, b), empty, 15, taus)[0] == 1.0);

  CHECK_ERROR_CODE(vsd_from_depth(e, DepthMap(2, 2), empty, 15, taus), ErrorCode::DimensionMismatch);
}

TEST_CASE("occluded estimate pixels the ground truth also covers are not penalized") {
  // Scene occluder at 300 hides both renders in the first row.
  std::vector<double> scene(16, 0.0), d(16, 500.0);
  for (int i = 0; i < 4; ++i) scene[i] = 300;
  std::vector<double> est = d;
  for (int i = 0; i < 4; ++i) est[i] = 520;
  const DepthMap e(4, 4, est), g(4, 4, d), s(4, 4, scene);
  const std::vector<double> taus{10.0};
  CHECK(vsd_from_depth(e, g, s, 15, taus)[0] == oracle::vsd(est, d, scene, 15, 10));
  CHECK(vsd_from_depth(e, g, s, 15, taus)[0] == 0.0);
}

TEST_CASE("vsd is in [0,1] and non-increasing in tau") {
  oracle::Random rng(99);
  std::vector<double> taus;
  for (int i = 1; i <= 20; ++i) taus.push_back(i * 5.0);
  for (int trial = 0; trial < 100; ++trial) {
    std::vector<double> e(64), g(64), s(64);
    for (int i = 0; i < 64; ++i) {
      e[i] = rng.integer(0, 3) == 0 ? 0 : rng.uniform(400, 500);
      g[i] = rng.integer(0, 3) == 0 ? 0 : rng.uniform(400, 500);
      s[i] = rng.integer(0, 2) == 0 ? 0 : rng.uniform(350, 520);
    }
    const auto v = vsd_from_depth(DepthMap(8, 8, e), DepthMap(8, 8, g), DepthMap(8, 8, s), 15, taus);
    for (std::size_t i = 0; i < v.size(); ++i) {
      CHECK(v[i] >= 0.0);
      CHECK(v[i] <= 1.0);
      CHECK(v[i] == oracle::vsd(e, g, s, 15, taus[i]));
      if (i > 0) CHECK(v[i] <= v[i - 1]);
    }
  }
}

TEST_CASE("vsd on rendered poses") {
  const TriMesh cube = cube_mesh(60);
  const CameraIntrinsics k{500, 500, 80, 60, 160, 120};
  const DepthMap scene(160, 120);
  const RigidPose gt(axis_angle(Vec3(1, 1, 1).normalized(), 0.4), Vec3(0, 0, 600));
  CHECK(vsd(gt, gt, cube, k, scene, 15, 20) == 0.0);
  const RigidPose far_left = RigidPose(gt.rotation(), Vec3(-120, 0, 600));
  const RigidPose far_right = RigidPose(gt.rotation(), Vec3(120, 0, 600));
  CHECK(vsd(far_left, far_right, cube, k, scene, 15, 20) == 1.0);
  CHECK_ERROR_CODE(vsd(gt, gt, cube, k, DepthMap(10, 10), 15, 20), ErrorCode::DimensionMismatch);
}

TEST_CASE("iou_2d") {
  const Box2D a{0, 0, 10, 10};
  CHECK(iou_2d(a, a) == 1.0);
  CHECK(iou_2d(a, {5, 0, 10, 10}) == doctest::Approx(50.0 / 150.0).epsilon(1e-15));
  CHECK(iou_2d(a, {20, 20, 5, 5}) == 0.0);
  CHECK(iou_2d(a, {10, 0, 10, 10}) == 0.0);
  CHECK(iou_2d({3, 3, 0, 0}, {3, 3, 0, 0}) == 0.0);

  oracle::Random rng(3);
  for (int i = 0; i < 500; ++i) {
    const Box2D p{rng.uniform(0, 100), rng.uniform(0, 100), rng.uniform(0, 50), rng.uniform(0, 50)};
    const Box2D q{rng.uniform(0, 100), rng.uniform(0, 100), rng.uniform(0, 50), rng.uniform(0, 50)};
    CHECK(iou_2d(p, q) == iou_2d(q, p));
    CHECK(iou_2d(p, q) >= 0.0);
    CHECK(iou_2d(p, q) <= 1.0);
    if (!(p == q)) CHECK(iou_2d(p, q) < 1.0);
  }
}

TEST_CASE("error kind names") {
  CHECK(parse_error_kind("mssd") == PoseErrorKind::MSSD);
  CHECK(parse_error_kind("VSD") == PoseErrorKind::VSD);
  CHECK(to_string(PoseErrorKind::MSPD) == "mspd");
  CHECK_ERROR_CODE(parse_error_kind("add"), ErrorCode::InvalidGrid);
}
