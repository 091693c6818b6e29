#include <filesystem>
#include <random>

#include "poseval/eval.hpp"
#include "poseval/fixtures.hpp"
#include "poseval/io.hpp"
#include "test_util.hpp"

using namespace poseval;
namespace fs = std::filesystem;

namespace {

struct FixtureFiles {
  fs::path root;
  FixtureLayout layout;
  TargetList targets;
  Dataset dataset;

  FixtureFiles() {
    root = fs::temp_directory_path() / ("poseval_eval_" + std::to_string(std::random_device{}()));
    layout = write_fixtures(root, {3, 8, 1});
    targets = parse_targets(read_file(layout.targets));
    dataset = load_dataset(layout.dataset, targets);
  }
  ~FixtureFiles() { fs::remove_all(root); }

  std::vector<PoseEstimate> poses(const fs::path& csv, Task task = Task::Loc6D) const {
    return to_pose_estimates(parse_submission_csv(read_file(csv), task));
  }
};

const FixtureFiles& fixtures() {
  static const FixtureFiles f;
  return f;
}

const ErrorScore& error_of(const DatasetScore& d, PoseErrorKind kind) {
  for (const auto& e : d.errors) {
    if (e.kind == kind) return e;
  }
  throw std::runtime_error("missing error kind");
}

}  // namespace

TEST_CASE("fixture dataset loads") {
  const auto& f = fixtures();
  CHECK(f.layout.num_images == 8);
  CHECK(f.dataset.objects.size() == 3);
  CHECK(f.dataset.images.size() == f.targets.size());
  for (const auto& [id, obj] : f.dataset.objects) {
    CHECK(obj.diameter == doctest::Approx(mesh_diameter(obj.mesh)).epsilon(1e-9));
  }
  CHECK(f.dataset.objects.at(3).symmetries.size() == 4);
}

TEST_CASE("perfect submissions score 1") {
  const auto& f = fixtures();
  const EvalOptions opt;
  const auto perfect = f.poses(f.layout.perfect_pose);
  const DatasetScore loc = evaluate_loc6d(f.dataset, f.targets, perfect, opt);
  CHECK(loc.score == 1.0);
  CHECK(loc.num_gt == static_cast<std::size_t>(f.layout.num_eligible));
  CHECK(loc.mean_image_time_s == 0.125);
  CHECK(evaluate_det6d(f.dataset, f.targets, perfect, opt).score == 1.0);

  const auto boxes = to_detections(parse_submission_csv(read_file(f.layout.perfect_bbox), Task::Det2D));
  CHECK(evaluate_det2d(f.dataset, f.targets, boxes, opt).score == 1.0);
}

TEST_CASE("empty submission scores 0") {
  const auto& f = fixtures();
  CHECK(evaluate_loc6d(f.dataset, f.targets, std::vector<PoseEstimate>{}, {}).score == 0.0);
  CHECK(evaluate_det6d(f.dataset, f.targets, std::vector<PoseEstimate>{}, {}).score == 0.0);
  CHECK(evaluate_det2d(f.dataset, f.targets, std::vector<Detection2D>{}, {}).score == 0.0);
}

TEST_CASE("perturbed submission has a known MSSD recall") {
  const auto& f = fixtures();
  const DatasetScore loc = evaluate_loc6d(f.dataset, f.targets, f.poses(f.layout.perturbed_pose), {});
  // 0.3 d error passes the fractions 0.35 .. 0.50: 4 of 10.
  CHECK(error_of(loc, PoseErrorKind::MSSD).score == doctest::Approx(0.4).epsilon(1e-15));
  for (const auto& t : error_of(loc, PoseErrorKind::MSSD).per_threshold) {
    CHECK(t.value == (t.theta > kFixturePerturbation ? 1.0 : 0.0));
  }
}

TEST_CASE("results do not depend on the number of jobs") {
  const auto& f = fixtures();
  const auto est = f.poses(f.layout.perturbed_pose);
  EvalOptions one, many;
  many.jobs = 4;
  CHECK(evaluate_loc6d(f.dataset, f.targets, est, one) == evaluate_loc6d(f.dataset, f.targets, est, many));
  CHECK(evaluate_det6d(f.dataset, f.targets, est, one) == evaluate_det6d(f.dataset, f.targets, est, many));
}

TEST_CASE("unknown objects and untargeted images") {
  const auto& f = fixtures();
  auto est = f.poses(f.layout.perfect_pose);
  auto stray = est.front();
  stray.im_id = 99999;
  stray.obj_id = 2;
  auto with_stray = est;
  with_stray.push_back(stray);
  CHECK(evaluate_loc6d(f.dataset, f.targets, with_stray, {}).score == 1.0);

  auto bad = est;
  bad.front().obj_id = 42;
  CHECK_ERROR_CODE(check_objects(f.dataset, bad), ErrorCode::UnknownObject);
  CHECK_ERROR_CODE(evaluate_loc6d(f.dataset, f.targets, bad, {}), ErrorCode::UnknownObject);
}

TEST_CASE("duplicate estimates beyond the instance count are dropped") {
  const auto& f = fixtures();
  auto est = f.poses(f.layout.perfect_pose);
  // Low-scored copies never displace the perfect ones.
  const std::size_t n = est.size();
  for (std::size_t i = 0; i < n; ++i) {
    PoseEstimate copy = est[i];
    copy.score = 0.1;
    copy.pose = RigidPose(copy.pose.rotation(), copy.pose.translation() + Vec3(500, 0, 0));
    est.push_back(copy);
  }
  CHECK(evaluate_loc6d(f.dataset, f.targets, est, {}).score == 1.0);
}

TEST_CASE("make_report") {
  DatasetScore a, b;
  a.name = "a";
  a.score = 0.2;
  a.mean_image_time_s = 1.0;
  b.name = "b";
  b.score = 0.6;
  b.mean_image_time_s = 3.0;
  const ScoreReport r = make_report(Task::Det2D, {a, b});
  CHECK(r.overall == doctest::Approx(0.4).epsilon(1e-15));
  CHECK(r.mean_image_time_s == 2.0);
  CHECK_ERROR_CODE(make_report(Task::Loc6D, {}), ErrorCode::EmptyInput);
}

TEST_CASE("load_dataset reports missing files") {
  TargetList t;
  t.add({1, 0}, 1, 1);
  CHECK_ERROR_CODE(load_dataset(fs::temp_directory_path() / "poseval_does_not_exist", t), ErrorCode::Io);
}
