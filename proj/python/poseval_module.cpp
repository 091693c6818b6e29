#include <pybind11/eigen.h>
#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include "poseval/error.hpp"
#include "poseval/errors.hpp"
#include "poseval/eval.hpp"
#include "poseval/fixtures.hpp"
#include "poseval/io.hpp"
#include "poseval/metrics.hpp"
#include "poseval/render.hpp"

namespace py = pybind11;
using namespace poseval;

namespace {

using Points = Eigen::Matrix<double, Eigen::Dynamic, 3, Eigen::RowMajor>;
using Depth = py::array_t<double, py::array::c_style | py::array::forcecast>;

std::vector<Vec3> to_points(const Points& m) {
  std::vector<Vec3> out;
  out.reserve(static_cast<std::size_t>(m.rows()));
  for (Eigen::Index i = 0; i < m.rows(); ++i) out.emplace_back(m.row(i).transpose());
  return out;
}

SymmetrySet to_symmetries(const std::vector<std::pair<Mat3, Vec3>>& syms) {
  std::vector<RigidPose> poses{RigidPose::identity()};
  for (const auto& [r, t] : syms) poses.emplace_back(r, t);
  return SymmetrySet(std::move(poses));
}

CameraIntrinsics to_camera(const std::tuple<double, double, double, double, int, int>& k) {
  const auto& [fx, fy, cx, cy, w, h] = k;
  return {fx, fy, cx, cy, w, h};
}

DepthMap to_depth(const Depth& a) {
  if (a.ndim() != 2) throw Error(ErrorCode::DimensionMismatch, "depth arrays must be 2-D");
  return DepthMap(static_cast<int>(a.shape(1)), static_cast<int>(a.shape(0)),
                  std::vector<double>(a.data(), a.data() + a.size()));
}

Box2D to_box(const std::array<double, 4>& b) { return {b[0], b[1], b[2], b[3]}; }

}  // namespace

PYBIND11_MODULE(_poseval, m) {
  m.doc() = "Pose estimation benchmark evaluation";

  static py::exception<Error> error_type(m, "PosevalError", PyExc_ValueError);
  py::register_exception_translator([](std::exception_ptr p) {
    try {
      if (p) std::rethrow_exception(p);
    } catch (const Error& e) {
      py::object err = error_type;
      py::object instance = err(e.what());
      instance.attr("code") = std::string(to_string(e.code()));
      instance.attr("file") = e.file();
      instance.attr("line") = e.line();
      PyErr_SetObject(err.ptr(), instance.ptr());
    }
  });

  m.def(
      "mssd",
      [](const Mat3& r_est, const Vec3& t_est, const Mat3& r_gt, const Vec3& t_gt, const Points& vertices,
         const std::vector<std::pair<Mat3, Vec3>>& symmetries) {
        return mssd(RigidPose(r_est, t_est), RigidPose(r_gt, t_gt), to_points(vertices), to_symmetries(symmetries));
      },
      py::arg("R_est"), py::arg("t_est"), py::arg("R_gt"), py::arg("t_gt"), py::arg("vertices"),
      py::arg("symmetries") = std::vector<std::pair<Mat3, Vec3>>{});

  m.def(
      "mspd",
      [](const Mat3& r_est, const Vec3& t_est, const Mat3& r_gt, const Vec3& t_gt, const Points& vertices,
         const std::tuple<double, double, double, double, int, int>& camera,
         const std::vector<std::pair<Mat3, Vec3>>& symmetries) {
        return mspd(RigidPose(r_est, t_est), RigidPose(r_gt, t_gt), to_points(vertices), to_symmetries(symmetries),
                    to_camera(camera));
      },
      py::arg("R_est"), py::arg("t_est"), py::arg("R_gt"), py::arg("t_gt"), py::arg("vertices"), py::arg("camera"),
      py::arg("symmetries") = std::vector<std::pair<Mat3, Vec3>>{});

  m.def(
      "vsd",
      [](const Depth& est, const Depth& gt, const Depth& scene, double delta, const std::vector<double>& taus) {
        return vsd_from_depth(to_depth(est), to_depth(gt), to_depth(scene), delta, taus);
      },
      py::arg("est_depth"), py::arg("gt_depth"), py::arg("scene_depth"), py::arg("delta"), py::arg("taus"),
      "VSD for each tau from rendered depth maps in mm (0 = no surface).");

  m.def(
      "render_depth",
      [](const Points& vertices, const std::vector<std::array<std::uint32_t, 3>>& triangles, const Mat3& r,
         const Vec3& t, const std::tuple<double, double, double, double, int, int>& camera) {
        TriMesh mesh{to_points(vertices), triangles};
        mesh.validate();
        const DepthMap d = rasterize_depth(mesh, RigidPose(r, t), to_camera(camera));
        Depth out({d.height(), d.width()});
        std::copy(d.values().begin(), d.values().end(), out.mutable_data());
        return out;
      },
      py::arg("vertices"), py::arg("triangles"), py::arg("R"), py::arg("t"), py::arg("camera"));

  m.def(
      "iou_2d", [](const std::array<double, 4>& a, const std::array<double, 4>& b) { return iou_2d(to_box(a), to_box(b)); },
      py::arg("a"), py::arg("b"), "IoU of two (x, y, w, h) boxes.");

  m.def("ar_overall", [](const std::vector<double>& v) { return ar_overall(v); }, py::arg("per_dataset"));
  m.def("ap_overall", [](const std::vector<double>& v) { return ap_overall(v); }, py::arg("per_dataset"));
  m.def("ar_dataset", &ar_dataset, py::arg("ar_vsd"), py::arg("ar_mssd"), py::arg("ar_mspd"));
  m.def("ap_dataset_6d", &ap_dataset_6d, py::arg("ap_mssd"), py::arg("ap_mspd"));
  m.def(
      "ap_from_curve",
      [](const std::vector<std::pair<double, double>>& points) {
        PRCurve c;
        for (const auto& [r, p] : points) c.points.push_back({r, p});
        return ap_from_curve(c);
      },
      py::arg("points"), "101-point AP of (recall, precision) points.");
  m.def("percent_1dp", &percent_1dp, py::arg("fraction"));

  m.def(
      "write_fixtures",
      [](const std::filesystem::path& root, std::uint64_t seed, int num_images) {
        const FixtureLayout l = write_fixtures(root, {seed, num_images, 1});
        py::dict out;
        out["dataset"] = l.dataset;
        out["targets"] = l.targets;
        out["perfect_pose"] = l.perfect_pose;
        out["perturbed_pose"] = l.perturbed_pose;
        out["perfect_bbox"] = l.perfect_bbox;
        out["num_images"] = l.num_images;
        out["num_instances"] = l.num_instances;
        out["num_eligible"] = l.num_eligible;
        return out;
      },
      py::arg("root"), py::arg("seed") = 1, py::arg("num_images") = 24);

  m.def(
      "evaluate_json",
      [](const std::string& task, const std::vector<std::tuple<std::filesystem::path, std::filesystem::path,
                                                               std::filesystem::path>>& inputs,
         int jobs, const std::string& grid_json) {
        EvalOptions options;
        options.jobs = jobs;
        if (!grid_json.empty()) options.grids = parse_grid_config(grid_json);
        std::vector<EvalInput> in;
        for (const auto& [d, t, s] : inputs) in.push_back({d, t, s});
        ScoreReport report;
        {
          py::gil_scoped_release release;
          report = evaluate_files(parse_task(task), in, options);
        }
        return write_report(report, ReportFormat::Json);
      },
      py::arg("task"), py::arg("inputs"), py::arg("jobs") = 1, py::arg("grid_json") = "");

  m.def(
      "report_csv", [](const std::string& json) { return write_report(parse_report(json), ReportFormat::Csv); },
      py::arg("report_json"));
}
