// pose_eval: evaluate, validate and report on pose-estimation submissions.

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "poseval/error.hpp"
#include "poseval/eval.hpp"
#include "poseval/fixtures.hpp"
#include "poseval/io.hpp"
#include "poseval/svg.hpp"

namespace fs = std::filesystem;
using namespace poseval;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitIo = 1;
constexpr int kExitInvalid = 2;

int default_jobs() {
  const char* env = std::getenv("POSE_EVAL_JOBS");
  if (!env || !*env) return 1;
  char* end = nullptr;
  const long n = std::strtol(env, &end, 10);
  if (*end != '\0' || n < 1 || n > 1024) {
    throw Error(ErrorCode::NonPositiveCount, std::string("POSE_EVAL_JOBS must be a positive integer, got '") + env + "'");
  }
  return static_cast<int>(n);
}

std::vector<SubmissionRow> read_submission(const fs::path& path, Task task) {
  return parse_submission_csv(read_file(path), task, path.string());
}

std::string breakdown_line(const DatasetScore& d) {
  std::string line = d.name + ": " + percent_1dp(d.score);
  for (const ErrorScore& e : d.errors) line += "  " + std::string(to_string(e.kind)) + " " + percent_1dp(e.score);
  return line;
}

// --- eval ------------------------------------------------------------------

struct EvalArgs {
  std::string task;
  std::vector<std::string> datasets;
  std::vector<std::string> targets;
  std::vector<std::string> submissions;
  std::string out;
  int jobs = 1;
  std::string grid;
  std::vector<std::string> formats{"json"};
};

int run_eval(const EvalArgs& args) {
  const Task task = parse_task(args.task);
  if (args.datasets.size() != args.targets.size() || args.datasets.size() != args.submissions.size()) {
    throw Error(ErrorCode::LengthMismatch, "--dataset, --targets and --submission must be given the same number of times");
  }
  if (args.jobs < 1) throw Error(ErrorCode::NonPositiveCount, "--jobs must be positive");

  EvalOptions options;
  options.jobs = args.jobs;
  if (!args.grid.empty()) options.grids = parse_grid_config(read_file(args.grid), args.grid);
  options.grids.validate();

  std::vector<ReportFormat> formats;
  for (const std::string& f : args.formats) {
    if (f == "json") {
      formats.push_back(ReportFormat::Json);
    } else if (f == "csv") {
      formats.push_back(ReportFormat::Csv);
    } else {
      throw Error(ErrorCode::InvalidSpec, "unknown report format '" + f + "'");
    }
  }

  std::vector<EvalInput> inputs;
  for (std::size_t i = 0; i < args.datasets.size(); ++i) inputs.push_back({args.datasets[i], args.targets[i], args.submissions[i]});
  const ScoreReport report = evaluate_files(task, inputs, options);

  const fs::path out(args.out);
  for (ReportFormat f : formats) {
    write_file(out / (f == ReportFormat::Json ? "report.json" : "report.csv"), write_report(report, f));
  }

  std::cout << (task == Task::Loc6D ? "AR" : "AP") << " (" << to_string(task) << "): " << percent_1dp(report.overall)
            << "\n";
  for (const DatasetScore& d : report.datasets) std::cout << "  " << breakdown_line(d) << "\n";
  std::cout << "mean image time: " << format_double(report.mean_image_time_s) << " s\n";
  return kExitOk;
}

// --- validate --------------------------------------------------------------

struct ValidateArgs {
  std::string task;
  std::string submission;
  std::string targets;
  std::string dataset;
};

int run_validate(const ValidateArgs& args) {
  const Task task = parse_task(args.task);
  const auto rows = read_submission(args.submission, task);
  std::optional<TargetList> targets;
  if (!args.targets.empty()) targets = parse_targets(read_file(args.targets), args.targets);
  std::optional<ModelsInfo> models;
  if (!args.dataset.empty()) {
    const fs::path info = DatasetPaths::models_info(args.dataset);
    models = parse_models_info(read_file(info), info.string());
  }

  std::size_t errors = 0;
  std::size_t warnings = 0;
  const auto report = [&](bool error, std::size_t line, const std::string& msg) {
    std::cout << args.submission;
    if (line) std::cout << ":" << line;
    std::cout << ": " << (error ? "error: " : "warning: ") << msg << "\n";
    ++(error ? errors : warnings);
  };

  std::map<ImageKey, std::size_t> per_image;
  std::map<std::string, std::size_t> seen;
  for (const SubmissionRow& r : rows) {
    ++per_image[r.image()];
    if (models && !models->count(r.obj_id)) {
      report(true, r.line, "obj_id " + std::to_string(r.obj_id) + " is not in models_info");
    }
    if (targets && !targets->contains(r.image())) {
      report(false, r.line,
             "image " + std::to_string(r.scene_id) + "/" + std::to_string(r.im_id) + " is not a target and is ignored");
    }
    std::string key = std::to_string(r.scene_id) + "," + std::to_string(r.im_id) + "," + std::to_string(r.obj_id);
    if (r.pose) {
      const Mat3& m = r.pose->rotation();
      for (int i = 0; i < 9; ++i) key += "," + format_double(m(i / 3, i % 3));
      for (int i = 0; i < 3; ++i) key += "," + format_double(r.pose->translation()[i]);
    }
    if (r.bbox) key += "," + format_double(r.bbox->x) + "," + format_double(r.bbox->y) + "," +
                       format_double(r.bbox->w) + "," + format_double(r.bbox->h);
    if (const auto [it, inserted] = seen.emplace(key, r.line); !inserted) {
      report(false, r.line, "duplicate of line " + std::to_string(it->second));
    }
  }
  for (const auto& [image, n] : per_image) {
    if (n > kMaxDetectionsPerImage) {
      report(false, 0,
             "image " + std::to_string(image.scene_id) + "/" + std::to_string(image.im_id) + " has " +
                 std::to_string(n) + " rows; only the " + std::to_string(kMaxDetectionsPerImage) +
                 " most confident per image are evaluated");
    }
  }
  if (targets) {
    for (const auto& [image, entries] : targets->images()) {
      if (!per_image.count(image)) {
        report(false, 0,
               "target image " + std::to_string(image.scene_id) + "/" + std::to_string(image.im_id) +
                   " has no predictions");
      }
    }
  }
  std::cout << rows.size() << " rows, " << errors << " errors, " << warnings << " warnings\n";
  return errors + warnings == 0 ? kExitOk : kExitInvalid;
}

// --- fixtures --------------------------------------------------------------

int run_fixtures(std::uint64_t seed, const std::string& out, int images) {
  FixtureOptions options;
  options.seed = seed;
  options.num_images = images;
  const FixtureLayout layout = write_fixtures(out, options);
  std::cout << "dataset:    " << layout.dataset.string() << "\n"
            << "targets:    " << layout.targets.string() << "\n"
            << "perfect:    " << layout.perfect_pose.string() << ", " << layout.perfect_bbox.string() << "\n"
            << "perturbed:  " << layout.perturbed_pose.string() << "\n"
            << layout.num_images << " images, " << layout.num_instances << " instances, " << layout.num_eligible
            << " targets\n";
  return kExitOk;
}

// --- report ----------------------------------------------------------------

std::string plot_name(const DatasetScore& d, const ErrorScore& e, const CurveRecord& c) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "_obj%06d_th%.4g.svg", c.obj_id, c.theta);
  std::string name = d.name + "_" + std::string(to_string(e.kind)) + buf;
  for (char& ch : name) {
    if (ch == '/' || ch == '\\' || ch == ' ') ch = '_';
  }
  return name;
}

int run_report(const std::string& path, bool plots, const std::string& plot_dir) {
  if (!fs::exists(path)) throw Error(ErrorCode::MissingReport, "report not found", path);
  const ScoreReport report = parse_report(read_file(path), path);

  std::vector<double> per_dataset;
  for (const DatasetScore& d : report.datasets) per_dataset.push_back(d.score);
  const double overall = report.task == Task::Loc6D ? ar_overall(per_dataset) : ap_overall(per_dataset);

  std::vector<PoseErrorKind> kinds;
  for (const DatasetScore& d : report.datasets) {
    for (const ErrorScore& e : d.errors) {
      if (std::find(kinds.begin(), kinds.end(), e.kind) == kinds.end()) kinds.push_back(e.kind);
    }
  }
  std::printf("%-20s %8s", "dataset", report.task == Task::Loc6D ? "AR" : "AP");
  for (PoseErrorKind k : kinds) std::printf(" %8s", std::string(to_string(k)).c_str());
  std::printf(" %10s\n", "time_s");
  for (const DatasetScore& d : report.datasets) {
    std::printf("%-20s %8s", d.name.c_str(), percent_1dp(d.score).c_str());
    for (PoseErrorKind k : kinds) {
      std::string cell = "-";
      for (const ErrorScore& e : d.errors) {
        if (e.kind == k) cell = percent_1dp(e.score);
      }
      std::printf(" %8s", cell.c_str());
    }
    std::printf(" %10.3f\n", d.mean_image_time_s);
  }
  std::printf("%-20s %8s\n", "overall", percent_1dp(overall).c_str());

  if (plots) {
    const fs::path dir = plot_dir.empty() ? fs::path(path).parent_path() / "plots" : fs::path(plot_dir);
    std::size_t count = 0;
    for (const DatasetScore& d : report.datasets) {
      for (const ErrorScore& e : d.errors) {
        for (const CurveRecord& c : e.curves) {
          char title[128];
          std::snprintf(title, sizeof title, "%s %s obj %d theta %g", d.name.c_str(),
                        std::string(to_string(e.kind)).c_str(), c.obj_id, c.theta);
          write_file(dir / plot_name(d, e, c), pr_curve_svg(c.curve, title));
          ++count;
        }
      }
    }
    std::printf("wrote %zu plots to %s\n", count, dir.string().c_str());
  }
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Evaluate 6D localization, 6D detection and 2D detection submissions."};
  app.require_subcommand(1);

  EvalArgs eval;
  auto* eval_cmd = app.add_subcommand("eval", "Score a submission against one or more datasets");
  eval_cmd->add_option("--task", eval.task, "loc6d, det6d or det2d")->required();
  eval_cmd->add_option("--dataset", eval.datasets, "Dataset root (repeatable)")->required();
  eval_cmd->add_option("--targets", eval.targets, "Targets JSON (one per --dataset)")->required();
  eval_cmd->add_option("--submission", eval.submissions, "Submission CSV (one per --dataset)")->required();
  eval_cmd->add_option("--out", eval.out, "Output directory")->required();
  eval_cmd->add_option("--jobs", eval.jobs, "Worker threads (default: $POSE_EVAL_JOBS or 1)");
  eval_cmd->add_option("--grid", eval.grid, "Threshold grid override JSON");
  eval_cmd->add_option("--format", eval.formats, "Report formats: json, csv")->delimiter(',');

  ValidateArgs validate;
  auto* validate_cmd = app.add_subcommand("validate", "Check a submission file");
  validate_cmd->add_option("--task", validate.task, "loc6d, det6d or det2d")->required();
  validate_cmd->add_option("--submission", validate.submission, "Submission CSV")->required();
  validate_cmd->add_option("--targets", validate.targets, "Targets JSON");
  validate_cmd->add_option("--dataset", validate.dataset, "Dataset root, for object ids");

  std::uint64_t seed = 1;
  std::string fixtures_out;
  int fixture_images = 24;
  auto* fixtures_cmd = app.add_subcommand("fixtures", "Write a synthetic dataset and reference submissions");
  fixtures_cmd->add_option("--seed", seed, "RNG seed");
  fixtures_cmd->add_option("--out", fixtures_out, "Output directory")->required();
  fixtures_cmd->add_option("--images", fixture_images, "Number of images");

  std::string report_path;
  std::string plot_dir;
  bool plots = false;
  auto* report_cmd = app.add_subcommand("report", "Print a report table and optionally PR-curve plots");
  report_cmd->add_option("report", report_path, "report.json")->required();
  report_cmd->add_flag("--plots", plots, "Write one SVG per PR curve");
  report_cmd->add_option("--plot-dir", plot_dir, "Directory for SVGs (default: <report dir>/plots)");

  try {
    eval.jobs = default_jobs();
    app.parse(argc, argv);
    if (*eval_cmd) return run_eval(eval);
    if (*validate_cmd) return run_validate(validate);
    if (*fixtures_cmd) return run_fixtures(seed, fixtures_out, fixture_images);
    if (*report_cmd) return run_report(report_path, plots, plot_dir);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitInvalid;
  } catch (const SubmissionError& e) {
    for (const LineError& le : e.errors()) {
      std::cerr << e.file() << ":" << le.line << ": " << to_string(le.code) << ": " << le.message << "\n";
    }
    return kExitInvalid;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return e.is_io() ? kExitIo : kExitInvalid;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitIo;
  }
  return kExitOk;
}
