#include <string>

#include "json.hpp"

#include "poseval/error.hpp"
#include "poseval/io.hpp"

namespace poseval {

using nlohmann::json;

namespace {

json score_json(double value) { return {{"value", value}, {"percent_1dp", percent_1dp(value)}}; }

json curve_json(const CurveRecord& c) {
  json recall = json::array();
  json precision = json::array();
  for (const PrPoint& p : c.curve.points) {
    recall.push_back(p.recall);
    precision.push_back(p.precision);
  }
  return {{"obj_id", c.obj_id},          {"theta", c.theta},         {"num_tp", c.curve.num_tp},
          {"num_fp", c.curve.num_fp},    {"num_gt", c.curve.num_gt}, {"recall", recall},
          {"precision", precision}};
}

json error_json(const ErrorScore& e) {
  json thresholds = json::array();
  for (const ThresholdScore& t : e.per_threshold) {
    thresholds.push_back({{"theta", t.theta}, {"tau", t.tau}, {"value", t.value}});
  }
  json objects = json::object();
  for (const auto& [obj_id, value] : e.per_object) objects[std::to_string(obj_id)] = value;
  json curves = json::array();
  for (const CurveRecord& c : e.curves) curves.push_back(curve_json(c));
  return {{"kind", std::string(to_string(e.kind))},
          {"score", score_json(e.score)},
          {"per_threshold", thresholds},
          {"per_object", objects},
          {"curves", curves}};
}

json report_json(const ScoreReport& report) {
  json datasets = json::array();
  for (const DatasetScore& d : report.datasets) {
    json errors = json::array();
    for (const ErrorScore& e : d.errors) errors.push_back(error_json(e));
    datasets.push_back({{"name", d.name},
                        {"score", score_json(d.score)},
                        {"errors", errors},
                        {"mean_image_time_s", d.mean_image_time_s},
                        {"num_images", d.num_images},
                        {"num_gt", d.num_gt}});
  }
  return {{"task", std::string(to_string(report.task))},
          {"overall", score_json(report.overall)},
          {"mean_image_time_s", report.mean_image_time_s},
          {"datasets", datasets}};
}

std::string csv_escape(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + '"';
}

void csv_row(std::string& out, const std::string& dataset, std::string_view metric, const std::string& obj,
             const std::string& theta, const std::string& tau, double value) {
  out += csv_escape(dataset) + ',' + std::string(metric) + ',' + obj + ',' + theta + ',' + tau + ',' +
         format_double(value) + ',' + percent_1dp(value) + '\n';
}

template <typename T>
T get(const json& node, const char* key) {
  const auto it = node.find(key);
  if (it == node.end()) throw Error(ErrorCode::MalformedJson, std::string("report is missing '") + key + "'");
  return it->get<T>();
}

}  // namespace

std::string write_report(const ScoreReport& report, ReportFormat format) {
  if (format == ReportFormat::Json) return report_json(report).dump(1) + "\n";

  std::string out = "dataset,metric,obj_id,theta,tau,value,percent_1dp\n";
  csv_row(out, "", "overall", "", "", "", report.overall);
  for (const DatasetScore& d : report.datasets) {
    csv_row(out, d.name, "score", "", "", "", d.score);
    for (const ErrorScore& e : d.errors) {
      csv_row(out, d.name, to_string(e.kind), "", "", "", e.score);
      for (const ThresholdScore& t : e.per_threshold) {
        csv_row(out, d.name, to_string(e.kind), "", format_double(t.theta),
                e.kind == PoseErrorKind::VSD ? format_double(t.tau) : std::string(), t.value);
      }
      for (const auto& [obj_id, value] : e.per_object) {
        csv_row(out, d.name, to_string(e.kind), std::to_string(obj_id), "", "", value);
      }
    }
  }
  return out;
}

ScoreReport parse_report(std::string_view text, const std::string& source) {
  try {
    const json root = json::parse(text.begin(), text.end());
    ScoreReport report;
    report.task = parse_task(get<std::string>(root, "task"));
    report.overall = get<double>(get<json>(root, "overall"), "value");
    report.mean_image_time_s = get<double>(root, "mean_image_time_s");
    for (const json& d : get<json>(root, "datasets")) {
      DatasetScore ds;
      ds.name = get<std::string>(d, "name");
      ds.score = get<double>(get<json>(d, "score"), "value");
      ds.mean_image_time_s = get<double>(d, "mean_image_time_s");
      ds.num_images = get<std::size_t>(d, "num_images");
      ds.num_gt = get<std::size_t>(d, "num_gt");
      for (const json& e : get<json>(d, "errors")) {
        ErrorScore es;
        es.kind = parse_error_kind(get<std::string>(e, "kind"));
        es.score = get<double>(get<json>(e, "score"), "value");
        for (const json& t : get<json>(e, "per_threshold")) {
          es.per_threshold.push_back({get<double>(t, "theta"), get<double>(t, "tau"), get<double>(t, "value")});
        }
        const json objects = get<json>(e, "per_object");
        for (const auto& [key, value] : objects.items()) {
          es.per_object[std::stoi(key)] = value.get<double>();
        }
        for (const json& c : get<json>(e, "curves")) {
          CurveRecord cr;
          cr.obj_id = get<int>(c, "obj_id");
          cr.theta = get<double>(c, "theta");
          cr.curve.num_tp = get<std::size_t>(c, "num_tp");
          cr.curve.num_fp = get<std::size_t>(c, "num_fp");
          cr.curve.num_gt = get<std::size_t>(c, "num_gt");
          const auto recall = get<std::vector<double>>(c, "recall");
          const auto precision = get<std::vector<double>>(c, "precision");
          if (recall.size() != precision.size()) {
            throw Error(ErrorCode::MalformedJson, "curve recall/precision lengths differ", source);
          }
          for (std::size_t i = 0; i < recall.size(); ++i) cr.curve.points.push_back({recall[i], precision[i]});
          es.curves.push_back(std::move(cr));
        }
        ds.errors.push_back(std::move(es));
      }
      report.datasets.push_back(std::move(ds));
    }
    return report;
  } catch (const json::exception& e) {
    throw Error(ErrorCode::MalformedJson, e.what(), source);
  } catch (const std::invalid_argument& e) {
    throw Error(ErrorCode::MalformedJson, e.what(), source);
  } catch (const Error& e) {
    throw Error(ErrorCode::MalformedJson, e.detail(), source);
  }
}

}  // namespace poseval
