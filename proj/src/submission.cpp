#include <charconv>
#include <cmath>
#include <string>
#include <vector>

#include "poseval/error.hpp"
#include "poseval/io.hpp"

namespace poseval {

namespace {

std::vector<std::string_view> split(std::string_view text, char sep) {
  std::vector<std::string_view> parts;
  std::size_t start = 0;
  while (true) {
    const std::size_t end = text.find(sep, start);
    if (end == std::string_view::npos) {
      parts.push_back(text.substr(start));
      return parts;
    }
    parts.push_back(text.substr(start, end - start));
    start = end + 1;
  }
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t')) s.remove_suffix(1);
  return s;
}

template <typename T>
bool parse_number(std::string_view text, T& out) {
  text = trim(text);
  if (text.empty()) return false;
  if (text.front() == '+') text.remove_prefix(1);
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), out);
  return ec == std::errc() && ptr == text.data() + text.size();
}

// Whitespace-separated numbers inside one CSV field.
bool parse_vector(std::string_view text, std::vector<double>& out) {
  out.clear();
  std::size_t i = 0;
  while (i < text.size()) {
    while (i < text.size() && (text[i] == ' ' || text[i] == '\t')) ++i;
    if (i >= text.size()) break;
    std::size_t j = i;
    while (j < text.size() && text[j] != ' ' && text[j] != '\t') ++j;
    double value = 0.0;
    if (!parse_number(text.substr(i, j - i), value)) return false;
    out.push_back(value);
    i = j;
  }
  return true;
}

bool is_pose_task(Task task) { return task != Task::Det2D; }

}  // namespace

std::vector<SubmissionRow> parse_submission_csv(std::string_view bytes, Task task, const std::string& source) {
  if (bytes.size() >= 3 && bytes.substr(0, 3) == "\xEF\xBB\xBF") bytes.remove_prefix(3);

  std::vector<std::string_view> lines = split(bytes, '\n');
  if (!lines.empty() && lines.back().empty()) lines.pop_back();
  for (auto& line : lines) {
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
  }

  const std::string_view expected = is_pose_task(task) ? kPoseHeader : kBoxHeader;
  if (lines.empty() || trim(lines.front()) != expected) {
    throw Error(ErrorCode::BadHeader, "expected header '" + std::string(expected) + "' for task " +
                                          std::string(to_string(task)),
                source, 1);
  }

  const std::size_t n_fields = is_pose_task(task) ? 7 : 6;
  std::vector<SubmissionRow> rows;
  rows.reserve(lines.size() - 1);
  std::vector<LineError> errors;
  std::vector<double> values;

  for (std::size_t i = 1; i < lines.size(); ++i) {
    const std::size_t line_no = i + 1;
    const std::string_view line = lines[i];
    if (trim(line).empty()) continue;
    const auto fail = [&](ErrorCode code, std::string message) { errors.push_back({line_no, code, std::move(message)}); };

    const auto fields = split(line, ',');
    if (fields.size() != n_fields) {
      fail(ErrorCode::BadFieldCount,
           "expected " + std::to_string(n_fields) + " fields, found " + std::to_string(fields.size()));
      continue;
    }

    SubmissionRow row;
    row.line = line_no;
    if (!parse_number(fields[0], row.scene_id) || !parse_number(fields[1], row.im_id) ||
        !parse_number(fields[2], row.obj_id)) {
      fail(ErrorCode::BadFieldCount, "scene_id, im_id and obj_id must be integers");
      continue;
    }
    if (!parse_number(fields[3], row.score) || !std::isfinite(row.score)) {
      fail(ErrorCode::NonFiniteScore, "score must be a finite number");
      continue;
    }
    const std::string_view time_field = fields[n_fields - 1];
    if (!parse_number(time_field, row.time_s) || !std::isfinite(row.time_s)) {
      fail(ErrorCode::BadFieldCount, "time must be a finite number");
      continue;
    }

    if (is_pose_task(task)) {
      if (!parse_vector(fields[4], values) || values.size() != 9) {
        fail(ErrorCode::BadFieldCount, "R must hold 9 numbers, found " + std::to_string(values.size()));
        continue;
      }
      Mat3 rotation;
      for (int r = 0; r < 3; ++r) {
        for (int c = 0; c < 3; ++c) rotation(r, c) = values[r * 3 + c];
      }
      if (!parse_vector(fields[5], values) || values.size() != 3) {
        fail(ErrorCode::BadFieldCount, "t must hold 3 numbers, found " + std::to_string(values.size()));
        continue;
      }
      const Vec3 translation(values[0], values[1], values[2]);
      try {
        row.pose = RigidPose(rotation, translation);
      } catch (const Error& e) {
        fail(ErrorCode::InvalidRotation, e.detail());
        continue;
      }
    } else {
      if (!parse_vector(fields[4], values) || values.size() != 4) {
        fail(ErrorCode::BadFieldCount, "bbox must hold 4 numbers, found " + std::to_string(values.size()));
        continue;
      }
      const Box2D box{values[0], values[1], values[2], values[3]};
      bool finite = true;
      for (double v : values) finite = finite && std::isfinite(v);
      if (!finite || box.w < 0.0 || box.h < 0.0) {
        fail(ErrorCode::BadFieldCount, "bbox must be finite with w, h >= 0");
        continue;
      }
      row.bbox = box;
    }
    rows.push_back(std::move(row));
  }

  if (!errors.empty()) throw SubmissionError(source, std::move(errors));
  return rows;
}

std::string write_submission_csv(const std::vector<SubmissionRow>& rows, Task task) {
  std::string out(is_pose_task(task) ? kPoseHeader : kBoxHeader);
  out += '\n';
  for (const SubmissionRow& row : rows) {
    out += std::to_string(row.scene_id) + ',' + std::to_string(row.im_id) + ',' + std::to_string(row.obj_id) + ',' +
           format_double(row.score) + ',';
    if (is_pose_task(task)) {
      if (!row.pose) throw Error(ErrorCode::InvalidRotation, "pose row without a pose");
      const Mat3& r = row.pose->rotation();
      for (int i = 0; i < 9; ++i) {
        if (i > 0) out += ' ';
        out += format_double(r(i / 3, i % 3));
      }
      out += ',';
      const Vec3& t = row.pose->translation();
      out += format_double(t.x()) + ' ' + format_double(t.y()) + ' ' + format_double(t.z());
    } else {
      if (!row.bbox) throw Error(ErrorCode::BadFieldCount, "box row without a bbox");
      const Box2D& b = *row.bbox;
      out += format_double(b.x) + ' ' + format_double(b.y) + ' ' + format_double(b.w) + ' ' + format_double(b.h);
    }
    out += ',' + format_double(row.time_s) + '\n';
  }
  return out;
}

std::vector<PoseEstimate> to_pose_estimates(const std::vector<SubmissionRow>& rows) {
  std::vector<PoseEstimate> out;
  out.reserve(rows.size());
  for (const SubmissionRow& row : rows) {
    if (!row.pose) throw Error(ErrorCode::BadFieldCount, "row without a pose", {}, row.line);
    out.push_back({row.scene_id, row.im_id, row.obj_id, *row.pose, row.score, row.time_s});
  }
  return out;
}

std::vector<Detection2D> to_detections(const std::vector<SubmissionRow>& rows) {
  std::vector<Detection2D> out;
  out.reserve(rows.size());
  for (const SubmissionRow& row : rows) {
    if (!row.bbox) throw Error(ErrorCode::BadFieldCount, "row without a bbox", {}, row.line);
    out.push_back({row.scene_id, row.im_id, row.obj_id, *row.bbox, row.score, row.time_s});
  }
  return out;
}

}  // namespace poseval
