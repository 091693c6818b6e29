#include "poseval/error.hpp"

#include <sstream>

namespace poseval {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::InvalidRotation: return "InvalidRotation";
    case ErrorCode::InvalidIntrinsics: return "InvalidIntrinsics";
    case ErrorCode::InvalidMesh: return "InvalidMesh";
    case ErrorCode::NonPositiveDepth: return "NonPositiveDepth";
    case ErrorCode::InvalidSpec: return "InvalidSpec";
    case ErrorCode::DimensionMismatch: return "DimensionMismatch";
    case ErrorCode::EmptyVertexSet: return "EmptyVertexSet";
    case ErrorCode::EmptyGroundTruth: return "EmptyGroundTruth";
    case ErrorCode::EmptyInput: return "EmptyInput";
    case ErrorCode::InvalidGrid: return "InvalidGrid";
    case ErrorCode::MalformedHeader: return "MalformedHeader";
    case ErrorCode::IndexOutOfRange: return "IndexOutOfRange";
    case ErrorCode::UnsupportedEncoding: return "UnsupportedEncoding";
    case ErrorCode::MissingDiameter: return "MissingDiameter";
    case ErrorCode::BadSymmetryMatrix: return "BadSymmetryMatrix";
    case ErrorCode::NonUnitAxis: return "NonUnitAxis";
    case ErrorCode::LengthMismatch: return "LengthMismatch";
    case ErrorCode::BadRotation: return "BadRotation";
    case ErrorCode::DuplicateTarget: return "DuplicateTarget";
    case ErrorCode::NonPositiveCount: return "NonPositiveCount";
    case ErrorCode::BadHeader: return "BadHeader";
    case ErrorCode::BadFieldCount: return "BadFieldCount";
    case ErrorCode::NonFiniteScore: return "NonFiniteScore";
    case ErrorCode::UnknownObject: return "UnknownObject";
    case ErrorCode::UnsupportedBitDepth: return "UnsupportedBitDepth";
    case ErrorCode::DecodeError: return "DecodeError";
    case ErrorCode::MalformedJson: return "MalformedJson";
    case ErrorCode::MissingReport: return "MissingReport";
    case ErrorCode::Io: return "Io";
  }
  return "Unknown";
}

namespace {

std::string format_message(ErrorCode code, const std::string& message, const std::string& file,
                           std::size_t line) {
  std::ostringstream out;
  if (!file.empty()) {
    out << file;
    if (line > 0) out << ':' << line;
    out << ": ";
  } else if (line > 0) {
    out << "line " << line << ": ";
  }
  out << to_string(code) << ": " << message;
  return out.str();
}

std::string summarize(const std::vector<LineError>& errors) {
  std::ostringstream out;
  out << errors.size() << " invalid row(s)";
  if (!errors.empty()) out << ", first at line " << errors.front().line << ": " << errors.front().message;
  return out.str();
}

}  // namespace

Error::Error(ErrorCode code, const std::string& message, std::string file, std::size_t line)
    : std::runtime_error(format_message(code, message, file, line)),
      code_(code),
      file_(std::move(file)),
      line_(line),
      detail_(message) {}

SubmissionError::SubmissionError(std::string file, std::vector<LineError> errors)
    : Error(errors.empty() ? ErrorCode::BadFieldCount : errors.front().code, summarize(errors),
            std::move(file), errors.empty() ? 0 : errors.front().line),
      errors_(std::move(errors)) {}

}  // namespace poseval
