#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace poseval {

enum class ErrorCode {
  InvalidRotation,
  InvalidIntrinsics,
  InvalidMesh,
  NonPositiveDepth,
  InvalidSpec,
  DimensionMismatch,
  EmptyVertexSet,
  EmptyGroundTruth,
  EmptyInput,
  InvalidGrid,
  MalformedHeader,
  IndexOutOfRange,
  UnsupportedEncoding,
  MissingDiameter,
  BadSymmetryMatrix,
  NonUnitAxis,
  LengthMismatch,
  BadRotation,
  DuplicateTarget,
  NonPositiveCount,
  BadHeader,
  BadFieldCount,
  NonFiniteScore,
  UnknownObject,
  UnsupportedBitDepth,
  DecodeError,
  MalformedJson,
  MissingReport,
  Io,
};

std::string_view to_string(ErrorCode code);

// Errors raised by validation, parsing and the error functions. `where` carries
// an optional file name and 1-based line number.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message, std::string file = {}, std::size_t line = 0);

  ErrorCode code() const noexcept { return code_; }
  const std::string& file() const noexcept { return file_; }
  std::size_t line() const noexcept { return line_; }
  const std::string& detail() const noexcept { return detail_; }

  // Validation failures map to exit code 2, I/O failures to 1.
  bool is_io() const noexcept { return code_ == ErrorCode::Io || code_ == ErrorCode::MissingReport; }

 private:
  ErrorCode code_;
  std::string file_;
  std::size_t line_;
  std::string detail_;
};

struct LineError {
  std::size_t line = 0;
  ErrorCode code = ErrorCode::BadFieldCount;
  std::string message;
};

// Aggregate of every rejected line in a CSV file.
class SubmissionError : public Error {
 public:
  SubmissionError(std::string file, std::vector<LineError> errors);

  const std::vector<LineError>& errors() const noexcept { return errors_; }

 private:
  std::vector<LineError> errors_;
};

}  // namespace poseval
