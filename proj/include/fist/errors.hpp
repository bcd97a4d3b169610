#pragma once

#include <stdexcept>
#include <string>

namespace fist {

// Exit-code categories; the CLI maps a thrown Error to its category code.
enum class ErrorCategory : int {
  config = 2,            // bad flags, dimension mismatch, invalid layout
  missing_artifact = 3,  // prerequisite checkpoint/dataset not found
  io = 4,                // file format, checksum, truncation
  numeric = 5,           // NaN/Inf, training divergence
  planning = 6,          // unreachable goal, controller failure
};

class Error : public std::runtime_error {
 public:
  Error(ErrorCategory cat, const std::string& msg)
      : std::runtime_error(msg), category_(cat) {}
  ErrorCategory category() const { return category_; }

 private:
  ErrorCategory category_;
};

struct ConfigError : Error {
  explicit ConfigError(const std::string& m) : Error(ErrorCategory::config, m) {}
};

struct MissingArtifactError : Error {
  explicit MissingArtifactError(const std::string& m)
      : Error(ErrorCategory::missing_artifact, m) {}
};

struct IoError : Error {
  explicit IoError(const std::string& m) : Error(ErrorCategory::io, m) {}
};

// Distinct dataset/checkpoint load failures.
struct VersionError : IoError {
  explicit VersionError(const std::string& m) : IoError("version mismatch: " + m) {}
};
struct ChecksumError : IoError {
  explicit ChecksumError(const std::string& m) : IoError("checksum failure: " + m) {}
};
struct TruncationError : IoError {
  explicit TruncationError(const std::string& m) : IoError("truncated file: " + m) {}
};

struct NumericError : Error {
  explicit NumericError(const std::string& m) : Error(ErrorCategory::numeric, m) {}
};

struct PlanningError : Error {
  explicit PlanningError(const std::string& m) : Error(ErrorCategory::planning, m) {}
};

}  // namespace fist
