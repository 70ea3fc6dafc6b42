#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace vsim {

enum class ErrorCode {
  DuplicateId,
  DanglingReference,
  InvariantViolation,
  UnknownId,
  RoomOccupied,
  UnknownAgent,
  SchemaError,
  CycleError,
  GenerationFailure,
  InstantiationError,
  DuplicateAgent,
  TraceIncomplete,
  UnknownViewpoint,
  PolicyError,
  EndpointError,
  InvalidConfig,
};

std::string_view to_string(ErrorCode code);

// Single exception type for the library. `path` is a JSON-pointer-like
// location for schema errors and empty otherwise.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message, std::string path = {})
      : std::runtime_error(std::string(to_string(code)) + ": " +
                           (path.empty() ? message : path + ": " + message)),
        code_(code),
        path_(std::move(path)),
        message_(message) {}

  ErrorCode code() const noexcept { return code_; }
  const std::string& path() const noexcept { return path_; }
  const std::string& message() const noexcept { return message_; }

 private:
  ErrorCode code_;
  std::string path_;
  std::string message_;
};

inline Error schema_error(const std::string& path, const std::string& message) {
  return Error(ErrorCode::SchemaError, message, path);
}

}  // namespace vsim
