#pragma once

#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace dosm {

// Published error codes. The wire name of each code is stable; clients match on it.
enum class ErrorCode {
  InvalidArgument,
  ParseError,
  IoError,
  ValidationFailed,
  UnknownId,
  DuplicateId,
  SpaceNotFound,
  SpaceExists,
  SessionNotFound,
  AssetNotFound,
  NoPosition,
  NoReadings,
  InsufficientBeacons,
  DegenerateGeometry,
  SingularSystem,
  NoAssets,
  DegenerateSpace,
  OutOfBounds,
  NoPassableCells,
  NoPath,
  UnreachableTarget,
  EmptyRoute,
  EmptyTrace,
  NotFound,
};

std::string_view error_code_name(ErrorCode code) noexcept;

class Error : public std::runtime_error {
public:
  Error(ErrorCode code, const std::string& message, std::vector<std::string> details = {})
      : std::runtime_error(message), code_(code), details_(std::move(details)) {}

  [[nodiscard]] ErrorCode code() const noexcept { return code_; }
  [[nodiscard]] const std::vector<std::string>& details() const noexcept { return details_; }

private:
  ErrorCode code_;
  std::vector<std::string> details_;
};

}  // namespace dosm
