#include "dosm/error.hpp"

namespace dosm {

std::string_view error_code_name(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::InvalidArgument: return "invalid-argument";
    case ErrorCode::ParseError: return "parse-error";
    case ErrorCode::IoError: return "io-error";
    case ErrorCode::ValidationFailed: return "validation-failed";
    case ErrorCode::UnknownId: return "unknown-id";
    case ErrorCode::DuplicateId: return "duplicate-id";
    case ErrorCode::SpaceNotFound: return "space-not-found";
    case ErrorCode::SpaceExists: return "space-exists";
    case ErrorCode::SessionNotFound: return "session-not-found";
    case ErrorCode::AssetNotFound: return "asset-not-found";
    case ErrorCode::NoPosition: return "no-position";
    case ErrorCode::NoReadings: return "no-readings";
    case ErrorCode::InsufficientBeacons: return "insufficient-beacons";
    case ErrorCode::DegenerateGeometry: return "degenerate-geometry";
    case ErrorCode::SingularSystem: return "singular-system";
    case ErrorCode::NoAssets: return "no-assets";
    case ErrorCode::DegenerateSpace: return "degenerate-space";
    case ErrorCode::OutOfBounds: return "out-of-bounds";
    case ErrorCode::NoPassableCells: return "no-passable-cells";
    case ErrorCode::NoPath: return "no-path";
    case ErrorCode::UnreachableTarget: return "unreachable-target";
    case ErrorCode::EmptyRoute: return "empty-route";
    case ErrorCode::EmptyTrace: return "empty-trace";
    case ErrorCode::NotFound: return "not-found";
  }
  return "unknown";
}

}  // namespace dosm
