#pragma once

#include <cstdint>
#include <limits>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "dosm/space_model.hpp"
#include "dosm/trilateration.hpp"

namespace dosm::localization {

struct PathLossParams {
  double tx_power_dbm_at_1m = kDefaultTxPowerDbm;  // received power at 1 m
  double path_loss_exponent = kDefaultPathLossExponent;
};

inline PathLossParams params_of(const BeaconDevice& beacon) {
  return {beacon.tx_power_dbm_at_1m, beacon.path_loss_exponent};
}

inline constexpr double kMinRange = 0.1;
inline constexpr double kMaxRange = 100.0;
inline constexpr double kMinRssi = -120.0;
inline constexpr double kMaxRssi = 0.0;

/// Log-distance path loss inverted: 10^((P0 - rssi) / (10 n)).
double rssi_to_distance_unclamped(double rssi, const PathLossParams& params);

/// As above, clamped to [kMinRange, kMaxRange].
double rssi_to_distance(double rssi, const PathLossParams& params);

struct RssiReading {
  Id beacon_id;
  double rssi = kMinRssi;
  std::int64_t timestamp_ms = 0;
};

struct PositionEstimate {
  Vec2 position = Vec2::Zero();
  double residual_rms = 0.0;
  int beacons_used = 0;
  std::int64_t timestamp_ms = 0;
  std::optional<Id> nearest_asset_id;
  std::optional<double> nearest_asset_distance;

  bool operator==(const PositionEstimate&) const = default;
};

struct NearestAsset {
  Id asset_id;
  double distance = 0.0;
};

/// Closest asset anchor on the floor plane; ties go to the lexicographically smallest id.
NearestAsset nearest_asset(const Vec2& position, const SpaceModel& model);

/// Exponential smoothing of the position; nearest-asset fields follow the smoothed position.
PositionEstimate fuse_fix(const std::optional<PositionEstimate>& previous, const PositionEstimate& raw,
                          double alpha, const SpaceModel& model);

struct ProximityEvent {
  Id session_id;
  Id asset_id;
  double distance = 0.0;
  std::int64_t timestamp_ms = 0;

  bool operator==(const ProximityEvent&) const = default;
};

struct AssetNotifyState {
  bool fired = false;
  double last_distance = std::numeric_limits<double>::infinity();

  bool operator==(const AssetNotifyState&) const = default;
};

using ProximityState = std::map<Id, AssetNotifyState>;

/// Enter/exit hysteresis: an asset fires once when the fix comes within `enter_radius` and re-arms
/// only after the fix moves beyond `exit_radius`.
std::vector<ProximityEvent> detect_proximity(ProximityState& state, const Id& session_id,
                                             const PositionEstimate& fix, const SpaceModel& model,
                                             double enter_radius, double exit_radius);

struct LocalizerConfig {
  std::int64_t stale_after_ms = 3000;
  double smoothing_alpha = 0.5;
  double enter_radius = 2.0;
  double exit_radius = 3.0;
};

enum class FixStatus { Ok, NoReadings, InsufficientBeacons, DegenerateGeometry };

std::string_view fix_status_name(FixStatus status) noexcept;

struct FixOutcome {
  FixStatus status = FixStatus::NoReadings;
  std::optional<PositionEstimate> raw;       // trilateration result before smoothing
  std::optional<PositionEstimate> estimate;  // smoothed
  int dropped = 0;  // readings from unregistered beacons or with out-of-range rssi
  int stale = 0;    // readings older than the freshness window
};

/// Reading batch -> fix: drop unknown beacons, discard stale readings, median-aggregate per beacon,
/// range, trilaterate and smooth against `previous`.
FixOutcome localize(std::span<const RssiReading> readings, const SpaceModel& model,
                    const std::optional<PositionEstimate>& previous, const LocalizerConfig& config);

}  // namespace dosm::localization
