#include "dosm/localization.hpp"

#include <algorithm>
#include <cmath>

#include "dosm/error.hpp"

namespace dosm::localization {

double rssi_to_distance_unclamped(double rssi, const PathLossParams& params) {
  return std::pow(10.0, (params.tx_power_dbm_at_1m - rssi) / (10.0 * params.path_loss_exponent));
}

double rssi_to_distance(double rssi, const PathLossParams& params) {
  return std::clamp(rssi_to_distance_unclamped(rssi, params), kMinRange, kMaxRange);
}

NearestAsset nearest_asset(const Vec2& position, const SpaceModel& model) {
  const Anchor* best = nullptr;
  double best_distance = 0.0;
  for (const Anchor& anchor : model.anchors) {
    if (anchor.kind != AnchorKind::Asset) continue;
    const double d = (anchor.position.head<2>() - position).norm();
    if (!best || d < best_distance || (d == best_distance && anchor.id < best->id)) {
      best = &anchor;
      best_distance = d;
    }
  }
  if (!best) throw Error(ErrorCode::NoAssets, "space " + model.id + " has no asset anchors");
  return {best->id, best_distance};
}

namespace {

bool has_assets(const SpaceModel& model) {
  return std::any_of(model.anchors.begin(), model.anchors.end(),
                     [](const Anchor& a) { return a.kind == AnchorKind::Asset; });
}

void annotate_nearest(PositionEstimate& estimate, const SpaceModel& model) {
  if (has_assets(model)) {
    NearestAsset nearest = nearest_asset(estimate.position, model);
    estimate.nearest_asset_id = nearest.asset_id;
    estimate.nearest_asset_distance = nearest.distance;
  } else {
    estimate.nearest_asset_id.reset();
    estimate.nearest_asset_distance.reset();
  }
}

double median(std::vector<double> values) {
  std::sort(values.begin(), values.end());
  const std::size_t n = values.size();
  return n % 2 == 1 ? values[n / 2] : 0.5 * (values[n / 2 - 1] + values[n / 2]);
}

}  // namespace

PositionEstimate fuse_fix(const std::optional<PositionEstimate>& previous, const PositionEstimate& raw,
                          double alpha, const SpaceModel& model) {
  if (!(alpha > 0.0 && alpha <= 1.0)) {
    throw Error(ErrorCode::InvalidArgument, "smoothing alpha must lie in (0, 1]");
  }
  PositionEstimate out = raw;
  if (previous) out.position = alpha * raw.position + (1.0 - alpha) * previous->position;
  annotate_nearest(out, model);
  return out;
}

std::vector<ProximityEvent> detect_proximity(ProximityState& state, const Id& session_id,
                                             const PositionEstimate& fix, const SpaceModel& model,
                                             double enter_radius, double exit_radius) {
  if (!(exit_radius > enter_radius)) {
    throw Error(ErrorCode::InvalidArgument, "exit radius must exceed enter radius");
  }
  std::vector<const Anchor*> assets;
  for (const Anchor& anchor : model.anchors) {
    if (anchor.kind == AnchorKind::Asset) assets.push_back(&anchor);
  }
  std::sort(assets.begin(), assets.end(), [](const Anchor* a, const Anchor* b) { return a->id < b->id; });

  std::vector<ProximityEvent> events;
  for (const Anchor* asset : assets) {
    AssetNotifyState& s = state[asset->id];
    const double d = (asset->position.head<2>() - fix.position).norm();
    if (s.fired && d > exit_radius) s.fired = false;
    if (!s.fired && d <= enter_radius) {
      s.fired = true;
      events.push_back({session_id, asset->id, d, fix.timestamp_ms});
    }
    s.last_distance = d;
  }
  return events;
}

std::string_view fix_status_name(FixStatus status) noexcept {
  switch (status) {
    case FixStatus::Ok: return "ok";
    case FixStatus::NoReadings: return "no-readings";
    case FixStatus::InsufficientBeacons: return "insufficient-beacons";
    case FixStatus::DegenerateGeometry: return "degenerate-geometry";
  }
  return "ok";
}

FixOutcome localize(std::span<const RssiReading> readings, const SpaceModel& model,
                    const std::optional<PositionEstimate>& previous, const LocalizerConfig& config) {
  FixOutcome out;
  if (readings.empty()) {
    out.status = FixStatus::NoReadings;
    return out;
  }

  std::vector<const RssiReading*> usable;
  for (const RssiReading& r : readings) {
    const bool valid_rssi = std::isfinite(r.rssi) && r.rssi >= kMinRssi && r.rssi <= kMaxRssi;
    if (!model.find_beacon(r.beacon_id) || !valid_rssi) {
      ++out.dropped;
    } else {
      usable.push_back(&r);
    }
  }
  if (usable.empty()) {
    out.status = FixStatus::InsufficientBeacons;
    return out;
  }

  std::int64_t newest = usable.front()->timestamp_ms;
  for (const RssiReading* r : usable) newest = std::max(newest, r->timestamp_ms);

  std::map<Id, std::vector<double>> by_beacon;
  for (const RssiReading* r : usable) {
    if (newest - r->timestamp_ms > config.stale_after_ms) {
      ++out.stale;
      continue;
    }
    by_beacon[r->beacon_id].push_back(r->rssi);
  }

  if (by_beacon.size() < 3) {
    out.status = FixStatus::InsufficientBeacons;
    return out;
  }

  // std::map iteration keeps the range order independent of arrival order.
  std::vector<Range<double>> ranges;
  for (const auto& [beacon_id, values] : by_beacon) {
    const BeaconDevice& beacon = *model.find_beacon(beacon_id);
    ranges.push_back({beacon.position.head<2>(), rssi_to_distance(median(values), params_of(beacon))});
  }

  Trilateration<double> solved;
  try {
    solved = trilaterate(ranges);
  } catch (const Error& e) {
    if (e.code() == ErrorCode::DegenerateGeometry || e.code() == ErrorCode::SingularSystem) {
      out.status = FixStatus::DegenerateGeometry;
      return out;
    }
    throw;
  }

  PositionEstimate raw;
  raw.position = solved.position;
  raw.residual_rms = solved.residual_rms;
  raw.beacons_used = static_cast<int>(ranges.size());
  raw.timestamp_ms = newest;
  annotate_nearest(raw, model);

  out.status = FixStatus::Ok;
  out.estimate = fuse_fix(previous, raw, config.smoothing_alpha, model);
  out.raw = std::move(raw);
  return out;
}

}  // namespace dosm::localization
