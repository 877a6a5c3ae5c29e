#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "dosm/space_io.hpp"
#include "dosm/space_model.hpp"

namespace dosm::twin {

// One stop of the panoramic scan walk. `delta` is relative to the previous stop; the first stop
// is the scan origin and must have zero delta and zero heading.
struct ScanStep {
  Id capture_id;
  Vec2 delta = Vec2::Zero();
  double heading = 0.0;  // absolute, radians
  double eye_height = kDefaultEyeHeight;
};

// A tag sighted from a capture point: a ray (yaw relative to the capture heading, counterclockwise
// positive; pitch upward positive) and the measured depth along it.
struct TagObservation {
  Id anchor_id;
  Id capture_id;
  double yaw = 0.0;
  double pitch = 0.0;
  double depth = 1.0;
  AnchorKind kind = AnchorKind::Asset;
  std::string title;
  std::string description;
};

std::vector<CapturePoint> register_capture_points(std::span<const ScanStep> steps);

/// World-frame anchor at `depth` along the observation ray from the capture eye point.
Anchor place_anchor(const TagObservation& obs, const CapturePoint& capture);

/// Smallest-area room containing `p` (boundary inclusive); equal areas resolve to the smaller id.
std::optional<Id> room_of_point(const SpaceModel& model, const Vec2& p);

struct TagResult {
  SpaceModel model;
  std::vector<std::string> warnings;
};

/// Adds the anchor through apply_mutation, assigning room_id from its (x, y).
TagResult tag_poi(const SpaceModel& model, Anchor anchor);

struct ScanDocument {
  std::vector<ScanStep> steps;
  std::vector<TagObservation> observations;
};

ScanDocument scan_from_json(const Json& j, DecodeContext& ctx);

/// Registers the scan walk (replacing any existing capture points), then places and tags every
/// observation. One version bump per applied change.
TagResult import_scan(const SpaceModel& model, const ScanDocument& scan);

}  // namespace dosm::twin
