#include "dosm/twin_builder.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <set>
#include <utility>

#include "dosm/error.hpp"

namespace dosm::twin {

namespace {

// cos and sin that are exact on whole quarter turns, so axis-aligned rays land on exact coordinates.
std::pair<double, double> cos_sin(double angle) {
  constexpr double half_pi = std::numbers::pi / 2.0;
  const double q = angle / half_pi;
  if (std::abs(q) < 1e6 && q == std::nearbyint(q) && q * half_pi == angle) {
    switch (((static_cast<long>(q) % 4) + 4) % 4) {
      case 0: return {1.0, 0.0};
      case 1: return {0.0, 1.0};
      case 2: return {-1.0, 0.0};
      default: return {0.0, -1.0};
    }
  }
  return {std::cos(angle), std::sin(angle)};
}

}  // namespace

std::vector<CapturePoint> register_capture_points(std::span<const ScanStep> steps) {
  if (steps.empty()) throw Error(ErrorCode::InvalidArgument, "scan has no capture steps");
  const ScanStep& first = steps.front();
  if (first.delta != Vec2::Zero() || first.heading != 0.0) {
    throw Error(ErrorCode::InvalidArgument, "first capture must be origin", {first.capture_id});
  }

  std::set<Id> ids;
  std::vector<CapturePoint> points;
  points.reserve(steps.size());
  Vec2 pose = Vec2::Zero();
  for (std::size_t k = 0; k < steps.size(); ++k) {
    const ScanStep& step = steps[k];
    if (step.capture_id.empty()) {
      throw Error(ErrorCode::InvalidArgument, "capture step " + std::to_string(k) + " has no id");
    }
    if (!ids.insert(step.capture_id).second) {
      throw Error(ErrorCode::DuplicateId, "duplicate capture id " + step.capture_id, {step.capture_id});
    }
    if (!step.delta.allFinite() || !std::isfinite(step.heading) || !(step.eye_height >= 0.0)) {
      throw Error(ErrorCode::InvalidArgument, "capture step " + step.capture_id + " is not finite");
    }
    pose += step.delta;
    points.push_back({step.capture_id, static_cast<int>(k), pose, step.heading, step.eye_height});
  }
  return points;
}

Anchor place_anchor(const TagObservation& obs, const CapturePoint& capture) {
  if (obs.capture_id != capture.id) {
    throw Error(ErrorCode::InvalidArgument,
                "observation " + obs.anchor_id + " was made from " + obs.capture_id + ", not " + capture.id);
  }
  if (!(obs.depth > 0.0) || !std::isfinite(obs.depth)) {
    throw Error(ErrorCode::InvalidArgument, "observation " + obs.anchor_id + " depth must be > 0");
  }
  constexpr double half_pi = std::numbers::pi / 2.0;
  if (!(obs.pitch >= -half_pi && obs.pitch <= half_pi)) {
    throw Error(ErrorCode::InvalidArgument,
                "observation " + obs.anchor_id + " pitch must lie in [-pi/2, pi/2]");
  }
  if (!std::isfinite(obs.yaw)) {
    throw Error(ErrorCode::InvalidArgument, "observation " + obs.anchor_id + " yaw is not finite");
  }

  const auto [cos_theta, sin_theta] = cos_sin(capture.heading + obs.yaw);
  const auto [cos_pitch, sin_pitch] = cos_sin(obs.pitch);
  const double horizontal = obs.depth * cos_pitch;
  Anchor anchor;
  anchor.id = obs.anchor_id;
  anchor.kind = obs.kind;
  anchor.title = obs.title;
  anchor.description = obs.description;
  anchor.position = Vec3(capture.position.x() + horizontal * cos_theta,
                         capture.position.y() + horizontal * sin_theta,
                         capture.eye_height + obs.depth * sin_pitch);
  return anchor;
}

std::optional<Id> room_of_point(const SpaceModel& model, const Vec2& p) {
  const Room* best = nullptr;
  double best_area = 0.0;
  for (const Room& room : model.rooms) {
    if (!geometry::contains(room.polygon, p)) continue;
    const double area = std::abs(geometry::signed_area(room.polygon));
    if (!best || area < best_area || (area == best_area && room.id < best->id)) {
      best = &room;
      best_area = area;
    }
  }
  if (!best) return std::nullopt;
  return best->id;
}

TagResult tag_poi(const SpaceModel& model, Anchor anchor) {
  if (model.find_anchor(anchor.id)) {
    throw Error(ErrorCode::DuplicateId, "duplicate identifier " + anchor.id, {anchor.id});
  }
  anchor.room_id = room_of_point(model, anchor.position.head<2>());
  TagResult result;
  if (!anchor.room_id) {
    if (anchor.kind == AnchorKind::Asset || anchor.kind == AnchorKind::Poi) {
      throw Error(ErrorCode::ValidationFailed,
                  "anchor " + anchor.id + " of kind " + std::string(anchor_kind_name(anchor.kind)) +
                      " lies outside all rooms",
                  {anchor.id});
    }
    result.warnings.push_back("anchor " + anchor.id + " lies outside all rooms");
  }
  result.model = apply_mutation(model, Mutation::add(std::move(anchor)));
  return result;
}

ScanDocument scan_from_json(const Json& j, DecodeContext& ctx) {
  auto bad = [](const std::string& msg) { return Error(ErrorCode::ParseError, msg); };
  if (!j.is_object()) throw bad("scan document must be an object");
  ScanDocument scan;
  for (const auto& [key, value] : j.items()) {
    if (key != "steps" && key != "observations") ctx.warnings.push_back("unknown field " + key);
  }

  auto number_or = [&](const Json& obj, const char* key, double fallback, const std::string& path) {
    auto it = obj.find(key);
    if (it == obj.end()) return fallback;
    if (!it->is_number()) throw bad(path + "." + key + " must be a number");
    return it->get<double>();
  };
  auto string_of = [&](const Json& obj, const char* key, const std::string& path, bool required) {
    auto it = obj.find(key);
    if (it == obj.end()) {
      if (required) throw bad("missing required field " + path + "." + key);
      return std::string();
    }
    if (!it->is_string()) throw bad(path + "." + key + " must be a string");
    return it->get<std::string>();
  };
  auto angle_of = [&](const Json& obj, const char* key, const std::string& path) {
    auto it = obj.find(key);
    if (it == obj.end()) return 0.0;
    return heading_from_json(*it, path + "." + key);
  };
  auto warn_unknown = [&](const Json& obj, const std::string& path, std::initializer_list<const char*> known) {
    for (const auto& [key, value] : obj.items()) {
      bool found = false;
      for (const char* k : known) found = found || key == k;
      if (!found) ctx.warnings.push_back("unknown field " + path + "." + key);
    }
  };

  const Json steps = j.value("steps", Json::array());
  if (!steps.is_array()) throw bad("steps must be an array");
  for (std::size_t i = 0; i < steps.size(); ++i) {
    const std::string path = "steps[" + std::to_string(i) + "]";
    const Json& s = steps[i];
    if (!s.is_object()) throw bad(path + " must be an object");
    ScanStep step;
    step.capture_id = string_of(s, "capture_id", path, true);
    if (auto it = s.find("delta"); it != s.end()) step.delta = vec2_from_json(*it, path + ".delta");
    step.heading = angle_of(s, "heading", path);
    step.eye_height = number_or(s, "eye_height", kDefaultEyeHeight, path);
    warn_unknown(s, path, {"capture_id", "delta", "heading", "eye_height"});
    scan.steps.push_back(step);
  }

  const Json observations = j.value("observations", Json::array());
  if (!observations.is_array()) throw bad("observations must be an array");
  for (std::size_t i = 0; i < observations.size(); ++i) {
    const std::string path = "observations[" + std::to_string(i) + "]";
    const Json& o = observations[i];
    if (!o.is_object()) throw bad(path + " must be an object");
    TagObservation obs;
    obs.anchor_id = string_of(o, "anchor_id", path, true);
    obs.capture_id = string_of(o, "capture_id", path, true);
    obs.yaw = angle_of(o, "yaw", path);
    obs.pitch = angle_of(o, "pitch", path);
    if (o.find("depth") == o.end()) throw bad("missing required field " + path + ".depth");
    obs.depth = number_or(o, "depth", 0.0, path);
    const std::string kind = string_of(o, "kind", path, false);
    if (!kind.empty()) {
      auto parsed = parse_anchor_kind(kind);
      if (!parsed) throw bad(path + ".kind has unknown value '" + kind + "'");
      obs.kind = *parsed;
    }
    obs.title = string_of(o, "title", path, false);
    obs.description = string_of(o, "description", path, false);
    warn_unknown(o, path, {"anchor_id", "capture_id", "yaw", "pitch", "depth", "kind", "title", "description"});
    scan.observations.push_back(obs);
  }
  return scan;
}

TagResult import_scan(const SpaceModel& model, const ScanDocument& scan) {
  TagResult result{model, {}};
  if (!scan.steps.empty()) {
    std::vector<CapturePoint> captures = register_capture_points(scan.steps);
    SpaceModel next = result.model;
    next.capture_points = std::move(captures);
    ValidationReport report = validate_space(next);
    if (!report.ok()) {
      throw Error(ErrorCode::ValidationFailed, report.errors.front().message);
    }
    next.version = result.model.version + 1;
    result.model = std::move(next);
  }
  for (const TagObservation& obs : scan.observations) {
    auto it = std::find_if(result.model.capture_points.begin(), result.model.capture_points.end(),
                           [&](const CapturePoint& cp) { return cp.id == obs.capture_id; });
    if (it == result.model.capture_points.end()) {
      throw Error(ErrorCode::UnknownId, "observation " + obs.anchor_id + " references unknown capture " +
                                            obs.capture_id, {obs.capture_id});
    }
    TagResult tagged = tag_poi(result.model, place_anchor(obs, *it));
    result.model = std::move(tagged.model);
    for (auto& w : tagged.warnings) result.warnings.push_back(std::move(w));
  }
  return result;
}

}  // namespace dosm::twin
