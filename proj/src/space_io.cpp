#include "dosm/space_io.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numbers>
#include <set>
#include <sstream>

#include "dosm/error.hpp"

namespace dosm {

namespace {

[[noreturn]] void fail(const std::string& message) { throw Error(ErrorCode::ParseError, message); }

// Field reader for one JSON object: tracks consumed keys so the rest can be reported as unknown.
class ObjectReader {
public:
  ObjectReader(const Json& j, std::string path, DecodeContext& ctx)
      : j_(j), path_(std::move(path)), ctx_(ctx) {
    if (!j_.is_object()) fail(path_ + " must be an object");
  }

  ~ObjectReader() = default;

  const Json* optional(const char* key) {
    known_.insert(key);
    auto it = j_.find(key);
    if (it == j_.end() || it->is_null()) return nullptr;
    return &*it;
  }

  const Json& required(const char* key) {
    const Json* v = optional(key);
    if (!v) fail("missing required field " + field(key));
    return *v;
  }

  std::string string(const char* key) {
    const Json& v = required(key);
    if (!v.is_string()) fail(field(key) + " must be a string");
    return v.get<std::string>();
  }

  std::string string_or(const char* key, std::string fallback) {
    const Json* v = optional(key);
    if (!v) return fallback;
    if (!v->is_string()) fail(field(key) + " must be a string");
    return v->get<std::string>();
  }

  double number(const char* key) {
    const Json& v = required(key);
    if (!v.is_number()) fail(field(key) + " must be a number");
    return v.get<double>();
  }

  double number_or(const char* key, double fallback) {
    const Json* v = optional(key);
    if (!v) return fallback;
    if (!v->is_number()) fail(field(key) + " must be a number");
    return v->get<double>();
  }

  std::int64_t integer_or(const char* key, std::int64_t fallback) {
    const Json* v = optional(key);
    if (!v) return fallback;
    if (!v->is_number_integer()) fail(field(key) + " must be an integer");
    return v->get<std::int64_t>();
  }

  const Json& array_or_empty(const char* key) {
    static const Json empty = Json::array();
    const Json* v = optional(key);
    if (!v) return empty;
    if (!v->is_array()) fail(field(key) + " must be an array");
    return *v;
  }

  std::string field(const char* key) const { return path_.empty() ? key : path_ + "." + key; }

  void finish() {
    for (const auto& [key, value] : j_.items()) {
      if (!known_.count(key)) ctx_.warnings.push_back("unknown field " + field(key.c_str()));
    }
  }

private:
  const Json& j_;
  std::string path_;
  DecodeContext& ctx_;
  std::set<std::string> known_;
};

std::string indexed(const std::string& base, std::size_t i) {
  return base + "[" + std::to_string(i) + "]";
}

Room room_from(const Json& j, DecodeContext& ctx, const std::string& path) {
  ObjectReader r(j, path, ctx);
  Room room;
  room.id = r.string("id");
  room.name = r.string_or("name", "");
  const Json& poly = r.required("polygon");
  if (!poly.is_array()) fail(r.field("polygon") + " must be an array");
  for (std::size_t i = 0; i < poly.size(); ++i) {
    room.polygon.push_back(vec2_from_json(poly[i], indexed(r.field("polygon"), i)));
  }
  r.finish();
  return room;
}

template <typename Segment>
Segment segment_from(const Json& j, DecodeContext& ctx, const std::string& path) {
  ObjectReader r(j, path, ctx);
  Segment s;
  s.id = r.string("id");
  s.p1 = vec2_from_json(r.required("p1"), r.field("p1"));
  s.p2 = vec2_from_json(r.required("p2"), r.field("p2"));
  r.finish();
  return s;
}

Anchor anchor_from(const Json& j, DecodeContext& ctx, const std::string& path) {
  ObjectReader r(j, path, ctx);
  Anchor a;
  a.id = r.string("id");
  const std::string kind = r.string("kind");
  auto parsed = parse_anchor_kind(kind);
  if (!parsed) fail(r.field("kind") + " has unknown value '" + kind + "'");
  a.kind = *parsed;
  a.title = r.string_or("title", "");
  a.description = r.string_or("description", "");
  a.position = vec3_from_json(r.required("position"), r.field("position"));
  if (const Json* room = r.optional("room_id")) {
    if (!room->is_string()) fail(r.field("room_id") + " must be a string");
    a.room_id = room->get<std::string>();
  }
  r.finish();
  return a;
}

BeaconDevice beacon_from(const Json& j, DecodeContext& ctx, const std::string& path) {
  ObjectReader r(j, path, ctx);
  BeaconDevice b;
  b.id = r.string("id");
  b.hardware_uid = r.string_or("hardware_uid", "");
  b.position = vec3_from_json(r.required("position"), r.field("position"));
  b.tx_power_dbm_at_1m = r.number_or("tx_power_dbm_at_1m", kDefaultTxPowerDbm);
  b.path_loss_exponent = r.number_or("path_loss_exponent", kDefaultPathLossExponent);
  r.finish();
  return b;
}

PoiDeviceMapping mapping_from(const Json& j, DecodeContext& ctx, const std::string& path) {
  ObjectReader r(j, path, ctx);
  PoiDeviceMapping m;
  m.asset_id = r.string("asset_id");
  m.beacon_id = r.string("beacon_id");
  r.finish();
  return m;
}

CapturePoint capture_from(const Json& j, DecodeContext& ctx, const std::string& path) {
  ObjectReader r(j, path, ctx);
  CapturePoint c;
  c.id = r.string("id");
  const std::int64_t order = r.integer_or("order", -1);
  if (order < 0) fail("missing required field " + r.field("order"));
  c.order = static_cast<int>(order);
  c.position = vec2_from_json(r.required("position"), r.field("position"));
  c.heading = heading_from_json(r.required("heading"), r.field("heading"));
  c.eye_height = r.number_or("eye_height", kDefaultEyeHeight);
  r.finish();
  return c;
}

Json segment_json(const Id& id, const Vec2& p1, const Vec2& p2) {
  Json j;
  j["id"] = id;
  j["p1"] = vec_to_json(p1);
  j["p2"] = vec_to_json(p2);
  return j;
}

}  // namespace

Json vec_to_json(const Vec2& v) { return Json::array({v.x(), v.y()}); }
Json vec_to_json(const Vec3& v) { return Json::array({v.x(), v.y(), v.z()}); }

Vec2 vec2_from_json(const Json& j, const std::string& path) {
  if (!j.is_array() || j.size() != 2 || !j[0].is_number() || !j[1].is_number()) {
    fail(path + " must be an [x, y] array of numbers");
  }
  return {j[0].get<double>(), j[1].get<double>()};
}

Vec3 vec3_from_json(const Json& j, const std::string& path) {
  if (!j.is_array() || (j.size() != 2 && j.size() != 3)) {
    fail(path + " must be an [x, y] or [x, y, z] array of numbers");
  }
  for (const auto& c : j) {
    if (!c.is_number()) fail(path + " must be an [x, y] or [x, y, z] array of numbers");
  }
  return {j[0].get<double>(), j[1].get<double>(), j.size() == 3 ? j[2].get<double>() : 0.0};
}

double heading_from_json(const Json& j, const std::string& path) {
  if (!j.is_object() || j.size() != 1) fail(path + " must be {\"deg\": v} or {\"rad\": v}");
  if (auto it = j.find("rad"); it != j.end() && it->is_number()) return it->get<double>();
  if (auto it = j.find("deg"); it != j.end() && it->is_number()) {
    return it->get<double>() * std::numbers::pi / 180.0;
  }
  fail(path + " must be {\"deg\": v} or {\"rad\": v}");
}

Json entity_to_json(const Entity& entity) {
  return std::visit(
      [](const auto& e) -> Json {
        using T = std::decay_t<decltype(e)>;
        Json j;
        if constexpr (std::is_same_v<T, Room>) {
          j["id"] = e.id;
          j["name"] = e.name;
          j["polygon"] = Json::array();
          for (const auto& v : e.polygon) j["polygon"].push_back(vec_to_json(v));
        } else if constexpr (std::is_same_v<T, WallSegment> || std::is_same_v<T, Portal>) {
          j = segment_json(e.id, e.p1, e.p2);
        } else if constexpr (std::is_same_v<T, Anchor>) {
          j["id"] = e.id;
          j["kind"] = anchor_kind_name(e.kind);
          j["title"] = e.title;
          j["description"] = e.description;
          j["position"] = vec_to_json(e.position);
          if (e.room_id) j["room_id"] = *e.room_id;
        } else if constexpr (std::is_same_v<T, BeaconDevice>) {
          j["id"] = e.id;
          j["hardware_uid"] = e.hardware_uid;
          j["position"] = vec_to_json(e.position);
          j["tx_power_dbm_at_1m"] = e.tx_power_dbm_at_1m;
          j["path_loss_exponent"] = e.path_loss_exponent;
        } else if constexpr (std::is_same_v<T, PoiDeviceMapping>) {
          j["asset_id"] = e.asset_id;
          j["beacon_id"] = e.beacon_id;
        } else {
          j["id"] = e.id;
          j["order"] = e.order;
          j["position"] = vec_to_json(e.position);
          j["heading"] = Json{{"rad", e.heading}};
          j["eye_height"] = e.eye_height;
        }
        return j;
      },
      entity);
}

Entity entity_from_json(EntityKind kind, const Json& j, DecodeContext& ctx, const std::string& path) {
  switch (kind) {
    case EntityKind::Room: return room_from(j, ctx, path);
    case EntityKind::Wall: return segment_from<WallSegment>(j, ctx, path);
    case EntityKind::Portal: return segment_from<Portal>(j, ctx, path);
    case EntityKind::Anchor: return anchor_from(j, ctx, path);
    case EntityKind::Beacon: return beacon_from(j, ctx, path);
    case EntityKind::Mapping: return mapping_from(j, ctx, path);
    case EntityKind::CapturePoint: return capture_from(j, ctx, path);
  }
  fail("unknown entity kind");
}

Json to_json(const SpaceModel& model) {
  Json j;
  j["id"] = model.id;
  j["name"] = model.name;
  j["floor"] = model.floor;
  auto list = [](const auto& items) {
    Json arr = Json::array();
    for (const auto& item : items) arr.push_back(entity_to_json(Entity{item}));
    return arr;
  };
  j["rooms"] = list(model.rooms);
  j["walls"] = list(model.walls);
  j["portals"] = list(model.portals);
  j["anchors"] = list(model.anchors);
  j["beacons"] = list(model.beacons);
  j["mappings"] = list(model.mappings);
  j["capture_points"] = list(model.capture_points);
  j["version"] = model.version;
  return j;
}

SpaceModel space_from_json(const Json& j, DecodeContext& ctx) {
  ObjectReader r(j, "", ctx);
  SpaceModel m;
  m.id = r.string("id");
  m.name = r.string_or("name", "");
  m.floor = static_cast<int>(r.integer_or("floor", 0));
  auto decode = [&](const char* key, EntityKind kind, auto& out) {
    using T = typename std::decay_t<decltype(out)>::value_type;
    const Json& arr = r.array_or_empty(key);
    for (std::size_t i = 0; i < arr.size(); ++i) {
      out.push_back(std::get<T>(entity_from_json(kind, arr[i], ctx, indexed(key, i))));
    }
  };
  decode("rooms", EntityKind::Room, m.rooms);
  decode("walls", EntityKind::Wall, m.walls);
  decode("portals", EntityKind::Portal, m.portals);
  decode("anchors", EntityKind::Anchor, m.anchors);
  decode("beacons", EntityKind::Beacon, m.beacons);
  decode("mappings", EntityKind::Mapping, m.mappings);
  decode("capture_points", EntityKind::CapturePoint, m.capture_points);
  const std::int64_t version = r.integer_or("version", 0);
  if (version < 0) fail("version must be non-negative");
  m.version = static_cast<std::uint64_t>(version);
  r.finish();
  return m;
}

Json parse_document(std::string_view text) {
  try {
    return Json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    // e.byte is 1-based and runs past the end on truncated input.
    const std::size_t offset = std::min<std::size_t>(e.byte > 0 ? e.byte - 1 : 0, text.size());
    throw Error(ErrorCode::ParseError, "parse error at byte " + std::to_string(offset) + ": " + e.what(),
                {std::to_string(offset)});
  }
}

std::string read_text_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::IoError, "cannot open " + path.string());
  std::ostringstream buffer;
  buffer << in.rdbuf();
  if (in.bad()) throw Error(ErrorCode::IoError, "read failure on " + path.string());
  return buffer.str();
}

LoadedSpace read_space_file(const std::filesystem::path& path) {
  const Json doc = parse_document(read_text_file(path));
  DecodeContext ctx;
  SpaceModel model = space_from_json(doc, ctx);
  return {std::move(model), std::move(ctx.warnings)};
}

LoadedSpace load_space(const std::filesystem::path& path) {
  LoadedSpace loaded = read_space_file(path);
  ValidationReport report = validate_space(loaded.model);
  if (!report.ok()) {
    std::vector<std::string> details;
    for (const auto& e : report.errors) details.push_back(e.message);
    throw Error(ErrorCode::ValidationFailed,
                path.string() + " failed validation: " + report.errors.front().message, details);
  }
  for (const auto& w : report.warnings) loaded.warnings.push_back(w.message);
  return loaded;
}

void write_file_atomic(const std::filesystem::path& path, std::string_view contents,
                       const BeforeRenameHook& before_rename) {
  namespace fs = std::filesystem;
  const fs::path temp = path.string() + ".tmp";
  {
    std::ofstream out(temp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(ErrorCode::IoError, "cannot write " + temp.string());
    out.write(contents.data(), static_cast<std::streamsize>(contents.size()));
    out.flush();
    if (!out) throw Error(ErrorCode::IoError, "write failure on " + temp.string());
  }
  if (before_rename) before_rename(temp);
  std::error_code ec;
  fs::rename(temp, path, ec);
  if (ec) {
    fs::remove(temp, ec);
    throw Error(ErrorCode::IoError, "cannot replace " + path.string() + ": " + ec.message());
  }
}

void save_space(const SpaceModel& model, const std::filesystem::path& path,
                const BeforeRenameHook& before_rename) {
  ValidationReport report = validate_space(model);
  if (!report.ok()) {
    throw Error(ErrorCode::ValidationFailed,
                "refusing to save invalid space: " + report.errors.front().message);
  }
  write_file_atomic(path, to_json(model).dump(2) + "\n", before_rename);
}

}  // namespace dosm
