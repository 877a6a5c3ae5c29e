#include "dosm/space_model.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <set>
#include <sstream>

#include "dosm/error.hpp"

namespace dosm {

std::string_view anchor_kind_name(AnchorKind kind) noexcept {
  switch (kind) {
    case AnchorKind::Asset: return "asset";
    case AnchorKind::Poi: return "poi";
    case AnchorKind::RoomLabel: return "room_label";
    case AnchorKind::WallLabel: return "wall_label";
  }
  return "poi";
}

std::optional<AnchorKind> parse_anchor_kind(std::string_view name) noexcept {
  if (name == "asset") return AnchorKind::Asset;
  if (name == "poi") return AnchorKind::Poi;
  if (name == "room_label") return AnchorKind::RoomLabel;
  if (name == "wall_label") return AnchorKind::WallLabel;
  return std::nullopt;
}

std::string_view entity_kind_name(EntityKind kind) noexcept {
  switch (kind) {
    case EntityKind::Room: return "room";
    case EntityKind::Wall: return "wall";
    case EntityKind::Portal: return "portal";
    case EntityKind::Anchor: return "anchor";
    case EntityKind::Beacon: return "beacon";
    case EntityKind::Mapping: return "mapping";
    case EntityKind::CapturePoint: return "capture_point";
  }
  return "anchor";
}

std::optional<EntityKind> parse_entity_kind(std::string_view name) noexcept {
  if (name == "room") return EntityKind::Room;
  if (name == "wall") return EntityKind::Wall;
  if (name == "portal") return EntityKind::Portal;
  if (name == "anchor") return EntityKind::Anchor;
  if (name == "beacon") return EntityKind::Beacon;
  if (name == "mapping") return EntityKind::Mapping;
  if (name == "capture_point") return EntityKind::CapturePoint;
  return std::nullopt;
}

namespace {

template <typename T>
const T* find_by_id(const std::vector<T>& items, std::string_view id) {
  auto it = std::find_if(items.begin(), items.end(), [&](const T& item) { return item.id == id; });
  return it == items.end() ? nullptr : &*it;
}

bool finite(const Vec2& v) { return v.allFinite(); }
bool finite(const Vec3& v) { return v.allFinite(); }

class Reporter {
public:
  explicit Reporter(ValidationReport& report) : report_(report) {}

  void error(std::string code, std::string subject, std::string message) {
    report_.errors.push_back({std::move(code), std::move(subject), std::move(message)});
  }
  void warning(std::string code, std::string subject, std::string message) {
    report_.warnings.push_back({std::move(code), std::move(subject), std::move(message)});
  }

private:
  ValidationReport& report_;
};

}  // namespace

const Room* SpaceModel::find_room(std::string_view id) const { return find_by_id(rooms, id); }
const Anchor* SpaceModel::find_anchor(std::string_view id) const { return find_by_id(anchors, id); }
const BeaconDevice* SpaceModel::find_beacon(std::string_view id) const {
  return find_by_id(beacons, id);
}

const PoiDeviceMapping* SpaceModel::mapping_for_asset(std::string_view asset_id) const {
  auto it = std::find_if(mappings.begin(), mappings.end(),
                         [&](const PoiDeviceMapping& m) { return m.asset_id == asset_id; });
  return it == mappings.end() ? nullptr : &*it;
}

const PoiDeviceMapping* SpaceModel::mapping_for_beacon(std::string_view beacon_id) const {
  auto it = std::find_if(mappings.begin(), mappings.end(),
                         [&](const PoiDeviceMapping& m) { return m.beacon_id == beacon_id; });
  return it == mappings.end() ? nullptr : &*it;
}

ValidationReport validate_space(const SpaceModel& model) {
  ValidationReport report;
  Reporter r(report);

  if (model.id.empty()) r.error("missing-identifier", "", "space has an empty id");

  std::set<std::string> seen;
  std::set<std::string> reported;
  auto claim = [&](const std::string& id, std::string_view kind) {
    if (id.empty()) {
      r.error("missing-identifier", "", std::string(kind) + " has an empty id");
      return;
    }
    if (!seen.insert(id).second && reported.insert(id).second) {
      r.error("duplicate-identifier", id, "duplicate identifier " + id);
    }
  };
  for (const auto& room : model.rooms) claim(room.id, "room");
  for (const auto& wall : model.walls) claim(wall.id, "wall");
  for (const auto& portal : model.portals) claim(portal.id, "portal");
  for (const auto& anchor : model.anchors) claim(anchor.id, "anchor");
  for (const auto& beacon : model.beacons) claim(beacon.id, "beacon");
  for (const auto& cp : model.capture_points) claim(cp.id, "capture point");

  for (const auto& room : model.rooms) {
    const bool all_finite =
        std::all_of(room.polygon.begin(), room.polygon.end(), [](const Vec2& v) { return finite(v); });
    if (room.polygon.size() < 3) {
      r.error("degenerate-polygon", room.id, "room " + room.id + " has fewer than 3 vertices");
    } else if (!all_finite) {
      r.error("non-finite", room.id, "room " + room.id + " has a non-finite vertex");
    } else if (std::abs(geometry::signed_area(room.polygon)) <= 0.0) {
      r.error("degenerate-polygon", room.id, "room " + room.id + " has zero area");
    } else if (!geometry::is_simple(room.polygon)) {
      r.error("degenerate-polygon", room.id, "room " + room.id + " polygon is self-intersecting");
    }
  }

  for (const auto& wall : model.walls) {
    if (!finite(wall.p1) || !finite(wall.p2)) {
      r.error("non-finite", wall.id, "wall " + wall.id + " has a non-finite endpoint");
    } else if (wall.p1 == wall.p2) {
      r.error("degenerate-segment", wall.id, "wall " + wall.id + " has coincident endpoints");
    }
  }
  for (const auto& portal : model.portals) {
    if (!finite(portal.p1) || !finite(portal.p2)) {
      r.error("non-finite", portal.id, "portal " + portal.id + " has a non-finite endpoint");
    } else if (portal.p1 == portal.p2) {
      r.error("degenerate-segment", portal.id, "portal " + portal.id + " has coincident endpoints");
    }
  }

  for (const auto& anchor : model.anchors) {
    if (!finite(anchor.position)) {
      r.error("non-finite", anchor.id, "anchor " + anchor.id + " has a non-finite position");
      continue;
    }
    if (anchor.position.z() < 0.0) {
      r.error("negative-height", anchor.id, "anchor " + anchor.id + " lies below the floor (z < 0)");
    }
    if (anchor.room_id && !model.find_room(*anchor.room_id)) {
      r.error("dangling-reference", *anchor.room_id, "dangling reference " + *anchor.room_id);
    }
    const Vec2 xy = anchor.position.head<2>();
    const bool inside = std::any_of(model.rooms.begin(), model.rooms.end(), [&](const Room& room) {
      return geometry::contains(room.polygon, xy);
    });
    if (!inside) {
      if (anchor.kind == AnchorKind::Asset || anchor.kind == AnchorKind::Poi) {
        r.error("anchor-outside-rooms", anchor.id,
                "anchor " + anchor.id + " of kind " + std::string(anchor_kind_name(anchor.kind)) +
                    " lies outside all rooms");
      } else {
        r.warning("anchor-outside-rooms", anchor.id, "anchor " + anchor.id + " lies outside all rooms");
      }
    }
  }

  for (const auto& beacon : model.beacons) {
    if (!finite(beacon.position)) {
      r.error("non-finite", beacon.id, "beacon " + beacon.id + " has a non-finite position");
    }
    if (!(beacon.path_loss_exponent > 0.5 && beacon.path_loss_exponent <= 6.0)) {
      r.error("out-of-range", beacon.id,
              "beacon " + beacon.id + " path_loss_exponent must be in (0.5, 6.0]");
    }
    if (!(beacon.tx_power_dbm_at_1m >= -100.0 && beacon.tx_power_dbm_at_1m <= 0.0)) {
      r.error("out-of-range", beacon.id,
              "beacon " + beacon.id + " tx_power_dbm_at_1m must be in [-100, 0]");
    }
  }

  std::set<std::string> mapped_assets;
  std::set<std::string> mapped_beacons;
  for (const auto& mapping : model.mappings) {
    const Anchor* asset = model.find_anchor(mapping.asset_id);
    if (!asset) {
      r.error("dangling-reference", mapping.asset_id, "dangling reference " + mapping.asset_id);
    } else if (asset->kind != AnchorKind::Asset) {
      r.error("mapping-kind", mapping.asset_id,
              "mapping target " + mapping.asset_id + " is not an asset anchor");
    }
    if (!model.find_beacon(mapping.beacon_id)) {
      r.error("dangling-reference", mapping.beacon_id, "dangling reference " + mapping.beacon_id);
    }
    if (!mapped_assets.insert(mapping.asset_id).second) {
      r.error("mapping-not-bijective", mapping.asset_id,
              "asset " + mapping.asset_id + " appears in more than one mapping");
    }
    if (!mapped_beacons.insert(mapping.beacon_id).second) {
      r.error("mapping-not-bijective", mapping.beacon_id,
              "beacon " + mapping.beacon_id + " appears in more than one mapping");
    }
  }
  for (const auto& anchor : model.anchors) {
    if (anchor.kind == AnchorKind::Asset && !mapped_assets.count(anchor.id)) {
      r.warning("unmapped-asset", anchor.id, "asset " + anchor.id + " has no beacon mapping");
    }
  }

  if (!model.capture_points.empty()) {
    std::vector<int> orders;
    for (const auto& cp : model.capture_points) {
      orders.push_back(cp.order);
      if (!finite(cp.position) || !std::isfinite(cp.heading) || !std::isfinite(cp.eye_height)) {
        r.error("non-finite", cp.id, "capture point " + cp.id + " has a non-finite pose");
      }
      if (cp.order == 0 && (cp.position != Vec2::Zero() || cp.heading != 0.0)) {
        r.error("capture-origin", cp.id, "capture point " + cp.id + " has order 0 but is not at the origin");
      }
    }
    std::sort(orders.begin(), orders.end());
    for (std::size_t i = 0; i < orders.size(); ++i) {
      if (orders[i] != static_cast<int>(i)) {
        r.error("capture-order", "", "capture point orders are not unique and contiguous from 0");
        break;
      }
    }
  }

  return report;
}

// ---------------------------------------------------------------------------

EntityKind kind_of(const Entity& entity) noexcept {
  return static_cast<EntityKind>(entity.index());
}

const Id& key_of(const Entity& entity) noexcept {
  return std::visit(
      [](const auto& e) -> const Id& {
        if constexpr (std::is_same_v<std::decay_t<decltype(e)>, PoiDeviceMapping>) {
          return e.asset_id;
        } else {
          return e.id;
        }
      },
      entity);
}

Mutation Mutation::add(Entity e) {
  Mutation m;
  m.op = MutationOp::Add;
  m.kind = kind_of(e);
  m.target = key_of(e);
  m.entity = std::move(e);
  return m;
}

Mutation Mutation::update(Entity e) {
  Mutation m = add(std::move(e));
  m.op = MutationOp::Update;
  return m;
}

Mutation Mutation::remove(EntityKind kind, Id id) {
  Mutation m;
  m.op = MutationOp::Remove;
  m.kind = kind;
  m.target = std::move(id);
  return m;
}

namespace {

template <typename T, typename Model>
auto& collection(Model& model) {
  if constexpr (std::is_same_v<T, Room>) return model.rooms;
  else if constexpr (std::is_same_v<T, WallSegment>) return model.walls;
  else if constexpr (std::is_same_v<T, Portal>) return model.portals;
  else if constexpr (std::is_same_v<T, Anchor>) return model.anchors;
  else if constexpr (std::is_same_v<T, BeaconDevice>) return model.beacons;
  else if constexpr (std::is_same_v<T, PoiDeviceMapping>) return model.mappings;
  else return model.capture_points;
}

template <typename T>
const Id& item_key(const T& item) {
  if constexpr (std::is_same_v<T, PoiDeviceMapping>) return item.asset_id;
  else return item.id;
}

template <typename T>
std::optional<Entity> find_in(const SpaceModel& model, std::string_view key) {
  for (const auto& item : collection<T>(model)) {
    if (item_key(item) == key) return Entity{item};
  }
  return std::nullopt;
}

template <typename T>
void apply_typed(SpaceModel& model, const Mutation& mutation) {
  auto& items = collection<T>(model);
  auto it = std::find_if(items.begin(), items.end(),
                         [&](const T& item) { return item_key(item) == mutation.target; });
  switch (mutation.op) {
    case MutationOp::Add:
      if (it != items.end()) {
        throw Error(ErrorCode::DuplicateId, "duplicate identifier " + mutation.target,
                    {mutation.target});
      }
      items.push_back(std::get<T>(*mutation.entity));
      break;
    case MutationOp::Update:
      if (it == items.end()) {
        throw Error(ErrorCode::UnknownId, "unknown id " + mutation.target, {mutation.target});
      }
      *it = std::get<T>(*mutation.entity);
      break;
    case MutationOp::Remove:
      if (it == items.end()) {
        throw Error(ErrorCode::UnknownId, "unknown id " + mutation.target, {mutation.target});
      }
      items.erase(it);
      break;
  }
}

}  // namespace

std::optional<Entity> find_entity(const SpaceModel& model, EntityKind kind, std::string_view key) {
  switch (kind) {
    case EntityKind::Room: return find_in<Room>(model, key);
    case EntityKind::Wall: return find_in<WallSegment>(model, key);
    case EntityKind::Portal: return find_in<Portal>(model, key);
    case EntityKind::Anchor: return find_in<Anchor>(model, key);
    case EntityKind::Beacon: return find_in<BeaconDevice>(model, key);
    case EntityKind::Mapping: return find_in<PoiDeviceMapping>(model, key);
    case EntityKind::CapturePoint: return find_in<CapturePoint>(model, key);
  }
  return std::nullopt;
}

SpaceModel apply_mutation(const SpaceModel& model, const Mutation& mutation) {
  if (mutation.op != MutationOp::Remove) {
    if (!mutation.entity) {
      throw Error(ErrorCode::InvalidArgument, "mutation is missing its entity");
    }
    if (kind_of(*mutation.entity) != mutation.kind) {
      throw Error(ErrorCode::InvalidArgument, "mutation kind does not match its entity");
    }
    if (key_of(*mutation.entity) != mutation.target) {
      throw Error(ErrorCode::InvalidArgument, "mutation target does not match the entity key");
    }
  }

  // Ids share one namespace across kinds; mappings are keyed by their asset id instead.
  if (mutation.op == MutationOp::Add && mutation.kind != EntityKind::Mapping) {
    for (EntityKind other : {EntityKind::Room, EntityKind::Wall, EntityKind::Portal, EntityKind::Anchor,
                             EntityKind::Beacon, EntityKind::CapturePoint}) {
      if (find_entity(model, other, mutation.target)) {
        throw Error(ErrorCode::DuplicateId, "duplicate identifier " + mutation.target, {mutation.target});
      }
    }
  }

  SpaceModel next = model;
  switch (mutation.kind) {
    case EntityKind::Room: apply_typed<Room>(next, mutation); break;
    case EntityKind::Wall: apply_typed<WallSegment>(next, mutation); break;
    case EntityKind::Portal: apply_typed<Portal>(next, mutation); break;
    case EntityKind::Anchor: apply_typed<Anchor>(next, mutation); break;
    case EntityKind::Beacon: apply_typed<BeaconDevice>(next, mutation); break;
    case EntityKind::Mapping: apply_typed<PoiDeviceMapping>(next, mutation); break;
    case EntityKind::CapturePoint: apply_typed<CapturePoint>(next, mutation); break;
  }

  ValidationReport report = validate_space(next);
  if (!report.ok()) {
    std::vector<std::string> details;
    std::ostringstream msg;
    msg << "mutation rejected:";
    for (const auto& issue : report.errors) {
      details.push_back(issue.message);
      msg << ' ' << issue.message << ';';
    }
    throw Error(ErrorCode::ValidationFailed, msg.str(), std::move(details));
  }
  next.version = model.version + 1;
  return next;
}

}  // namespace dosm
