#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "dosm/geometry.hpp"

namespace dosm {

using Id = std::string;

enum class AnchorKind { Asset, Poi, RoomLabel, WallLabel };

std::string_view anchor_kind_name(AnchorKind kind) noexcept;
std::optional<AnchorKind> parse_anchor_kind(std::string_view name) noexcept;

struct Room {
  Id id;
  std::string name;
  Polygon polygon;  // floor plane, meters

  bool operator==(const Room&) const = default;
};

struct WallSegment {
  Id id;
  Vec2 p1 = Vec2::Zero();
  Vec2 p2 = Vec2::Zero();

  bool operator==(const WallSegment&) const = default;
};

// A passable gap such as a door. Overrides wall clearance during rasterization.
struct Portal {
  Id id;
  Vec2 p1 = Vec2::Zero();
  Vec2 p2 = Vec2::Zero();

  bool operator==(const Portal&) const = default;
};

// A tag placed in the twin: unique id, description and a world-frame position.
struct Anchor {
  Id id;
  AnchorKind kind = AnchorKind::Poi;
  std::string title;
  std::string description;
  Vec3 position = Vec3::Zero();
  std::optional<Id> room_id;

  bool operator==(const Anchor&) const = default;
};

inline constexpr double kDefaultTxPowerDbm = -59.0;
inline constexpr double kDefaultPathLossExponent = 2.0;

struct BeaconDevice {
  Id id;
  std::string hardware_uid;
  Vec3 position = Vec3::Zero();
  double tx_power_dbm_at_1m = kDefaultTxPowerDbm;
  double path_loss_exponent = kDefaultPathLossExponent;

  bool operator==(const BeaconDevice&) const = default;
};

struct PoiDeviceMapping {
  Id asset_id;
  Id beacon_id;

  bool operator==(const PoiDeviceMapping&) const = default;
};

inline constexpr double kDefaultEyeHeight = 1.5;

struct CapturePoint {
  Id id;
  int order = 0;
  Vec2 position = Vec2::Zero();
  double heading = 0.0;  // radians
  double eye_height = kDefaultEyeHeight;

  bool operator==(const CapturePoint&) const = default;
};

struct SpaceModel {
  Id id;
  std::string name;
  int floor = 0;
  std::vector<Room> rooms;
  std::vector<WallSegment> walls;
  std::vector<Portal> portals;
  std::vector<Anchor> anchors;
  std::vector<BeaconDevice> beacons;
  std::vector<PoiDeviceMapping> mappings;
  std::vector<CapturePoint> capture_points;
  std::uint64_t version = 0;

  bool operator==(const SpaceModel&) const = default;

  [[nodiscard]] const Room* find_room(std::string_view id) const;
  [[nodiscard]] const Anchor* find_anchor(std::string_view id) const;
  [[nodiscard]] const BeaconDevice* find_beacon(std::string_view id) const;
  [[nodiscard]] const PoiDeviceMapping* mapping_for_asset(std::string_view asset_id) const;
  [[nodiscard]] const PoiDeviceMapping* mapping_for_beacon(std::string_view beacon_id) const;
};

// ---------------------------------------------------------------------------
// Validation
// ---------------------------------------------------------------------------

struct Issue {
  std::string code;     // e.g. "duplicate-identifier"
  std::string subject;  // offending id, empty for model-level issues
  std::string message;

  bool operator==(const Issue&) const = default;
};

struct ValidationReport {
  std::vector<Issue> errors;
  std::vector<Issue> warnings;

  [[nodiscard]] bool ok() const noexcept { return errors.empty(); }
};

ValidationReport validate_space(const SpaceModel& model);

// ---------------------------------------------------------------------------
// Mutations
// ---------------------------------------------------------------------------

enum class EntityKind { Room, Wall, Portal, Anchor, Beacon, Mapping, CapturePoint };

std::string_view entity_kind_name(EntityKind kind) noexcept;
std::optional<EntityKind> parse_entity_kind(std::string_view name) noexcept;

using Entity =
    std::variant<Room, WallSegment, Portal, Anchor, BeaconDevice, PoiDeviceMapping, CapturePoint>;

EntityKind kind_of(const Entity& entity) noexcept;

/// Key an entity is addressed by: its id, or the asset id for a mapping.
const Id& key_of(const Entity& entity) noexcept;

enum class MutationOp { Add, Update, Remove };

struct Mutation {
  MutationOp op = MutationOp::Add;
  EntityKind kind = EntityKind::Anchor;
  Id target;                    // key of the entity to update/remove
  std::optional<Entity> entity;  // required for add/update

  static Mutation add(Entity e);
  static Mutation update(Entity e);
  static Mutation remove(EntityKind kind, Id id);
};

/// Returns a new snapshot with version + 1. Throws dosm::Error and leaves `model` untouched when the
/// target is unknown or the result would fail validation.
SpaceModel apply_mutation(const SpaceModel& model, const Mutation& mutation);

std::optional<Entity> find_entity(const SpaceModel& model, EntityKind kind, std::string_view key);

}  // namespace dosm
