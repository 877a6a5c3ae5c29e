#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <random>
#include <shared_mutex>
#include <span>
#include <string>
#include <vector>

#include "dosm/localization.hpp"
#include "dosm/navigation.hpp"
#include "dosm/space_model.hpp"

namespace dosm::service {

using localization::PositionEstimate;
using localization::ProximityEvent;
using localization::RssiReading;

struct ServiceConfig {
  std::optional<std::filesystem::path> data_dir;  // persistence root; in-memory only when unset
  localization::LocalizerConfig localizer;
  double cell_size = nav::kDefaultCellSize;
  double clearance = nav::kDefaultClearance;
  std::optional<std::uint64_t> id_seed;  // fixes generated session ids (tests, simulator)
};

struct SessionEvent {
  std::uint64_t seq = 0;
  ProximityEvent event;

  bool operator==(const SessionEvent&) const = default;
};

struct VisitorSession {
  Id id;
  Id space_id;
  std::vector<Id> preferences;
  std::optional<PositionEstimate> last_fix;
  localization::ProximityState notify_state;
  std::vector<SessionEvent> event_log;
};

struct IngestResult {
  std::string status;  // "ok", "no-readings", "insufficient-beacons", "degenerate-geometry"
  std::optional<PositionEstimate> estimate;
  std::optional<PositionEstimate> raw;
  int dropped = 0;
  int stale = 0;
  std::vector<SessionEvent> events;
};

struct NotificationPage {
  std::vector<SessionEvent> events;
  std::uint64_t next_seq = 0;
};

struct AssetDetails {
  Id id;
  std::string title;
  std::string description;
  Vec3 position = Vec3::Zero();
  std::optional<Id> room_id;
  std::optional<std::string> room_name;
  std::optional<Id> beacon_id;
};

struct SpaceUpdate {
  std::shared_ptr<const SpaceModel> model;
  std::vector<std::string> warnings;
};

/// Transport-independent DOSM core: twin administration plus visitor sessions. Thread-safe;
/// mutations are serialized per space and per session, readers get immutable snapshots.
class DosmService {
public:
  explicit DosmService(ServiceConfig config = {});

  DosmService(const DosmService&) = delete;
  DosmService& operator=(const DosmService&) = delete;

  [[nodiscard]] const ServiceConfig& config() const noexcept { return config_; }

  // -- admin surface ------------------------------------------------------
  SpaceUpdate import_space(SpaceModel model);
  [[nodiscard]] std::shared_ptr<const SpaceModel> get_space(const Id& space_id) const;
  [[nodiscard]] std::vector<Id> space_ids() const;
  SpaceUpdate apply(const Id& space_id, const Mutation& mutation);
  [[nodiscard]] std::shared_ptr<const nav::NavGraph> nav_graph(const Id& space_id) const;

  // -- visitor surface ----------------------------------------------------
  Id create_session(const Id& space_id);
  std::vector<Id> set_preferences(const Id& session_id, std::span<const Id> asset_ids);
  IngestResult ingest_readings(const Id& session_id, std::span<const RssiReading> readings);
  nav::Route get_route(const Id& session_id, nav::OrderMode mode);
  [[nodiscard]] AssetDetails get_asset_details(const Id& space_id, const Id& asset_id) const;
  [[nodiscard]] NotificationPage poll_notifications(const Id& session_id, std::uint64_t after_seq) const;
  [[nodiscard]] VisitorSession session(const Id& session_id) const;

  /// Writes every session to <data_dir>/sessions/<space_id>.json. No-op without a data dir.
  void snapshot_sessions() const;

  /// Lowercase 8-hex-digit identifier.
  Id generate_id();

private:
  struct SpaceEntry {
    std::mutex writer;
    mutable std::mutex snapshot_mutex;
    std::shared_ptr<const SpaceModel> model;
    std::shared_ptr<const nav::NavGraph> graph;
    std::optional<std::string> graph_error;

    std::shared_ptr<const SpaceModel> snapshot() const;
  };

  struct SessionEntry {
    mutable std::mutex mutex;
    VisitorSession state;
  };

  std::shared_ptr<SpaceEntry> space_entry(const Id& space_id) const;
  std::shared_ptr<SessionEntry> session_entry(const Id& session_id) const;
  void publish(SpaceEntry& entry, std::shared_ptr<const SpaceModel> model, bool rebuild_graph);
  void persist(const SpaceModel& model) const;
  void load_data_dir();

  ServiceConfig config_;
  mutable std::shared_mutex registry_mutex_;
  std::map<Id, std::shared_ptr<SpaceEntry>> spaces_;
  std::map<Id, std::shared_ptr<SessionEntry>> sessions_;
  std::mutex rng_mutex_;
  std::mt19937_64 rng_;
};

}  // namespace dosm::service
