#include "dosm/service.hpp"

#include <algorithm>
#include <cstdio>
#include <set>

#include "dosm/error.hpp"
#include "dosm/space_io.hpp"
#include "dosm/twin_builder.hpp"
#include "dosm/wire.hpp"

namespace dosm::service {

namespace fs = std::filesystem;

std::shared_ptr<const SpaceModel> DosmService::SpaceEntry::snapshot() const {
  std::lock_guard lock(snapshot_mutex);
  return model;
}

DosmService::DosmService(ServiceConfig config)
    : config_(std::move(config)), rng_(config_.id_seed ? *config_.id_seed : std::random_device{}()) {
  if (config_.data_dir) load_data_dir();
}

Id DosmService::generate_id() {
  std::lock_guard lock(rng_mutex_);
  char buf[9];
  std::snprintf(buf, sizeof buf, "%08x", static_cast<unsigned>(rng_() & 0xffffffffu));
  return buf;
}

void DosmService::load_data_dir() {
  std::error_code ec;
  fs::create_directories(*config_.data_dir, ec);
  if (ec) throw Error(ErrorCode::IoError, "cannot create data dir " + config_.data_dir->string());
  std::vector<fs::path> files;
  for (const auto& entry : fs::directory_iterator(*config_.data_dir)) {
    if (entry.is_regular_file() && entry.path().extension() == ".json") files.push_back(entry.path());
  }
  std::sort(files.begin(), files.end());
  for (const auto& file : files) {
    LoadedSpace loaded = load_space(file);
    auto entry = std::make_shared<SpaceEntry>();
    Id id = loaded.model.id;
    publish(*entry, std::make_shared<const SpaceModel>(std::move(loaded.model)), true);
    spaces_[id] = std::move(entry);
  }
}

void DosmService::persist(const SpaceModel& model) const {
  if (!config_.data_dir) return;
  save_space(model, *config_.data_dir / (model.id + ".json"));
}

void DosmService::publish(SpaceEntry& entry, std::shared_ptr<const SpaceModel> model, bool rebuild_graph) {
  std::shared_ptr<const nav::NavGraph> graph;
  std::optional<std::string> graph_error;
  if (rebuild_graph) {
    try {
      graph = std::make_shared<const nav::NavGraph>(
          nav::build_nav_graph(*model, config_.cell_size, config_.clearance));
    } catch (const Error& e) {
      graph_error = e.what();
    }
  }
  std::lock_guard lock(entry.snapshot_mutex);
  entry.model = std::move(model);
  if (rebuild_graph) {
    entry.graph = std::move(graph);
    entry.graph_error = std::move(graph_error);
  }
}

std::shared_ptr<DosmService::SpaceEntry> DosmService::space_entry(const Id& space_id) const {
  std::shared_lock lock(registry_mutex_);
  auto it = spaces_.find(space_id);
  if (it == spaces_.end()) {
    throw Error(ErrorCode::SpaceNotFound, "space " + space_id + " not found", {space_id});
  }
  return it->second;
}

std::shared_ptr<DosmService::SessionEntry> DosmService::session_entry(const Id& session_id) const {
  std::shared_lock lock(registry_mutex_);
  auto it = sessions_.find(session_id);
  if (it == sessions_.end()) {
    throw Error(ErrorCode::SessionNotFound, "session " + session_id + " not found", {session_id});
  }
  return it->second;
}

SpaceUpdate DosmService::import_space(SpaceModel model) {
  ValidationReport report = validate_space(model);
  if (!report.ok()) {
    std::vector<std::string> details;
    for (const auto& e : report.errors) details.push_back(e.message);
    throw Error(ErrorCode::ValidationFailed, "space rejected: " + report.errors.front().message, details);
  }
  SpaceUpdate update;
  for (const auto& w : report.warnings) update.warnings.push_back(w.message);

  auto entry = std::make_shared<SpaceEntry>();
  std::lock_guard writer(entry->writer);
  auto snapshot = std::make_shared<const SpaceModel>(std::move(model));
  publish(*entry, snapshot, true);
  {
    std::unique_lock lock(registry_mutex_);
    if (spaces_.count(snapshot->id)) {
      throw Error(ErrorCode::SpaceExists, "space " + snapshot->id + " already exists", {snapshot->id});
    }
    spaces_[snapshot->id] = entry;
  }
  try {
    persist(*snapshot);
  } catch (...) {
    std::unique_lock lock(registry_mutex_);
    spaces_.erase(snapshot->id);
    throw;
  }
  update.model = std::move(snapshot);
  return update;
}

std::shared_ptr<const SpaceModel> DosmService::get_space(const Id& space_id) const {
  return space_entry(space_id)->snapshot();
}

std::vector<Id> DosmService::space_ids() const {
  std::shared_lock lock(registry_mutex_);
  std::vector<Id> ids;
  for (const auto& [id, entry] : spaces_) ids.push_back(id);
  return ids;
}

SpaceUpdate DosmService::apply(const Id& space_id, const Mutation& mutation) {
  auto entry = space_entry(space_id);
  std::lock_guard writer(entry->writer);
  auto current = entry->snapshot();

  SpaceUpdate update;
  Mutation effective = mutation;
  if (mutation.op == MutationOp::Add && mutation.kind == EntityKind::Anchor && mutation.entity) {
    auto anchor = std::get<Anchor>(*mutation.entity);
    if (!anchor.room_id) {
      anchor.room_id = twin::room_of_point(*current, anchor.position.head<2>());
      effective.entity = anchor;
    }
  }
  auto next = std::make_shared<const SpaceModel>(apply_mutation(*current, effective));
  persist(*next);
  for (const auto& w : validate_space(*next).warnings) update.warnings.push_back(w.message);

  const bool geometry_changed = mutation.kind == EntityKind::Room || mutation.kind == EntityKind::Wall ||
                                mutation.kind == EntityKind::Portal;
  publish(*entry, next, geometry_changed);
  update.model = std::move(next);
  return update;
}

std::shared_ptr<const nav::NavGraph> DosmService::nav_graph(const Id& space_id) const {
  auto entry = space_entry(space_id);
  std::lock_guard lock(entry->snapshot_mutex);
  if (!entry->graph) {
    throw Error(ErrorCode::DegenerateSpace,
                entry->graph_error.value_or("space " + space_id + " has no navigation graph"));
  }
  return entry->graph;
}

Id DosmService::create_session(const Id& space_id) {
  space_entry(space_id);
  auto entry = std::make_shared<SessionEntry>();
  entry->state.space_id = space_id;
  std::unique_lock lock(registry_mutex_);
  Id id;
  do {
    id = generate_id();
  } while (sessions_.count(id));
  entry->state.id = id;
  sessions_[id] = std::move(entry);
  return id;
}

std::vector<Id> DosmService::set_preferences(const Id& session_id, std::span<const Id> asset_ids) {
  auto entry = session_entry(session_id);
  std::lock_guard lock(entry->mutex);
  auto model = get_space(entry->state.space_id);

  std::vector<Id> deduped;
  std::set<Id> seen;
  std::vector<std::string> unknown;
  for (const Id& id : asset_ids) {
    if (!seen.insert(id).second) continue;
    const Anchor* anchor = model->find_anchor(id);
    if (!anchor || anchor->kind != AnchorKind::Asset) {
      unknown.push_back(id);
      continue;
    }
    deduped.push_back(id);
  }
  if (!unknown.empty()) {
    std::string msg = "unknown assets:";
    for (const auto& id : unknown) msg += " " + id;
    throw Error(ErrorCode::AssetNotFound, msg, unknown);
  }
  entry->state.preferences = deduped;
  return deduped;
}

IngestResult DosmService::ingest_readings(const Id& session_id, std::span<const RssiReading> readings) {
  auto entry = session_entry(session_id);
  std::lock_guard lock(entry->mutex);
  VisitorSession& s = entry->state;
  auto model = get_space(s.space_id);

  const localization::LocalizerConfig& cfg = config_.localizer;
  localization::FixOutcome fix = localization::localize(readings, *model, s.last_fix, cfg);

  IngestResult result;
  result.status = std::string(localization::fix_status_name(fix.status));
  result.dropped = fix.dropped;
  result.stale = fix.stale;
  if (fix.status != localization::FixStatus::Ok) return result;

  s.last_fix = fix.estimate;
  result.estimate = fix.estimate;
  result.raw = fix.raw;
  auto events = localization::detect_proximity(s.notify_state, s.id, *fix.estimate, *model,
                                               cfg.enter_radius, cfg.exit_radius);
  for (auto& e : events) {
    const std::uint64_t seq = s.event_log.empty() ? 1 : s.event_log.back().seq + 1;
    s.event_log.push_back({seq, std::move(e)});
    result.events.push_back(s.event_log.back());
  }
  return result;
}

nav::Route DosmService::get_route(const Id& session_id, nav::OrderMode mode) {
  auto entry = session_entry(session_id);
  std::lock_guard lock(entry->mutex);
  const VisitorSession& s = entry->state;
  if (!s.last_fix) {
    throw Error(ErrorCode::NoPosition, "session " + session_id + " has no position fix yet");
  }
  auto model = get_space(s.space_id);
  auto graph = nav_graph(s.space_id);
  return nav::plan_route(*graph, *model, s.last_fix->position, s.preferences, mode);
}

AssetDetails DosmService::get_asset_details(const Id& space_id, const Id& asset_id) const {
  auto model = get_space(space_id);
  const Anchor* anchor = model->find_anchor(asset_id);
  if (!anchor || anchor->kind != AnchorKind::Asset) {
    throw Error(ErrorCode::AssetNotFound, "asset " + asset_id + " not found", {asset_id});
  }
  AssetDetails d;
  d.id = anchor->id;
  d.title = anchor->title;
  d.description = anchor->description;
  d.position = anchor->position;
  d.room_id = anchor->room_id ? anchor->room_id : twin::room_of_point(*model, anchor->position.head<2>());
  if (d.room_id) {
    if (const Room* room = model->find_room(*d.room_id)) d.room_name = room->name;
  }
  if (const PoiDeviceMapping* m = model->mapping_for_asset(asset_id)) d.beacon_id = m->beacon_id;
  return d;
}

NotificationPage DosmService::poll_notifications(const Id& session_id, std::uint64_t after_seq) const {
  auto entry = session_entry(session_id);
  std::lock_guard lock(entry->mutex);
  NotificationPage page;
  page.next_seq = after_seq;
  for (const SessionEvent& e : entry->state.event_log) {
    if (e.seq > after_seq) {
      page.events.push_back(e);
      page.next_seq = e.seq;
    }
  }
  return page;
}

VisitorSession DosmService::session(const Id& session_id) const {
  auto entry = session_entry(session_id);
  std::lock_guard lock(entry->mutex);
  return entry->state;
}

void DosmService::snapshot_sessions() const {
  if (!config_.data_dir) return;
  std::vector<std::shared_ptr<SessionEntry>> entries;
  {
    std::shared_lock lock(registry_mutex_);
    for (const auto& [id, entry] : sessions_) entries.push_back(entry);
  }
  std::map<Id, Json> by_space;
  for (const auto& entry : entries) {
    std::lock_guard lock(entry->mutex);
    Json& list = by_space[entry->state.space_id];
    if (list.is_null()) list = Json::array();
    list.push_back(wire::session_to_json(entry->state));
  }
  const fs::path dir = *config_.data_dir / "sessions";
  fs::create_directories(dir);
  for (const auto& [space_id, list] : by_space) {
    write_file_atomic(dir / (space_id + ".json"), list.dump(2) + "\n");
  }
}

}  // namespace dosm::service
