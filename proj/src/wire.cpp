#include "dosm/wire.hpp"

#include <cmath>

namespace dosm::wire {

Json error_to_json(const Error& error) {
  Json j;
  j["code"] = error_code_name(error.code());
  j["message"] = error.what();
  if (!error.details().empty()) j["details"] = error.details();
  return j;
}

Json estimate_to_json(const localization::PositionEstimate& e) {
  Json j;
  j["position"] = vec_to_json(e.position);
  j["residual_rms"] = e.residual_rms;
  j["beacons_used"] = e.beacons_used;
  j["timestamp"] = e.timestamp_ms;
  if (e.nearest_asset_id) {
    j["nearest_asset_id"] = *e.nearest_asset_id;
    j["nearest_asset_distance"] = *e.nearest_asset_distance;
  }
  return j;
}

Json event_to_json(const service::SessionEvent& e) {
  Json j;
  j["seq"] = e.seq;
  j["session_id"] = e.event.session_id;
  j["asset_id"] = e.event.asset_id;
  j["distance"] = e.event.distance;
  j["timestamp"] = e.event.timestamp_ms;
  return j;
}

Json ingest_to_json(const service::IngestResult& r) {
  Json j;
  j["status"] = r.status;
  if (r.estimate) j["estimate"] = estimate_to_json(*r.estimate);
  if (r.raw) j["raw"] = estimate_to_json(*r.raw);
  j["dropped"] = r.dropped;
  j["stale"] = r.stale;
  j["events"] = Json::array();
  for (const auto& e : r.events) j["events"].push_back(event_to_json(e));
  return j;
}

Json route_to_json(const nav::Route& route) {
  Json j;
  j["length"] = route.length;
  j["cells"] = Json::array();
  for (const auto& c : route.cells) j["cells"].push_back(Json::array({c.row, c.col}));
  j["polyline"] = Json::array();
  for (const auto& p : route.polyline) j["polyline"].push_back(vec_to_json(p));
  j["visit_order"] = Json::array();
  for (const auto& v : route.visit_order) {
    j["visit_order"].push_back(Json{{"asset_id", v.asset_id}, {"polyline_index", v.polyline_index}});
  }
  return j;
}

Json nav_graph_to_json(const nav::NavGraph& g) {
  Json j;
  j["origin"] = vec_to_json(g.origin);
  j["cell_size"] = g.cell_size;
  j["width"] = g.width;
  j["height"] = g.height;
  j["model_version"] = g.model_version;
  j["passable_cells"] = g.passable_count();
  Json rows = Json::array();
  const std::string raster = nav::to_raster(g);
  std::size_t start = 0;
  while (start < raster.size()) {
    const std::size_t end = raster.find('\n', start);
    rows.push_back(raster.substr(start, end - start));
    start = end + 1;
  }
  j["raster"] = std::move(rows);
  return j;
}

Json asset_details_to_json(const service::AssetDetails& d) {
  Json j;
  j["id"] = d.id;
  j["title"] = d.title;
  j["description"] = d.description;
  j["position"] = vec_to_json(d.position);
  if (d.room_id) {
    Json room{{"id", *d.room_id}};
    if (d.room_name) room["name"] = *d.room_name;
    j["room"] = room;
  }
  if (d.beacon_id) j["beacon"] = *d.beacon_id;
  return j;
}

Json session_to_json(const service::VisitorSession& s) {
  Json j;
  j["id"] = s.id;
  j["space_id"] = s.space_id;
  j["preferences"] = s.preferences;
  if (s.last_fix) j["last_fix"] = estimate_to_json(*s.last_fix);
  Json notify = Json::object();
  for (const auto& [asset, state] : s.notify_state) {
    Json st{{"fired", state.fired}};
    if (std::isfinite(state.last_distance)) st["last_distance"] = state.last_distance;
    notify[asset] = st;
  }
  j["notify_state"] = notify;
  j["events"] = Json::array();
  for (const auto& e : s.event_log) j["events"].push_back(event_to_json(e));
  return j;
}

std::vector<localization::RssiReading> readings_from_json(const Json& j) {
  const Json* list = &j;
  if (j.is_object()) {
    auto it = j.find("readings");
    if (it == j.end()) throw Error(ErrorCode::InvalidArgument, "body must contain a readings array");
    list = &*it;
  }
  if (!list->is_array()) throw Error(ErrorCode::InvalidArgument, "readings must be an array");
  std::vector<localization::RssiReading> out;
  for (std::size_t i = 0; i < list->size(); ++i) {
    const Json& r = (*list)[i];
    const std::string path = "readings[" + std::to_string(i) + "]";
    if (!r.is_object() || !r.contains("beacon_id") || !r["beacon_id"].is_string() || !r.contains("rssi") ||
        !r["rssi"].is_number()) {
      throw Error(ErrorCode::InvalidArgument, path + " needs string beacon_id and numeric rssi");
    }
    localization::RssiReading reading;
    reading.beacon_id = r["beacon_id"].get<std::string>();
    reading.rssi = r["rssi"].get<double>();
    if (auto ts = r.find("timestamp"); ts != r.end()) {
      if (!ts->is_number_integer()) throw Error(ErrorCode::InvalidArgument, path + ".timestamp must be an integer");
      reading.timestamp_ms = ts->get<std::int64_t>();
    }
    out.push_back(std::move(reading));
  }
  return out;
}

Mutation mutation_from_json(const Json& j, const SpaceModel& current, std::vector<std::string>& warnings) {
  if (!j.is_object()) throw Error(ErrorCode::InvalidArgument, "mutation must be an object");
  auto text = [&](const char* key) -> std::string {
    auto it = j.find(key);
    if (it == j.end() || !it->is_string()) {
      throw Error(ErrorCode::InvalidArgument, std::string("mutation needs a string '") + key + "'");
    }
    return it->get<std::string>();
  };
  const std::string op = text("op");
  const std::string kind_name = text("kind");
  const auto kind = parse_entity_kind(kind_name);
  if (!kind) throw Error(ErrorCode::InvalidArgument, "unknown entity kind " + kind_name);
  for (const auto& [key, value] : j.items()) {
    if (key != "op" && key != "kind" && key != "id" && key != "entity") {
      warnings.push_back("unknown field " + key);
    }
  }

  DecodeContext ctx;
  Mutation m;
  if (op == "add") {
    if (!j.contains("entity")) throw Error(ErrorCode::InvalidArgument, "add needs an entity");
    m = Mutation::add(entity_from_json(*kind, j["entity"], ctx));
  } else if (op == "update") {
    const std::string id = j.contains("id") ? text("id") : std::string();
    if (!j.contains("entity") || !j["entity"].is_object()) {
      throw Error(ErrorCode::InvalidArgument, "update needs an entity object");
    }
    const std::string key = !id.empty() ? id
                            : j["entity"].contains(*kind == EntityKind::Mapping ? "asset_id" : "id")
                                ? j["entity"][*kind == EntityKind::Mapping ? "asset_id" : "id"].get<std::string>()
                                : std::string();
    auto existing = find_entity(current, *kind, key);
    if (!existing) throw Error(ErrorCode::UnknownId, "unknown id " + key, {key});
    Json merged = entity_to_json(*existing);
    merged.merge_patch(j["entity"]);
    m = Mutation::update(entity_from_json(*kind, merged, ctx));
    m.target = key;
  } else if (op == "remove") {
    m = Mutation::remove(*kind, text("id"));
  } else {
    throw Error(ErrorCode::InvalidArgument, "unknown mutation op " + op);
  }
  for (auto& w : ctx.warnings) warnings.push_back(std::move(w));
  return m;
}

}  // namespace dosm::wire
