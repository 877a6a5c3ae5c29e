#pragma once

// JSON encodings shared by the HTTP surface, the CLI and the simulator trace.

#include <string>
#include <vector>

#include "dosm/error.hpp"
#include "dosm/navigation.hpp"
#include "dosm/service.hpp"
#include "dosm/space_io.hpp"

namespace dosm::wire {

Json error_to_json(const Error& error);
Json estimate_to_json(const localization::PositionEstimate& estimate);
Json event_to_json(const service::SessionEvent& event);
Json ingest_to_json(const service::IngestResult& result);
Json route_to_json(const nav::Route& route);
Json nav_graph_to_json(const nav::NavGraph& graph);
Json asset_details_to_json(const service::AssetDetails& details);
Json session_to_json(const service::VisitorSession& session);

std::vector<localization::RssiReading> readings_from_json(const Json& j);

/// `{"op": "add"|"update"|"remove", "kind": <entity kind>, "id": <key>, "entity": {...}}`.
/// An update's entity is merge-patched onto the current entity, so partial documents only touch
/// the fields they name.
Mutation mutation_from_json(const Json& j, const SpaceModel& current, std::vector<std::string>& warnings);

}  // namespace dosm::wire
