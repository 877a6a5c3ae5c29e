#include "dosm/simulator.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

#include "dosm/error.hpp"
#include "dosm/service.hpp"

namespace dosm::sim {

namespace {

std::uint64_t splitmix64(std::uint64_t& x) {
  std::uint64_t z = (x += 0x9e3779b97f4a7c15ULL);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

constexpr std::uint64_t rotl(std::uint64_t x, int k) { return (x << k) | (x >> (64 - k)); }

constexpr double kTimeEps = 1e-9;

Json optional_vec(const std::optional<Vec2>& v) { return v ? vec_to_json(*v) : Json(nullptr); }

Json finite_or_null(double v) { return std::isfinite(v) ? Json(v) : Json(nullptr); }

}  // namespace

Rng::Rng(std::uint64_t seed) {
  for (auto& word : s_) word = splitmix64(seed);
}

std::uint64_t Rng::next() {
  const std::uint64_t result = rotl(s_[1] * 5, 7) * 9;
  const std::uint64_t t = s_[1] << 17;
  s_[2] ^= s_[0];
  s_[3] ^= s_[1];
  s_[1] ^= s_[2];
  s_[0] ^= s_[3];
  s_[2] ^= t;
  s_[3] = rotl(s_[3], 45);
  return result;
}

double Rng::uniform() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

double Rng::gaussian() {
  const double u1 = 1.0 - uniform();  // (0, 1]
  const double u2 = uniform();
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

std::vector<TimedPose> simulate_walk(std::span<const Vec2> polyline, const SimConfig& config) {
  if (polyline.empty()) throw Error(ErrorCode::EmptyRoute, "cannot walk an empty route");
  if (!(config.dt > 0.0) || !(config.speed > 0.0)) {
    throw Error(ErrorCode::InvalidArgument, "dt and speed must be positive");
  }
  std::vector<double> cumulative{0.0};
  for (std::size_t i = 1; i < polyline.size(); ++i) {
    cumulative.push_back(cumulative.back() + (polyline[i] - polyline[i - 1]).norm());
  }
  const double total = cumulative.back();
  const double duration = total / config.speed;

  auto at_distance = [&](double s) -> Vec2 {
    if (s >= total) return polyline.back();
    auto it = std::upper_bound(cumulative.begin(), cumulative.end(), s);
    const std::size_t i = static_cast<std::size_t>(it - cumulative.begin()) - 1;
    const double seg = cumulative[i + 1] - cumulative[i];
    if (seg <= 0.0) return polyline[i];
    return polyline[i] + (s - cumulative[i]) / seg * (polyline[i + 1] - polyline[i]);
  };

  std::vector<TimedPose> poses;
  const auto full_steps = static_cast<std::size_t>(std::floor(duration / config.dt + kTimeEps));
  for (std::size_t k = 0; k <= full_steps; ++k) {
    const double t = static_cast<double>(k) * config.dt;
    poses.push_back({t, at_distance(std::min(total, t * config.speed))});
  }
  if (duration - static_cast<double>(full_steps) * config.dt > kTimeEps) {
    poses.push_back({duration, polyline.back()});
  }
  return poses;
}

std::vector<TimedPose> simulate_walk(const nav::Route& route, const SimConfig& config) {
  return simulate_walk(std::span<const Vec2>(route.polyline), config);
}

std::vector<localization::RssiReading> synth_readings(const TimedPose& pose, std::span<const BeaconDevice> beacons,
                                                      const SimConfig& config, Rng& rng) {
  std::vector<localization::RssiReading> out;
  const auto timestamp = config.start_time_ms + static_cast<std::int64_t>(std::llround(pose.t * 1000.0));
  for (const BeaconDevice& beacon : beacons) {
    const double d = (beacon.position.head<2>() - pose.position).norm();
    if (d > config.range_limit) continue;
    const localization::PathLossParams params =
        config.path_loss ? *config.path_loss : localization::params_of(beacon);
    const double noise = rng.gaussian() * config.noise_sigma_db;
    double rssi = params.tx_power_dbm_at_1m -
                  10.0 * params.path_loss_exponent * std::log10(std::max(d, localization::kMinRange)) + noise;
    rssi = std::clamp(rssi, localization::kMinRssi, localization::kMaxRssi);
    out.push_back({beacon.id, rssi, timestamp});
  }
  return out;
}

Summary evaluate(std::span<const StepRecord> steps) {
  if (steps.empty()) throw Error(ErrorCode::EmptyTrace, "cannot evaluate an empty trace");
  Summary s;
  s.steps = steps.size();
  std::vector<double> errors;
  for (const StepRecord& r : steps) {
    if (r.error) errors.push_back(*r.error);
    s.events_count += r.events.size();
  }
  s.fixes = errors.size();
  s.fix_availability_ratio = static_cast<double>(errors.size()) / static_cast<double>(steps.size());
  if (errors.empty()) {
    s.median_error = s.p95_error = std::numeric_limits<double>::quiet_NaN();
    return s;
  }
  std::sort(errors.begin(), errors.end());
  const std::size_t n = errors.size();
  s.median_error = errors[(n - 1) / 2];
  const auto rank = static_cast<std::size_t>(std::ceil(0.95 * static_cast<double>(n)));
  s.p95_error = errors[std::max<std::size_t>(rank, 1) - 1];
  return s;
}

SimTrace run_scenario(const SpaceModel& model, const Scenario& scenario) {
  const SimConfig& cfg = scenario.config;
  service::ServiceConfig svc_cfg;
  svc_cfg.localizer = cfg.localizer;
  svc_cfg.cell_size = cfg.cell_size;
  svc_cfg.clearance = cfg.clearance;
  svc_cfg.id_seed = cfg.seed;
  service::DosmService svc(svc_cfg);
  svc.import_space(model);
  const Id session = svc.create_session(model.id);
  svc.set_preferences(session, scenario.preferences);

  SimTrace trace;
  std::vector<Vec2> path;
  if (!scenario.walk.polyline.empty()) {
    path = scenario.walk.polyline;
    if (scenario.start && *scenario.start != path.front()) path.insert(path.begin(), *scenario.start);
    for (std::size_t i = 1; i < path.size(); ++i) trace.route_length += (path[i] - path[i - 1]).norm();
  } else {
    Vec2 start;
    if (scenario.start) {
      start = *scenario.start;
    } else {
      auto origin = std::find_if(model.capture_points.begin(), model.capture_points.end(),
                                 [](const CapturePoint& cp) { return cp.order == 0; });
      if (origin == model.capture_points.end()) {
        throw Error(ErrorCode::InvalidArgument, "scenario needs a start point (space has no scan origin)");
      }
      start = origin->position;
    }
    nav::Route route = nav::plan_route(*svc.nav_graph(model.id), model, start, scenario.walk.to,
                                       nav::OrderMode::AsGiven);
    path = route.polyline;
    trace.route_length = route.length;
  }

  Rng rng(cfg.seed);
  const auto poses = simulate_walk(std::span<const Vec2>(path), cfg);
  for (std::size_t k = 0; k < poses.size(); ++k) {
    StepRecord rec;
    rec.step = k;
    rec.t = poses[k].t;
    rec.truth = poses[k].position;
    rec.readings = synth_readings(poses[k], model.beacons, cfg, rng);
    service::IngestResult result = svc.ingest_readings(session, rec.readings);
    rec.status = result.status;
    if (result.raw) {
      rec.raw = result.raw->position;
      rec.error = (rec.truth - *rec.raw).norm();
    }
    if (result.estimate) {
      rec.estimate = result.estimate->position;
      rec.smoothed_error = (rec.truth - *rec.estimate).norm();
    }
    for (const auto& e : result.events) rec.events.push_back(e.event.asset_id);
    trace.steps.push_back(std::move(rec));
  }
  trace.summary = evaluate(trace.steps);
  return trace;
}

Json summary_to_json(const Summary& s) {
  Json j;
  j["median_error"] = finite_or_null(s.median_error);
  j["p95_error"] = finite_or_null(s.p95_error);
  j["fix_availability_ratio"] = s.fix_availability_ratio;
  j["events_count"] = s.events_count;
  j["steps"] = s.steps;
  j["fixes"] = s.fixes;
  return j;
}

std::string trace_to_jsonl(const SimTrace& trace) {
  std::ostringstream out;
  for (const StepRecord& r : trace.steps) {
    Json j;
    j["step"] = r.step;
    j["t"] = r.t;
    j["truth"] = vec_to_json(r.truth);
    Json readings = Json::array();
    for (const auto& reading : r.readings) {
      readings.push_back(Json{{"beacon_id", reading.beacon_id}, {"rssi", reading.rssi}, {"timestamp", reading.timestamp_ms}});
    }
    j["readings"] = readings;
    j["status"] = r.status;
    j["raw"] = optional_vec(r.raw);
    j["estimate"] = optional_vec(r.estimate);
    j["error"] = r.error ? Json(*r.error) : Json(nullptr);
    j["smoothed_error"] = r.smoothed_error ? Json(*r.smoothed_error) : Json(nullptr);
    j["events"] = r.events;
    out << j.dump() << '\n';
  }
  Json summary = summary_to_json(trace.summary);
  summary["route_length"] = trace.route_length;
  out << Json{{"summary", summary}}.dump() << '\n';
  return out.str();
}

std::vector<StepRecord> steps_from_jsonl(std::string_view text) {
  std::vector<StepRecord> steps;
  std::size_t line_no = 0;
  std::size_t start = 0;
  while (start < text.size()) {
    std::size_t end = text.find('\n', start);
    if (end == std::string_view::npos) end = text.size();
    const std::string_view line = text.substr(start, end - start);
    start = end + 1;
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string_view::npos) continue;
    Json j;
    try {
      j = Json::parse(line);
    } catch (const nlohmann::json::parse_error& e) {
      throw Error(ErrorCode::ParseError, "trace line " + std::to_string(line_no) + ": " + e.what());
    }
    if (j.contains("summary")) continue;
    try {
      StepRecord r;
      r.step = j.at("step").get<std::size_t>();
      r.t = j.at("t").get<double>();
      r.truth = vec2_from_json(j.at("truth"), "truth");
      r.status = j.value("status", std::string());
      if (j.contains("raw") && !j["raw"].is_null()) r.raw = vec2_from_json(j["raw"], "raw");
      if (j.contains("estimate") && !j["estimate"].is_null()) r.estimate = vec2_from_json(j["estimate"], "estimate");
      if (j.contains("error") && !j["error"].is_null()) r.error = j["error"].get<double>();
      if (j.contains("smoothed_error") && !j["smoothed_error"].is_null()) {
        r.smoothed_error = j["smoothed_error"].get<double>();
      }
      if (j.contains("events")) r.events = j["events"].get<std::vector<Id>>();
      steps.push_back(std::move(r));
    } catch (const nlohmann::json::exception& e) {
      throw Error(ErrorCode::ParseError, "trace line " + std::to_string(line_no) + ": " + e.what());
    }
  }
  return steps;
}

ScenarioFile scenario_from_json(const Json& j, const std::filesystem::path& base_dir) {
  auto bad = [](const std::string& msg) { return Error(ErrorCode::ParseError, msg); };
  if (!j.is_object()) throw bad("scenario must be an object");
  ScenarioFile out;
  try {
    const std::filesystem::path space = j.at("space").get<std::string>();
    out.space_path = space.is_absolute() ? space : base_dir / space;
    Scenario& s = out.scenario;
    if (j.contains("preferences")) s.preferences = j["preferences"].get<std::vector<Id>>();
    if (j.contains("start")) s.start = vec2_from_json(j["start"], "start");
    const Json& walk = j.at("walk");
    if (walk.contains("to")) s.walk.to = walk["to"].get<std::vector<Id>>();
    if (walk.contains("polyline")) {
      for (const auto& p : walk["polyline"]) s.walk.polyline.push_back(vec2_from_json(p, "walk.polyline"));
    }
    if (s.walk.to.empty() && s.walk.polyline.empty()) throw bad("walk needs 'to' or 'polyline'");

    SimConfig& c = s.config;
    const Json cfg = j.value("config", Json::object());
    c.seed = cfg.value("seed", c.seed);
    c.dt = cfg.value("dt", c.dt);
    c.speed = cfg.value("speed", c.speed);
    c.noise_sigma_db = cfg.value("noise_sigma_db", c.noise_sigma_db);
    c.range_limit = cfg.value("range_limit", c.range_limit);
    c.start_time_ms = cfg.value("start_time_ms", c.start_time_ms);
    c.cell_size = cfg.value("cell_size", c.cell_size);
    c.clearance = cfg.value("clearance", c.clearance);
    if (cfg.contains("path_loss")) {
      const Json& pl = cfg["path_loss"];
      c.path_loss = localization::PathLossParams{pl.value("tx_power_dbm_at_1m", kDefaultTxPowerDbm),
                                                 pl.value("path_loss_exponent", kDefaultPathLossExponent)};
    }
    c.localizer.smoothing_alpha = cfg.value("smoothing_alpha", c.localizer.smoothing_alpha);
    c.localizer.enter_radius = cfg.value("enter_radius", c.localizer.enter_radius);
    c.localizer.exit_radius = cfg.value("exit_radius", c.localizer.exit_radius);
    if (!(c.dt > 0.0) || !(c.speed > 0.0) || !(c.noise_sigma_db >= 0.0)) {
      throw bad("config requires dt > 0, speed > 0 and noise_sigma_db >= 0");
    }
  } catch (const nlohmann::json::exception& e) {
    throw bad(std::string("scenario: ") + e.what());
  }
  return out;
}

ScenarioFile load_scenario(const std::filesystem::path& path) {
  return scenario_from_json(parse_document(read_text_file(path)), path.parent_path());
}

}  // namespace dosm::sim
