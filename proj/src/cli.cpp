#include "dosm/cli.hpp"

#include <atomic>
#include <chrono>
#include <csignal>
#include <condition_variable>
#include <iomanip>
#include <iostream>
#include <sstream>
#include <thread>

#include <CLI11.hpp>

#include "dosm/error.hpp"
#include "dosm/http_server.hpp"
#include "dosm/navigation.hpp"
#include "dosm/service.hpp"
#include "dosm/simulator.hpp"
#include "dosm/space_io.hpp"
#include "dosm/twin_builder.hpp"
#include "dosm/wire.hpp"

namespace dosm::cli {

namespace fs = std::filesystem;

namespace {

struct GlobalFlags {
  std::string data_dir = "data";
  std::string listen = "127.0.0.1:8080";
  bool json = false;
  std::optional<std::uint64_t> seed;
};

std::string fixed(double v, int digits = 3) {
  std::ostringstream out;
  out << std::fixed << std::setprecision(digits) << v;
  return out.str();
}

std::vector<std::string> split(const std::string& text, char sep) {
  std::vector<std::string> parts;
  std::string part;
  std::istringstream in(text);
  while (std::getline(in, part, sep)) {
    if (!part.empty()) parts.push_back(part);
  }
  return parts;
}

Vec2 parse_point(const std::string& text) {
  const auto parts = split(text, ',');
  if (parts.size() != 2) throw Error(ErrorCode::InvalidArgument, "--from expects x,y");
  try {
    return {std::stod(parts[0]), std::stod(parts[1])};
  } catch (const std::exception&) {
    throw Error(ErrorCode::InvalidArgument, "--from expects numeric x,y");
  }
}

CommandOutcome finish(const GlobalFlags& g, std::string human, const Json& machine) {
  CommandOutcome out;
  out.human = std::move(human);
  if (g.json) out.machine = machine.dump(2) + "\n";
  return out;
}

CommandOutcome failure(const GlobalFlags& g, const Error& e) {
  CommandOutcome out;
  out.exit_code = 1;
  out.human = "error: " + std::string(e.what()) + "\n";
  for (const auto& d : e.details()) {
    if (out.human.find(d) == std::string::npos) out.human += "  " + d + "\n";
  }
  if (g.json) out.machine = Json{{"error", wire::error_to_json(e)}}.dump(2) + "\n";
  return out;
}

CommandOutcome cmd_validate(const GlobalFlags& g, const std::string& file) {
  LoadedSpace loaded = read_space_file(file);
  ValidationReport report = validate_space(loaded.model);
  std::ostringstream human;
  Json machine{{"id", loaded.model.id}, {"valid", report.ok()}};
  Json errors = Json::array();
  Json warnings = Json::array();
  for (const auto& e : report.errors) {
    human << "error: " << e.message << '\n';
    errors.push_back(e.message);
  }
  for (const auto& w : loaded.warnings) {
    human << "warning: " << w << '\n';
    warnings.push_back(w);
  }
  for (const auto& w : report.warnings) {
    human << "warning: " << w.message << '\n';
    warnings.push_back(w.message);
  }
  machine["errors"] = errors;
  machine["warnings"] = warnings;
  if (report.ok()) {
    human << "valid: " << loaded.model.id << " (version " << loaded.model.version << ", "
          << loaded.model.rooms.size() << " rooms, " << loaded.model.anchors.size() << " anchors, "
          << loaded.model.beacons.size() << " beacons)\n";
  } else {
    human << "invalid: " << report.errors.size() << " error(s)\n";
  }
  CommandOutcome out = finish(g, human.str(), machine);
  out.exit_code = report.ok() ? 0 : 1;
  return out;
}

CommandOutcome cmd_import(const GlobalFlags& g, const std::string& file, const std::string& scans,
                          const std::string& out_path) {
  LoadedSpace loaded = load_space(file);
  SpaceModel model = loaded.model;
  std::vector<std::string> warnings = loaded.warnings;
  if (!scans.empty()) {
    DecodeContext ctx;
    twin::ScanDocument scan = twin::scan_from_json(parse_document(read_text_file(scans)), ctx);
    twin::TagResult tagged = twin::import_scan(model, scan);
    model = std::move(tagged.model);
    warnings.insert(warnings.end(), ctx.warnings.begin(), ctx.warnings.end());
    warnings.insert(warnings.end(), tagged.warnings.begin(), tagged.warnings.end());
  }
  fs::path target = out_path;
  if (target.empty()) {
    fs::create_directories(g.data_dir);
    target = fs::path(g.data_dir) / (model.id + ".json");
  }
  save_space(model, target);

  std::ostringstream human;
  for (const auto& w : warnings) human << "warning: " << w << '\n';
  human << "imported " << model.id << " version " << model.version << ": " << model.capture_points.size()
        << " capture points, " << model.anchors.size() << " anchors -> " << target.string() << '\n';
  Json machine{{"id", model.id},
               {"version", model.version},
               {"capture_points", model.capture_points.size()},
               {"anchors", model.anchors.size()},
               {"written", target.string()},
               {"warnings", warnings}};
  return finish(g, human.str(), machine);
}

CommandOutcome cmd_route(const GlobalFlags& g, const std::string& file, const std::string& from,
                         const std::string& assets, const std::string& mode, double cell_size, double clearance) {
  LoadedSpace loaded = load_space(file);
  const Vec2 start = parse_point(from);
  const std::vector<Id> ids = split(assets, ',');
  nav::OrderMode order = nav::OrderMode::Optimal;
  if (mode == "as-given") {
    order = nav::OrderMode::AsGiven;
  } else if (mode != "optimal") {
    throw Error(ErrorCode::InvalidArgument, "--mode must be optimal or as-given");
  }
  const nav::NavGraph graph = nav::build_nav_graph(loaded.model, cell_size, clearance);
  const nav::Route route = nav::plan_route(graph, loaded.model, start, ids, order);

  std::ostringstream human;
  human << "route length " << fixed(route.length) << " m, " << route.cells.size() << " cells\n";
  for (std::size_t i = 0; i < route.visit_order.size(); ++i) {
    const auto& v = route.visit_order[i];
    const Vec2& p = route.polyline[v.polyline_index];
    human << "  " << (i + 1) << ". " << v.asset_id << " at (" << fixed(p.x(), 2) << ", " << fixed(p.y(), 2) << ")\n";
  }
  return finish(g, human.str(), wire::route_to_json(route));
}

CommandOutcome cmd_simulate(const GlobalFlags& g, const std::string& file, const std::string& out_path) {
  sim::ScenarioFile scenario = sim::load_scenario(file);
  if (g.seed) scenario.scenario.config.seed = *g.seed;
  LoadedSpace loaded = load_space(scenario.space_path);
  sim::SimTrace trace = sim::run_scenario(loaded.model, scenario.scenario);
  const std::string jsonl = sim::trace_to_jsonl(trace);
  if (!out_path.empty()) write_file_atomic(out_path, jsonl);

  const sim::Summary& s = trace.summary;
  std::ostringstream human;
  human << "steps " << s.steps << ", fixes " << s.fixes << ", availability " << fixed(s.fix_availability_ratio)
        << "\nmedian error " << fixed(s.median_error, 4) << " m, p95 error " << fixed(s.p95_error, 4)
        << " m\nproximity events " << s.events_count << "\n";
  CommandOutcome out;
  out.human = human.str();
  if (g.json) out.machine = jsonl;
  return out;
}

CommandOutcome cmd_evaluate(const GlobalFlags& g, const std::string& file) {
  const auto steps = sim::steps_from_jsonl(read_text_file(file));
  const sim::Summary s = sim::evaluate(steps);
  std::ostringstream human;
  human << "steps " << s.steps << ", fixes " << s.fixes << ", availability " << fixed(s.fix_availability_ratio)
        << "\nmedian error " << fixed(s.median_error, 4) << " m, p95 error " << fixed(s.p95_error, 4)
        << " m\nproximity events " << s.events_count << "\n";
  return finish(g, human.str(), sim::summary_to_json(s));
}

std::atomic<http::HttpServer*> g_active_server{nullptr};

extern "C" void handle_stop_signal(int) {
  if (auto* server = g_active_server.load()) server->stop();
}

CommandOutcome cmd_serve(const GlobalFlags& g, double snapshot_interval_s) {
  const auto colon = g.listen.rfind(':');
  if (colon == std::string::npos) throw Error(ErrorCode::InvalidArgument, "--listen expects host:port");
  const std::string host = g.listen.substr(0, colon);
  int port = 0;
  try {
    port = std::stoi(g.listen.substr(colon + 1));
  } catch (const std::exception&) {
    throw Error(ErrorCode::InvalidArgument, "--listen expects host:port");
  }

  service::ServiceConfig cfg;
  cfg.data_dir = fs::path(g.data_dir);
  if (g.seed) cfg.id_seed = *g.seed;
  service::DosmService svc(cfg);
  http::HttpServer server(svc);
  const int bound = server.bind(host, port);
  if (bound < 0) throw Error(ErrorCode::IoError, "cannot listen on " + g.listen);

  std::cout << "dosm listening on " << host << ":" << bound << " (data dir " << g.data_dir << ", "
            << svc.space_ids().size() << " spaces loaded)" << std::endl;

  std::mutex mu;
  std::condition_variable cv;
  bool done = false;
  std::thread snapshotter([&] {
    std::unique_lock lock(mu);
    while (!cv.wait_for(lock, std::chrono::duration<double>(snapshot_interval_s), [&] { return done; })) {
      try {
        svc.snapshot_sessions();
      } catch (const std::exception& e) {
        std::cerr << "session snapshot failed: " << e.what() << std::endl;
      }
    }
  });

  g_active_server = &server;
  std::signal(SIGINT, handle_stop_signal);
  std::signal(SIGTERM, handle_stop_signal);
  server.listen();
  g_active_server = nullptr;
  {
    std::lock_guard lock(mu);
    done = true;
  }
  cv.notify_all();
  snapshotter.join();
  svc.snapshot_sessions();
  return {0, "dosm stopped\n", std::nullopt};
}

}  // namespace

CommandOutcome run_command(const std::vector<std::string>& argv) {
  CLI::App app{"dosm - digital object space management service", "dosm"};
  app.require_subcommand(1);
  app.fallthrough();

  GlobalFlags g;
  std::uint64_t seed = 0;
  app.add_option("--data-dir", g.data_dir, "Directory holding space documents")->envname("DOSM_DATA_DIR");
  app.add_option("--listen", g.listen, "host:port for serve")->envname("DOSM_LISTEN");
  app.add_flag("--json", g.json, "Emit machine-readable output")->envname("DOSM_JSON");
  auto* seed_opt = app.add_option("--seed", seed, "Seed for simulation and id generation")->envname("DOSM_SEED");

  std::string file;
  std::string scans;
  std::string out_path;
  std::string from;
  std::string assets;
  std::string mode = "optimal";
  double cell_size = nav::kDefaultCellSize;
  double clearance = nav::kDefaultClearance;
  double snapshot_interval = 30.0;

  auto* serve = app.add_subcommand("serve", "Start the HTTP service");
  serve->add_option("--snapshot-interval", snapshot_interval, "Seconds between session snapshots")
      ->check(CLI::PositiveNumber);

  auto* validate = app.add_subcommand("validate", "Validate a space document");
  validate->add_option("space-file", file)->required();

  auto* import = app.add_subcommand("import", "Import a space, optionally applying a scan document");
  import->add_option("space-file", file)->required();
  import->add_option("--scans", scans, "Scan document with capture steps and tag observations");
  import->add_option("--out", out_path, "Output path (default <data-dir>/<id>.json)");

  auto* route = app.add_subcommand("route", "Plan a route through preferred assets");
  route->add_option("space-file", file)->required();
  route->add_option("--from", from, "Start point x,y in meters")->required();
  route->add_option("--assets", assets, "Comma-separated asset ids");
  route->add_option("--mode", mode, "optimal or as-given");
  route->add_option("--cell-size", cell_size)->check(CLI::PositiveNumber);
  route->add_option("--clearance", clearance)->check(CLI::NonNegativeNumber);

  auto* simulate = app.add_subcommand("simulate", "Run a simulator scenario");
  simulate->add_option("scenario-file", file)->required();
  simulate->add_option("--out", out_path, "Write the trace to this file");

  auto* evaluate = app.add_subcommand("evaluate", "Summarize a trace file");
  evaluate->add_option("trace-file", file)->required();

  std::vector<std::string> args(argv.begin() + (argv.empty() ? 0 : 1), argv.end());
  std::reverse(args.begin(), args.end());
  try {
    app.parse(args);
  } catch (const CLI::CallForHelp&) {
    return {0, app.help(), std::nullopt};
  } catch (const CLI::ParseError& e) {
    return {2, "usage error: " + std::string(e.what()) + "\n\n" + app.help(), std::nullopt};
  }
  if (seed_opt->count() > 0) g.seed = seed;

  try {
    if (*serve) return cmd_serve(g, snapshot_interval);
    if (*validate) return cmd_validate(g, file);
    if (*import) return cmd_import(g, file, scans, out_path);
    if (*route) return cmd_route(g, file, from, assets, mode, cell_size, clearance);
    if (*simulate) return cmd_simulate(g, file, out_path);
    if (*evaluate) return cmd_evaluate(g, file);
  } catch (const Error& e) {
    return failure(g, e);
  } catch (const std::exception& e) {
    return failure(g, Error(ErrorCode::IoError, e.what()));
  }
  return {2, app.help(), std::nullopt};
}

}  // namespace dosm::cli
