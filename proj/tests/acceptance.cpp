// Acceptance run: one PASS/FAIL line per criterion, exit status 1 if any fails.
// Tolerances and instance counts are fixed here.

#include <algorithm>
#include <cstdio>
#include <functional>
#include <numbers>
#include <numeric>
#include <random>
#include <sstream>

#include "dosm/cli.hpp"
#include "dosm/error.hpp"
#include "dosm/localization.hpp"
#include "dosm/navigation.hpp"
#include "dosm/simulator.hpp"
#include "dosm/space_io.hpp"
#include "dosm/trilateration.hpp"
#include "dosm/twin_builder.hpp"
#include "http_contract.hpp"
#include "support.hpp"

using namespace dosm;

namespace {

constexpr double kTrilaterationTol = 1e-6;
constexpr double kNoiselessMedianTol = 1e-3;
constexpr double kNoisyMedianMax = 1.5;
constexpr double kNoisyP95Max = 4.0;
constexpr double kAnchorTol = 1e-9;
constexpr int kTrilaterationCases = 1000;
constexpr int kDijkstraGrids = 200;
constexpr int kWaypointCases = 100;
constexpr int kAnchorCases = 1000;
constexpr int kPersistenceCases = 100;
constexpr std::size_t kNoisyMinSteps = 1000;
constexpr std::uint64_t kNoisySeeds[] = {1, 2, 3, 4, 5};

struct Outcome {
  bool ok = true;
  std::string detail;

  void fail(const std::string& why) {
    if (ok) detail = why;
    ok = false;
  }
};

testing::ExactCost exact(const nav::PathCost& p) { return {p.orthogonal, p.diagonal}; }

std::string sci(double v) {
  std::ostringstream s;
  s.precision(2);
  s << std::scientific << v;
  return s.str();
}

std::string fmt(double v, int digits = 4) {
  std::ostringstream s;
  s.precision(digits);
  s << std::fixed << v;
  return s.str();
}

// 3 to 6 beacons in a 20 x 20 box, a clearly 2D spread, truth a random convex combination.
Outcome trilateration_inversion() {
  Outcome out;
  std::mt19937_64 rng(1001);
  std::uniform_real_distribution<double> coord(0.0, 20.0), w(0.0, 1.0);
  double worst = 0.0;
  int done = 0;
  while (done < kTrilaterationCases) {
    const int n = 3 + static_cast<int>(rng() % 4);
    std::vector<Vec2> beacons;
    for (int i = 0; i < n; ++i) beacons.push_back({coord(rng), coord(rng)});
    const Vec2 e1 = beacons[1] - beacons[0], e2 = beacons[2] - beacons[0];
    if (std::abs(e1.x() * e2.y() - e1.y() * e2.x()) < 4.0) continue;
    Vec2 truth = Vec2::Zero();
    double total = 0.0;
    for (const Vec2& b : beacons) {
      const double wi = w(rng);
      truth += wi * b;
      total += wi;
    }
    truth /= total;
    std::vector<localization::Range<double>> ranges;
    for (const Vec2& b : beacons) ranges.push_back({b, (b - truth).norm()});
    try {
      const double err = (localization::trilaterate(ranges).position - truth).norm();
      worst = std::max(worst, err);
      if (err > kTrilaterationTol) out.fail("case " + std::to_string(done) + " error " + std::to_string(err));
    } catch (const Error& e) {
      out.fail("case " + std::to_string(done) + " threw " + e.what());
    }
    ++done;
  }
  if (out.ok) out.detail = "worst error " + sci(worst) + " m over " + std::to_string(done) + " cases";
  return out;
}

Outcome noiseless_end_to_end() {
  Outcome out;
  const auto sf = sim::load_scenario(testing::fixture("demo_scenario.json"));
  if (sf.scenario.config.noise_sigma_db != 0.0) out.fail("reference scenario is not noiseless");
  const SpaceModel model = load_space(sf.space_path).model;
  const sim::SimTrace trace = sim::run_scenario(model, sf.scenario);
  for (const auto& s : trace.steps) {
    if (s.readings.size() < 3) out.fail("step " + std::to_string(s.step) + " hears fewer than 3 beacons");
  }
  const auto& sum = trace.summary;
  if (sum.median_error > kNoiselessMedianTol) out.fail("median error " + std::to_string(sum.median_error));
  if (sum.fix_availability_ratio != 1.0) out.fail("availability " + std::to_string(sum.fix_availability_ratio));
  if (out.ok) {
    out.detail = std::to_string(sum.steps) + " steps, median " + sci(sum.median_error) +
                 " m, availability " + fmt(sum.fix_availability_ratio, 3);
  }
  return out;
}

Outcome noisy_end_to_end() {
  Outcome out;
  const auto sf = sim::load_scenario(testing::fixture("noisy_scenario.json"));
  const SpaceModel model = load_space(sf.space_path).model;
  const auto& cfg = sf.scenario.config;
  if (cfg.noise_sigma_db != 2.0) out.fail("scenario sigma is not 2 dB");
  for (const auto& b : model.beacons) {
    if (b.path_loss_exponent != 2.0) out.fail("beacon " + b.id + " exponent is not 2");
  }
  std::ostringstream measured;
  for (std::uint64_t seed : kNoisySeeds) {
    sim::Scenario s = sf.scenario;
    s.config.seed = seed;
    const sim::Summary sum = sim::run_scenario(model, s).summary;
    measured << (seed == kNoisySeeds[0] ? "" : " ") << "seed " << seed << ": median " << fmt(sum.median_error)
             << " p95 " << fmt(sum.p95_error) << ";";
    if (sum.steps < kNoisyMinSteps) {
      out.fail("seed " + std::to_string(seed) + " ran only " + std::to_string(sum.steps) + " steps");
    }
    if (sum.median_error > kNoisyMedianMax || sum.p95_error > kNoisyP95Max) {
      out.fail("seed " + std::to_string(seed) + " outside the band");
    }
  }
  out.detail += (out.detail.empty() ? "" : " | ") + measured.str();
  return out;
}

Outcome dijkstra_oracle() {
  Outcome out;
  std::mt19937_64 rng(1004);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  int queries = 0;
  for (int trial = 0; trial < kDijkstraGrids; ++trial) {
    const int w = 2 + static_cast<int>(rng() % 5), h = 2 + static_cast<int>(rng() % 5);
    nav::NavGraph g = nav::make_grid(w, h);
    for (int r = 0; r < h; ++r) {
      for (int c = 0; c < w; ++c) {
        if (u(rng) < 0.35) g.cells(r, c) = static_cast<std::uint8_t>(nav::CellState::Blocked);
      }
    }
    const testing::Grid grid = testing::grid_of(g);
    std::vector<nav::Cell> open;
    for (int r = 0; r < h; ++r) {
      for (int c = 0; c < w; ++c) {
        if (grid[r][c]) open.push_back({r, c});
      }
    }
    if (open.empty()) continue;
    testing::ExhaustivePathSearch oracle(grid);
    for (int q = 0; q < 3; ++q) {
      const nav::Cell a = open[rng() % open.size()], b = open[rng() % open.size()];
      const auto expected = oracle.shortest(a.row, a.col, b.row, b.col);
      ++queries;
      const std::string tag = "grid " + std::to_string(trial) + " query " + std::to_string(q);
      try {
        const nav::Route route = nav::shortest_path(g, a, b);
        if (!expected) {
          out.fail(tag + ": found a path the oracle says does not exist");
          continue;
        }
        if (!(exact(route.steps) == *expected)) out.fail(tag + ": cost differs from oracle");
        if (route.cells.front() != a || route.cells.back() != b) out.fail(tag + ": wrong endpoints");
        for (std::size_t i = 1; i < route.cells.size(); ++i) {
          const nav::Cell& p = route.cells[i - 1];
          const nav::Cell& c = route.cells[i];
          const int dr = c.row - p.row, dc = c.col - p.col;
          if (std::max(std::abs(dr), std::abs(dc)) != 1 || !testing::legal_step(grid, p.row, p.col, dr, dc)) {
            out.fail(tag + ": illegal step");
          }
        }
      } catch (const Error& e) {
        if (expected || e.code() != ErrorCode::NoPath) out.fail(tag + ": threw " + e.what());
      }
    }
  }
  if (out.ok) out.detail = std::to_string(queries) + " queries on " + std::to_string(kDijkstraGrids) + " grids";
  return out;
}

// Box room on a 1 m grid with short random walls and k <= 6 assets in the start's component.
Outcome waypoint_optimality() {
  Outcome out;
  std::mt19937_64 rng(1005);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  int done = 0, attempts = 0;
  while (done < kWaypointCases && attempts < 100 * kWaypointCases) {
    ++attempts;
    const double w = 3 + static_cast<double>(rng() % 4), h = 3 + static_cast<double>(rng() % 4);
    SpaceModel m;
    m.id = "wp";
    m.rooms.push_back({"r", "", {{0, 0}, {w, 0}, {w, h}, {0, h}}});
    const int walls = static_cast<int>(rng() % 3);
    for (int i = 0; i < walls; ++i) {
      const Vec2 a(w * u(rng), h * u(rng));
      m.walls.push_back({"w" + std::to_string(i), a, a + Vec2(2 * u(rng) - 1, 2 * u(rng) - 1)});
    }
    const nav::NavGraph g = nav::build_nav_graph(m, 1.0, 0.3);
    const testing::Grid grid = testing::grid_of(g);
    int components = 0;
    const auto label = testing::flood_components(grid, &components);
    const Vec2 start(w * u(rng), h * u(rng));
    const nav::Cell s = nav::snap_to_graph(g, start);
    const int k = 1 + done % 6;
    std::vector<Id> ids;
    std::vector<nav::Cell> cells;
    for (int tries = 0; tries < 50 && static_cast<int>(ids.size()) < k; ++tries) {
      const Vec2 p(w * u(rng), h * u(rng));
      const nav::Cell c = nav::snap_to_graph(g, p);
      if (label[c.row][c.col] != label[s.row][s.col]) continue;
      Anchor a;
      a.id = "a" + std::to_string(ids.size());
      a.kind = AnchorKind::Asset;
      a.position = Vec3(p.x(), p.y(), 1.0);
      m.anchors.push_back(a);
      ids.push_back(a.id);
      cells.push_back(c);
    }
    if (static_cast<int>(ids.size()) < k) continue;
    testing::ExhaustivePathSearch oracle(grid);
    std::vector<std::size_t> perm(ids.size());
    std::iota(perm.begin(), perm.end(), 0);
    std::optional<testing::ExactCost> best;
    do {
      testing::ExactCost total;
      nav::Cell at = s;
      for (std::size_t i : perm) {
        total = total + *oracle.shortest(at.row, at.col, cells[i].row, cells[i].col);
        at = cells[i];
      }
      if (!best || testing::less_than(total, *best)) best = total;
    } while (std::next_permutation(perm.begin(), perm.end()));
    const nav::Route route = nav::plan_route(g, m, start, ids);
    if (!(exact(route.steps) == *best)) out.fail("instance " + std::to_string(done) + " is not optimal");
    ++done;
  }
  if (done < kWaypointCases) out.fail("generated only " + std::to_string(done) + " instances");
  if (out.ok) out.detail = std::to_string(done) + " instances, k = 1..6";
  return out;
}

Outcome anchor_placement() {
  Outcome out;
  constexpr double pi = std::numbers::pi;
  const CapturePoint origin{"c0", 0, Vec2::Zero(), 0.0, 1.5};
  auto ray = [](double yaw, double pitch, double depth) {
    twin::TagObservation o;
    o.anchor_id = "t";
    o.capture_id = "c0";
    o.yaw = yaw;
    o.pitch = pitch;
    o.depth = depth;
    return o;
  };
  if (twin::place_anchor(ray(0, 0, 2), origin).position != Vec3(2, 0, 1.5)) out.fail("forward example");
  if (twin::place_anchor(ray(pi / 2, 0, 3), origin).position != Vec3(0, 3, 1.5)) out.fail("left example");
  if (twin::place_anchor(ray(0, pi / 2, 1), origin).position != Vec3(0, 0, 2.5)) out.fail("up example");

  std::mt19937_64 rng(1006);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  double worst = 0.0;
  for (int i = 0; i < kAnchorCases; ++i) {
    const CapturePoint cp{"c0", 0, Vec2(40 * u(rng) - 20, 40 * u(rng) - 20), 2 * pi * u(rng) - pi, 1 + u(rng)};
    const auto obs = ray(4 * pi * u(rng) - 2 * pi, pi * u(rng) - pi / 2, 0.01 + 30 * u(rng));
    const Vec3 eye(cp.position.x(), cp.position.y(), cp.eye_height);
    const double err = std::abs((twin::place_anchor(obs, cp).position - eye).norm() - obs.depth);
    worst = std::max(worst, err);
    if (err > kAnchorTol) out.fail("case " + std::to_string(i) + " off by " + std::to_string(err));
  }
  if (out.ok) out.detail = "3 exact examples, worst deviation " + sci(worst) + " m";
  return out;
}

Outcome persistence() {
  Outcome out;
  testing::TempDir dir("acceptance-io");
  std::mt19937_64 rng(1007);
  struct Crash {};
  for (int i = 0; i < kPersistenceCases; ++i) {
    const SpaceModel m = testing::random_space(rng, i);
    const auto path = dir.path() / (m.id + ".json");
    const std::string tag = "space " + std::to_string(i);
    try {
      save_space(m, path);
      if (!(load_space(path).model == m)) out.fail(tag + ": round trip differs");
      const std::string before = read_text_file(path);
      SpaceModel changed = m;
      changed.name += " (edited)";
      ++changed.version;
      bool crashed = false;
      try {
        save_space(changed, path, [](const std::filesystem::path&) { throw Crash{}; });
      } catch (const Crash&) {
        crashed = true;
      }
      if (!crashed) out.fail(tag + ": crash hook not reached");
      if (read_text_file(path) != before || !(load_space(path).model == m)) out.fail(tag + ": original damaged");
    } catch (const Error& e) {
      out.fail(tag + ": " + e.what());
    }
  }
  if (out.ok) out.detail = std::to_string(kPersistenceCases) + " spaces, crash injected before every rename";
  return out;
}

std::size_t events_for(const SpaceModel& model, const std::vector<Vec2>& walk, const Id& asset) {
  sim::Scenario s;
  s.preferences = {asset};
  s.walk.polyline = walk;
  s.config.dt = 0.25;
  s.config.noise_sigma_db = 0.0;
  std::size_t n = 0;
  for (const auto& step : sim::run_scenario(model, s).steps) n += std::count(step.events.begin(), step.events.end(), asset);
  return n;
}

// Centerpiece at (10, 10): enter below 2 m, leave beyond 3 m.
Outcome proximity_hysteresis() {
  Outcome out;
  const SpaceModel model = load_space(testing::fixture("grid_hall.json")).model;
  const std::vector<Vec2> approach_retreat = {{10, 2}, {10, 9}, {10, 14.5}, {10, 9.5}};
  std::vector<Vec2> dwell = {{10, 4}};
  for (int i = 0; i < 10; ++i) {
    dwell.push_back({10.0 + (i % 2 == 0 ? 1.0 : -1.0), 9.0});
    dwell.push_back({10.0, i % 2 == 0 ? 11.2 : 8.8});
  }
  const std::size_t twice = events_for(model, approach_retreat, "centerpiece");
  const std::size_t once = events_for(model, dwell, "centerpiece");
  if (twice != 2) out.fail("approach-retreat-approach gave " + std::to_string(twice) + " events");
  if (once != 1) out.fail("dwell gave " + std::to_string(once) + " events");
  if (out.ok) out.detail = "2 events for approach-retreat-approach, 1 for dwell";
  return out;
}

Outcome determinism() {
  Outcome out;
  testing::TempDir dir("acceptance-det");
  const std::string scenario = testing::fixture("noisy_scenario.json").string();
  std::vector<std::string> traces;
  std::vector<std::string> printed;
  for (int run = 0; run < 2; ++run) {
    const std::string trace = (dir.path() / ("run" + std::to_string(run) + ".jsonl")).string();
    const auto r = cli::run_command({"dosm", "--json", "simulate", scenario, "--out", trace});
    if (r.exit_code != 0 || !r.machine) {
      out.fail("simulate failed: " + r.human);
      return out;
    }
    printed.push_back(*r.machine);
    traces.push_back(read_text_file(trace));
  }
  if (printed[0] != printed[1]) out.fail("stdout differs between runs");
  if (traces[0] != traces[1]) out.fail("trace files differ between runs");
  if (traces[0] != printed[0]) out.fail("trace file differs from stdout");
  if (out.ok) out.detail = std::to_string(printed[0].size()) + " identical bytes";
  return out;
}

Outcome service_contract() {
  Outcome out;
  testing::TempDir dir("acceptance-http");
  std::filesystem::create_directories(dir.path() / "blocked.json" / "keep");
  testing::LiveServer server(service::ServiceConfig{.data_dir = dir.path(), .id_seed = 1});
  if (server.port() <= 0) {
    out.fail("server did not bind");
    return out;
  }
  const auto checks = testing::run_http_contract(server.port());
  for (const auto& c : checks) {
    if (!c.ok) out.fail(c.name + ": " + c.detail);
  }
  if (out.ok) out.detail = std::to_string(checks.size()) + " requests";
  return out;
}

}  // namespace

int main() {
  const std::pair<const char*, std::function<Outcome()>> criteria[] = {
      {"trilateration-inversion", trilateration_inversion},
      {"noiseless-end-to-end", noiseless_end_to_end},
      {"noisy-end-to-end", noisy_end_to_end},
      {"dijkstra-oracle", dijkstra_oracle},
      {"waypoint-optimality", waypoint_optimality},
      {"anchor-placement", anchor_placement},
      {"persistence", persistence},
      {"proximity-hysteresis", proximity_hysteresis},
      {"determinism", determinism},
      {"service-contract", service_contract},
  };
  int failures = 0;
  for (const auto& [name, run] : criteria) {
    Outcome o;
    try {
      o = run();
    } catch (const std::exception& e) {
      o.fail(std::string("uncaught: ") + e.what());
    }
    if (!o.ok) ++failures;
    std::printf("%s %s: %s\n", o.ok ? "PASS" : "FAIL", name, o.detail.c_str());
    std::fflush(stdout);
  }
  return failures == 0 ? 0 : 1;
}
