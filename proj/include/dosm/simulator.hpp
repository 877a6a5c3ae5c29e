#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "dosm/localization.hpp"
#include "dosm/navigation.hpp"
#include "dosm/space_io.hpp"
#include "dosm/space_model.hpp"

namespace dosm::sim {

// xoshiro256** 1.0, seeded by expanding the 64-bit seed with splitmix64 into the four state words.
class Rng {
public:
  explicit Rng(std::uint64_t seed);

  std::uint64_t next();

  /// 53-bit uniform in [0, 1): (next() >> 11) * 2^-53.
  double uniform();

  /// Box-Muller, one draw per call: u1 = 1 - uniform(), then u2 = uniform();
  /// returns sqrt(-2 ln u1) * cos(2 pi u2).
  double gaussian();

private:
  std::array<std::uint64_t, 4> s_{};
};

struct SimConfig {
  std::uint64_t seed = 1;
  double dt = 1.0;               // seconds between poses
  double speed = 1.0;            // meters per second
  double noise_sigma_db = 0.0;
  double range_limit = 15.0;     // meters; beacons beyond it emit nothing
  std::optional<localization::PathLossParams> path_loss;  // overrides per-beacon parameters
  std::int64_t start_time_ms = 0;
  localization::LocalizerConfig localizer;
  double cell_size = nav::kDefaultCellSize;
  double clearance = nav::kDefaultClearance;
};

struct TimedPose {
  double t = 0.0;
  Vec2 position = Vec2::Zero();
};

/// Constant-speed traversal of the polyline: one pose every dt from t = 0, plus the endpoint.
std::vector<TimedPose> simulate_walk(std::span<const Vec2> polyline, const SimConfig& config);
std::vector<TimedPose> simulate_walk(const nav::Route& route, const SimConfig& config);

/// rssi = P0 - 10 n log10(max(d, 0.1)) + N(0, sigma) for every beacon within range (2D distance),
/// in model order. One gaussian draw per emitted reading, sigma 0 included.
std::vector<localization::RssiReading> synth_readings(const TimedPose& pose, std::span<const BeaconDevice> beacons,
                                                      const SimConfig& config, Rng& rng);

struct WalkPlan {
  std::vector<Id> to;        // visit these assets in this order via the navigation grid
  std::vector<Vec2> polyline;  // or walk this polyline verbatim
};

struct Scenario {
  std::vector<Id> preferences;
  std::optional<Vec2> start;  // defaults to the origin capture point, else the first polyline point
  WalkPlan walk;
  SimConfig config;
};

struct StepRecord {
  std::size_t step = 0;
  double t = 0.0;
  Vec2 truth = Vec2::Zero();
  std::vector<localization::RssiReading> readings;
  std::string status;
  std::optional<Vec2> raw;       // trilateration fix
  std::optional<Vec2> estimate;  // smoothed fix
  std::optional<double> error;   // |truth - raw|
  std::optional<double> smoothed_error;
  std::vector<Id> events;        // assets notified at this step
};

struct Summary {
  double median_error = 0.0;  // lower median
  double p95_error = 0.0;     // nearest rank
  double fix_availability_ratio = 0.0;
  std::size_t events_count = 0;
  std::size_t steps = 0;
  std::size_t fixes = 0;
};

struct SimTrace {
  std::vector<StepRecord> steps;
  Summary summary;
  double route_length = 0.0;
};

SimTrace run_scenario(const SpaceModel& model, const Scenario& scenario);

Summary evaluate(std::span<const StepRecord> steps);

/// Line-delimited JSON: one record per step followed by `{"summary": {...}}`.
std::string trace_to_jsonl(const SimTrace& trace);
std::vector<StepRecord> steps_from_jsonl(std::string_view text);

Json summary_to_json(const Summary& summary);

/// Scenario document; `space` is resolved relative to the scenario file's directory.
struct ScenarioFile {
  std::filesystem::path space_path;
  Scenario scenario;
};
ScenarioFile scenario_from_json(const Json& j, const std::filesystem::path& base_dir);
ScenarioFile load_scenario(const std::filesystem::path& path);

}  // namespace dosm::sim
