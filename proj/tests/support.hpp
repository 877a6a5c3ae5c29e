#pragma once

// Shared fixtures, random generators and independent oracles for the test binaries.
// Oracles deliberately avoid calling into the code under test.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <limits>
#include <numbers>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "dosm/navigation.hpp"
#include "dosm/space_io.hpp"
#include "dosm/space_model.hpp"

namespace testing {

inline std::filesystem::path fixture(const std::string& name) {
  return std::filesystem::path(DOSM_FIXTURE_DIR) / name;
}

inline dosm::SpaceModel demo_space() { return dosm::load_space(fixture("demo_space.json")).model; }

// Fresh empty directory under the system temp dir, removed on destruction.
class TempDir {
public:
  explicit TempDir(const std::string& tag) {
    static std::mt19937_64 rng(std::random_device{}());
    path_ = std::filesystem::temp_directory_path() / ("dosm-" + tag + "-" + std::to_string(rng()));
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;
  [[nodiscard]] const std::filesystem::path& path() const { return path_; }

private:
  std::filesystem::path path_;
};

// ---- exact path costs ------------------------------------------------------------------

// Cost a + b*sqrt(2) in cell units, compared exactly with integer arithmetic.
struct ExactCost {
  long orth = 0;
  long diag = 0;
  friend bool operator==(const ExactCost&, const ExactCost&) = default;
};

inline bool less_than(const ExactCost& p, const ExactCost& q) {
  // p < q  <=>  x < y*sqrt(2) with x = p.orth - q.orth, y = q.diag - p.diag
  const long x = p.orth - q.orth;
  const long y = q.diag - p.diag;
  if (y >= 0) return x < 0 || x * x < 2 * y * y;
  return x < 0 && x * x > 2 * y * y;
}

inline ExactCost operator+(ExactCost a, const ExactCost& b) { return {a.orth + b.orth, a.diag + b.diag}; }

// ---- grid oracles -----------------------------------------------------------------------

using Grid = std::vector<std::vector<bool>>;  // [row][col], true = passable

inline Grid grid_of(const dosm::nav::NavGraph& g) {
  Grid grid(static_cast<std::size_t>(g.height), std::vector<bool>(static_cast<std::size_t>(g.width)));
  for (int r = 0; r < g.height; ++r) {
    for (int c = 0; c < g.width; ++c) grid[r][c] = g.passable({r, c});
  }
  return grid;
}

inline bool open_cell(const Grid& g, int r, int c) {
  return r >= 0 && c >= 0 && r < static_cast<int>(g.size()) && c < static_cast<int>(g[0].size()) && g[r][c];
}

// A diagonal move is legal unless both orthogonal side cells are blocked.
inline bool legal_step(const Grid& g, int r, int c, int dr, int dc) {
  if (!open_cell(g, r + dr, c + dc)) return false;
  if (dr != 0 && dc != 0) return open_cell(g, r + dr, c) || open_cell(g, r, c + dc);
  return true;
}

// Depth-first enumeration of simple paths with branch-and-bound pruning. Exhaustive: every
// simple path is either explored or provably no shorter than the incumbent.
class ExhaustivePathSearch {
public:
  explicit ExhaustivePathSearch(Grid grid) : g_(std::move(grid)) {}

  std::optional<ExactCost> shortest(int r0, int c0, int r1, int c1) {
    best_.reset();
    target_r_ = r1;
    target_c_ = c1;
    const std::size_t rows = g_.size(), cols = g_[0].size();
    visited_.assign(rows, std::vector<bool>(cols, false));
    reach_.assign(rows, std::vector<std::optional<ExactCost>>(cols));
    if (!open_cell(g_, r0, c0) || !open_cell(g_, r1, c1)) return std::nullopt;
    visited_[r0][c0] = true;
    dfs(r0, c0, {});
    return best_;
  }

private:
  // Octile distance ignoring obstacles: admissible lower bound.
  ExactCost bound(int r, int c) const {
    const long dr = std::abs(r - target_r_), dc = std::abs(c - target_c_);
    return {std::max(dr, dc) - std::min(dr, dc), std::min(dr, dc)};
  }

  void dfs(int r, int c, ExactCost cost) {
    if (r == target_r_ && c == target_c_) {
      if (!best_ || less_than(cost, *best_)) best_ = cost;
      return;
    }
    if (best_ && !less_than(cost + bound(r, c), *best_)) return;
    // A previous visit reached this cell at no greater cost: any completion from here is dominated.
    if (reach_[r][c] && !less_than(cost, *reach_[r][c])) return;
    reach_[r][c] = cost;
    static constexpr int kDr[] = {1, 1, 0, -1, -1, -1, 0, 1};
    static constexpr int kDc[] = {0, 1, 1, 1, 0, -1, -1, -1};
    for (int k = 0; k < 8; ++k) {
      const int nr = r + kDr[k], nc = c + kDc[k];
      if (!legal_step(g_, r, c, kDr[k], kDc[k]) || visited_[nr][nc]) continue;
      visited_[nr][nc] = true;
      dfs(nr, nc, cost + ExactCost{kDr[k] == 0 || kDc[k] == 0 ? 1 : 0, kDr[k] != 0 && kDc[k] != 0 ? 1 : 0});
      visited_[nr][nc] = false;
    }
  }

  Grid g_;
  int target_r_ = 0, target_c_ = 0;
  std::optional<ExactCost> best_;
  std::vector<std::vector<bool>> visited_;
  std::vector<std::vector<std::optional<ExactCost>>> reach_;
};

// 8-connected components under the same move rule.
inline std::vector<std::vector<int>> flood_components(const Grid& g, int* count = nullptr) {
  const int rows = static_cast<int>(g.size()), cols = static_cast<int>(g[0].size());
  std::vector<std::vector<int>> label(rows, std::vector<int>(cols, -1));
  int next = 0;
  for (int r = 0; r < rows; ++r) {
    for (int c = 0; c < cols; ++c) {
      if (!g[r][c] || label[r][c] >= 0) continue;
      std::vector<std::pair<int, int>> stack{{r, c}};
      label[r][c] = next;
      while (!stack.empty()) {
        auto [cr, cc] = stack.back();
        stack.pop_back();
        for (int dr = -1; dr <= 1; ++dr) {
          for (int dc = -1; dc <= 1; ++dc) {
            if ((dr || dc) && legal_step(g, cr, cc, dr, dc) && label[cr + dr][cc + dc] < 0) {
              label[cr + dr][cc + dc] = next;
              stack.push_back({cr + dr, cc + dc});
            }
          }
        }
      }
      ++next;
    }
  }
  if (count) *count = next;
  return label;
}

// ---- geometry oracles -------------------------------------------------------------------

// Winding number of a closed polygon around p; boundary handled by the caller.
inline int winding_number(const std::vector<dosm::Vec2>& poly, const dosm::Vec2& p) {
  int wn = 0;
  for (std::size_t i = 0; i < poly.size(); ++i) {
    const dosm::Vec2& a = poly[i];
    const dosm::Vec2& b = poly[(i + 1) % poly.size()];
    const double side = (b.x() - a.x()) * (p.y() - a.y()) - (p.x() - a.x()) * (b.y() - a.y());
    if (a.y() <= p.y()) {
      if (b.y() > p.y() && side > 0) ++wn;
    } else if (b.y() <= p.y() && side < 0) {
      --wn;
    }
  }
  return wn;
}

// Star-shaped polygon around center with sorted random angles: always simple.
inline std::vector<dosm::Vec2> random_star_polygon(std::mt19937_64& rng, const dosm::Vec2& center,
                                                   int vertices, double r_min, double r_max) {
  std::uniform_real_distribution<double> angle(0.0, 2.0 * std::numbers::pi);
  std::uniform_real_distribution<double> radius(r_min, r_max);
  std::vector<double> angles(static_cast<std::size_t>(vertices));
  for (double& a : angles) a = angle(rng);
  std::sort(angles.begin(), angles.end());
  std::vector<dosm::Vec2> poly;
  for (double a : angles) {
    const double r = radius(rng);
    poly.push_back(center + r * dosm::Vec2(std::cos(a), std::sin(a)));
  }
  return poly;
}

// ---- space generator --------------------------------------------------------------------

inline std::string random_text(std::mt19937_64& rng) {
  static const std::vector<std::string> pieces = {
      "Madonna", "panel", " ", "\"quoted\"", "tab\t", "line\nbreak", "café", "Église", "back\\slash",
      "Gałązka", "日本", "", "x"};
  std::uniform_int_distribution<std::size_t> pick(0, pieces.size() - 1);
  std::uniform_int_distribution<int> len(0, 5);
  std::string s;
  for (int i = len(rng); i > 0; --i) s += pieces[pick(rng)];
  return s;
}

// Valid space: rooms are side-by-side boxes (optionally with a notch), every entity kind present.
inline dosm::SpaceModel random_space(std::mt19937_64& rng, int serial) {
  using namespace dosm;
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::uniform_int_distribution<int> count(1, 4);
  SpaceModel m;
  m.id = "space_" + std::to_string(serial);
  m.name = random_text(rng);
  m.floor = std::uniform_int_distribution<int>(-2, 5)(rng);
  m.version = std::uniform_int_distribution<std::uint64_t>(0, 1000)(rng);

  const int rooms = count(rng);
  double x = 0.0;
  std::vector<std::pair<double, double>> spans;
  const double h = 3.0 + 7.0 * unit(rng);
  for (int i = 0; i < rooms; ++i) {
    const double w = 3.0 + 7.0 * unit(rng);
    Room room{"r" + std::to_string(i), random_text(rng), {}};
    if (unit(rng) < 0.5) {
      room.polygon = {{x, 0.0}, {x + w, 0.0}, {x + w, h}, {x, h}};
    } else {
      // L-shape: notch out the top-right quarter
      room.polygon = {{x, 0.0}, {x + w, 0.0}, {x + w, h / 2}, {x + w / 2, h / 2}, {x + w / 2, h}, {x, h}};
    }
    m.rooms.push_back(room);
    spans.push_back({x, w});
    x += w;
  }
  auto interior = [&](int room) {
    const auto [x0, w] = spans[static_cast<std::size_t>(room)];
    return Vec2(x0 + 0.05 * w + 0.4 * w * unit(rng), 0.05 * h + 0.4 * h * unit(rng));
  };

  const int walls = count(rng);
  for (int i = 0; i < walls; ++i) {
    const Vec2 a = interior(i % rooms);
    m.walls.push_back({"w" + std::to_string(i), a, a + Vec2(0.5 + unit(rng), unit(rng))});
  }
  for (int i = 0; i + 1 < rooms; ++i) {
    const double px = spans[static_cast<std::size_t>(i + 1)].first;
    m.portals.push_back({"d" + std::to_string(i), {px, 0.2 * h}, {px, 0.2 * h + 1.0 + unit(rng)}});
  }

  const int assets = count(rng);
  static const AnchorKind kinds[] = {AnchorKind::Poi, AnchorKind::RoomLabel, AnchorKind::WallLabel};
  for (int i = 0; i < assets + 2; ++i) {
    const int room = static_cast<int>(rng() % static_cast<std::uint64_t>(rooms));
    const Vec2 p = interior(room);
    Anchor a;
    a.id = (i < assets ? "a" : "t") + std::to_string(i);
    a.kind = i < assets ? AnchorKind::Asset : kinds[rng() % 3];
    a.title = random_text(rng);
    a.description = random_text(rng);
    a.position = Vec3(p.x(), p.y(), 3.0 * unit(rng));
    if (unit(rng) < 0.7) a.room_id = m.rooms[static_cast<std::size_t>(room)].id;
    m.anchors.push_back(a);
  }

  const int beacons = count(rng) + 2;
  for (int i = 0; i < beacons; ++i) {
    BeaconDevice b;
    b.id = "b" + std::to_string(i);
    b.hardware_uid = "uid-" + std::to_string(rng() % 100000);
    const Vec2 p = interior(i % rooms);
    b.position = Vec3(p.x(), p.y(), 2.0 + unit(rng));
    b.tx_power_dbm_at_1m = -100.0 + 100.0 * unit(rng);
    b.path_loss_exponent = 0.6 + 5.3 * unit(rng);
    m.beacons.push_back(b);
  }
  for (int i = 0; i < std::min(assets, beacons); ++i) {
    if (unit(rng) < 0.8) m.mappings.push_back({"a" + std::to_string(i), "b" + std::to_string(i)});
  }

  const int captures = count(rng) - 1;
  for (int i = 0; i < captures; ++i) {
    CapturePoint cp;
    cp.id = "c" + std::to_string(i);
    cp.order = i;
    if (i > 0) {
      cp.position = Vec2(20.0 * unit(rng), 20.0 * unit(rng));
      cp.heading = 2.0 * std::numbers::pi * unit(rng) - std::numbers::pi;
    }
    cp.eye_height = 1.0 + unit(rng);
    m.capture_points.push_back(cp);
  }
  return m;
}

}  // namespace testing
