#pragma once

#include <compare>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "dosm/space_model.hpp"

namespace dosm::nav {

struct Cell {
  int row = 0;  // grows with y
  int col = 0;  // grows with x

  auto operator<=>(const Cell&) const = default;
};

enum class CellState : std::uint8_t { Blocked = 0, Free = 1, PortalForced = 2 };

using CellGrid = Eigen::Array<std::uint8_t, Eigen::Dynamic, Eigen::Dynamic>;  // CellState values

inline constexpr double kDefaultCellSize = 0.5;
inline constexpr double kDefaultClearance = 0.25;

// Rasterized free space. Orthogonal steps cost cell_size, diagonal steps cell_size * sqrt(2).
struct NavGraph {
  Vec2 origin = Vec2::Zero();  // lower-left corner of cell (0, 0)
  double cell_size = kDefaultCellSize;
  int width = 0;
  int height = 0;
  CellGrid cells;  // height x width
  std::uint64_t model_version = 0;

  [[nodiscard]] bool in_bounds(const Cell& c) const noexcept {
    return c.row >= 0 && c.col >= 0 && c.row < height && c.col < width;
  }
  [[nodiscard]] bool passable(const Cell& c) const noexcept {
    return in_bounds(c) && cells(c.row, c.col) != static_cast<std::uint8_t>(CellState::Blocked);
  }
  [[nodiscard]] CellState state(const Cell& c) const noexcept {
    return static_cast<CellState>(cells(c.row, c.col));
  }
  [[nodiscard]] Vec2 center(const Cell& c) const noexcept {
    return origin + cell_size * Vec2(c.col + 0.5, c.row + 0.5);
  }
  [[nodiscard]] int passable_count() const noexcept {
    return static_cast<int>((cells != static_cast<std::uint8_t>(CellState::Blocked)).count());
  }
};

/// Builds an open grid of the given shape; cells start out passable.
NavGraph make_grid(int width, int height, double cell_size = 1.0, Vec2 origin = Vec2::Zero());

NavGraph build_nav_graph(const SpaceModel& model, double cell_size = kDefaultCellSize,
                         double clearance = kDefaultClearance);

/// Text raster, top row (largest y) first: '#' blocked, '.' passable, 'P' portal-forced.
std::string to_raster(const NavGraph& graph);

/// Containing cell if passable, else the passable cell at the smallest ring (Chebyshev) distance,
/// ties broken by smaller (row, col).
Cell snap_to_graph(const NavGraph& graph, const Vec2& p);

// Step counts of a grid path. Length comparisons use these exact counts so equal paths compare equal.
struct PathCost {
  int orthogonal = 0;
  int diagonal = 0;

  [[nodiscard]] double units() const noexcept;
  [[nodiscard]] double length(double cell_size) const noexcept { return cell_size * units(); }
  PathCost& operator+=(const PathCost& o) noexcept {
    orthogonal += o.orthogonal;
    diagonal += o.diagonal;
    return *this;
  }
  bool operator==(const PathCost&) const = default;
};

struct Visit {
  Id asset_id;
  std::size_t polyline_index = 0;

  bool operator==(const Visit&) const = default;
};

struct Route {
  std::vector<Cell> cells;
  std::vector<Vec2> polyline;  // cell centers
  double length = 0.0;         // meters
  PathCost steps;
  std::vector<Visit> visit_order;
};

/// 8-connected Dijkstra with the corner-cutting ban. Neighbors expand in N, NE, E, SE, S, SW, W, NW
/// order and the frontier is ordered by (cost, row, col).
Route shortest_path(const NavGraph& graph, const Cell& from, const Cell& to);

/// Single-source shortest path costs to every cell; unreachable cells hold std::nullopt.
std::vector<std::optional<PathCost>> distance_field(const NavGraph& graph, const Cell& from);

struct Waypoint {
  Id id;
  Cell cell;
};

struct WaypointOrder {
  std::vector<std::size_t> order;  // indices into the target list
  std::vector<PathCost> table;     // (k + 1)^2 row-major, index 0 is the start
  Eigen::MatrixXd distances;       // same table in meters
};

inline constexpr std::size_t kExactOrderingLimit = 8;

/// Minimum-length open tour from `start` (free endpoint): exact subset DP for up to
/// kExactOrderingLimit targets, nearest neighbor + 2-opt beyond.
WaypointOrder order_waypoints(const NavGraph& graph, const Cell& start, std::span<const Waypoint> targets);

/// Nearest-neighbor tour over a distance table laid out as in WaypointOrder.
std::vector<std::size_t> nearest_neighbor_order(const Eigen::MatrixXd& distances);
/// Length of an open tour from index 0 through `order` (target indices).
double tour_length(const Eigen::MatrixXd& distances, std::span<const std::size_t> order);

enum class OrderMode { Optimal, AsGiven };

Route plan_route(const NavGraph& graph, const SpaceModel& model, const Vec2& start,
                 std::span<const Id> preferred_asset_ids, OrderMode mode = OrderMode::Optimal);

}  // namespace dosm::nav
