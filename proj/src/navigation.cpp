#include "dosm/navigation.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <queue>
#include <tuple>

#include "dosm/error.hpp"

namespace dosm::nav {

namespace {

constexpr std::uint8_t kBlocked = static_cast<std::uint8_t>(CellState::Blocked);
constexpr std::uint8_t kFree = static_cast<std::uint8_t>(CellState::Free);
constexpr std::uint8_t kPortal = static_cast<std::uint8_t>(CellState::PortalForced);

constexpr double kEps = 1e-9;

// N, NE, E, SE, S, SW, W, NW.
constexpr int kDr[8] = {1, 1, 0, -1, -1, -1, 0, 1};
constexpr int kDc[8] = {0, 1, 1, 1, 0, -1, -1, -1};

std::size_t flat(const NavGraph& g, const Cell& c) {
  return static_cast<std::size_t>(c.row) * static_cast<std::size_t>(g.width) +
         static_cast<std::size_t>(c.col);
}

bool step_allowed(const NavGraph& g, const Cell& from, int dir) {
  const Cell to{from.row + kDr[dir], from.col + kDc[dir]};
  if (!g.passable(to)) return false;
  if (kDr[dir] != 0 && kDc[dir] != 0) {
    const bool side_a = g.passable({from.row + kDr[dir], from.col});
    const bool side_b = g.passable({from.row, from.col + kDc[dir]});
    if (!side_a && !side_b) return false;
  }
  return true;
}

struct Frontier {
  double cost;
  int row;
  int col;

  bool operator>(const Frontier& o) const {
    return std::tie(cost, row, col) > std::tie(o.cost, o.row, o.col);
  }
};

struct DijkstraState {
  std::vector<std::optional<PathCost>> cost;
  std::vector<int> parent;  // flat index, -1 at the source
};

// Runs until `stop` is settled (or the frontier empties when stop is null).
DijkstraState dijkstra(const NavGraph& g, const Cell& source, const Cell* stop) {
  const std::size_t n = static_cast<std::size_t>(g.width) * static_cast<std::size_t>(g.height);
  DijkstraState st{std::vector<std::optional<PathCost>>(n), std::vector<int>(n, -1)};
  std::vector<bool> settled(n, false);
  std::priority_queue<Frontier, std::vector<Frontier>, std::greater<>> open;

  st.cost[flat(g, source)] = PathCost{};
  open.push({0.0, source.row, source.col});
  while (!open.empty()) {
    const Frontier top = open.top();
    open.pop();
    const Cell cur{top.row, top.col};
    const std::size_t ci = flat(g, cur);
    if (settled[ci]) continue;
    settled[ci] = true;
    if (stop && cur == *stop) break;

    const PathCost base = *st.cost[ci];
    for (int dir = 0; dir < 8; ++dir) {
      if (!step_allowed(g, cur, dir)) continue;
      const Cell next{cur.row + kDr[dir], cur.col + kDc[dir]};
      const std::size_t ni = flat(g, next);
      if (settled[ni]) continue;
      PathCost candidate = base;
      if (kDr[dir] != 0 && kDc[dir] != 0) {
        ++candidate.diagonal;
      } else {
        ++candidate.orthogonal;
      }
      if (!st.cost[ni] || candidate.units() < st.cost[ni]->units()) {
        st.cost[ni] = candidate;
        st.parent[ni] = static_cast<int>(ci);
        open.push({candidate.units(), next.row, next.col});
      }
    }
  }
  return st;
}

void require_passable(const NavGraph& g, const Cell& c, const char* what) {
  if (!g.in_bounds(c)) {
    throw Error(ErrorCode::OutOfBounds, std::string(what) + " cell lies outside the grid");
  }
  if (!g.passable(c)) {
    throw Error(ErrorCode::InvalidArgument, std::string(what) + " cell is not passable");
  }
}

std::vector<std::size_t> two_opt(const Eigen::MatrixXd& d, std::vector<std::size_t> order) {
  // Tour nodes are table indices; position 0 is the fixed start.
  std::vector<std::size_t> tour{0};
  for (std::size_t t : order) tour.push_back(t + 1);
  const std::size_t n = tour.size();
  bool improved = true;
  while (improved) {
    improved = false;
    for (std::size_t i = 1; i + 1 < n; ++i) {
      for (std::size_t j = i + 1; j < n; ++j) {
        const auto a = static_cast<Eigen::Index>(tour[i - 1]);
        const auto b = static_cast<Eigen::Index>(tour[i]);
        const auto c = static_cast<Eigen::Index>(tour[j]);
        double delta = d(a, c) - d(a, b);
        if (j + 1 < n) {
          const auto e = static_cast<Eigen::Index>(tour[j + 1]);
          delta += d(b, e) - d(c, e);
        }
        if (delta < -1e-12) {
          std::reverse(tour.begin() + static_cast<std::ptrdiff_t>(i),
                       tour.begin() + static_cast<std::ptrdiff_t>(j) + 1);
          improved = true;
        }
      }
    }
  }
  std::vector<std::size_t> out;
  for (std::size_t i = 1; i < n; ++i) out.push_back(tour[i] - 1);
  return out;
}

std::vector<std::size_t> held_karp(const std::vector<PathCost>& table, std::size_t k) {
  if (k == 0) return {};
  const std::size_t stride = k + 1;
  auto w = [&](std::size_t from, std::size_t to) { return table[from * stride + to].units(); };
  const std::size_t full = (std::size_t{1} << k) - 1;
  const double inf = std::numeric_limits<double>::infinity();
  std::vector<double> best((full + 1) * k, inf);
  std::vector<int> prev((full + 1) * k, -1);
  for (std::size_t t = 0; t < k; ++t) best[(std::size_t{1} << t) * k + t] = w(0, t + 1);
  for (std::size_t mask = 1; mask <= full; ++mask) {
    for (std::size_t last = 0; last < k; ++last) {
      if (!(mask & (std::size_t{1} << last))) continue;
      const double here = best[mask * k + last];
      if (here == inf) continue;
      for (std::size_t next = 0; next < k; ++next) {
        if (mask & (std::size_t{1} << next)) continue;
        const std::size_t grown = mask | (std::size_t{1} << next);
        const double c = here + w(last + 1, next + 1);
        if (c < best[grown * k + next]) {
          best[grown * k + next] = c;
          prev[grown * k + next] = static_cast<int>(last);
        }
      }
    }
  }
  std::size_t last = 0;
  for (std::size_t t = 1; t < k; ++t) {
    if (best[full * k + t] < best[full * k + last]) last = t;
  }
  std::vector<std::size_t> order;
  std::size_t mask = full;
  int cur = static_cast<int>(last);
  while (cur >= 0) {
    order.push_back(static_cast<std::size_t>(cur));
    const int p = prev[mask * k + static_cast<std::size_t>(cur)];
    mask &= ~(std::size_t{1} << static_cast<std::size_t>(cur));
    cur = p;
  }
  std::reverse(order.begin(), order.end());
  return order;
}

}  // namespace

double PathCost::units() const noexcept {
  return static_cast<double>(orthogonal) + static_cast<double>(diagonal) * std::numbers::sqrt2;
}

NavGraph make_grid(int width, int height, double cell_size, Vec2 origin) {
  if (width <= 0 || height <= 0 || !(cell_size > 0.0)) {
    throw Error(ErrorCode::InvalidArgument, "grid needs positive dimensions and cell size");
  }
  NavGraph g;
  g.origin = origin;
  g.cell_size = cell_size;
  g.width = width;
  g.height = height;
  g.cells = CellGrid::Constant(height, width, kFree);
  return g;
}

NavGraph build_nav_graph(const SpaceModel& model, double cell_size, double clearance) {
  if (!(cell_size > 0.0) || !std::isfinite(cell_size)) {
    throw Error(ErrorCode::InvalidArgument, "cell size must be positive");
  }
  if (!(clearance >= 0.0) || !std::isfinite(clearance)) {
    throw Error(ErrorCode::InvalidArgument, "clearance must be non-negative");
  }
  if (model.rooms.empty()) {
    throw Error(ErrorCode::DegenerateSpace, "space " + model.id + " has no rooms");
  }
  Vec2 lo = Vec2::Constant(std::numeric_limits<double>::infinity());
  Vec2 hi = -lo;
  for (const Room& room : model.rooms) {
    if (room.polygon.size() < 3 || !(std::abs(geometry::signed_area(room.polygon)) > 0.0)) {
      throw Error(ErrorCode::DegenerateSpace, "room " + room.id + " has zero area", {room.id});
    }
    for (const Vec2& v : room.polygon) {
      lo = lo.cwiseMin(v);
      hi = hi.cwiseMax(v);
    }
  }
  for (const Portal& portal : model.portals) {
    if ((portal.p2 - portal.p1).norm() < cell_size) {
      throw Error(ErrorCode::DegenerateSpace,
                  "portal " + portal.id + " is shorter than one navigation cell", {portal.id});
    }
  }

  const double cols = std::ceil((hi.x() - lo.x()) / cell_size - kEps) + 2.0;
  const double rows = std::ceil((hi.y() - lo.y()) / cell_size - kEps) + 2.0;
  if (cols * rows > 5.0e7) {
    throw Error(ErrorCode::InvalidArgument, "navigation grid would exceed 5e7 cells");
  }
  NavGraph g = make_grid(static_cast<int>(cols), static_cast<int>(rows), cell_size,
                         lo - Vec2::Constant(cell_size));
  g.model_version = model.version;

  for (int r = 0; r < g.height; ++r) {
    for (int c = 0; c < g.width; ++c) {
      const Vec2 p = g.center({r, c});
      std::uint8_t state = kBlocked;
      const bool in_room = std::any_of(model.rooms.begin(), model.rooms.end(), [&](const Room& room) {
        return geometry::contains(room.polygon, p);
      });
      if (in_room) {
        const bool clear = std::all_of(model.walls.begin(), model.walls.end(), [&](const WallSegment& w) {
          return geometry::point_segment_distance<double>(p, w.p1, w.p2) > clearance;
        });
        if (clear) state = kFree;
      }
      const bool near_portal = std::any_of(model.portals.begin(), model.portals.end(), [&](const Portal& pt) {
        return geometry::point_segment_distance<double>(p, pt.p1, pt.p2) <= clearance;
      });
      if (near_portal) state = kPortal;
      g.cells(r, c) = state;
    }
  }
  return g;
}

std::string to_raster(const NavGraph& graph) {
  std::string out;
  out.reserve(static_cast<std::size_t>((graph.width + 1) * graph.height));
  for (int r = graph.height - 1; r >= 0; --r) {
    for (int c = 0; c < graph.width; ++c) {
      switch (graph.state({r, c})) {
        case CellState::Blocked: out += '#'; break;
        case CellState::Free: out += '.'; break;
        case CellState::PortalForced: out += 'P'; break;
      }
    }
    out += '\n';
  }
  return out;
}

Cell snap_to_graph(const NavGraph& graph, const Vec2& p) {
  const Vec2 local = (p - graph.origin) / graph.cell_size;
  if (!local.allFinite() || local.x() < 0.0 || local.y() < 0.0 || local.x() > graph.width ||
      local.y() > graph.height) {
    throw Error(ErrorCode::OutOfBounds, "point lies outside the navigation grid");
  }
  const Cell home{std::min(static_cast<int>(std::floor(local.y())), graph.height - 1),
                  std::min(static_cast<int>(std::floor(local.x())), graph.width - 1)};
  if (graph.passable(home)) return home;

  const int max_ring = std::max(graph.width, graph.height);
  for (int ring = 1; ring <= max_ring; ++ring) {
    // Rows ascend, then columns ascend: the first passable cell found is the (row, col) minimum.
    for (int r = home.row - ring; r <= home.row + ring; ++r) {
      const bool edge_row = (r == home.row - ring || r == home.row + ring);
      for (int c = home.col - ring; c <= home.col + ring; ++c) {
        if (!edge_row && c != home.col - ring && c != home.col + ring) continue;
        if (graph.passable({r, c})) return {r, c};
      }
    }
  }
  throw Error(ErrorCode::NoPassableCells, "navigation grid has no passable cells");
}

Route shortest_path(const NavGraph& graph, const Cell& from, const Cell& to) {
  require_passable(graph, from, "start");
  require_passable(graph, to, "goal");
  DijkstraState st = dijkstra(graph, from, &to);
  const std::size_t ti = flat(graph, to);
  if (!st.cost[ti]) throw Error(ErrorCode::NoPath, "no path between the requested cells");

  Route route;
  for (int at = static_cast<int>(ti); at >= 0; at = st.parent[static_cast<std::size_t>(at)]) {
    route.cells.push_back({at / graph.width, at % graph.width});
    if (static_cast<std::size_t>(at) == flat(graph, from)) break;
  }
  std::reverse(route.cells.begin(), route.cells.end());
  for (const Cell& c : route.cells) route.polyline.push_back(graph.center(c));
  route.steps = *st.cost[ti];
  route.length = route.steps.length(graph.cell_size);
  return route;
}

std::vector<std::optional<PathCost>> distance_field(const NavGraph& graph, const Cell& from) {
  require_passable(graph, from, "source");
  return dijkstra(graph, from, nullptr).cost;
}

std::vector<std::size_t> nearest_neighbor_order(const Eigen::MatrixXd& distances) {
  const auto k = static_cast<std::size_t>(distances.rows()) - 1;
  std::vector<bool> used(k, false);
  std::vector<std::size_t> order;
  std::size_t at = 0;
  for (std::size_t step = 0; step < k; ++step) {
    std::size_t pick = k;
    for (std::size_t t = 0; t < k; ++t) {
      if (used[t]) continue;
      if (pick == k || distances(static_cast<Eigen::Index>(at), static_cast<Eigen::Index>(t + 1)) <
                           distances(static_cast<Eigen::Index>(at), static_cast<Eigen::Index>(pick + 1))) {
        pick = t;
      }
    }
    used[pick] = true;
    order.push_back(pick);
    at = pick + 1;
  }
  return order;
}

double tour_length(const Eigen::MatrixXd& distances, std::span<const std::size_t> order) {
  double total = 0.0;
  Eigen::Index at = 0;
  for (std::size_t t : order) {
    const auto next = static_cast<Eigen::Index>(t + 1);
    total += distances(at, next);
    at = next;
  }
  return total;
}

WaypointOrder order_waypoints(const NavGraph& graph, const Cell& start, std::span<const Waypoint> targets) {
  const std::size_t k = targets.size();
  const std::size_t stride = k + 1;
  WaypointOrder out;
  out.table.assign(stride * stride, PathCost{});
  out.distances = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(stride), static_cast<Eigen::Index>(stride));
  if (k == 0) return out;

  std::vector<Cell> nodes{start};
  for (const Waypoint& w : targets) {
    if (!graph.passable(w.cell)) {
      throw Error(ErrorCode::UnreachableTarget, "target " + w.id + " is not on a passable cell", {w.id});
    }
    nodes.push_back(w.cell);
  }
  require_passable(graph, start, "start");

  for (std::size_t i = 0; i < stride; ++i) {
    const auto field = dijkstra(graph, nodes[i], nullptr).cost;
    std::vector<std::string> unreachable;
    for (std::size_t j = 0; j < stride; ++j) {
      const auto& c = field[flat(graph, nodes[j])];
      if (!c) {
        if (j > 0) unreachable.push_back(targets[j - 1].id);
        continue;
      }
      out.table[i * stride + j] = *c;
      out.distances(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = c->length(graph.cell_size);
    }
    if (!unreachable.empty()) {
      std::string msg = "unreachable targets:";
      for (const auto& id : unreachable) msg += " " + id;
      throw Error(ErrorCode::UnreachableTarget, msg, unreachable);
    }
  }

  if (k <= kExactOrderingLimit) {
    out.order = held_karp(out.table, k);
  } else {
    Eigen::MatrixXd units(static_cast<Eigen::Index>(stride), static_cast<Eigen::Index>(stride));
    for (std::size_t i = 0; i < stride; ++i) {
      for (std::size_t j = 0; j < stride; ++j) {
        units(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = out.table[i * stride + j].units();
      }
    }
    out.order = two_opt(units, nearest_neighbor_order(units));
  }
  return out;
}

Route plan_route(const NavGraph& graph, const SpaceModel& model, const Vec2& start,
                 std::span<const Id> preferred_asset_ids, OrderMode mode) {
  std::vector<std::string> unknown;
  std::vector<const Anchor*> assets;
  for (const Id& id : preferred_asset_ids) {
    const Anchor* a = model.find_anchor(id);
    if (!a || a->kind != AnchorKind::Asset) {
      unknown.push_back(id);
    } else {
      assets.push_back(a);
    }
  }
  if (!unknown.empty()) {
    std::string msg = "unknown assets:";
    for (const auto& id : unknown) msg += " " + id;
    throw Error(ErrorCode::AssetNotFound, msg, unknown);
  }

  const Cell start_cell = snap_to_graph(graph, start);
  std::vector<Waypoint> targets;
  for (const Anchor* a : assets) targets.push_back({a->id, snap_to_graph(graph, a->position.head<2>())});

  std::vector<std::size_t> order;
  if (mode == OrderMode::Optimal) {
    order = order_waypoints(graph, start_cell, targets).order;
  } else {
    const auto field = dijkstra(graph, start_cell, nullptr).cost;
    std::vector<std::string> unreachable;
    for (const Waypoint& w : targets) {
      if (!field[flat(graph, w.cell)]) unreachable.push_back(w.id);
    }
    if (!unreachable.empty()) {
      std::string msg = "unreachable targets:";
      for (const auto& id : unreachable) msg += " " + id;
      throw Error(ErrorCode::UnreachableTarget, msg, unreachable);
    }
    for (std::size_t i = 0; i < targets.size(); ++i) order.push_back(i);
  }

  Route route;
  route.cells.push_back(start_cell);
  Cell at = start_cell;
  for (std::size_t idx : order) {
    const Waypoint& w = targets[idx];
    Route leg = shortest_path(graph, at, w.cell);
    route.cells.insert(route.cells.end(), leg.cells.begin() + 1, leg.cells.end());
    route.steps += leg.steps;
    route.visit_order.push_back({w.id, route.cells.size() - 1});
    at = w.cell;
  }
  for (const Cell& c : route.cells) route.polyline.push_back(graph.center(c));
  route.length = route.steps.length(graph.cell_size);
  return route;
}

}  // namespace dosm::nav
