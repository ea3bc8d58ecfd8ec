// Copyright 2026 The triwalk Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <limits>
#include <numbers>
#include <queue>
#include <string>
#include <tuple>
#include <vector>

#include <Eigen/Core>

#include "json.hpp"
#include "triwalk/errors.hpp"
#include "triwalk/geometry.hpp"

namespace triwalk {

struct Cell {
  int row = 0;
  int col = 0;

  friend bool operator==(const Cell&, const Cell&) = default;
};

/// Occupancy grid. Cell (r, c) covers x in [c, c+1) * cell_size and y in
/// [r, r+1) * cell_size.
class GridMap {
 public:
  GridMap() = default;
  GridMap(int width, int height, double cell_size = 0.1, double inflation_scale = 1.1)
      : width_(width), height_(height), cell_size_(cell_size), inflation_scale_(inflation_scale) {
    if (width <= 0 || height <= 0) throw ParameterError("GridMap: dimensions must be positive");
    if (!(cell_size > 0.0)) throw ParameterError("GridMap: cell_size must be > 0");
    if (!(inflation_scale >= 1.0)) throw ParameterError("GridMap: inflation_scale must be >= 1");
    occupied_.assign(static_cast<size_t>(width) * static_cast<size_t>(height), 0);
  }

  int width() const { return width_; }
  int height() const { return height_; }
  double cell_size() const { return cell_size_; }
  double inflation_scale() const { return inflation_scale_; }

  bool in_bounds(Cell c) const { return c.row >= 0 && c.row < height_ && c.col >= 0 && c.col < width_; }
  int index(Cell c) const { return c.row * width_ + c.col; }
  Cell cell(int index) const { return {index / width_, index % width_}; }

  bool occupied(Cell c) const {
    check(c);
    return occupied_[static_cast<size_t>(index(c))] != 0;
  }
  void set_occupied(Cell c, bool value = true) {
    check(c);
    occupied_[static_cast<size_t>(index(c))] = value ? 1 : 0;
  }
  int occupied_count() const {
    return static_cast<int>(std::count(occupied_.begin(), occupied_.end(), 1));
  }

  Eigen::Vector2d center(Cell c) const {
    return {(c.col + 0.5) * cell_size_, (c.row + 0.5) * cell_size_};
  }
  /// Cell containing a world point; may be out of bounds.
  Cell locate(const Eigen::Vector2d& p) const {
    return {static_cast<int>(std::floor(p.y() / cell_size_)),
            static_cast<int>(std::floor(p.x() / cell_size_))};
  }
  /// Out-of-bounds points count as blocked.
  bool free_at(const Eigen::Vector2d& p) const {
    const Cell c = locate(p);
    return in_bounds(c) && !occupied(c);
  }

  friend bool operator==(const GridMap&, const GridMap&) = default;

 private:
  void check(Cell c) const {
    if (!in_bounds(c)) {
      throw QueryError("GridMap: cell (" + std::to_string(c.row) + ", " + std::to_string(c.col) +
                       ") outside " + std::to_string(height_) + "x" + std::to_string(width_) + " map");
    }
  }

  int width_ = 0;
  int height_ = 0;
  double cell_size_ = 0.1;
  double inflation_scale_ = 1.1;
  std::vector<std::uint8_t> occupied_;
};

/// Dilates every 8-connected obstacle region so that its bounding box grows
/// by inflation_scale along each axis (rounded to whole cells; any odd extra
/// cell goes to the high side).
inline GridMap inflate(const GridMap& map) {
  GridMap out = map;
  const int W = map.width();
  const int H = map.height();
  std::vector<int> label(static_cast<size_t>(W * H), -1);
  std::vector<Cell> stack;
  std::vector<Cell> region;
  for (int start = 0; start < W * H; ++start) {
    const Cell s = map.cell(start);
    if (!map.occupied(s) || label[static_cast<size_t>(start)] >= 0) continue;
    region.clear();
    stack.assign(1, s);
    label[static_cast<size_t>(start)] = start;
    int r0 = s.row, r1 = s.row, c0 = s.col, c1 = s.col;
    while (!stack.empty()) {
      const Cell c = stack.back();
      stack.pop_back();
      region.push_back(c);
      r0 = std::min(r0, c.row);
      r1 = std::max(r1, c.row);
      c0 = std::min(c0, c.col);
      c1 = std::max(c1, c.col);
      for (int dr = -1; dr <= 1; ++dr) {
        for (int dc = -1; dc <= 1; ++dc) {
          const Cell n{c.row + dr, c.col + dc};
          if (!map.in_bounds(n) || !map.occupied(n)) continue;
          int& l = label[static_cast<size_t>(map.index(n))];
          if (l >= 0) continue;
          l = start;
          stack.push_back(n);
        }
      }
    }
    auto grow = [&](int extent) {
      const auto target = static_cast<int>(std::lround(extent * map.inflation_scale() - 1e-9));
      const int extra = std::max(0, target - extent);
      return std::pair{extra / 2, extra - extra / 2};
    };
    const auto [up_lo, up_hi] = grow(r1 - r0 + 1);
    const auto [left_lo, left_hi] = grow(c1 - c0 + 1);
    for (const Cell& c : region) {
      for (int dr = -up_lo; dr <= up_hi; ++dr) {
        for (int dc = -left_lo; dc <= left_hi; ++dc) {
          const Cell n{c.row + dr, c.col + dc};
          if (out.in_bounds(n)) out.set_occupied(n);
        }
      }
    }
  }
  return out;
}

/// Cells within `clearance` cells (Chebyshev) of an obstacle become blocked.
inline GridMap with_clearance(const GridMap& map, int clearance) {
  if (clearance < 0) throw ParameterError("with_clearance: clearance must be >= 0");
  if (clearance == 0) return map;
  GridMap out = map;
  for (int i = 0; i < map.width() * map.height(); ++i) {
    const Cell c = map.cell(i);
    if (!map.occupied(c)) continue;
    for (int dr = -clearance; dr <= clearance; ++dr) {
      for (int dc = -clearance; dc <= clearance; ++dc) {
        const Cell n{c.row + dr, c.col + dc};
        if (out.in_bounds(n)) out.set_occupied(n);
      }
    }
  }
  return out;
}

struct GridPath {
  std::vector<Cell> cells;
  /// Number of axis and diagonal moves; the cost is exactly
  /// (axis_moves + diagonal_moves * sqrt(2)) * cell_size.
  int axis_moves = 0;
  int diagonal_moves = 0;
  double cost = 0.0;
};

inline double move_cost(int axis_moves, int diagonal_moves, double cell_size) {
  return (axis_moves + diagonal_moves * std::numbers::sqrt2) * cell_size;
}

/// A* over free cells, 8-connected, with the Euclidean heuristic. Diagonal
/// moves may not cut the corner of a blocked cell. Ties are broken by
/// (f, h, row-major index).
inline GridPath plan_path(const GridMap& map, Cell start, Cell goal) {
  for (const auto& [c, name] : {std::pair{start, "start"}, std::pair{goal, "goal"}}) {
    if (!map.in_bounds(c)) throw PlanningError(std::string("plan_path: ") + name + " outside map");
    if (map.occupied(c)) {
      throw PlanningError(std::string("plan_path: ") + name + " cell (" + std::to_string(c.row) + ", " +
                          std::to_string(c.col) + ") is occupied");
    }
  }
  const int N = map.width() * map.height();
  struct Node {
    int axis = 0;
    int diag = 0;
    int parent = -1;
    bool seen = false;
    bool closed = false;
  };
  std::vector<Node> nodes(static_cast<size_t>(N));
  const Eigen::Vector2d goal_pt(goal.col, goal.row);
  auto heuristic = [&](Cell c) { return (Eigen::Vector2d(c.col, c.row) - goal_pt).norm(); };
  auto g_of = [&](const Node& n) { return n.axis + n.diag * std::numbers::sqrt2; };

  using Entry = std::tuple<double, double, int>;
  std::priority_queue<Entry, std::vector<Entry>, std::greater<>> open;
  const int s = map.index(start);
  nodes[static_cast<size_t>(s)].seen = true;
  open.emplace(heuristic(start), heuristic(start), s);
  const int target = map.index(goal);
  int expanded = 0;
  while (!open.empty()) {
    const auto [f, h, id] = open.top();
    open.pop();
    Node& cur = nodes[static_cast<size_t>(id)];
    if (cur.closed) continue;
    cur.closed = true;
    ++expanded;
    if (id == target) break;
    const Cell c = map.cell(id);
    for (int dr = -1; dr <= 1; ++dr) {
      for (int dc = -1; dc <= 1; ++dc) {
        if (dr == 0 && dc == 0) continue;
        const Cell n{c.row + dr, c.col + dc};
        if (!map.in_bounds(n) || map.occupied(n)) continue;
        const bool diagonal = dr != 0 && dc != 0;
        if (diagonal && (map.occupied({c.row + dr, c.col}) || map.occupied({c.row, c.col + dc}))) continue;
        Node cand;
        cand.axis = cur.axis + (diagonal ? 0 : 1);
        cand.diag = cur.diag + (diagonal ? 1 : 0);
        const int nid = map.index(n);
        Node& next = nodes[static_cast<size_t>(nid)];
        if (next.closed) continue;
        const double g = g_of(cand);
        if (next.seen && g >= g_of(next)) continue;
        next.axis = cand.axis;
        next.diag = cand.diag;
        next.parent = id;
        next.seen = true;
        const double hn = heuristic(n);
        open.emplace(g + hn, hn, nid);
      }
    }
  }
  if (!nodes[static_cast<size_t>(target)].closed) {
    int reachable = 0;
    double best = std::numeric_limits<double>::infinity();
    Cell closest = start;
    for (int i = 0; i < N; ++i) {
      if (!nodes[static_cast<size_t>(i)].closed) continue;
      ++reachable;
      const double d = heuristic(map.cell(i));
      if (d < best) {
        best = d;
        closest = map.cell(i);
      }
    }
    throw PlanningError("plan_path: goal unreachable; " + std::to_string(reachable) +
                        " cells reachable, closest (" + std::to_string(closest.row) + ", " +
                        std::to_string(closest.col) + ") at " + std::to_string(best * map.cell_size()) +
                        " m from goal");
  }
  GridPath path;
  for (int id = target; id >= 0; id = nodes[static_cast<size_t>(id)].parent) path.cells.push_back(map.cell(id));
  std::reverse(path.cells.begin(), path.cells.end());
  path.axis_moves = nodes[static_cast<size_t>(target)].axis;
  path.diagonal_moves = nodes[static_cast<size_t>(target)].diag;
  path.cost = move_cost(path.axis_moves, path.diagonal_moves, map.cell_size());
  return path;
}

/// Poses of both feet and which one swings next (phi = +1 for that foot).
struct FeetState {
  Footprint left{0.0, 0.0, 0.0, Side::left};
  Footprint right{0.0, 0.0, 0.0, Side::right};
  Side swing = Side::left;

  int phi(Side s) const { return s == swing ? 1 : -1; }
  Footprint& foot(Side s) { return s == Side::left ? left : right; }
  const Footprint& foot(Side s) const { return s == Side::left ? left : right; }
  const Footprint& swing_foot() const { return foot(swing); }
  const Footprint& stance_foot() const { return foot(other(swing)); }
  Eigen::Vector2d midpoint() const { return 0.5 * (left.position() + right.position()); }
};

/// Feet side by side around `center`, both with heading theta.
inline FeetState standing_feet(const Eigen::Vector2d& center, double theta, double step_width,
                               Side first_swing = Side::left) {
  FeetState s;
  const Eigen::Vector2d half = rotate({0.0, 0.5 * step_width}, theta);
  s.left = {center.x() + half.x(), center.y() + half.y(), theta, Side::left};
  s.right = {center.x() - half.x(), center.y() - half.y(), theta, Side::right};
  s.swing = first_swing;
  return s;
}

struct StepAction {
  double R = 0.1;
  double sigma = 0.0;
};

inline constexpr double kDefaultSigmaMax = 20.0 * std::numbers::pi / 180.0;

inline double wrap_angle(double a) { return std::remainder(a, 2.0 * std::numbers::pi); }

/// Moves the swing foot R along (its heading + sigma), turns it by sigma and
/// toggles the swing flags.
inline FeetState transition(const FeetState& s, const StepAction& a, double sigma_max = kDefaultSigmaMax) {
  if (!(a.R > 0.0) || !std::isfinite(a.R)) throw ParameterError("transition: R must be > 0");
  if (!(std::abs(a.sigma) <= sigma_max + 1e-12)) {
    throw ParameterError("transition: |sigma| exceeds sigma_max");
  }
  FeetState next = s;
  Footprint& f = next.foot(s.swing);
  const double heading = f.theta + a.sigma;
  f.x += a.R * std::cos(heading);
  f.y += a.R * std::sin(heading);
  f.theta = wrap_angle(heading);
  f.closing = false;
  next.swing = other(s.swing);
  return next;
}

struct FootstepConfig {
  double R = 0.1;
  double step_width = 0.2;
  double sigma_max = kDefaultSigmaMax;
  int lookahead_cells = 3;

  void validate() const {
    if (!(R > 0.0)) throw ParameterError("FootstepConfig: R must be > 0");
    if (!(step_width > 0.0)) throw ParameterError("FootstepConfig: step_width must be > 0");
    if (!(sigma_max > 0.0) || sigma_max > std::numbers::pi) {
      throw ParameterError("FootstepConfig: sigma_max must be in (0, pi]");
    }
    if (lookahead_cells < 1) throw ParameterError("FootstepConfig: lookahead_cells must be >= 1");
  }
};

/// Footprints in placement order. Each regular step moves one foot exactly R
/// from its previous placement; the final alignment steps are flagged closing.
struct FootstepPlan {
  FeetState initial;
  std::vector<Footprint> steps;

  /// Displacement of the foot placed by step i from its previous placement.
  double step_distance(size_t i) const {
    const Side side = steps.at(i).side;
    Eigen::Vector2d prev = initial.foot(side).position();
    for (size_t j = i; j-- > 0;) {
      if (steps[j].side == side) {
        prev = steps[j].position();
        break;
      }
    }
    return (steps[i].position() - prev).norm();
  }
  FeetState final_state() const {
    FeetState s = initial;
    for (const auto& f : steps) {
      s.foot(f.side) = f;
      s.swing = other(f.side);
    }
    return s;
  }
};

namespace detail {

/// Arc-length parameterized polyline.
class Polyline {
 public:
  explicit Polyline(std::vector<Eigen::Vector2d> pts) : pts_(std::move(pts)) {
    s_.assign(pts_.size(), 0.0);
    for (size_t i = 1; i < pts_.size(); ++i) s_[i] = s_[i - 1] + (pts_[i] - pts_[i - 1]).norm();
  }
  double length() const { return s_.back(); }
  Eigen::Vector2d at(double s) const {
    if (pts_.size() == 1 || s <= 0.0) return pts_.front();
    if (s >= length()) return pts_.back();
    const size_t i = segment(s);
    const double t = (s - s_[i]) / (s_[i + 1] - s_[i]);
    return pts_[i] + t * (pts_[i + 1] - pts_[i]);
  }
  Eigen::Vector2d tangent(double s) const {
    if (pts_.size() == 1) return {1.0, 0.0};
    const size_t i = segment(std::clamp(s, 0.0, length()));
    return (pts_[i + 1] - pts_[i]).normalized();
  }
  double project(const Eigen::Vector2d& p) const {
    double best_s = 0.0;
    double best_d = std::numeric_limits<double>::infinity();
    for (size_t i = 0; i + 1 < pts_.size(); ++i) {
      const Eigen::Vector2d d = pts_[i + 1] - pts_[i];
      const double t = std::clamp((p - pts_[i]).dot(d) / d.squaredNorm(), 0.0, 1.0);
      const double dist = (pts_[i] + t * d - p).norm();
      if (dist < best_d - 1e-12) {
        best_d = dist;
        best_s = s_[i] + t * d.norm();
      }
    }
    return best_s;
  }

 private:
  size_t segment(double s) const {
    const auto it = std::upper_bound(s_.begin(), s_.end(), s);
    size_t i = static_cast<size_t>(std::max<std::ptrdiff_t>(1, it - s_.begin())) - 1;
    return std::min(i, pts_.size() - 2);
  }
  std::vector<Eigen::Vector2d> pts_;
  std::vector<double> s_;
};

inline double lane_sign(Side s) { return s == Side::left ? 1.0 : -1.0; }

}  // namespace detail

/// Heading of the path at its start (+x for a single-cell path).
inline double initial_heading(const GridMap& map, const std::vector<Cell>& path, int lookahead_cells = 3) {
  if (path.size() < 2) return 0.0;
  const size_t j = std::min(path.size() - 1, static_cast<size_t>(lookahead_cells));
  const Eigen::Vector2d d = map.center(path[j]) - map.center(path.front());
  return std::atan2(d.y(), d.x());
}

/// Greedy footstep generation along a grid path. Each foot keeps to its lane
/// (the path offset by half the step width, using the path direction over the
/// lookahead window). A trailing swing foot aims at the lane point abreast of
/// the stance foot, a leading or level one at the point R further on; sigma
/// turns the foot towards that point, clamped to sigma_max, and the foot moves
/// R. Steps stop once the aim point would pass the goal; up to two closing
/// steps then place the feet side by side at the goal.
inline FootstepPlan footsteps_from_path(const GridMap& map, const std::vector<Cell>& path,
                                        const FeetState& initial, const FootstepConfig& cfg = {}) {
  cfg.validate();
  if (path.empty()) throw PlanningError("footsteps_from_path: empty path");
  for (Side s : {Side::left, Side::right}) {
    if (!map.free_at(initial.foot(s).position())) {
      throw PlanningError(std::string("footsteps_from_path: initial ") + to_string(s) +
                          " foot is in an occupied cell");
    }
  }
  std::vector<Eigen::Vector2d> pts;
  for (const Cell& c : path) {
    const Eigen::Vector2d p = map.center(c);
    if (pts.empty() || (p - pts.back()).norm() > 1e-12) pts.push_back(p);
  }
  const detail::Polyline line(pts);
  const double L = line.length();
  const double half_window = 0.5 * cfg.lookahead_cells * map.cell_size();
  auto direction = [&](double s) {
    const Eigen::Vector2d d = line.at(s + half_window) - line.at(s - half_window);
    return d.norm() > 1e-12 ? Eigen::Vector2d(d.normalized()) : line.tangent(s);
  };
  auto lane_point = [&](Side side, double s) {
    const Eigen::Vector2d t = direction(s);
    return Eigen::Vector2d(line.at(s) + detail::lane_sign(side) * 0.5 * cfg.step_width *
                                            Eigen::Vector2d(-t.y(), t.x()));
  };

  FootstepPlan plan;
  plan.initial = initial;
  FeetState state = initial;
  auto place = [&](const Footprint& f) {
    if (!map.free_at(f.position())) {
      throw PlanningError("footsteps_from_path: footprint " + std::to_string(plan.steps.size()) + " at (" +
                          std::to_string(f.x) + ", " + std::to_string(f.y) + ") is in an occupied cell");
    }
    plan.steps.push_back(f);
    state.foot(f.side) = f;
    state.swing = other(f.side);
  };

  const auto max_steps = static_cast<size_t>(4.0 * L / cfg.R) + 20;
  // Path parameter each foot (left, right) was last aimed at.
  const double s0 = line.project(initial.midpoint());
  std::array<double, 2> progress{s0, s0};
  while (L > 0.0) {
    const Footprint& sw = state.swing_foot();
    const double s_st = progress[state.swing == Side::left ? 1 : 0];
    const double s_sw = progress[state.swing == Side::left ? 0 : 1];
    const double s_aim = s_sw < s_st - 0.5 * cfg.R ? s_st : s_st + cfg.R;
    if (s_aim > L + 1e-9) break;
    const Eigen::Vector2d aim = lane_point(sw.side, s_aim);
    const Eigen::Vector2d dir = direction(s_aim);
    const double path_heading = std::atan2(dir.y(), dir.x());
    const Footprint& st = state.stance_foot();
    // Scan sigma for the landing closest to the aim point with a heading close
    // to the path, keeping it in a comfortable band beside the stance foot.
    double sigma = 0.0;
    double best = std::numeric_limits<double>::infinity();
    constexpr int kSamples = 80;
    for (int i = 0; i <= kSamples; ++i) {
      const double cand = cfg.sigma_max * (2.0 * i / kSamples - 1.0);
      const double heading = sw.theta + cand;
      const Eigen::Vector2d land = sw.position() + cfg.R * Eigen::Vector2d(std::cos(heading), std::sin(heading));
      const Eigen::Vector2d rel = rotate(land - st.position(), -st.theta);
      const double lateral = detail::lane_sign(sw.side) * rel.y();
      const double out_lat = std::max({0.0, 0.5 * cfg.step_width - lateral, lateral - 1.5 * cfg.step_width});
      const double out_long = std::max(0.0, std::abs(rel.x()) - 2.0 * cfg.R);
      const double turn = wrap_angle(heading - path_heading);
      const double cost = (land - aim).squaredNorm() + 0.5 * cfg.R * cfg.R * turn * turn +
                          10.0 * (out_lat * out_lat + out_long * out_long);
      if (cost < best - 1e-15) {
        best = cost;
        sigma = cand;
      }
    }
    const FeetState next = transition(state, {cfg.R, sigma}, cfg.sigma_max);
    progress[state.swing == Side::left ? 0 : 1] = s_aim;
    place(next.foot(state.swing));
    if (plan.steps.size() > max_steps) {
      throw PlanningError("footsteps_from_path: no progress along the path after " +
                          std::to_string(max_steps) + " steps");
    }
  }

  double goal_heading = state.swing_foot().theta;
  if (pts.size() > 1) {
    const Eigen::Vector2d d = direction(L);
    goal_heading = std::atan2(d.y(), d.x());
  }
  for (int k = 0; k < 2; ++k) {
    const Side side = state.swing;
    const Eigen::Vector2d target =
        line.at(L) + detail::lane_sign(side) * 0.5 * cfg.step_width * rotate({0.0, 1.0}, goal_heading);
    const Footprint& cur = state.foot(side);
    if ((cur.position() - target).norm() <= 1e-9 && std::abs(wrap_angle(cur.theta - goal_heading)) <= 1e-9) {
      state.swing = other(side);
      continue;
    }
    place({target.x(), target.y(), goal_heading, side, true});
  }
  return plan;
}

// JSON I/O

struct MapFile {
  GridMap map;
  Cell start;
  Cell goal;
};

inline MapFile map_from_json(const nlohmann::json& j) {
  try {
    MapFile mf;
    mf.map = GridMap(j.at("width").get<int>(), j.at("height").get<int>(), j.value("cell_size", 0.1),
                     j.value("inflation_scale", 1.1));
    for (const auto& rc : j.value("occupied", nlohmann::json::array())) {
      const Cell c{rc.at(0).get<int>(), rc.at(1).get<int>()};
      if (!mf.map.in_bounds(c)) throw ParameterError("map: occupied cell outside the grid");
      mf.map.set_occupied(c);
    }
    mf.start = {j.at("start").at(0).get<int>(), j.at("start").at(1).get<int>()};
    mf.goal = {j.at("goal").at(0).get<int>(), j.at("goal").at(1).get<int>()};
    return mf;
  } catch (const nlohmann::json::exception& e) {
    throw ParameterError(std::string("map: ") + e.what());
  }
}

inline nlohmann::json to_json(const MapFile& mf) {
  nlohmann::json occ = nlohmann::json::array();
  for (int i = 0; i < mf.map.width() * mf.map.height(); ++i) {
    const Cell c = mf.map.cell(i);
    if (mf.map.occupied(c)) occ.push_back({c.row, c.col});
  }
  return {{"width", mf.map.width()},
          {"height", mf.map.height()},
          {"cell_size", mf.map.cell_size()},
          {"inflation_scale", mf.map.inflation_scale()},
          {"occupied", occ},
          {"start", {mf.start.row, mf.start.col}},
          {"goal", {mf.goal.row, mf.goal.col}}};
}

inline nlohmann::json to_json(const Footprint& f) {
  return {{"x", f.x}, {"y", f.y}, {"theta", f.theta}, {"side", to_string(f.side)}, {"closing", f.closing}};
}

inline Side side_from_string(const std::string& s) {
  if (s == "L" || s == "left") return Side::left;
  if (s == "R" || s == "right") return Side::right;
  throw ParameterError("unknown side '" + s + "'");
}

inline Footprint footprint_from_json(const nlohmann::json& j) {
  return {j.at("x").get<double>(), j.at("y").get<double>(), j.value("theta", 0.0),
          side_from_string(j.at("side").get<std::string>()), j.value("closing", false)};
}

inline nlohmann::json to_json(const FootstepPlan& plan) {
  nlohmann::json steps = nlohmann::json::array();
  for (const auto& f : plan.steps) steps.push_back(to_json(f));
  return {{"initial",
           {{"left", to_json(plan.initial.left)},
            {"right", to_json(plan.initial.right)},
            {"swing", to_string(plan.initial.swing)}}},
          {"steps", steps}};
}

inline FootstepPlan plan_from_json(const nlohmann::json& j) {
  try {
    FootstepPlan plan;
    const auto& init = j.at("initial");
    plan.initial.left = footprint_from_json(init.at("left"));
    plan.initial.right = footprint_from_json(init.at("right"));
    plan.initial.swing = side_from_string(init.at("swing").get<std::string>());
    Side expected = plan.initial.swing;
    for (const auto& s : j.at("steps")) {
      plan.steps.push_back(footprint_from_json(s));
      if (plan.steps.back().side != expected) throw ParameterError("plan: sides must alternate");
      expected = other(expected);
    }
    return plan;
  } catch (const nlohmann::json::exception& e) {
    throw ParameterError(std::string("plan: ") + e.what());
  }
}

inline nlohmann::json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open '" + path + "'");
  try {
    return nlohmann::json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw ParameterError("'" + path + "': " + e.what());
  }
}

/// Full planning pipeline: inflate, A* with clearance, footsteps from the
/// path starting with the feet side by side on the start cell.
struct PlanResult {
  GridMap inflated;
  GridPath path;
  FootstepPlan plan;
};

inline PlanResult plan_footsteps(const MapFile& mf, const FootstepConfig& cfg = {}, int clearance = 1) {
  PlanResult res;
  res.inflated = inflate(mf.map);
  res.path = plan_path(with_clearance(res.inflated, clearance), mf.start, mf.goal);
  const double theta = initial_heading(res.inflated, res.path.cells, cfg.lookahead_cells);
  const FeetState feet = standing_feet(res.inflated.center(mf.start), theta, cfg.step_width);
  res.plan = footsteps_from_path(res.inflated, res.path.cells, feet, cfg);
  return res;
}

}  // namespace triwalk
