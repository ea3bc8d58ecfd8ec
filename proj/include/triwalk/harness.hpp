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
#include <chrono>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "json.hpp"
#include "triwalk/dynamics.hpp"
#include "triwalk/engine.hpp"
#include "triwalk/errors.hpp"
#include "triwalk/footstep.hpp"
#include "triwalk/geometry.hpp"
#include "triwalk/mpc.hpp"
#include "triwalk/observer.hpp"
#include "triwalk/refgen.hpp"

namespace triwalk {

/// Zero-mean Gaussian with sigma = bound / 3, redrawn until |v| <= bound.
inline double noise_sample(std::mt19937_64& rng, double bound) {
  if (!(bound > 0.0)) throw ParameterError("noise_sample: bound must be > 0");
  std::normal_distribution<double> dist(0.0, bound / 3.0);
  for (;;) {
    const double v = dist(rng);
    if (std::abs(v) <= bound) return v;
  }
}

struct NoiseConfig {
  bool enabled = false;
  double bound = 0.05;
  std::uint64_t seed = 1;
};

/// Horizontal force on one mass (1-based index) during [t_start, t_start + duration).
struct Disturbance {
  double t_start = 0.0;
  double duration = 0.01;
  double force = 0.0;
  int mass = 2;
  int axis = 0;
};

struct SetpointCommand {
  double t = 0.0;
  Setpoints setpoints;
};

enum class PlanMode { path, setpoints };

struct Scenario {
  std::string name = "scenario";
  PlanMode mode = PlanMode::path;
  FootstepPlan plan;
  std::vector<SetpointCommand> commands;
  EngineConfig engine;
  NoiseConfig noise;
  std::vector<Disturbance> disturbances;
  double duration = 0.0;
  /// Consecutive cycles with the ZMP outside the unscaled support polygon
  /// that count as a fall.
  int fall_cycles = 25;

  long cycles() const { return std::lround(duration / engine.mpc.Ts); }

  void validate() const {
    engine.validate();
    if (!(duration > 0.0)) throw ParameterError("scenario: duration must be > 0");
    if (fall_cycles < 1) throw ParameterError("scenario: fall_cycles must be >= 1");
    if (noise.enabled && !(noise.bound > 0.0)) throw ParameterError("scenario: noise bound must be > 0");
    for (const auto& d : disturbances) {
      if (!(d.duration > 0.0) || d.t_start < 0.0 || d.t_start + d.duration > duration + 1e-12) {
        throw ParameterError("scenario: disturbance window must lie within the run");
      }
      if (d.mass < 1 || d.mass > 3) throw ParameterError("scenario: disturbance mass must be 1, 2 or 3");
      if (d.axis != 0 && d.axis != 1) throw ParameterError("scenario: disturbance axis must be x or y");
    }
  }
};

/// Footprints of `n` steps straight ahead along theta using the footstep
/// transition with step distance R.
inline FootstepPlan straight_plan(const FeetState& start, int n, double R) {
  FootstepPlan plan;
  plan.initial = start;
  FeetState s = start;
  for (int i = 0; i < n; ++i) {
    const Side side = s.swing;
    s = transition(s, {R, 0.0});
    plan.steps.push_back(s.foot(side));
  }
  return plan;
}

/// `n` steps that put each foot back where it stands.
inline FootstepPlan in_place_plan(const FeetState& start, int n) {
  FootstepPlan plan;
  plan.initial = start;
  Side side = start.swing;
  for (int i = 0; i < n; ++i) {
    plan.steps.push_back(start.foot(side));
    side = other(side);
  }
  return plan;
}

namespace detail {

template <typename T>
void read_opt(const nlohmann::json& j, const char* key, T& out) {
  if (j.contains(key)) out = j.at(key).get<T>();
}

inline int axis_from_json(const nlohmann::json& j) {
  if (j.is_number_integer()) return j.get<int>();
  const std::string s = j.get<std::string>();
  if (s == "x") return 0;
  if (s == "y") return 1;
  throw ParameterError("scenario: axis must be 'x' or 'y'");
}

}  // namespace detail

/// Parses a scenario; relative map paths resolve against base_dir.
inline Scenario scenario_from_json(const nlohmann::json& j, const std::filesystem::path& base_dir = {}) {
  using detail::read_opt;
  Scenario sc;
  try {
    read_opt(j, "name", sc.name);
    read_opt(j, "duration", sc.duration);
    read_opt(j, "fall_cycles", sc.fall_cycles);
    EngineConfig& e = sc.engine;
    if (j.contains("params")) {
      const auto& p = j.at("params");
      read_opt(p, "m1", e.params.m1);
      read_opt(p, "m2", e.params.m2);
      read_opt(p, "m3", e.params.m3);
      read_opt(p, "z1", e.params.z1);
      read_opt(p, "z2", e.params.z2);
      read_opt(p, "z3", e.params.z3);
      read_opt(p, "g", e.params.g);
      read_opt(p, "foot_length", e.params.foot_length);
      read_opt(p, "foot_width", e.params.foot_width);
      read_opt(p, "zmp_safety_scale", e.params.zmp_safety_scale);
      read_opt(p, "com_height", e.params.com_height);
    }
    if (j.contains("mpc")) {
      const auto& m = j.at("mpc");
      read_opt(m, "Np", e.mpc.Np);
      read_opt(m, "Nc", e.mpc.Nc);
      read_opt(m, "Ts", e.mpc.Ts);
      read_opt(m, "alpha", e.mpc.alpha);
      read_opt(m, "jerk_limit", e.mpc.jerk_limit);
      read_opt(m, "soft_penalty", e.mpc.soft_penalty);
      read_opt(m, "max_qp_iterations", e.mpc.max_qp_iterations);
      read_opt(m, "sagittal_reach", e.mpc.sagittal_reach);
      read_opt(m, "lateral_min", e.mpc.lateral_min);
      read_opt(m, "lateral_max", e.mpc.lateral_max);
      read_opt(m, "constraint_horizon", e.mpc.constraint_horizon);
    }
    if (j.contains("timing")) {
      const auto& t = j.at("timing");
      read_opt(t, "T_ss", e.timing.T_ss);
      read_opt(t, "T_ds", e.timing.T_ds);
      read_opt(t, "swing_height", e.timing.swing_height);
      read_opt(t, "idle_time", e.timing.idle_time);
    }
    if (j.contains("observer")) {
      const auto& o = j.at("observer");
      read_opt(o, "process_noise", e.observer.process_noise);
      read_opt(o, "measurement_noise", e.observer.measurement_noise);
    }
    if (j.contains("footstep")) {
      const auto& f = j.at("footstep");
      read_opt(f, "R", e.footstep.R);
      read_opt(f, "step_width", e.footstep.step_width);
      read_opt(f, "sigma_max", e.footstep.sigma_max);
      read_opt(f, "lookahead_cells", e.footstep.lookahead_cells);
    }
    read_opt(j, "lag_tau", e.lag_tau);
    if (j.contains("noise")) {
      const auto& n = j.at("noise");
      read_opt(n, "enabled", sc.noise.enabled);
      read_opt(n, "bound", sc.noise.bound);
      read_opt(n, "seed", sc.noise.seed);
    }
    for (const auto& d : j.value("disturbances", nlohmann::json::array())) {
      Disturbance dist;
      read_opt(d, "t_start", dist.t_start);
      read_opt(d, "duration", dist.duration);
      read_opt(d, "force", dist.force);
      read_opt(d, "mass", dist.mass);
      if (d.contains("axis")) dist.axis = detail::axis_from_json(d.at("axis"));
      sc.disturbances.push_back(dist);
    }

    const auto& pj = j.at("plan");
    const std::string mode = pj.at("mode").get<std::string>();
    const double width = e.footstep.step_width;
    FeetState start = standing_feet({pj.value("x", 0.0), pj.value("y", 0.0)}, pj.value("theta", 0.0), width,
                                    side_from_string(pj.value("first_swing", std::string("L"))));
    if (mode == "straight") {
      sc.plan = straight_plan(start, pj.at("steps").get<int>(), pj.value("R", e.footstep.R));
    } else if (mode == "in_place") {
      sc.plan = in_place_plan(start, pj.at("steps").get<int>());
    } else if (mode == "footsteps") {
      sc.plan = plan_from_json(pj);
    } else if (mode == "map") {
      std::filesystem::path map_path = pj.at("map").get<std::string>();
      if (map_path.is_relative()) map_path = base_dir / map_path;
      sc.plan = plan_footsteps(map_from_json(read_json_file(map_path.string())), e.footstep).plan;
    } else if (mode == "setpoints") {
      sc.mode = PlanMode::setpoints;
      sc.plan.initial = start;
      for (const auto& c : pj.value("commands", nlohmann::json::array())) {
        SetpointCommand cmd;
        read_opt(c, "t", cmd.t);
        read_opt(c, "X", cmd.setpoints.X);
        read_opt(c, "Y", cmd.setpoints.Y);
        read_opt(c, "alpha", cmd.setpoints.alpha);
        sc.commands.push_back(cmd);
      }
      std::stable_sort(sc.commands.begin(), sc.commands.end(),
                       [](const SetpointCommand& a, const SetpointCommand& b) { return a.t < b.t; });
    } else {
      throw ParameterError("scenario: unknown plan mode '" + mode + "'");
    }
  } catch (const nlohmann::json::exception& ex) {
    throw ParameterError(std::string("scenario: ") + ex.what());
  }
  if (sc.duration == 0.0 && sc.mode == PlanMode::path) {
    const GaitSchedule s(sc.plan, sc.engine.timing, sc.engine.params, sc.engine.mpc.Ts);
    sc.duration = static_cast<double>(s.end_cycle()) * sc.engine.mpc.Ts + 1.0;
  }
  sc.validate();
  return sc;
}

inline Scenario load_scenario(const std::string& path) {
  return scenario_from_json(read_json_file(path), std::filesystem::path(path).parent_path());
}

/// Acceleration of each mass along `axis` from the forces acting during the
/// cycle [t, t + Ts), averaged over the cycle so that force x time is kept.
inline std::array<double, 3> disturbance_accel(const std::vector<Disturbance>& ds, const ThreeMassParams& p,
                                               int axis, double t, double Ts) {
  const auto masses = p.masses();
  std::array<double, 3> accel{0.0, 0.0, 0.0};
  for (const auto& d : ds) {
    if (d.axis != axis) continue;
    const double overlap = std::min(d.t_start + d.duration, t + Ts) - std::max(d.t_start, t);
    if (overlap <= 1e-9) continue;
    const size_t i = static_cast<size_t>(d.mass - 1);
    accel[i] += d.force / masses[i] * (overlap / Ts);
  }
  return accel;
}

/// Support polygon (counter-clockwise) for a phase, with the foot rectangle
/// scaled about its centre.
inline std::vector<Eigen::Vector2d> support_polygon(SupportPhase phase, const Footprint& support,
                                                   const Footprint& other_foot, const ThreeMassParams& p,
                                                   double scale) {
  const double hl = 0.5 * p.foot_length * scale;
  const double hw = 0.5 * p.foot_width * scale;
  std::vector<Eigen::Vector2d> pts;
  for (const auto& c : rectangle_corners(support.position(), hl, hw, support.theta)) pts.push_back(c);
  if (phase != SupportPhase::single) {
    for (const auto& c : rectangle_corners(other_foot.position(), hl, hw, other_foot.theta)) pts.push_back(c);
  }
  return convex_hull(pts);
}

/// Excursions at or below this distance (m) are numerical round-off.
inline constexpr double kExcursionTol = 1e-9;

struct TraceRow {
  double t = 0.0;
  WalkPhase phase = WalkPhase::idle;
  int step = -1;
  std::array<QpStatus, 2> status{QpStatus::optimal, QpStatus::optimal};
  std::array<bool, 2> softened{false, false};
  std::array<AxisInput, 2> u{AxisInput::Zero(), AxisInput::Zero()};
  Eigen::Vector2d zmp_meas = Eigen::Vector2d::Zero();
  Eigen::Vector2d zmp_pred = Eigen::Vector2d::Zero();
  Eigen::Vector2d zmp_true = Eigen::Vector2d::Zero();
  Eigen::Vector2d zmp_ref = Eigen::Vector2d::Zero();
  std::array<Eigen::Vector2d, 2> leg_ref;
  Eigen::Vector2d hip_ref = Eigen::Vector2d::Zero();
  /// True positions of masses 1, 2, 3.
  std::array<Eigen::Vector2d, 3> mass;
  Eigen::Vector2d support = Eigen::Vector2d::Zero();
  /// Distance of the true ZMP outside the scaled and the unscaled polygon.
  double excursion_scaled = 0.0;
  double excursion = 0.0;
};

/// Serializable outcome of a run.
struct RunSummary {
  std::string name;
  long cycles = 0;
  long zmp_violation_cycles = 0;
  double max_excursion = 0.0;
  long outside_cycles = 0;
  long max_outside_streak = 0;
  double rms_zmp = 0.0;
  double rms_stance = 0.0;
  double rms_swing = 0.0;
  long softened_cycles = 0;
  long clamped_steps = 0;
  bool completed = false;
  bool fall_detected = false;
  double fall_time = -1.0;
  std::string fault;

  friend bool operator==(const RunSummary&, const RunSummary&) = default;
};

struct CycleTiming {
  double mean_ms = 0.0;
  double p99_ms = 0.0;
  double max_ms = 0.0;
};

struct RunMetrics {
  RunSummary summary;
  std::vector<TraceRow> trace;
  /// Wall-clock time of engine ticks that ran the controllers.
  CycleTiming timing;
  std::vector<double> tick_ms;
  FootstepPlan plan;
  std::vector<Setpoints> filtered;
};

struct RunOptions {
  bool keep_trace = true;
  bool stop_on_fall = true;
};

/// Closed loop of the engine with the three-mass plant on both axes.
inline RunMetrics run(const Scenario& sc, const RunOptions& opt = {}) {
  sc.validate();
  RunMetrics m;
  m.summary.name = sc.name;
  const EngineConfig& cfg = sc.engine;
  const double Ts = cfg.mpc.Ts;
  const ThreeMassParams& p = cfg.params;
  const StateSpace ss = discretize(build_continuous(p), Ts);
  std::optional<WalkEngine> engine;
  if (sc.mode == PlanMode::setpoints) {
    engine.emplace(cfg, sc.plan.initial);
  } else {
    engine.emplace(cfg, sc.plan);
  }
  engine->request_walk();
  std::array<AxisState, 2> x{engine->initial_state(0), engine->initial_state(1)};
  std::mt19937_64 rng(sc.noise.seed);

  const long N = sc.cycles();
  std::array<std::array<double, 3>, 2> applied{};
  size_t next_cmd = 0;
  long streak = 0;
  double sq_zmp = 0.0, sq_st = 0.0, sq_sw = 0.0;
  long tracked = 0;
  for (long k = 0; k < N; ++k) {
    const double t = static_cast<double>(k) * Ts;
    while (next_cmd < sc.commands.size() && sc.commands[next_cmd].t <= t + 1e-9) {
      engine->command(sc.commands[next_cmd].setpoints);
      ++next_cmd;
    }
    Measurement y{ss.C * x[0], ss.C * x[1]};
    if (sc.noise.enabled) {
      for (auto& ya : y)
        for (int i = 0; i < kOutputDim; ++i) ya(i) += noise_sample(rng, sc.noise.bound);
    }

    Diagnostics d;
    const auto t0 = std::chrono::steady_clock::now();
    try {
      d = engine->tick(y);
    } catch (const ControllerFault& e) {
      m.summary.fault = e.what();
      m.summary.cycles = k;
      m.plan = engine->plan();
      return m;
    }
    const auto t1 = std::chrono::steady_clock::now();
    if (d.phase != WalkPhase::idle) {
      m.tick_ms.push_back(std::chrono::duration<double, std::milli>(t1 - t0).count());
    }
    m.filtered.push_back(d.filtered);
    if (d.step_clamped) ++m.summary.clamped_steps;

    TraceRow row;
    row.t = t;
    row.phase = d.phase;
    row.step = d.step;
    row.status = d.status;
    row.softened = d.softened;
    row.u = d.u;
    row.zmp_meas = {y[0](kOutZmp), y[1](kOutZmp)};
    row.zmp_pred = d.zmp_pred;
    row.zmp_true = {zmp(p, x[0]), zmp(p, x[1])};
    row.zmp_ref = d.zmp_ref;
    row.leg_ref = d.leg_ref;
    row.hip_ref = d.hip_ref;
    for (int i = 0; i < 3; ++i) {
      row.mass[static_cast<size_t>(i)] = {x[0](position_index(i)), x[1](position_index(i))};
    }
    row.support = d.support.position();
    row.excursion_scaled =
        distance_outside(support_polygon(d.support_phase, d.support, d.other, p, p.zmp_safety_scale), row.zmp_true);
    row.excursion = distance_outside(support_polygon(d.support_phase, d.support, d.other, p, 1.0), row.zmp_true);

    RunSummary& s = m.summary;
    if (row.excursion_scaled > kExcursionTol) ++s.zmp_violation_cycles;
    s.max_excursion = std::max(s.max_excursion, row.excursion_scaled);
    if (d.softened[0] || d.softened[1]) ++s.softened_cycles;
    if (row.excursion > kExcursionTol) {
      ++s.outside_cycles;
      ++streak;
    } else {
      streak = 0;
    }
    s.max_outside_streak = std::max(s.max_outside_streak, streak);
    if (d.phase != WalkPhase::idle) {
      sq_zmp += (row.zmp_true - row.zmp_ref).squaredNorm();
      sq_st += (row.mass[0] - row.leg_ref[0]).squaredNorm();
      sq_sw += (row.mass[2] - row.leg_ref[1]).squaredNorm();
      ++tracked;
    }
    if (opt.keep_trace) m.trace.push_back(row);
    s.cycles = k + 1;
    if (streak > sc.fall_cycles && !s.fall_detected) {
      s.fall_detected = true;
      s.fall_time = t;
      if (opt.stop_on_fall) break;
    }

    for (int a = 0; a < 2; ++a) {
      const size_t ai = static_cast<size_t>(a);
      // The window's acceleration is added when it starts and removed after.
      const std::array<double, 3> accel = disturbance_accel(sc.disturbances, p, a, t, Ts);
      std::array<double, 3> extra{};
      for (size_t i = 0; i < 3; ++i) extra[i] = accel[i] - applied[ai][i];
      applied[ai] = accel;
      x[ai] = step_plant(ss, x[ai], d.u[ai], extra);
    }
  }
  RunSummary& s = m.summary;
  if (tracked > 0) {
    s.rms_zmp = std::sqrt(sq_zmp / static_cast<double>(tracked));
    s.rms_stance = std::sqrt(sq_st / static_cast<double>(tracked));
    s.rms_swing = std::sqrt(sq_sw / static_cast<double>(tracked));
  }
  s.completed = !s.fall_detected && s.fault.empty();
  m.plan = engine->plan();
  if (!m.tick_ms.empty()) {
    std::vector<double> sorted = m.tick_ms;
    std::sort(sorted.begin(), sorted.end());
    double sum = 0.0;
    for (double v : sorted) sum += v;
    m.timing.mean_ms = sum / static_cast<double>(sorted.size());
    const size_t idx = static_cast<size_t>(std::ceil(0.99 * static_cast<double>(sorted.size()))) - 1;
    m.timing.p99_ms = sorted[std::min(idx, sorted.size() - 1)];
    m.timing.max_ms = sorted.back();
  }
  return m;
}

inline nlohmann::json to_json(const RunSummary& s) {
  return {{"name", s.name},
          {"cycles", s.cycles},
          {"zmp_violation_cycles", s.zmp_violation_cycles},
          {"max_excursion", s.max_excursion},
          {"outside_cycles", s.outside_cycles},
          {"max_outside_streak", s.max_outside_streak},
          {"rms_zmp", s.rms_zmp},
          {"rms_stance", s.rms_stance},
          {"rms_swing", s.rms_swing},
          {"softened_cycles", s.softened_cycles},
          {"clamped_steps", s.clamped_steps},
          {"completed", s.completed},
          {"fall_detected", s.fall_detected},
          {"fall_time", s.fall_time},
          {"fault", s.fault}};
}

inline RunSummary summary_from_json(const nlohmann::json& j) {
  try {
    RunSummary s;
    s.name = j.at("name").get<std::string>();
    s.cycles = j.at("cycles").get<long>();
    s.zmp_violation_cycles = j.at("zmp_violation_cycles").get<long>();
    s.max_excursion = j.at("max_excursion").get<double>();
    s.outside_cycles = j.at("outside_cycles").get<long>();
    s.max_outside_streak = j.at("max_outside_streak").get<long>();
    s.rms_zmp = j.at("rms_zmp").get<double>();
    s.rms_stance = j.at("rms_stance").get<double>();
    s.rms_swing = j.at("rms_swing").get<double>();
    s.softened_cycles = j.at("softened_cycles").get<long>();
    s.clamped_steps = j.at("clamped_steps").get<long>();
    s.completed = j.at("completed").get<bool>();
    s.fall_detected = j.at("fall_detected").get<bool>();
    s.fall_time = j.at("fall_time").get<double>();
    s.fault = j.at("fault").get<std::string>();
    return s;
  } catch (const nlohmann::json::exception& e) {
    throw ParameterError(std::string("summary: ") + e.what());
  }
}

inline constexpr const char* kTraceVersionLine = "# triwalk trace v1";
inline constexpr const char* kTraceHeader =
    "t,phase,step,qp_status_x,qp_status_y,softened_x,softened_y,"
    "u1_x,u2_x,u3_x,u1_y,u2_y,u3_y,zmp_meas_x,zmp_meas_y,zmp_pred_x,zmp_pred_y,"
    "zmp_true_x,zmp_true_y,r_z_x,r_z_y,r_leg0_x,r_leg0_y,r_leg1_x,r_leg1_y,hip_x,hip_y,"
    "c1_x,c1_y,c2_x,c2_y,c3_x,c3_y,support_x,support_y,excursion_scaled,excursion";

inline void write_trace_csv(const std::vector<TraceRow>& trace, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write '" + path + "'");
  out << kTraceVersionLine << '\n' << kTraceHeader << '\n';
  char buf[64];
  auto num = [&](double v) {
    std::snprintf(buf, sizeof(buf), ",%.17g", v);
    out << buf;
  };
  auto vec = [&](const Eigen::Vector2d& v) {
    num(v.x());
    num(v.y());
  };
  for (const auto& r : trace) {
    std::snprintf(buf, sizeof(buf), "%.17g", r.t);
    out << buf << ',' << to_string(r.phase) << ',' << r.step << ',' << to_string(r.status[0]) << ','
        << to_string(r.status[1]) << ',' << int{r.softened[0]} << ',' << int{r.softened[1]};
    for (const auto& u : r.u)
      for (int i = 0; i < kInputDim; ++i) num(u(i));
    vec(r.zmp_meas);
    vec(r.zmp_pred);
    vec(r.zmp_true);
    vec(r.zmp_ref);
    vec(r.leg_ref[0]);
    vec(r.leg_ref[1]);
    vec(r.hip_ref);
    for (const auto& c : r.mass) vec(c);
    vec(r.support);
    num(r.excursion_scaled);
    num(r.excursion);
    out << '\n';
  }
  if (!out) throw Error("write failed for '" + path + "'");
}

/// Writes trace.csv and summary.json into `dir`.
inline void export_traces(const RunMetrics& m, const std::string& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw Error("cannot create '" + dir + "': " + ec.message());
  const std::filesystem::path base(dir);
  write_trace_csv(m.trace, (base / "trace.csv").string());
  std::ofstream out(base / "summary.json");
  if (!out) throw Error("cannot write '" + (base / "summary.json").string() + "'");
  out << to_json(m.summary).dump(2) << '\n';
  if (!out) throw Error("write failed for summary.json");
}

struct WithstandProbe {
  double force = 0.0;
  bool survived = false;
};

struct WithstandResult {
  /// Largest surviving amplitude, signed by direction.
  double force = 0.0;
  std::vector<WithstandProbe> probes;
  /// Probe pairs where a larger amplitude survived after a smaller one fell.
  std::vector<std::pair<double, double>> monotonicity_violations;
};

/// Bisection on the amplitude of the template's first disturbance.
inline WithstandResult max_withstand(const Scenario& tmpl, int direction, double low, double high, double tol) {
  if (direction != 1 && direction != -1) throw ParameterError("max_withstand: direction must be +1 or -1");
  if (tmpl.disturbances.empty()) throw ParameterError("max_withstand: scenario has no disturbance");
  if (!(low >= 0.0) || !(high > low) || !(tol > 0.0)) throw ParameterError("max_withstand: invalid bracket");
  WithstandResult res;
  auto survives = [&](double amplitude) {
    Scenario sc = tmpl;
    sc.disturbances.front().force = direction * amplitude;
    const RunMetrics m = run(sc, {false, true});
    const bool ok = m.summary.completed;
    res.probes.push_back({direction * amplitude, ok});
    return ok;
  };
  if (!survives(low)) throw BracketError("max_withstand: lower bracket already falls");
  if (survives(high)) throw BracketError("max_withstand: upper bracket survives");
  while (high - low >= tol) {
    const double mid = 0.5 * (low + high);
    if (survives(mid)) {
      low = mid;
    } else {
      high = mid;
    }
  }
  for (const auto& a : res.probes) {
    for (const auto& b : res.probes) {
      if (!a.survived && b.survived && std::abs(b.force) > std::abs(a.force)) {
        res.monotonicity_violations.emplace_back(a.force, b.force);
      }
    }
  }
  res.force = direction * low;
  return res;
}

}  // namespace triwalk
