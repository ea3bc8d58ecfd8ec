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

#include <array>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "triwalk/dynamics.hpp"
#include "triwalk/errors.hpp"
#include "triwalk/footstep.hpp"
#include "triwalk/mpc.hpp"

namespace triwalk {

enum class WalkPhase { idle, initialize, single_support, double_support };

inline const char* to_string(WalkPhase p) {
  switch (p) {
    case WalkPhase::idle: return "Idle";
    case WalkPhase::initialize: return "Initialize";
    case WalkPhase::single_support: return "SingleSupport";
    case WalkPhase::double_support: return "DoubleSupport";
  }
  return "?";
}

struct GaitTiming {
  double T_ss = 0.8;
  double T_ds = 0.2;
  double swing_height = 0.05;
  /// Time spent in Idle before walking starts.
  double idle_time = 0.0;

  double step_period() const { return T_ss + T_ds; }

  void validate(double Ts) const {
    if (!(Ts > 0.0)) throw ParameterError("GaitTiming: Ts must be > 0");
    if (!(T_ss > 0.0)) throw ParameterError("GaitTiming: T_ss must be > 0");
    if (!(T_ds > 0.0)) throw ParameterError("GaitTiming: T_ds must be > 0");
    if (!(swing_height >= 0.0)) throw ParameterError("GaitTiming: swing_height must be >= 0");
    if (!(idle_time >= 0.0)) throw ParameterError("GaitTiming: idle_time must be >= 0");
    for (double T : {T_ss, T_ds}) {
      if (std::abs(T / Ts - std::round(T / Ts)) > 1e-9) {
        throw ParameterError("GaitTiming: durations must be integer multiples of Ts");
      }
    }
  }
};

/// Support points S_0 .. S_n: S_0 is the foot in stance when walking starts
/// and S_{i+1} the foot placed by step i.
inline std::vector<Eigen::Vector2d> support_points(const FootstepPlan& plan) {
  std::vector<Eigen::Vector2d> s{plan.initial.stance_foot().position()};
  for (const auto& f : plan.steps) s.push_back(f.position());
  return s;
}

/// Piecewise ZMP reference over the stepping part of a plan, t measured from
/// the start of the first single support. The ZMP rests on S_i during single
/// support and moves linearly by SL = S_{i+1} - S_i during double support; the
/// last double support ends between the final feet.
inline Eigen::Vector2d zmp_reference(const FootstepPlan& plan, const GaitTiming& timing, double t) {
  const auto S = support_points(plan);
  const size_t n = plan.steps.size();
  const double T = timing.step_period();
  if (!(t >= 0.0) || t > n * T + 1e-12 || n == 0) {
    throw QueryError("zmp_reference: t = " + std::to_string(t) + " outside [0, " + std::to_string(n * T) + "]");
  }
  auto end_of = [&](size_t i) {
    return i + 1 < n ? S[i + 1] : Eigen::Vector2d(plan.final_state().midpoint());
  };
  size_t i = std::min(n - 1, static_cast<size_t>(std::floor(t / T)));
  const double local = t - static_cast<double>(i) * T;
  if (local < timing.T_ss) return S[i];
  const double a = std::min(1.0, (local - timing.T_ss) / timing.T_ds);
  return S[i] + a * (end_of(i) - S[i]);
}

/// Analytic LIPM solution between boundary positions p_h0 at t0 and p_hf at tf
/// over a fixed ZMP p_st.
inline Eigen::Vector2d hip_reference(const Eigen::Vector2d& p_st, const Eigen::Vector2d& p_h0,
                                     const Eigen::Vector2d& p_hf, double t0, double tf, double t,
                                     double omega) {
  if (!(tf > t0)) throw ParameterError("hip_reference: need t0 < tf");
  if (!(omega > 0.0)) throw ParameterError("hip_reference: omega must be > 0");
  if (t < t0 - 1e-12 || t > tf + 1e-12) throw QueryError("hip_reference: t outside [t0, tf]");
  const double den = std::sinh((t0 - tf) * omega);
  return p_st + ((p_st - p_hf) * std::sinh((t - t0) * omega) + (p_h0 - p_st) * std::sinh((t - tf) * omega)) / den;
}

/// Swing foot over a step: smoothstep Bezier (cubic, doubled end points) in
/// the plane and a quartic Bezier with apex `swing_height` at mid swing. The
/// foot rests on f_next for t in [T_ss, T_ss + T_ds].
inline Eigen::Vector3d swing_reference(const Eigen::Vector2d& f_prev, const Eigen::Vector2d& f_next,
                                       const GaitTiming& timing, double t) {
  if (t < -1e-12 || t > timing.step_period() + 1e-12) {
    throw QueryError("swing_reference: t outside [0, T_ss + T_ds]");
  }
  const double tau = std::clamp(t / timing.T_ss, 0.0, 1.0);
  const double blend = tau * tau * (3.0 - 2.0 * tau);
  const double u = 1.0 - tau;
  // Quartic Bezier with control heights 0, 0, 8h/3, 0, 0.
  const double z = 6.0 * tau * tau * u * u * (8.0 * timing.swing_height / 3.0);
  const Eigen::Vector2d p = f_prev + blend * (f_next - f_prev);
  return {p.x(), p.y(), z};
}

struct MassReferences {
  Eigen::Vector2d stance;
  Eigen::Vector2d torso;
  Eigen::Vector2d swing;
};

/// Leg masses sit halfway between the hip and the ZMP (stance) or the swing
/// foot; the torso sits at the hip.
inline MassReferences mass_references(const Eigen::Vector2d& zmp, const Eigen::Vector2d& hip,
                                      const Eigen::Vector2d& swing_foot) {
  return {0.5 * (zmp + hip), hip, 0.5 * (swing_foot + hip)};
}

/// Everything the controller needs about cycle k of a walk.
struct GaitSample {
  WalkPhase phase = WalkPhase::idle;
  /// Step index during stepping, -1 before, n after the plan.
  int step = -1;
  Eigen::Vector2d zmp = Eigen::Vector2d::Zero();
  Eigen::Vector2d hip = Eigen::Vector2d::Zero();
  /// Feet of leg 0 (in stance when walking starts) and leg 1, with height.
  std::array<Eigen::Vector3d, 2> feet;
  /// Mass references of legs 0 and 1.
  std::array<Eigen::Vector2d, 2> leg_ref;
  /// Leg standing on the current support foot.
  int stance_leg = 0;
  /// Role-based references: stance mass (zmp + hip) / 2 and swing mass
  /// (swing foot + hip) / 2.
  MassReferences roles;
  SupportPhase support_phase = SupportPhase::stand;
  Footprint support;
  Footprint other;
};

/// Integer-cycle walking timeline for a footstep plan: Idle, Initialize
/// (ZMP moves from between the feet onto S_0 over T_ds), then single and
/// double support per step; afterwards the final stance is held.
class GaitSchedule {
 public:
  GaitSchedule(FootstepPlan plan, const GaitTiming& timing, const ThreeMassParams& params, double Ts)
      : plan_(std::move(plan)), timing_(timing), Ts_(Ts) {
    timing.validate(Ts);
    params.validate();
    omega_ = std::sqrt(params.g / params.com_height);
    ss_ = static_cast<int>(std::lround(timing.T_ss / Ts));
    ds_ = static_cast<int>(std::lround(timing.T_ds / Ts));
    idle_ = std::max(1, static_cast<int>(std::lround(timing.idle_time / Ts)));
    S_ = support_points(plan_);
    const Eigen::Vector2d start_mid = plan_.initial.midpoint();
    final_mid_ = plan_.final_state().midpoint();
    // Hip boundaries: midpoints of consecutive supports, with the initial
    // swing foot before S_0 and the final feet midpoint at the end.
    const size_t n = plan_.steps.size();
    hip_bounds_.push_back(start_mid);
    for (size_t i = 0; i + 1 < n; ++i) hip_bounds_.push_back(0.5 * (S_[i] + S_[i + 1]));
    hip_bounds_.push_back(final_mid_);
    leg_side_ = {other(plan_.initial.swing), plan_.initial.swing};
  }

  const FootstepPlan& plan() const { return plan_; }
  const GaitTiming& timing() const { return timing_; }
  double sample_time() const { return Ts_; }
  int idle_cycles() const { return idle_; }
  int init_cycles() const { return plan_.steps.empty() ? 0 : ds_; }
  int ss_cycles() const { return ss_; }
  int ds_cycles() const { return ds_; }
  int step_count() const { return static_cast<int>(plan_.steps.size()); }
  long walk_start() const { return idle_ + init_cycles(); }
  long step_start(int i) const { return walk_start() + static_cast<long>(i) * (ss_ + ds_); }
  /// First cycle after the last double support.
  long end_cycle() const { return step_start(step_count()); }
  Side leg_side(int leg) const { return leg_side_[static_cast<size_t>(leg)]; }

  GaitSample sample(long k) const {
    if (k < 0) throw QueryError("GaitSchedule: negative cycle");
    GaitSample g;
    const int n = step_count();
    const Eigen::Vector2d start_mid = plan_.initial.midpoint();
    std::array<Eigen::Vector2d, 2> rest{plan_.initial.foot(leg_side_[0]).position(),
                                        plan_.initial.foot(leg_side_[1]).position()};
    g.support_phase = SupportPhase::stand;
    g.support = plan_.initial.foot(leg_side_[0]);
    g.other = plan_.initial.foot(leg_side_[1]);
    if (k < walk_start()) {
      g.phase = k < idle_ ? WalkPhase::idle : WalkPhase::initialize;
      g.hip = start_mid;
      g.zmp = start_mid;
      if (g.phase == WalkPhase::initialize) {
        const double a = static_cast<double>(k - idle_) / ds_;
        g.zmp = start_mid + a * (S_[0] - start_mid);
      }
      for (int leg = 0; leg < 2; ++leg) g.feet[static_cast<size_t>(leg)] << rest[static_cast<size_t>(leg)], 0.0;
    } else if (k >= end_cycle()) {
      g.phase = n == 0 ? WalkPhase::idle : WalkPhase::double_support;
      g.step = n;
      g.hip = final_mid_;
      g.zmp = final_mid_;
      const FeetState fin = plan_.final_state();
      for (int leg = 0; leg < 2; ++leg) {
        g.feet[static_cast<size_t>(leg)] << fin.foot(leg_side_[static_cast<size_t>(leg)]).position(), 0.0;
      }
      g.support = fin.foot(leg_side_[0]);
      g.other = fin.foot(leg_side_[1]);
      g.stance_leg = n == 0 ? 0 : (n - 1) % 2;
    } else {
      const long rel = k - walk_start();
      const int i = static_cast<int>(rel / (ss_ + ds_));
      const int local = static_cast<int>(rel % (ss_ + ds_));
      const double t_local = local * Ts_;
      g.step = i;
      g.phase = local < ss_ ? WalkPhase::single_support : WalkPhase::double_support;
      if (local < ss_) {
        g.zmp = S_[static_cast<size_t>(i)];
      } else {
        const Eigen::Vector2d& from = S_[static_cast<size_t>(i)];
        const Eigen::Vector2d to = i + 1 < n ? S_[static_cast<size_t>(i + 1)] : final_mid_;
        g.zmp = from + (static_cast<double>(local - ss_) / ds_) * (to - from);
      }
      g.hip = hip_reference(S_[static_cast<size_t>(i)], hip_bounds_[static_cast<size_t>(i)],
                            hip_bounds_[static_cast<size_t>(i + 1)], 0.0, timing_.step_period(),
                            t_local, omega_);
      const int stance = i % 2;
      const int swing = 1 - stance;
      g.stance_leg = stance;
      g.feet[static_cast<size_t>(stance)] << S_[static_cast<size_t>(i)], 0.0;
      const Eigen::Vector2d prev =
          i == 0 ? plan_.initial.swing_foot().position() : S_[static_cast<size_t>(i - 1)];
      g.feet[static_cast<size_t>(swing)] =
          swing_reference(prev, S_[static_cast<size_t>(i + 1)], timing_, t_local);
      g.support = i == 0 ? plan_.initial.stance_foot() : plan_.steps[static_cast<size_t>(i - 1)];
      g.other = plan_.steps[static_cast<size_t>(i)];
      g.support_phase =
          g.phase == WalkPhase::single_support ? SupportPhase::single : SupportPhase::double_support;
    }
    const Eigen::Vector2d swing_foot = g.feet[static_cast<size_t>(1 - g.stance_leg)].head<2>();
    g.roles = mass_references(g.zmp, g.hip, swing_foot);
    for (int leg = 0; leg < 2; ++leg) {
      g.leg_ref[static_cast<size_t>(leg)] = 0.5 * (g.feet[static_cast<size_t>(leg)].head<2>() + g.hip);
    }
    return g;
  }

 private:
  FootstepPlan plan_;
  GaitTiming timing_;
  double Ts_;
  double omega_ = 0.0;
  int ss_ = 0;
  int ds_ = 0;
  int idle_ = 1;
  std::vector<Eigen::Vector2d> S_;
  std::vector<Eigen::Vector2d> hip_bounds_;
  Eigen::Vector2d final_mid_ = Eigen::Vector2d::Zero();
  std::array<Side, 2> leg_side_{Side::right, Side::left};
};

/// Reference window y(k+1) .. y(k+Np) along one axis. Output 0 follows leg 0,
/// output 1 leg 1.
inline ReferenceBundle assemble_bundle(const GaitSchedule& schedule, int axis, long k, int Np) {
  if (axis != 0 && axis != 1) throw ParameterError("assemble_bundle: axis must be 0 or 1");
  ReferenceBundle b;
  b.r_st.reserve(static_cast<size_t>(Np));
  b.r_sw.reserve(static_cast<size_t>(Np));
  b.r_z.reserve(static_cast<size_t>(Np));
  for (int j = 1; j <= Np; ++j) {
    const GaitSample g = schedule.sample(k + j);
    b.r_st.push_back(g.leg_ref[0](axis));
    b.r_sw.push_back(g.leg_ref[1](axis));
    b.r_z.push_back(g.zmp(axis));
  }
  return b;
}

/// Writes t, r_z, r_st, r_sw, hip (x and y each) and swing height for cycles
/// 0 .. cycles-1, using role-based mass references.
inline void export_reference_csv(const GaitSchedule& schedule, long cycles, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write '" + path + "'");
  out << "t,r_z_x,r_z_y,r_st_x,r_st_y,r_sw_x,r_sw_y,hip_x,hip_y,swing_z\n";
  char line[512];
  for (long k = 0; k < cycles; ++k) {
    const GaitSample g = schedule.sample(k);
    const double swing_z = g.feet[static_cast<size_t>(1 - g.stance_leg)].z();
    std::snprintf(line, sizeof line, "%.4f,%.9g,%.9g,%.9g,%.9g,%.9g,%.9g,%.9g,%.9g,%.9g\n",
                  k * schedule.sample_time(), g.zmp.x(), g.zmp.y(), g.roles.stance.x(), g.roles.stance.y(),
                  g.roles.swing.x(), g.roles.swing.y(), g.hip.x(), g.hip.y(), swing_z);
    out << line;
  }
  if (!out) throw Error("write failed for '" + path + "'");
}

}  // namespace triwalk
