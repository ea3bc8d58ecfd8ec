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
#include <numbers>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "triwalk/dynamics.hpp"
#include "triwalk/errors.hpp"
#include "triwalk/footstep.hpp"
#include "triwalk/mpc.hpp"
#include "triwalk/observer.hpp"
#include "triwalk/refgen.hpp"

namespace triwalk {

/// Step length X (m), step width offset Y (m) and turning rate alpha (deg/s).
struct Setpoints {
  double X = 0.0;
  double Y = 0.0;
  double alpha = 0.0;

  friend bool operator==(const Setpoints&, const Setpoints&) = default;
};

/// First-order lag: filtered += (Ts / lag_tau) (command - filtered).
inline Setpoints filter_setpoints(const Setpoints& filtered, const Setpoints& command, double Ts,
                                  double lag_tau) {
  if (!(lag_tau > 0.0)) throw ParameterError("filter_setpoints: lag_tau must be > 0");
  if (!(Ts > 0.0)) throw ParameterError("filter_setpoints: Ts must be > 0");
  const double a = std::min(1.0, Ts / lag_tau);
  return {filtered.X + a * (command.X - filtered.X), filtered.Y + a * (command.Y - filtered.Y),
          filtered.alpha + a * (command.alpha - filtered.alpha)};
}

struct StepGeometry {
  Footprint next;
  /// Displacement from the current support foot to the new footprint.
  Eigen::Vector2d SL = Eigen::Vector2d::Zero();
  bool clamped = false;
};

/// Next footprint for setpoint walking: relative to the stance foot, turned by
/// alpha * step period, offset X forward and (+-step_width + Y) sideways
/// towards the swing side; offsets outside the reachable rectangle are
/// clamped and flagged.
inline StepGeometry plan_next_step(const Setpoints& sp, const FeetState& feet, const GaitTiming& timing,
                                   const MpcConfig& mpc, double step_width) {
  const Footprint& stance = feet.stance_foot();
  const Side side = feet.swing;
  const double toward = side == Side::left ? 1.0 : -1.0;
  StepGeometry g;
  double forward = sp.X;
  double lateral = step_width + toward * sp.Y;
  if (std::abs(forward) > mpc.sagittal_reach) {
    forward = std::copysign(mpc.sagittal_reach, forward);
    g.clamped = true;
  }
  if (lateral < mpc.lateral_min || lateral > mpc.lateral_max) {
    lateral = std::clamp(lateral, mpc.lateral_min, mpc.lateral_max);
    g.clamped = true;
  }
  const double theta = wrap_angle(stance.theta + sp.alpha * std::numbers::pi / 180.0 * timing.step_period());
  const Eigen::Vector2d p = stance.position() + rotate({forward, toward * lateral}, theta);
  g.next = {p.x(), p.y(), theta, side, false};
  g.SL = p - stance.position();
  return g;
}

struct EngineConfig {
  ThreeMassParams params;
  MpcConfig mpc;
  GaitTiming timing;
  ObserverConfig observer;
  FootstepConfig footstep;
  double lag_tau = 0.5;
  /// Steps planned ahead of the executing one in setpoint mode.
  int setpoint_preview_steps = 3;

  void validate() const {
    params.validate();
    mpc.validate();
    timing.validate(mpc.Ts);
    observer.validate();
    footstep.validate();
    if (!(lag_tau > 0.0)) throw ParameterError("EngineConfig: lag_tau must be > 0");
    if (setpoint_preview_steps < 2) throw ParameterError("EngineConfig: setpoint_preview_steps must be >= 2");
  }
};

/// Measured outputs of both axes: (mass 1, mass 3, ZMP) along x then y.
using Measurement = std::array<AxisOutput, 2>;

struct Diagnostics {
  long cycle = 0;
  double t = 0.0;
  WalkPhase phase = WalkPhase::idle;
  int step = -1;
  std::array<QpStatus, 2> status{QpStatus::optimal, QpStatus::optimal};
  std::array<bool, 2> softened{false, false};
  std::array<AxisInput, 2> u{AxisInput::Zero(), AxisInput::Zero()};
  std::array<AxisState, 2> estimate{AxisState::Zero(), AxisState::Zero()};
  Eigen::Vector2d zmp_ref = Eigen::Vector2d::Zero();
  /// Predicted ZMP for the next cycle.
  Eigen::Vector2d zmp_pred = Eigen::Vector2d::Zero();
  Eigen::Vector2d hip_ref = Eigen::Vector2d::Zero();
  std::array<Eigen::Vector2d, 2> leg_ref;
  int stance_leg = 0;
  SupportPhase support_phase = SupportPhase::stand;
  Footprint support;
  Footprint other;
  int qp_iterations = 0;
  bool step_clamped = false;
  Setpoints filtered;
};

/// Walking state machine: Idle until walking is requested, then Initialize
/// and alternating single/double support, driving one MPC and one observer
/// per world axis. Leg 0 is the leg in stance when walking starts.
class WalkEngine {
 public:
  /// Follows a fixed footstep plan.
  WalkEngine(const EngineConfig& cfg, FootstepPlan plan) : cfg_(cfg), plan_(std::move(plan)) {
    init();
  }
  /// Walks by setpoints, starting from the given feet.
  WalkEngine(const EngineConfig& cfg, const FeetState& feet) : cfg_(cfg), setpoint_mode_(true) {
    plan_.initial = feet;
    init();
  }

  /// Starts Initialize at the next cycle (no-op once walking).
  void request_walk() {
    if (schedule_) return;
    walk_requested_ = true;
  }
  void command(const Setpoints& sp) { command_ = sp; }
  const Setpoints& filtered_setpoints() const { return filtered_; }
  bool walking() const { return schedule_.has_value(); }
  long cycle() const { return k_; }
  const EngineConfig& config() const { return cfg_; }
  const FootstepPlan& plan() const { return schedule_ ? schedule_->plan() : plan_; }
  const GaitSchedule* schedule() const { return schedule_ ? &*schedule_ : nullptr; }

  /// Static state matching the standing references, per axis.
  AxisState initial_state(int axis) const {
    const GaitSchedule s(plan_, cfg_.timing, cfg_.params, cfg_.mpc.Ts);
    const GaitSample g = s.sample(0);
    const ThreeMassParams& p = cfg_.params;
    const double c1 = g.leg_ref[0](axis);
    const double c3 = g.leg_ref[1](axis);
    const double c2 = (p.total_mass() * g.zmp(axis) - p.m1 * c1 - p.m3 * c3) / p.m2;
    return rest_state(c1, c2, c3);
  }

  /// One control cycle: estimate, (re)plan, solve both axes.
  Diagnostics tick(const Measurement& y) {
    Diagnostics d;
    d.cycle = k_;
    d.t = k_ * cfg_.mpc.Ts;
    for (int a = 0; a < 2; ++a) {
      const size_t i = static_cast<size_t>(a);
      estimate_[i] = observer_->observe(estimate_[i], u_prev_[i], y[i]);
      d.estimate[i] = estimate_[i];
    }
    filtered_ = filter_setpoints(filtered_, command_, cfg_.mpc.Ts, cfg_.lag_tau);
    d.filtered = filtered_;

    if (!schedule_ && walk_requested_) start(std::max(k_, std::lround(cfg_.timing.idle_time / cfg_.mpc.Ts)));
    if (!schedule_) {
      fill(d, idle_sample_);
      u_prev_ = {AxisInput::Zero(), AxisInput::Zero()};
      ++k_;
      return d;
    }
    if (setpoint_mode_) extend_plan(d);

    const int Np = cfg_.mpc.Np;
    samples_.clear();
    for (int j = 0; j <= Np; ++j) samples_.push_back(schedule_->sample(k_ + j));
    const GaitSample& now = samples_.front();
    fill(d, now);
    if (now.phase == WalkPhase::idle) {
      u_prev_ = {AxisInput::Zero(), AxisInput::Zero()};
      for (auto& c : mpc_) c.set_previous_input(AxisInput::Zero());
      ++k_;
      return d;
    }

    for (int a = 0; a < 2; ++a) {
      const size_t i = static_cast<size_t>(a);
      ReferenceBundle refs;
      ConstraintSchedule cons;
      refs.r_st.reserve(static_cast<size_t>(Np));
      refs.r_sw.reserve(static_cast<size_t>(Np));
      refs.r_z.reserve(static_cast<size_t>(Np));
      for (int j = 0; j <= Np; ++j) {
        const GaitSample& g = samples_[static_cast<size_t>(j)];
        if (j > 0) {
          refs.r_st.push_back(g.leg_ref[0](a));
          refs.r_sw.push_back(g.leg_ref[1](a));
          refs.r_z.push_back(g.zmp(a));
        }
        const int swing_output = g.stance_leg == 0 ? kOutMass3 : kOutMass1;
        cons.push_back(build_constraints(g.support_phase, a, g.support, g.other, cfg_.params, cfg_.mpc,
                                         swing_output));
      }
      try {
        const ControlResult r = mpc_[i].control_step(estimate_[i], refs, cons);
        last_refs_[i] = std::move(refs);
        d.status[i] = r.status;
        d.softened[i] = r.softened;
        d.u[i] = r.u;
        d.zmp_pred(a) = r.predicted(kOutZmp);
        d.qp_iterations += r.qp_iterations;
        u_prev_[i] = r.u;
      } catch (const ControllerFault& e) {
        throw ControllerFault("cycle " + std::to_string(k_) + " (t=" + std::to_string(d.t) + " s, " +
                              to_string(now.phase) + ", step " + std::to_string(now.step) + ", axis " +
                              (a == 0 ? "x" : "y") + "): " + e.what());
      }
    }
    ++k_;
    return d;
  }

  /// Reference window handed to the axis controller in the last tick.
  const ReferenceBundle& last_references(int axis) const { return last_refs_[static_cast<size_t>(axis)]; }

 private:
  static void fill(Diagnostics& d, const GaitSample& g) {
    d.phase = g.phase;
    d.step = g.step;
    d.zmp_ref = g.zmp;
    d.hip_ref = g.hip;
    d.leg_ref = g.leg_ref;
    d.stance_leg = g.stance_leg;
    d.support_phase = g.support_phase;
    d.support = g.support;
    d.other = g.other;
  }

  void init() {
    cfg_.validate();
    const StateSpace ss = discretize(build_continuous(cfg_.params), cfg_.mpc.Ts);
    observer_.emplace(ss, cfg_.observer);
    mpc_.clear();
    mpc_.emplace_back(ss, cfg_.mpc);
    mpc_.emplace_back(ss, cfg_.mpc);
    idle_sample_ = GaitSchedule(plan_, cfg_.timing, cfg_.params, cfg_.mpc.Ts).sample(0);
    // One cycle "before" the start so that the first observe() reproduces it.
    estimate_ = {initial_state(0), initial_state(1)};
  }

  void start(long k) {
    GaitTiming timing = cfg_.timing;
    timing.idle_time = k * cfg_.mpc.Ts;
    timing_ = timing;
    if (setpoint_mode_) {
      plan_.steps.clear();
      for (int n = 0; n <= cfg_.setpoint_preview_steps; ++n) append_setpoint_step();
    }
    schedule_.emplace(plan_, timing_, cfg_.params, cfg_.mpc.Ts);
  }

  void append_setpoint_step() {
    const StepGeometry g =
        plan_next_step(filtered_, plan_.final_state(), timing_, cfg_.mpc, cfg_.footstep.step_width);
    plan_.steps.push_back(g.next);
    clamped_ = clamped_ || g.clamped;
  }

  /// At the start of each single support, keep the executing step and replan
  /// the ones after it from the current filtered setpoints.
  void extend_plan(Diagnostics& d) {
    const GaitSchedule& s = *schedule_;
    const long rel = k_ - s.walk_start();
    if (rel < 0 || rel % (s.ss_cycles() + s.ds_cycles()) != 0) return;
    const int i = static_cast<int>(rel / (s.ss_cycles() + s.ds_cycles()));
    plan_.steps.resize(static_cast<size_t>(i + 1));
    clamped_ = false;
    for (int n = 0; n < cfg_.setpoint_preview_steps; ++n) append_setpoint_step();
    d.step_clamped = clamped_;
    schedule_.emplace(plan_, timing_, cfg_.params, cfg_.mpc.Ts);
  }

  EngineConfig cfg_;
  FootstepPlan plan_;
  bool setpoint_mode_ = false;
  bool walk_requested_ = false;
  bool clamped_ = false;
  GaitTiming timing_;
  std::optional<GaitSchedule> schedule_;
  std::optional<SteadyStateObserver> observer_;
  std::vector<MpcController> mpc_;
  std::array<AxisState, 2> estimate_{AxisState::Zero(), AxisState::Zero()};
  std::array<AxisInput, 2> u_prev_{AxisInput::Zero(), AxisInput::Zero()};
  Setpoints command_;
  Setpoints filtered_;
  std::vector<GaitSample> samples_;
  GaitSample idle_sample_;
  std::array<ReferenceBundle, 2> last_refs_;
  long k_ = 0;
};

}  // namespace triwalk
