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
#include <string>
#include <vector>

#include <Eigen/Core>

#include "triwalk/dynamics.hpp"
#include "triwalk/errors.hpp"
#include "triwalk/geometry.hpp"
#include "triwalk/observer.hpp"
#include "triwalk/qp.hpp"

namespace triwalk {

struct MpcConfig {
  int Np = 80;
  int Nc = 20;
  double Ts = 0.02;
  /// Weights of the ZMP, mass-1 and mass-3 tracking terms followed by the
  /// jerk terms of masses 1, 2, 3.
  std::array<double, 6> alpha{20.0, 20.0, 20.0, 1e-4, 1e-4, 1e-4};
  double jerk_limit = 500.0;
  double soft_penalty = 1e6;
  int max_qp_iterations = 5000;
  /// Reachable area of the swing leg around the support foot: +-sagittal
  /// along the foot and [lateral_min, lateral_max] towards the swing side.
  double sagittal_reach = 0.25;
  double lateral_min = 0.05;
  double lateral_max = 0.30;
  /// Output rows are enforced at prediction samples 1 .. min(constraint_horizon, Np).
  int constraint_horizon = 20;

  void validate() const {
    if (Nc < 1 || Nc > Np) throw ParameterError("MpcConfig: need 1 <= Nc <= Np");
    if (constraint_horizon < 1) throw ParameterError("MpcConfig: constraint_horizon must be >= 1");
    if (!(Ts > 0.0)) throw ParameterError("MpcConfig: Ts must be > 0");
    for (double a : alpha)
      if (!(a >= 0.0) || !std::isfinite(a)) throw ParameterError("MpcConfig: weights must be >= 0");
    if (!(alpha[0] > 0.0 || alpha[1] > 0.0 || alpha[2] > 0.0)) {
      throw ParameterError("MpcConfig: at least one tracking weight must be positive");
    }
    if (!(jerk_limit > 0.0)) throw ParameterError("MpcConfig: jerk_limit must be > 0");
    if (!(soft_penalty > 0.0)) throw ParameterError("MpcConfig: soft_penalty must be > 0");
    if (!(sagittal_reach > 0.0) || !(lateral_max > lateral_min)) {
      throw ParameterError("MpcConfig: invalid reachable rectangle");
    }
  }
};

/// One mixed input/output row: E u(k+j) + F y(k+j) <= G (+ slack if soft).
struct ConstraintRow {
  Eigen::RowVector3d E = Eigen::RowVector3d::Zero();
  Eigen::RowVector3d F = Eigen::RowVector3d::Zero();
  double G = 0.0;
  bool soft = false;
};

struct ConstraintSet {
  std::vector<ConstraintRow> rows;
};

/// Constraints over the horizon: either a single set held for every sample or
/// one set per sample j = 0..Np.
using ConstraintSchedule = std::vector<ConstraintSet>;

/// Reference samples for y(k+1|k) .. y(k+Np|k). r_st drives output 0 (mass 1),
/// r_sw output 1 (mass 3) and r_z the ZMP output.
struct ReferenceBundle {
  std::vector<double> r_st;
  std::vector<double> r_sw;
  std::vector<double> r_z;
};

enum class SupportPhase { single, double_support, stand };

/// Stacked prediction Y = Phi x(k) + Psi u(k-1) + Gamma dU, with
/// Y = [y(k+1); ...; y(k+Np)] and u(k+i) = u(k-1) + sum_{l <= min(i, Nc-1)} du(l).
struct Prediction {
  int Np = 0;
  int Nc = 0;
  Eigen::MatrixXd Phi;
  Eigen::MatrixXd Psi;
  Eigen::MatrixXd Gamma;
  /// Psi_j for j = 0..Np (Psi_0 = 0): response at step j to a unit input held
  /// from step 0.
  std::vector<Eigen::Matrix3d> held_response;

  /// 3 x 3Nc block row of Gamma for y(k+j), j >= 1.
  auto gamma_rows(int j) const { return Gamma.middleRows(3 * (j - 1), 3); }
  auto phi_rows(int j) const { return Phi.middleRows(3 * (j - 1), 3); }
};

inline Prediction build_prediction(const StateSpace& discrete, const MpcConfig& cfg) {
  cfg.validate();
  if (!discrete.is_discrete()) throw ParameterError("build_prediction: model must be discrete");
  if (std::abs(discrete.sample_time - cfg.Ts) > 1e-12) {
    throw ParameterError("build_prediction: model sample time differs from config Ts");
  }
  const int Np = cfg.Np;
  const int Nc = cfg.Nc;
  Prediction pr;
  pr.Np = Np;
  pr.Nc = Nc;
  pr.Phi.resize(3 * Np, kStateDim);
  pr.Psi.resize(3 * Np, 3);
  pr.Gamma = Eigen::MatrixXd::Zero(3 * Np, 3 * Nc);
  pr.held_response.assign(static_cast<size_t>(Np + 1), Eigen::Matrix3d::Zero());

  StateMatrix Aj = StateMatrix::Identity();
  InputMatrix sumAB = InputMatrix::Zero();  // sum_{q < j} A^q B
  for (int j = 1; j <= Np; ++j) {
    sumAB += Aj * discrete.B;
    Aj = Aj * discrete.A;
    pr.Phi.middleRows(3 * (j - 1), 3) = discrete.C * Aj;
    pr.held_response[static_cast<size_t>(j)] = discrete.C * sumAB;
    pr.Psi.middleRows(3 * (j - 1), 3) = pr.held_response[static_cast<size_t>(j)];
  }
  // A move du(l) is held from step l on, so its effect on y(k+j) is Psi_{j-l}.
  for (int j = 1; j <= Np; ++j) {
    for (int l = 0; l < Nc && l < j; ++l) {
      pr.Gamma.block(3 * (j - 1), 3 * l, 3, 3) = pr.held_response[static_cast<size_t>(j - l)];
    }
  }
  return pr;
}

/// Quadratic cost 1/2 dU' H dU + f' dU of the tracking problem.
struct CostTerms {
  Eigen::MatrixXd H;
  Eigen::VectorXd f;
};

namespace detail {

inline Eigen::Vector3d output_weights(const MpcConfig& cfg) {
  return {cfg.alpha[1], cfg.alpha[2], cfg.alpha[0]};
}
inline Eigen::Vector3d jerk_weights(const MpcConfig& cfg) {
  return {cfg.alpha[3], cfg.alpha[4], cfg.alpha[5]};
}

/// Number of horizon samples i in [0, Np) whose input contains du(l).
inline int samples_containing(int l, int Np) { return Np - l; }

}  // namespace detail

/// Hessian of the tracking cost; depends only on the prediction and weights.
inline Eigen::MatrixXd build_hessian(const Prediction& pr, const MpcConfig& cfg) {
  const Eigen::Vector3d wy = detail::output_weights(cfg);
  const Eigen::Vector3d wu = detail::jerk_weights(cfg);
  Eigen::VectorXd W(3 * pr.Np);
  for (int j = 0; j < pr.Np; ++j) W.segment<3>(3 * j) = wy;
  Eigen::MatrixXd H = 2.0 * pr.Gamma.transpose() * W.asDiagonal() * pr.Gamma;
  // U = 1 u(k-1) + S dU; S'S has (l, m) block (Np - max(l, m)) I.
  for (int l = 0; l < pr.Nc; ++l) {
    for (int m = 0; m < pr.Nc; ++m) {
      const double count = detail::samples_containing(std::max(l, m), pr.Np);
      for (int i = 0; i < 3; ++i) H(3 * l + i, 3 * m + i) += 2.0 * count * wu(i);
    }
  }
  return 0.5 * (H + H.transpose());
}

/// Linear term of the tracking cost for the current estimate, previous input
/// and reference window.
inline Eigen::VectorXd build_gradient(const Prediction& pr, const MpcConfig& cfg,
                                      const AxisState& x, const AxisInput& u_prev,
                                      const ReferenceBundle& refs) {
  const auto n = static_cast<size_t>(pr.Np);
  if (refs.r_st.size() != n || refs.r_sw.size() != n || refs.r_z.size() != n) {
    throw ParameterError("build_cost: reference arrays must have length Np");
  }
  const Eigen::Vector3d wy = detail::output_weights(cfg);
  const Eigen::Vector3d wu = detail::jerk_weights(cfg);
  Eigen::VectorXd err = pr.Phi * x + pr.Psi * u_prev;
  for (int j = 0; j < pr.Np; ++j) {
    err(3 * j + 0) = wy(0) * (err(3 * j + 0) - refs.r_st[static_cast<size_t>(j)]);
    err(3 * j + 1) = wy(1) * (err(3 * j + 1) - refs.r_sw[static_cast<size_t>(j)]);
    err(3 * j + 2) = wy(2) * (err(3 * j + 2) - refs.r_z[static_cast<size_t>(j)]);
  }
  Eigen::VectorXd f = 2.0 * pr.Gamma.transpose() * err;
  for (int l = 0; l < pr.Nc; ++l) {
    const double count = detail::samples_containing(l, pr.Np);
    f.segment<3>(3 * l) += 2.0 * count * wu.cwiseProduct(u_prev);
  }
  return f;
}

inline CostTerms build_cost(const Prediction& pr, const ReferenceBundle& refs, const MpcConfig& cfg,
                            const AxisState& x, const AxisInput& u_prev) {
  return {build_hessian(pr, cfg), build_gradient(pr, cfg, x, u_prev, refs)};
}

/// Time-varying constraints of one walking phase along one world axis
/// (0 = x, 1 = y). `support` is the stance foot; `other` is the second foot
/// (used for the double-support and stand hull). Rows:
///  * ZMP within the safety-scaled support polygon (single foot, or the span of
///    both feet in double support / stand),
///  * mass at output `swing_output` inside the reachable rectangle of the
///    support foot (single and double support only),
///  * |jerk_i| <= jerk_limit.
/// Rotated feet are represented by their largest inscribed axis-aligned box.
inline ConstraintSet build_constraints(SupportPhase phase, int axis, const Footprint& support,
                                       const Footprint& other_foot, const ThreeMassParams& params,
                                       const MpcConfig& cfg, int swing_output = kOutMass3) {
  params.validate();
  if (axis != 0 && axis != 1) throw ParameterError("build_constraints: axis must be 0 or 1");
  if (swing_output != kOutMass1 && swing_output != kOutMass3) {
    throw ParameterError("build_constraints: swing_output must select a leg mass");
  }
  for (double v : {support.x, support.y, support.theta, other_foot.x, other_foot.y, other_foot.theta}) {
    if (!std::isfinite(v)) throw ParameterError("build_constraints: non-finite pose");
  }
  const double half_len = 0.5 * params.foot_length * params.zmp_safety_scale;
  const double half_wid = 0.5 * params.foot_width * params.zmp_safety_scale;
  Interval zmp_bounds =
      inscribed_interval(support.position(), half_len, half_wid, support.theta, axis);
  if (phase != SupportPhase::single) {
    zmp_bounds = span(zmp_bounds, inscribed_interval(other_foot.position(), half_len, half_wid,
                                                     other_foot.theta, axis));
  }

  ConstraintSet set;
  auto output_bounds = [&](int output, const Interval& iv) {
    if (!(iv.lo <= iv.hi)) throw StructuralError("build_constraints: inverted bounds");
    ConstraintRow upper;
    upper.F(output) = 1.0;
    upper.G = iv.hi;
    ConstraintRow lower;
    lower.F(output) = -1.0;
    lower.G = -iv.lo;
    set.rows.push_back(upper);
    set.rows.push_back(lower);
  };
  output_bounds(kOutZmp, zmp_bounds);

  if (phase != SupportPhase::stand) {
    const double toward_swing = support.side == Side::right ? 1.0 : -1.0;
    const Eigen::Vector2d center =
        support.position() +
        rotate({0.0, toward_swing * 0.5 * (cfg.lateral_min + cfg.lateral_max)}, support.theta);
    const Interval reach = inscribed_interval(center, cfg.sagittal_reach,
                                              0.5 * (cfg.lateral_max - cfg.lateral_min),
                                              support.theta, axis);
    output_bounds(swing_output, reach);
  }

  for (int i = 0; i < kInputDim; ++i) {
    ConstraintRow upper;
    upper.E(i) = 1.0;
    upper.G = cfg.jerk_limit;
    ConstraintRow lower;
    lower.E(i) = -1.0;
    lower.G = cfg.jerk_limit;
    set.rows.push_back(upper);
    set.rows.push_back(lower);
  }
  return set;
}

/// Result of one receding-horizon cycle.
struct ControlResult {
  AxisInput u = AxisInput::Zero();
  QpStatus status = QpStatus::optimal;
  /// Output rows had to be softened to obtain a solution.
  bool softened = false;
  /// Predicted y(k+1|k) under the applied input.
  AxisOutput predicted = AxisOutput::Zero();
  int qp_iterations = 0;
  double kkt_residual = 0.0;
};

/// Linear MPC for one axis of the three-mass model in the increment (du)
/// formulation. Keeps u(k-1) and the QP workspace between cycles.
class MpcController {
 public:
  MpcController(const StateSpace& discrete, const MpcConfig& cfg)
      : cfg_(cfg), model_(discrete), prediction_(build_prediction(discrete, cfg)) {
    hessian_ = build_hessian(prediction_, cfg_);
  }

  /// QP of the current cycle. With soften_outputs, every row with a nonzero F
  /// gets a slack penalized by cfg.soft_penalty.
  QpProblem build_qp(const AxisState& x, const ReferenceBundle& refs,
                     const ConstraintSchedule& schedule, bool soften_outputs = false) const {
    const int Np = cfg_.Np;
    const int Nc = cfg_.Nc;
    if (schedule.size() != 1 && schedule.size() != static_cast<size_t>(Np + 1)) {
      throw ParameterError("MpcController: schedule must hold 1 or Np + 1 sets");
    }
    QpProblem qp;
    qp.H = hessian_;
    qp.f = build_gradient(prediction_, cfg_, x, u_prev_, refs);

    size_t max_rows = 0;
    for (const auto& s : schedule) max_rows += s.rows.size();
    if (schedule.size() == 1) max_rows *= static_cast<size_t>(Np + 1);
    qp.A.resize(static_cast<Eigen::Index>(max_rows), 3 * Nc);
    qp.b.resize(static_cast<Eigen::Index>(max_rows));
    qp.soft_penalty = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(max_rows));

    const AxisOutput y_now = model_.C * x;
    Eigen::Index r = 0;
    Eigen::RowVectorXd a(3 * Nc);
    for (int j = 0; j <= Np; ++j) {
      const ConstraintSet& set = schedule.size() == 1 ? schedule[0] : schedule[static_cast<size_t>(j)];
      const int last_move = std::min(j, Nc - 1);
      AxisOutput y_free;
      if (j == 0) {
        y_free = y_now;
      } else {
        y_free = prediction_.phi_rows(j) * x + prediction_.held_response[static_cast<size_t>(j)] * u_prev_;
      }
      for (const ConstraintRow& row : set.rows) {
        const bool has_input = !row.E.isZero(0.0);
        const bool has_output = !row.F.isZero(0.0);
        if (!has_input && (!has_output || j == 0)) continue;
        if (!has_output && j >= Nc) continue;
        if (has_output && !has_input && j > cfg_.constraint_horizon) continue;
        a.setZero();
        if (has_input) {
          for (int l = 0; l <= last_move; ++l) a.segment<3>(3 * l) += row.E;
        }
        if (has_output && j > 0) a += row.F * prediction_.gamma_rows(j);
        qp.A.row(r) = a;
        qp.b(r) = row.G - row.E.dot(u_prev_) - row.F.dot(y_free);
        if (row.soft || (soften_outputs && has_output)) qp.soft_penalty(r) = cfg_.soft_penalty;
        ++r;
      }
    }
    qp.A.conservativeResize(r, Eigen::NoChange);
    qp.b.conservativeResize(r);
    qp.soft_penalty.conservativeResize(r);
    if (!(qp.soft_penalty.array() > 0.0).any()) qp.soft_penalty.resize(0);
    return qp;
  }

  /// Solves the cycle's QP and returns u(k) = u(k-1) + du(k|k). A hard
  /// infeasible QP is retried with softened output rows; failure after that
  /// raises ControllerFault.
  ControlResult control_step(const AxisState& x_est, const ReferenceBundle& refs,
                             const ConstraintSchedule& schedule) {
    for (int i = 0; i < kStateDim; ++i) {
      if (!std::isfinite(x_est(i))) throw ParameterError("control_step: non-finite estimate");
    }
    ControlResult res;
    QpSolution sol = solver_.solve(build_qp(x_est, refs, schedule, false), cfg_.max_qp_iterations);
    res.qp_iterations = sol.iterations;
    if (sol.status != QpStatus::optimal) {
      res.status = sol.status;
      res.softened = true;
      sol = soft_solver_.solve(build_qp(x_est, refs, schedule, true), cfg_.max_qp_iterations);
      res.qp_iterations += sol.iterations;
      if (sol.status != QpStatus::optimal) {
        throw ControllerFault(std::string("MPC: QP still ") + to_string(sol.status) +
                              " after softening output constraints");
      }
    }
    res.kkt_residual = sol.kkt_residual;
    const AxisInput du = sol.z.head<3>();
    res.u = u_prev_ + du;
    res.predicted = prediction_.phi_rows(1) * x_est + prediction_.held_response[1] * res.u;
    u_prev_ = res.u;
    return res;
  }

  /// Optimal input sequence dU of the last solve is not kept; only u(k-1).
  const AxisInput& previous_input() const { return u_prev_; }
  void set_previous_input(const AxisInput& u) { u_prev_ = u; }

  const Prediction& prediction() const { return prediction_; }
  const MpcConfig& config() const { return cfg_; }
  const Eigen::MatrixXd& hessian() const { return hessian_; }

 private:
  MpcConfig cfg_;
  StateSpace model_;
  Prediction prediction_;
  Eigen::MatrixXd hessian_;
  AxisInput u_prev_ = AxisInput::Zero();
  QpSolver solver_;
  QpSolver soft_solver_;
};

}  // namespace triwalk
