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

#include <Eigen/Core>

#include "triwalk/errors.hpp"

namespace triwalk {

inline constexpr int kStateDim = 9;
inline constexpr int kInputDim = 3;
inline constexpr int kOutputDim = 3;

/// Per-axis state of the three-mass model, ordered
/// [c1, c1', c1'', c2, c2', c2'', c3, c3', c3''].
using AxisState = Eigen::Matrix<double, kStateDim, 1>;
/// Per-axis jerks of the three masses.
using AxisInput = Eigen::Matrix<double, kInputDim, 1>;
/// Per-axis outputs [c1, c3, zmp].
using AxisOutput = Eigen::Matrix<double, kOutputDim, 1>;

using StateMatrix = Eigen::Matrix<double, kStateDim, kStateDim>;
using InputMatrix = Eigen::Matrix<double, kStateDim, kInputDim>;
using OutputMatrix = Eigen::Matrix<double, kOutputDim, kStateDim>;

/// Output rows of C.
enum OutputIndex : int { kOutMass1 = 0, kOutMass3 = 1, kOutZmp = 2 };

/// Index of the position entry of mass i (0-based) in AxisState.
constexpr int position_index(int mass) { return 3 * mass; }
constexpr int velocity_index(int mass) { return 3 * mass + 1; }
constexpr int acceleration_index(int mass) { return 3 * mass + 2; }

/// Physical parameters of the three-mass model. Mass 1 is the stance leg,
/// mass 2 the torso and mass 3 the swing leg. Defaults are the values used for
/// the desk-scale simulations (80 kg robot, 1.2 m torso height).
struct ThreeMassParams {
  double m1 = 15.0;
  double m2 = 50.0;
  double m3 = 15.0;
  double z1 = 0.5;
  double z2 = 1.2;
  double z3 = 0.5;
  double g = 9.81;
  double foot_length = 0.2;
  double foot_width = 0.1;
  double zmp_safety_scale = 0.9;
  double com_height = 1.0;

  double total_mass() const { return m1 + m2 + m3; }
  std::array<double, 3> masses() const { return {m1, m2, m3}; }
  std::array<double, 3> heights() const { return {z1, z2, z3}; }

  void validate() const {
    auto positive = [](double v, const char* name) {
      if (!(v > 0.0) || !std::isfinite(v)) {
        throw ParameterError(std::string("ThreeMassParams: ") + name +
                             " must be finite and > 0");
      }
    };
    positive(m1, "m1");
    positive(m2, "m2");
    positive(m3, "m3");
    positive(z1, "z1");
    positive(z2, "z2");
    positive(z3, "z3");
    positive(g, "g");
    positive(foot_length, "foot_length");
    positive(foot_width, "foot_width");
    positive(com_height, "com_height");
    if (!(zmp_safety_scale > 0.0 && zmp_safety_scale <= 1.0)) {
      throw ParameterError("ThreeMassParams: zmp_safety_scale must be in (0, 1]");
    }
  }
};

/// Continuous (sample_time == 0) or zero-order-hold discrete state space.
struct StateSpace {
  StateMatrix A = StateMatrix::Zero();
  InputMatrix B = InputMatrix::Zero();
  OutputMatrix C = OutputMatrix::Zero();
  double sample_time = 0.0;

  bool is_discrete() const { return sample_time > 0.0; }
};

/// ZMP coefficient row of C for the given parameters.
inline Eigen::Matrix<double, 1, kStateDim> zmp_row(const ThreeMassParams& p) {
  const double M = p.total_mass();
  const auto m = p.masses();
  const auto z = p.heights();
  Eigen::Matrix<double, 1, kStateDim> row = Eigen::Matrix<double, 1, kStateDim>::Zero();
  for (int i = 0; i < 3; ++i) {
    row(position_index(i)) = m[i] / M;
    row(acceleration_index(i)) = -m[i] * z[i] / (M * p.g);
  }
  return row;
}

inline StateSpace build_continuous(const ThreeMassParams& params) {
  params.validate();
  StateSpace ss;
  for (int i = 0; i < 3; ++i) {
    ss.A(position_index(i), velocity_index(i)) = 1.0;
    ss.A(velocity_index(i), acceleration_index(i)) = 1.0;
    ss.B(acceleration_index(i), i) = 1.0;
  }
  ss.C(kOutMass1, position_index(0)) = 1.0;
  ss.C(kOutMass3, position_index(2)) = 1.0;
  ss.C.row(kOutZmp) = zmp_row(params);
  return ss;
}

/// Exact zero-order-hold discretization. A is block-nilpotent (A^3 = 0), so
/// exp(A Ts) = I + A Ts + A^2 Ts^2 / 2 and the input integral truncates the
/// same way.
inline StateSpace discretize(const StateSpace& ss, double Ts) {
  if (!(Ts > 0.0) || !std::isfinite(Ts)) {
    throw ParameterError("discretize: Ts must be finite and > 0");
  }
  if (ss.is_discrete()) {
    throw ParameterError("discretize: model is already discrete");
  }
  const StateMatrix A2 = ss.A * ss.A;
  if (!(A2 * ss.A).isZero(0.0)) {
    throw StructuralError("discretize: A is not a triple-integrator chain");
  }
  StateSpace d;
  d.A = StateMatrix::Identity() + ss.A * Ts + A2 * (Ts * Ts / 2.0);
  d.B = (StateMatrix::Identity() * Ts + ss.A * (Ts * Ts / 2.0) +
         A2 * (Ts * Ts * Ts / 6.0)) *
        ss.B;
  d.C = ss.C;
  d.sample_time = Ts;
  return d;
}

/// Zero moment point from mass positions and horizontal accelerations, with
/// vertical accelerations identically zero.
inline double zmp(const ThreeMassParams& params, const std::array<double, 3>& positions,
                  const std::array<double, 3>& accels) {
  params.validate();
  const auto m = params.masses();
  const auto z = params.heights();
  double num = 0.0;
  for (int i = 0; i < 3; ++i) {
    num += m[i] * positions[i] * params.g - m[i] * z[i] * accels[i];
  }
  return num / (params.total_mass() * params.g);
}

inline double zmp(const ThreeMassParams& params, const AxisState& x) {
  return zmp(params, {x(0), x(3), x(6)}, {x(2), x(5), x(8)});
}

/// One discrete plant update. extra_accel[i] is added to the acceleration of
/// mass i after the nominal update (external force divided by mass).
inline AxisState step_plant(const StateSpace& ss, const AxisState& x, const AxisInput& u,
                            const std::array<double, 3>& extra_accel = {0.0, 0.0, 0.0}) {
  if (!ss.is_discrete()) {
    throw ParameterError("step_plant: model must be discrete");
  }
  AxisState next = ss.A * x + ss.B * u;
  for (int i = 0; i < 3; ++i) next(acceleration_index(i)) += extra_accel[i];
  return next;
}

/// Static state with the given mass positions (zero velocity and acceleration).
inline AxisState rest_state(double c1, double c2, double c3) {
  AxisState x = AxisState::Zero();
  x(position_index(0)) = c1;
  x(position_index(1)) = c2;
  x(position_index(2)) = c3;
  return x;
}

}  // namespace triwalk
