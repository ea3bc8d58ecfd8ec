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
#include <Eigen/LU>
#include <Eigen/SVD>

#include "triwalk/dynamics.hpp"
#include "triwalk/errors.hpp"

namespace triwalk {

/// Noise model behind the steady-state Kalman gain. Process noise is given per
/// derivative order (position, velocity, acceleration) and applied to all three
/// masses; measurement noise is given per output (mass 1, mass 3, ZMP). All
/// values are variances.
struct ObserverConfig {
  std::array<double, 3> process_noise{1e-12, 1e-10, 1e-8};
  std::array<double, 3> measurement_noise{2.78e-4, 2.78e-4, 2.78e-4};

  void validate() const {
    for (double v : process_noise)
      if (!(v > 0.0) || !std::isfinite(v)) throw ParameterError("ObserverConfig: process noise must be > 0");
    for (double v : measurement_noise)
      if (!(v > 0.0) || !std::isfinite(v)) throw ParameterError("ObserverConfig: measurement noise must be > 0");
  }
};

/// Predictor-corrector state estimator with a precomputed steady-state Kalman
/// gain for the discrete model.
class SteadyStateObserver {
 public:
  using Gain = Eigen::Matrix<double, kStateDim, kOutputDim>;

  SteadyStateObserver(const StateSpace& discrete, const ObserverConfig& cfg) : model_(discrete) {
    if (!discrete.is_discrete()) throw ParameterError("SteadyStateObserver: model must be discrete");
    cfg.validate();
    check_detectable();
    StateMatrix Q = StateMatrix::Zero();
    for (int i = 0; i < kStateDim; ++i) Q(i, i) = cfg.process_noise[static_cast<size_t>(i % 3)];
    Eigen::Matrix3d R = Eigen::Matrix3d::Zero();
    for (int i = 0; i < 3; ++i) R(i, i) = cfg.measurement_noise[static_cast<size_t>(i)];

    // Prior covariance from the doubling iteration on the dual control
    // Riccati equation (A', C').
    const OutputMatrix& C = model_.C;
    StateMatrix Ak = model_.A.transpose();
    StateMatrix G = C.transpose() * R.inverse() * C;
    StateMatrix H = Q;
    for (int it = 0; it < 200; ++it) {
      const Eigen::PartialPivLU<StateMatrix> W(StateMatrix::Identity() + G * H);
      const StateMatrix WA = W.solve(Ak);
      const StateMatrix WG = W.solve(G);
      const StateMatrix H_next = H + Ak.transpose() * H * WA;
      G = G + Ak * WG * Ak.transpose();
      G = 0.5 * (G + G.transpose());
      Ak = Ak * WA;
      const double change = (H_next - H).cwiseAbs().maxCoeff();
      H = 0.5 * (H_next + H_next.transpose());
      if (change <= 1e-14 * H.cwiseAbs().maxCoeff()) break;
    }
    const StateMatrix& prior = H;
    gain_ = prior * C.transpose() * (C * prior * C.transpose() + R).inverse();
    const StateMatrix P = (StateMatrix::Identity() - gain_ * C) * prior;
    covariance_ = P;
  }

  /// x(k|k) from x(k-1|k-1), the input applied over the last cycle and y(k).
  AxisState observe(const AxisState& prev_estimate, const AxisInput& u_prev,
                    const AxisOutput& y_meas) const {
    const AxisState prior = model_.A * prev_estimate + model_.B * u_prev;
    return prior + gain_ * (y_meas - model_.C * prior);
  }

  const Gain& gain() const { return gain_; }
  const StateMatrix& covariance() const { return covariance_; }
  const StateSpace& model() const { return model_; }

 private:
  void check_detectable() const {
    // A has only the eigenvalue 1, so detectability is full observability.
    Eigen::Matrix<double, kOutputDim * kStateDim, kStateDim> O;
    StateMatrix Ak = StateMatrix::Identity();
    for (int k = 0; k < kStateDim; ++k) {
      O.block<kOutputDim, kStateDim>(kOutputDim * k, 0) = model_.C * Ak;
      Ak = Ak * model_.A;
    }
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(O);
    const auto& sv = svd.singularValues();
    if (!(sv(kStateDim - 1) > 1e-10 * sv(0))) {
      throw StructuralError("SteadyStateObserver: (A, C) is not detectable");
    }
  }

  StateSpace model_;
  Gain gain_ = Gain::Zero();
  StateMatrix covariance_ = StateMatrix::Zero();
};

}  // namespace triwalk
