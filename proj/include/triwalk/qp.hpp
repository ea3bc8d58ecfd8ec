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
#include <cmath>
#include <limits>
#include <string>
#include <vector>

#include <Eigen/Cholesky>
#include <Eigen/Core>
#include <Eigen/QR>

#include "triwalk/errors.hpp"

namespace triwalk {

enum class QpStatus { optimal, max_iterations, infeasible_hard };

inline const char* to_string(QpStatus s) {
  switch (s) {
    case QpStatus::optimal:
      return "optimal";
    case QpStatus::max_iterations:
      return "max_iterations";
    case QpStatus::infeasible_hard:
      return "infeasible_hard";
  }
  return "unknown";
}

/// Dense convex QP
///
///   minimize    1/2 z' H z + f' z
///   subject to  A z <= b
///
/// Rows with soft_penalty(i) > 0 are soft: they get a private slack s_i >= 0,
/// the row becomes A_i z - s_i <= b_i and 1/2 soft_penalty(i) s_i^2 is added to
/// the objective. An empty soft_penalty means every row is hard.
struct QpProblem {
  Eigen::MatrixXd H;
  Eigen::VectorXd f;
  Eigen::MatrixXd A;
  Eigen::VectorXd b;
  Eigen::VectorXd soft_penalty;

  Eigen::Index num_vars() const { return f.size(); }
  Eigen::Index num_rows() const { return b.size(); }
  bool is_soft(Eigen::Index i) const {
    return soft_penalty.size() > 0 && soft_penalty(i) > 0.0;
  }

  void validate() const {
    const auto n = f.size();
    if (H.rows() != n || H.cols() != n) {
      throw StructuralError("QpProblem: H must be n x n with n = size(f)");
    }
    if (A.rows() != b.size() || (A.rows() > 0 && A.cols() != n)) {
      throw StructuralError("QpProblem: A must be m x n with m = size(b)");
    }
    if (soft_penalty.size() != 0 && soft_penalty.size() != b.size()) {
      throw StructuralError("QpProblem: soft_penalty must be empty or size m");
    }
    if (soft_penalty.size() > 0 && (soft_penalty.array() < 0.0).any()) {
      throw StructuralError("QpProblem: soft penalties must be nonnegative");
    }
    const double scale = n > 0 ? std::max(1.0, H.cwiseAbs().maxCoeff()) : 1.0;
    if (n > 0 && (H - H.transpose()).cwiseAbs().maxCoeff() > 1e-10 * scale) {
      throw StructuralError("QpProblem: H is not symmetric");
    }
  }
};

struct QpSolution {
  Eigen::VectorXd z;
  /// One entry per row; nonzero only for soft rows.
  Eigen::VectorXd slack;
  /// Lagrange multipliers of A z <= b (>= 0).
  Eigen::VectorXd multipliers;
  double objective = 0.0;
  double kkt_residual = 0.0;
  QpStatus status = QpStatus::max_iterations;
  std::vector<int> active_set;
  int iterations = 0;
};

/// 1/2 z'Hz + f'z plus the slack penalties of soft rows at their optimal slack.
inline double objective(const QpProblem& p, const Eigen::VectorXd& z) {
  double value = 0.5 * z.dot(p.H * z) + p.f.dot(z);
  for (Eigen::Index i = 0; i < p.num_rows(); ++i) {
    if (p.is_soft(i)) {
      const double s = std::max(0.0, p.A.row(i).dot(z) - p.b(i));
      value += 0.5 * p.soft_penalty(i) * s * s;
    }
  }
  return value;
}

/// Max of stationarity, primal feasibility, dual feasibility and
/// complementarity residuals for a candidate (z, multipliers). Soft rows use
/// their exact penalty multiplier soft_penalty * max(0, A_i z - b_i).
inline double kkt_residual(const QpProblem& p, const Eigen::VectorXd& z,
                           const Eigen::VectorXd& multipliers) {
  Eigen::VectorXd grad = p.H * z + p.f;
  double primal = 0.0;
  double dual = 0.0;
  double comp = 0.0;
  for (Eigen::Index i = 0; i < p.num_rows(); ++i) {
    const double g = p.A.row(i).dot(z) - p.b(i);
    if (p.is_soft(i)) {
      grad += p.soft_penalty(i) * std::max(0.0, g) * p.A.row(i).transpose();
      continue;
    }
    const double lam = multipliers(i);
    primal = std::max(primal, g);
    dual = std::max(dual, -lam);
    comp = std::max(comp, std::abs(lam * g));
    grad += lam * p.A.row(i).transpose();
  }
  const double stat = grad.size() > 0 ? grad.cwiseAbs().maxCoeff() : 0.0;
  return std::max({stat, primal, dual, comp});
}

namespace detail {

/// Lawson-Hanson nonnegative least squares: argmin |M x - g| s.t. x >= 0.
inline Eigen::VectorXd nnls(const Eigen::MatrixXd& M, const Eigen::VectorXd& g) {
  const Eigen::Index k = M.cols();
  Eigen::VectorXd x = Eigen::VectorXd::Zero(k);
  if (k == 0) return x;
  std::vector<char> passive(static_cast<size_t>(k), 0);
  const double tol = 1e-14 * std::max(1.0, M.cwiseAbs().maxCoeff()) *
                     std::max(1.0, g.cwiseAbs().maxCoeff()) * static_cast<double>(k);
  auto solve_passive = [&](Eigen::VectorXd& s) {
    std::vector<Eigen::Index> idx;
    for (Eigen::Index j = 0; j < k; ++j)
      if (passive[j]) idx.push_back(j);
    Eigen::MatrixXd Mp(M.rows(), static_cast<Eigen::Index>(idx.size()));
    for (size_t c = 0; c < idx.size(); ++c) Mp.col(static_cast<Eigen::Index>(c)) = M.col(idx[c]);
    const Eigen::VectorXd sp = Mp.colPivHouseholderQr().solve(g);
    s.setZero();
    for (size_t c = 0; c < idx.size(); ++c) s(idx[c]) = sp(static_cast<Eigen::Index>(c));
  };
  Eigen::VectorXd s(k);
  for (int outer = 0; outer < 3 * k + 10; ++outer) {
    const Eigen::VectorXd w = M.transpose() * (g - M * x);
    Eigen::Index best = -1;
    for (Eigen::Index j = 0; j < k; ++j) {
      if (!passive[j] && w(j) > tol && (best < 0 || w(j) > w(best))) best = j;
    }
    if (best < 0) break;
    passive[best] = 1;
    for (int inner = 0; inner < 3 * k + 10; ++inner) {
      solve_passive(s);
      double alpha = 1.0;
      bool all_positive = true;
      for (Eigen::Index j = 0; j < k; ++j) {
        if (passive[j] && s(j) <= 0.0) {
          all_positive = false;
          alpha = std::min(alpha, x(j) / (x(j) - s(j)));
        }
      }
      if (all_positive) {
        x = s;
        break;
      }
      x += alpha * (s - x);
      for (Eigen::Index j = 0; j < k; ++j) {
        if (passive[j] && x(j) <= tol) {
          passive[j] = 0;
          x(j) = 0.0;
        }
      }
    }
  }
  return x;
}

}  // namespace detail

/// KKT residual of z alone: multipliers of near-active hard rows are
/// recovered by nonnegative least squares on the stationarity condition.
inline double kkt_residual(const QpProblem& p, const Eigen::VectorXd& z) {
  Eigen::VectorXd grad = p.H * z + p.f;
  std::vector<Eigen::Index> near;
  for (Eigen::Index i = 0; i < p.num_rows(); ++i) {
    const double g = p.A.row(i).dot(z) - p.b(i);
    if (p.is_soft(i)) {
      grad += p.soft_penalty(i) * std::max(0.0, g) * p.A.row(i).transpose();
    } else if (std::abs(g) <= 1e-9 * (1.0 + std::abs(p.b(i)))) {
      near.push_back(i);
    }
  }
  Eigen::MatrixXd M(z.size(), static_cast<Eigen::Index>(near.size()));
  for (size_t c = 0; c < near.size(); ++c) {
    M.col(static_cast<Eigen::Index>(c)) = p.A.row(near[c]).transpose();
  }
  const Eigen::VectorXd lam_near = detail::nnls(M, -grad);
  Eigen::VectorXd lam = Eigen::VectorXd::Zero(p.num_rows());
  for (size_t c = 0; c < near.size(); ++c) lam(near[c]) = lam_near(static_cast<Eigen::Index>(c));
  return kkt_residual(p, z, lam);
}

/// Dual active-set QP solver (Goldfarb-Idnani). It starts from the
/// unconstrained minimizer and adds violated rows one at a time while keeping
/// the dual feasible, so no feasible starting point is needed and
/// infeasibility is detected when a violated row cannot be added. The inverse
/// Cholesky factor of H is cached across calls with the same Hessian, and the
/// previous active set is preferred when choosing rows to add (warm start).
///
/// Holds mutable workspace: use one instance per thread.
class QpSolver {
 public:
  QpSolution solve(const QpProblem& p, int max_iter = 1000) {
    p.validate();
    factorize(p.H);
    const Eigen::Index n = p.num_vars();
    const Eigen::Index m = p.num_rows();

    std::vector<Eigen::Index> soft_rows;
    for (Eigen::Index i = 0; i < m; ++i)
      if (p.is_soft(i)) soft_rows.push_back(i);
    const auto ns = static_cast<Eigen::Index>(soft_rows.size());
    const Eigen::Index N = n + ns;
    const Eigen::Index rows = m + ns;

    Eigen::MatrixXd J = Eigen::MatrixXd::Zero(N, N);
    J.topLeftCorner(n, n) = inv_factor_;
    Eigen::VectorXd f = Eigen::VectorXd::Zero(N);
    f.head(n) = p.f;
    RowMatrix C = RowMatrix::Zero(rows, N);
    Eigen::VectorXd d(rows);
    if (m > 0) C.topLeftCorner(m, n) = p.A;
    d.head(m) = p.b;
    for (Eigen::Index k = 0; k < ns; ++k) {
      const Eigen::Index i = soft_rows[static_cast<size_t>(k)];
      J(n + k, n + k) = 1.0 / std::sqrt(p.soft_penalty(i));
      C(i, n + k) = -1.0;
      C(m + k, n + k) = -1.0;
      d(m + k) = 0.0;
    }

    std::vector<char> warm(static_cast<size_t>(rows), 0);
    for (int i : warm_start_)
      if (i >= 0 && i < rows) warm[static_cast<size_t>(i)] = 1;

    Core core = run(J, f, C, d, warm, max_iter);

    QpSolution sol;
    sol.status = core.status;
    sol.iterations = core.iterations;
    sol.z = core.x.head(n);
    sol.slack = Eigen::VectorXd::Zero(m);
    for (Eigen::Index k = 0; k < ns; ++k) sol.slack(soft_rows[static_cast<size_t>(k)]) = core.x(n + k);
    sol.multipliers = core.lambda.head(m);
    for (int i : core.active)
      if (i < m) sol.active_set.push_back(i);
    std::sort(sol.active_set.begin(), sol.active_set.end());
    sol.objective = objective(p, sol.z);
    sol.kkt_residual = kkt_residual(p, sol.z, sol.multipliers);
    if (sol.status == QpStatus::optimal) warm_start_ = sol.active_set;
    return sol;
  }

  /// Rows (indices into A) to prefer when several are violated.
  void set_warm_start(std::vector<int> rows) { warm_start_ = std::move(rows); }
  const std::vector<int>& warm_start() const { return warm_start_; }

 private:
  using RowMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

  struct Core {
    QpStatus status = QpStatus::max_iterations;
    Eigen::VectorXd x;
    Eigen::VectorXd lambda;
    std::vector<int> active;
    int iterations = 0;
  };

  void factorize(const Eigen::MatrixXd& H) {
    if (H.rows() == cached_hessian_.rows() && H.cols() == cached_hessian_.cols() &&
        H == cached_hessian_) {
      return;
    }
    Eigen::LLT<Eigen::MatrixXd> llt(H);
    if (llt.info() != Eigen::Success) {
      throw StructuralError("QpSolver: Hessian is not positive definite");
    }
    const Eigen::MatrixXd L = llt.matrixL();
    const double dmax = L.diagonal().cwiseAbs().maxCoeff();
    const double dmin = L.diagonal().cwiseAbs().minCoeff();
    if (!(dmin > 1e-12 * dmax)) {
      throw StructuralError("QpSolver: Hessian is numerically singular");
    }
    // J = L^{-T}, so J J' = H^{-1}.
    inv_factor_ = L.transpose().triangularView<Eigen::Upper>().solve(
        Eigen::MatrixXd::Identity(H.rows(), H.cols()));
    cached_hessian_ = H;
  }

  static Core run(Eigen::MatrixXd& J, const Eigen::VectorXd& f, const RowMatrix& C,
                  const Eigen::VectorXd& d, const std::vector<char>& warm, int max_iter) {
    const Eigen::Index N = f.size();
    const Eigen::Index rows = d.size();
    constexpr double inf = std::numeric_limits<double>::infinity();

    Core out;
    Eigen::MatrixXd R = Eigen::MatrixXd::Zero(N, N);
    Eigen::VectorXd u = Eigen::VectorXd::Zero(N);
    Eigen::VectorXd x = -(J * (J.transpose() * f));
    std::vector<int> active;
    std::vector<char> is_active(static_cast<size_t>(rows), 0);
    Eigen::VectorXd norms(rows);
    for (Eigen::Index i = 0; i < rows; ++i) norms(i) = std::max(C.row(i).norm(), 1e-300);

    Eigen::VectorXd dv(N), zdir(N), r(N), np(N);

    auto drop = [&](Eigen::Index pos) {
      const Eigen::Index iq = static_cast<Eigen::Index>(active.size());
      is_active[static_cast<size_t>(active[static_cast<size_t>(pos)])] = 0;
      active.erase(active.begin() + pos);
      for (Eigen::Index j = pos; j + 1 < iq; ++j) {
        u(j) = u(j + 1);
        R.col(j) = R.col(j + 1);
      }
      u(iq - 1) = 0.0;
      R.col(iq - 1).setZero();
      const Eigen::Index nq = iq - 1;
      for (Eigen::Index j = pos; j < nq; ++j) {
        const double a = R(j, j);
        const double b = R(j + 1, j);
        const double h = std::hypot(a, b);
        if (h == 0.0) continue;
        const double c = a / h;
        const double s = b / h;
        for (Eigen::Index k = j; k < nq; ++k) {
          const double t1 = R(j, k);
          const double t2 = R(j + 1, k);
          R(j, k) = c * t1 + s * t2;
          R(j + 1, k) = -s * t1 + c * t2;
        }
        R(j + 1, j) = 0.0;
        for (Eigen::Index k = 0; k < N; ++k) {
          const double t1 = J(k, j);
          const double t2 = J(k, j + 1);
          J(k, j) = c * t1 + s * t2;
          J(k, j + 1) = -s * t1 + c * t2;
        }
      }
    };

    auto add = [&](int row, Eigen::VectorXd& dvec) {
      const Eigen::Index iq = static_cast<Eigen::Index>(active.size());
      for (Eigen::Index j = N - 1; j > iq; --j) {
        const double a = dvec(j - 1);
        const double b = dvec(j);
        if (b == 0.0) continue;
        const double h = std::hypot(a, b);
        const double c = a / h;
        const double s = b / h;
        dvec(j - 1) = h;
        dvec(j) = 0.0;
        for (Eigen::Index k = 0; k < N; ++k) {
          const double t1 = J(k, j - 1);
          const double t2 = J(k, j);
          J(k, j - 1) = c * t1 + s * t2;
          J(k, j) = -s * t1 + c * t2;
        }
      }
      R.col(iq).head(iq + 1) = dvec.head(iq + 1);
      active.push_back(row);
      is_active[static_cast<size_t>(row)] = 1;
    };

    auto finish = [&](QpStatus status) {
      out.status = status;
      out.x = x;
      out.lambda = Eigen::VectorXd::Zero(rows);
      for (size_t i = 0; i < active.size(); ++i) out.lambda(active[i]) = u(static_cast<Eigen::Index>(i));
      out.active = active;
      return out;
    };

    for (;;) {
      const Eigen::VectorXd slack = d - C * x;
      int p = -1;
      double worst = 0.0;
      bool p_warm = false;
      for (Eigen::Index i = 0; i < rows; ++i) {
        if (is_active[static_cast<size_t>(i)]) continue;
        const double v = slack(i) / norms(i);
        const double tol = 1e-11 * std::max(1.0, std::abs(d(i)) / norms(i));
        if (v >= -tol) continue;
        const bool w = warm[static_cast<size_t>(i)] != 0;
        if (p < 0 || (w && !p_warm) || (w == p_warm && v < worst)) {
          p = static_cast<int>(i);
          worst = v;
          p_warm = w;
        }
      }
      if (p < 0) return finish(QpStatus::optimal);

      np = -C.row(p).transpose();
      double sp = slack(p);
      double u_new = 0.0;
      for (;;) {
        if (++out.iterations > max_iter) return finish(QpStatus::max_iterations);
        const Eigen::Index iq = static_cast<Eigen::Index>(active.size());
        dv.noalias() = J.transpose() * np;
        zdir.noalias() = J.rightCols(N - iq) * dv.tail(N - iq);
        if (iq > 0) {
          r.head(iq) = R.topLeftCorner(iq, iq).triangularView<Eigen::Upper>().solve(dv.head(iq));
        }
        double t1 = inf;
        Eigen::Index l = -1;
        for (Eigen::Index j = 0; j < iq; ++j) {
          if (r(j) > 0.0) {
            const double ratio = u(j) / r(j);
            if (ratio < t1) {
              t1 = ratio;
              l = j;
            }
          }
        }
        const double znp = zdir.dot(np);
        const double t2 = znp > 1e-12 * dv.squaredNorm() ? -sp / znp : inf;
        const double t = std::min(t1, t2);
        if (t == inf) return finish(QpStatus::infeasible_hard);
        if (t2 == inf) {
          u.head(iq) -= t * r.head(iq);
          u_new += t;
          drop(l);
          continue;
        }
        x += t * zdir;
        u.head(iq) -= t * r.head(iq);
        u_new += t;
        if (t == t2) {
          add(p, dv);
          u(iq) = u_new;
          break;
        }
        drop(l);
        sp = d(p) - C.row(p).dot(x);
      }
    }
  }

  Eigen::MatrixXd cached_hessian_;
  Eigen::MatrixXd inv_factor_;
  std::vector<int> warm_start_;
};

/// Convenience wrapper with a fresh solver.
inline QpSolution solve(const QpProblem& p, int max_iter = 1000) {
  QpSolver solver;
  return solver.solve(p, max_iter);
}

}  // namespace triwalk
