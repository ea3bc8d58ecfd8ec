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

// Acceptance checks: prints one PASS/FAIL line per criterion and exits
// non-zero if any criterion fails.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <limits>
#include <random>
#include <string>
#include <vector>

#include "oracles.hpp"
#include "triwalk/dynamics.hpp"
#include "triwalk/footstep.hpp"
#include "triwalk/harness.hpp"
#include "triwalk/qp.hpp"
#include "triwalk/refgen.hpp"

namespace {

using namespace triwalk;

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof(buf), f, args...);
  return buf;
}

std::string scenario_path(const std::string& name) {
  return std::string(TRIWALK_SOURCE_DIR) + "/scenarios/" + name;
}

Outcome discretization() {
  double worst = 0.0;
  for (double Ts : {0.001, 0.02, 0.1}) {
    const StateSpace c = build_continuous(ThreeMassParams{});
    const StateSpace d = discretize(c, Ts);
    Eigen::MatrixXd M = Eigen::MatrixXd::Zero(kStateDim + kInputDim, kStateDim + kInputDim);
    M.topLeftCorner(kStateDim, kStateDim) = c.A * Ts;
    M.topRightCorner(kStateDim, kInputDim) = c.B * Ts;
    const Eigen::MatrixXd E = testing::expm_series(M, 20);
    worst = std::max(worst, (E.topLeftCorner(kStateDim, kStateDim) - d.A).cwiseAbs().maxCoeff());
    worst = std::max(worst, (E.topRightCorner(kStateDim, kInputDim) - d.B).cwiseAbs().maxCoeff());
  }
  return {worst < 1e-10, fmt("max deviation from series %.2e", worst)};
}

Outcome qp_correctness() {
  std::mt19937 rng(20240601);
  std::normal_distribution<double> N01(0.0, 1.0);
  std::uniform_real_distribution<double> U(0.05, 1.0);
  std::uniform_int_distribution<int> nvars(1, 8), ncons(0, 16);
  double worst_obj = 0.0, worst_kkt = 0.0;
  int failures = 0;
  for (int trial = 0; trial < 200; ++trial) {
    const int n = nvars(rng);
    const int m = ncons(rng);
    Eigen::MatrixXd G(n, n);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) G(i, j) = N01(rng);
    QpProblem p;
    p.H = G * G.transpose() + 0.5 * Eigen::MatrixXd::Identity(n, n);
    p.f.resize(n);
    for (int i = 0; i < n; ++i) p.f(i) = 3.0 * N01(rng);
    p.A.resize(m, n);
    for (int i = 0; i < m; ++i)
      for (int j = 0; j < n; ++j) p.A(i, j) = N01(rng);
    Eigen::VectorXd z0(n);
    for (int i = 0; i < n; ++i) z0(i) = 0.5 * N01(rng);
    p.b = p.A * z0;
    for (int i = 0; i < m; ++i) p.b(i) += U(rng);
    const auto oracle = testing::enumerate_active_sets(p.H, p.f, p.A, p.b);
    const QpSolution s = solve(p);
    if (!oracle || s.status != QpStatus::optimal) {
      ++failures;
      continue;
    }
    worst_obj = std::max(worst_obj, std::abs(s.objective - oracle->objective));
    worst_kkt = std::max(worst_kkt, s.kkt_residual);
  }
  return {failures == 0 && worst_obj < 1e-6 && worst_kkt < 1e-8,
          fmt("200 problems, %d unsolved, max objective gap %.2e, max KKT residual %.2e", failures, worst_obj,
              worst_kkt)};
}

/// Torso sign per phase: at mid single support the torso is on the support
/// foot's side of the feet midline; over each double support it moves
/// towards the next support.
bool torso_sign_holds(const Scenario& sc, const RunMetrics& m, std::string& why) {
  const GaitSchedule sched(sc.plan, sc.engine.timing, sc.engine.params, sc.engine.mpc.Ts);
  const auto S = support_points(sc.plan);
  const int n = sched.step_count();
  const FeetState final_feet = sc.plan.final_state();
  auto torso = [&](long k) { return m.trace.at(static_cast<size_t>(k)).mass[1]; };
  // Initialize shifts the torso towards S_0.
  {
    const Eigen::Vector2d mid = sc.plan.initial.midpoint();
    const Eigen::Vector2d moved = torso(sched.walk_start()) - torso(sched.idle_cycles());
    if (moved.dot(S[0] - mid) <= 0.0) {
      why = "initialize";
      return false;
    }
  }
  for (int i = 0; i < n; ++i) {
    const long k_mid = sched.step_start(i) + sched.ss_cycles() / 2;
    // The foot lifted in step i stood on S_{i-1} (the initial swing foot for i = 0).
    const Eigen::Vector2d lifted =
        i == 0 ? sc.plan.initial.swing_foot().position() : S[static_cast<size_t>(i - 1)];
    const Eigen::Vector2d support = S[static_cast<size_t>(i)];
    const Eigen::Vector2d mid = 0.5 * (support + lifted);
    const Eigen::Vector2d normal = support - mid;
    if ((torso(k_mid) - mid).dot(normal) <= 0.0) {
      why = fmt("single support %d", i);
      return false;
    }
    const long ds0 = sched.step_start(i) + sched.ss_cycles();
    const long ds1 = ds0 + sched.ds_cycles();
    const Eigen::Vector2d next = i + 1 < n ? S[static_cast<size_t>(i + 1)] : final_feet.midpoint();
    if ((torso(ds1) - torso(ds0)).dot(next - support) <= 0.0) {
      why = fmt("double support %d", i);
      return false;
    }
  }
  return true;
}

Outcome tracking() {
  const Scenario sc = load_scenario(scenario_path("tracking.json"));
  const RunMetrics m = run(sc);
  const RunSummary& s = m.summary;
  std::string why;
  const bool sign = torso_sign_holds(sc, m, why);
  const double inside = 100.0 * static_cast<double>(s.cycles - s.zmp_violation_cycles) / static_cast<double>(s.cycles);
  return {s.completed && s.zmp_violation_cycles == 0 && s.rms_stance < 0.02 && s.rms_swing < 0.02 && sign,
          fmt("ZMP inside scaled polygon %.1f%% of %ld cycles, rms stance %.4f m swing %.4f m, torso sign %s%s",
              inside, s.cycles, s.rms_stance, s.rms_swing, sign ? "ok" : "violated at ", why.c_str())};
}

Outcome noise() {
  Scenario sc = load_scenario(scenario_path("noise.json"));
  bool ok = true;
  double worst = 100.0;
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    sc.noise.seed = seed;
    const RunSummary s = run(sc, {false, false}).summary;
    const double inside = 100.0 * static_cast<double>(s.cycles - s.outside_cycles) / static_cast<double>(s.cycles);
    worst = std::min(worst, inside);
    ok = ok && s.completed && inside >= 99.0;
  }
  return {ok, fmt("10 seeds, worst run keeps ZMP inside the unscaled polygon %.2f%% of cycles", worst)};
}

Outcome disturbance() {
  Scenario sc = load_scenario(scenario_path("disturbance.json"));
  bool ok = true;
  std::string detail = "recovered:";
  for (double F : {-300.0, -200.0, -100.0, 100.0, 200.0, 300.0}) {
    sc.disturbances.front().force = F;
    const RunSummary s = run(sc, {false, true}).summary;
    ok = ok && s.completed;
    detail += fmt(" %+.0fN=%s", F, s.completed ? "yes" : "no");
  }
  return {ok, detail};
}

Outcome withstand() {
  const Scenario sc = load_scenario(scenario_path("disturbance.json"));
  const WithstandResult fwd = max_withstand(sc, 1, 0.0, 2000.0, 5.0);
  const WithstandResult bwd = max_withstand(sc, -1, 0.0, 2000.0, 5.0);
  const bool ok = fwd.force >= 350.0 && fwd.force <= 520.0 && bwd.force >= -475.0 && bwd.force <= -315.0;
  return {ok, fmt("forward %.1f N (band 350..520), backward %.1f N (band -475..-315), %zu non-monotone pairs",
                  fwd.force, bwd.force, fwd.monotonicity_violations.size() + bwd.monotonicity_violations.size())};
}

Outcome footsteps() {
  const MapFile mf = map_from_json(read_json_file(scenario_path("obstacle_map.json")));
  const FootstepConfig cfg;
  const PlanResult r = plan_footsteps(mf, cfg);
  const GridMap blocked = with_clearance(r.inflated, 1);
  const auto dist = testing::dijkstra_grid(blocked.width(), blocked.height(), blocked.cell_size(), mf.start.row,
                                           mf.start.col, [&](int row, int col) { return blocked.occupied({row, col}); });
  const double oracle = dist[static_cast<size_t>(blocked.index(mf.goal))];
  bool free = r.inflated.free_at(r.plan.initial.left.position()) && r.inflated.free_at(r.plan.initial.right.position());
  double worst = 0.0;
  int regular = 0;
  for (size_t i = 0; i < r.plan.steps.size(); ++i) {
    free = free && r.inflated.free_at(r.plan.steps[i].position());
    if (r.plan.steps[i].closing) continue;
    worst = std::max(worst, std::abs(r.plan.step_distance(i) - cfg.R));
    ++regular;
  }
  return {r.path.cost == oracle && free && worst <= 1e-9,
          fmt("A* %.12f m vs Dijkstra %.12f m, %zu footprints all free: %s, %d regular steps max |d-R| %.1e",
              r.path.cost, oracle, r.plan.steps.size(), free ? "yes" : "no", regular, worst)};
}

Outcome reference() {
  const double omega = std::sqrt(9.81 / 1.0);
  const Eigen::Vector2d p_st(0.1, -0.1), p0(0.0, 0.02), pf(0.15, -0.03);
  const double t0 = 0.0, tf = 1.0;
  const double bc = std::max((hip_reference(p_st, p0, pf, t0, tf, t0, omega) - p0).cwiseAbs().maxCoeff(),
                             (hip_reference(p_st, p0, pf, t0, tf, tf, omega) - pf).cwiseAbs().maxCoeff());
  double ode = 0.0;
  const double h = 1e-4;
  for (int i = 1; i < 100; ++i) {
    const double t = i * 0.01;
    const Eigen::Vector2d acc = (hip_reference(p_st, p0, pf, t0, tf, t + h, omega) -
                                 2.0 * hip_reference(p_st, p0, pf, t0, tf, t, omega) +
                                 hip_reference(p_st, p0, pf, t0, tf, t - h, omega)) /
                                (h * h);
    const Eigen::Vector2d res = acc - omega * omega * (hip_reference(p_st, p0, pf, t0, tf, t, omega) - p_st);
    ode = std::max(ode, res.cwiseAbs().maxCoeff());
  }
  const FootstepPlan plan = straight_plan(standing_feet({0.0, 0.0}, 0.0, 0.2), 6, 0.1);
  const GaitTiming timing;
  double gap = 0.0;
  for (int i = 1; i <= 6; ++i) {
    const double tb = i * timing.step_period();
    gap = std::max(gap, (zmp_reference(plan, timing, tb - 1e-12) - zmp_reference(plan, timing, tb)).norm());
    const double ts = tb - timing.T_ds;
    gap = std::max(gap, (zmp_reference(plan, timing, ts - 1e-12) - zmp_reference(plan, timing, ts)).norm());
  }
  const double apex =
      std::abs(swing_reference({0.0, 0.1}, {0.2, 0.1}, timing, 0.5 * timing.T_ss).z() - timing.swing_height);
  return {bc <= 1e-12 && ode < 1e-6 && gap < 1e-9 && apex <= 1e-9,
          fmt("hip boundary error %.1e, LIPM residual %.1e, ZMP gap %.1e, apex error %.1e", bc, ode, gap, apex)};
}

Outcome realtime() {
  const Scenario sc = load_scenario(scenario_path("obstacle_walk.json"));
  const RunMetrics m = run(sc, {false, true});
  return {m.summary.completed && m.timing.mean_ms < 20.0 && m.timing.p99_ms < 40.0,
          fmt("%zu cycles (both axes, Np=%d, Nc=%d): mean %.3f ms, p99 %.3f ms, max %.3f ms", m.tick_ms.size(),
              sc.engine.mpc.Np, sc.engine.mpc.Nc, m.timing.mean_ms, m.timing.p99_ms, m.timing.max_ms)};
}

Outcome omnidirectional() {
  const Scenario sc = load_scenario(scenario_path("omnidirectional.json"));
  const RunMetrics m = run(sc, {false, true});
  bool monotone = true;
  for (size_t k = 1; k < m.filtered.size(); ++k) {
    const Setpoints& a = m.filtered[k - 1];
    const Setpoints& b = m.filtered[k];
    monotone = monotone && b.X >= a.X && b.Y >= a.Y && b.alpha >= a.alpha;
  }
  const Setpoints& last = m.filtered.back();
  return {m.summary.completed && !m.summary.fall_detected && monotone,
          fmt("%ld cycles, falls %d, softened %ld, filtered setpoints monotone: %s (final X=%.4f Y=%.4f alpha=%.3f)",
              m.summary.cycles, m.summary.fall_detected ? 1 : 0, m.summary.softened_cycles, monotone ? "yes" : "no",
              last.X, last.Y, last.alpha)};
}

}  // namespace

int main() {
  struct Criterion {
    int id;
    const char* name;
    double budget_s;
    std::function<Outcome()> check;
  };
  const std::vector<Criterion> criteria{
      {1, "discretization", 1.0, discretization},
      {2, "qp correctness", 10.0, qp_correctness},
      {3, "tracking", 30.0, tracking},
      {4, "noise robustness", 300.0, noise},
      {5, "disturbance recovery", 120.0, disturbance},
      {6, "maximum withstanding", 600.0, withstand},
      {7, "footstep planning", 5.0, footsteps},
      {8, "reference generator", std::numeric_limits<double>::infinity(), reference},
      {9, "real-time budget", std::numeric_limits<double>::infinity(), realtime},
      {10, "omnidirectional", std::numeric_limits<double>::infinity(), omnidirectional},
  };
  int failed = 0;
  for (const auto& c : criteria) {
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = c.check();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    if (secs > c.budget_s) {
      o.pass = false;
      o.detail += fmt("; over the %.0f s budget", c.budget_s);
    }
    if (!o.pass) ++failed;
    std::printf("criterion %2d %-22s %s  %s (%.2f s)\n", c.id, c.name, o.pass ? "PASS" : "FAIL", o.detail.c_str(),
                secs);
    std::fflush(stdout);
  }
  std::printf("%d of %zu criteria passed\n", static_cast<int>(criteria.size()) - failed, criteria.size());
  return failed == 0 ? 0 : 1;
}
