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

#include "triwalk/refgen.hpp"

#include <cstdio>
#include <filesystem>
#include <fstream>

#include <gtest/gtest.h>

namespace triwalk {
namespace {

FootstepPlan straight_plan(int n, double R = 0.1) {
  FootstepPlan plan;
  plan.initial = standing_feet({0.0, 0.0}, 0.0, 0.2);
  FeetState s = plan.initial;
  for (int i = 0; i < n; ++i) {
    const Side side = s.swing;
    s = transition(s, {R, 0.0});
    plan.steps.push_back(s.foot(side));
  }
  return plan;
}

TEST(ZmpReference, StartsOnFirstSupport) {
  const FootstepPlan plan = straight_plan(5);
  const Eigen::Vector2d z = zmp_reference(plan, GaitTiming{}, 0.0);
  EXPECT_EQ(z, plan.initial.stance_foot().position());
}

TEST(ZmpReference, ContinuousAcrossStepBoundaries) {
  const FootstepPlan plan = straight_plan(5);
  const GaitTiming timing;
  const double T = timing.step_period();
  for (int i = 1; i < 5; ++i) {
    const double tb = i * T;
    const Eigen::Vector2d before = zmp_reference(plan, timing, tb - 1e-12);
    const Eigen::Vector2d after = zmp_reference(plan, timing, tb);
    EXPECT_LT((before - after).norm(), 1e-9) << i;
    EXPECT_EQ(after, plan.steps[static_cast<size_t>(i - 1)].position());
  }
}

TEST(ZmpReference, MidDoubleSupport) {
  FootstepPlan plan;
  plan.initial = standing_feet({0.0, 0.0}, 0.0, 0.2);
  plan.steps.push_back({0.1, 0.1, 0.0, Side::left});
  plan.steps.push_back({0.2, -0.1, 0.0, Side::right});
  const GaitTiming timing;
  const Eigen::Vector2d z = zmp_reference(plan, timing, timing.T_ss + 0.5 * timing.T_ds);
  EXPECT_NEAR(z.x(), 0.05, 1e-15);
  EXPECT_NEAR(z.y(), 0.0, 1e-15);
}

TEST(ZmpReference, VariationPerStepEqualsStep) {
  const FootstepPlan plan = straight_plan(6);
  const GaitTiming timing;
  const auto S = support_points(plan);
  const double dt = 0.001;
  for (int i = 0; i + 1 < 6; ++i) {
    double tv = 0.0;
    Eigen::Vector2d prev = zmp_reference(plan, timing, i * timing.step_period());
    for (int j = 1; j <= 1000; ++j) {
      const Eigen::Vector2d cur = zmp_reference(plan, timing, i * timing.step_period() + j * dt - 1e-12);
      tv += (cur - prev).norm();
      prev = cur;
    }
    EXPECT_NEAR(tv, (S[static_cast<size_t>(i + 1)] - S[static_cast<size_t>(i)]).norm(), 1e-9);
  }
}

TEST(ZmpReference, OutOfRange) {
  const FootstepPlan plan = straight_plan(2);
  EXPECT_THROW(zmp_reference(plan, GaitTiming{}, -0.01), QueryError);
  EXPECT_THROW(zmp_reference(plan, GaitTiming{}, 2.01), QueryError);
}

TEST(HipReference, BoundaryConditions) {
  const Eigen::Vector2d st(0.1, -0.1), h0(0.0, 0.0), hf(0.15, 0.02);
  EXPECT_LT((hip_reference(st, h0, hf, 0.3, 1.3, 0.3, 3.13) - h0).norm(), 1e-12);
  EXPECT_LT((hip_reference(st, h0, hf, 0.3, 1.3, 1.3, 3.13) - hf).norm(), 1e-12);
  for (double t : {0.0, 0.2, 0.5, 0.8}) {
    EXPECT_LT((hip_reference(st, st, st, 0.0, 0.8, t, 2.0) - st).norm(), 1e-15);
  }
}

TEST(HipReference, MidTimeMatchesExtendedPrecision) {
  const double omega = std::sqrt(9.81 / 1.2);
  const Eigen::Vector2d p = hip_reference({0.0, 0.0}, {-0.05, 0.0}, {0.05, 0.0}, 0.0, 0.8, 0.4, omega);
  const long double w = std::sqrt(9.81L / 1.2L);
  const long double expect =
      ((0.0L - 0.05L) * std::sinh(0.4L * w) + (-0.05L - 0.0L) * std::sinh((0.4L - 0.8L) * w)) /
      std::sinh(-0.8L * w);
  EXPECT_NEAR(p.x(), static_cast<double>(expect), 1e-15);
  EXPECT_NEAR(p.x(), 0.0, 1e-15);
  const Eigen::Vector2d q = hip_reference({0.0, 0.0}, {-0.05, 0.0}, {0.05, 0.0}, 0.0, 0.8, 0.2, omega);
  const long double e2 =
      (-0.05L * std::sinh(0.2L * w) - 0.05L * std::sinh(-0.6L * w)) / std::sinh(-0.8L * w);
  EXPECT_NEAR(q.x(), static_cast<double>(e2), 1e-15);
}

TEST(HipReference, SatisfiesLipmDynamics) {
  const double omega = std::sqrt(9.81);
  const Eigen::Vector2d st(0.2, -0.1), h0(0.05, 0.0), hf(0.25, 0.02);
  const double h = 1e-4;
  for (int i = 1; i < 20; ++i) {
    const double t = 0.05 * i;
    const Eigen::Vector2d a = (hip_reference(st, h0, hf, 0.0, 1.0, t + h, omega) -
                               2.0 * hip_reference(st, h0, hf, 0.0, 1.0, t, omega) +
                               hip_reference(st, h0, hf, 0.0, 1.0, t - h, omega)) /
                              (h * h);
    const Eigen::Vector2d rhs = omega * omega * (hip_reference(st, h0, hf, 0.0, 1.0, t, omega) - st);
    for (int c = 0; c < 2; ++c) EXPECT_LT(std::abs(a(c) - rhs(c)), 1e-6 * std::max(1.0, std::abs(rhs(c))));
  }
}

TEST(HipReference, Errors) {
  EXPECT_THROW(hip_reference({0, 0}, {0, 0}, {0, 0}, 1.0, 1.0, 1.0, 3.0), ParameterError);
  EXPECT_THROW(hip_reference({0, 0}, {0, 0}, {0, 0}, 0.0, 1.0, 1.5, 3.0), QueryError);
}

TEST(SwingReference, EndpointsApexAndVelocity) {
  const GaitTiming timing;
  const Eigen::Vector2d a(0.0, 0.1), b(0.2, 0.12);
  const Eigen::Vector3d s0 = swing_reference(a, b, timing, 0.0);
  const Eigen::Vector3d s1 = swing_reference(a, b, timing, timing.T_ss);
  EXPECT_EQ(s0.head<2>(), a);
  EXPECT_EQ(s0.z(), 0.0);
  EXPECT_LT((s1.head<2>() - b).norm(), 1e-15);
  EXPECT_EQ(s1.z(), 0.0);
  EXPECT_NEAR(swing_reference(a, b, timing, 0.5 * timing.T_ss).z(), timing.swing_height, 1e-9);
  const double h = 1e-7;
  EXPECT_LT((swing_reference(a, b, timing, h) - s0).norm() / h, 1e-6);
  EXPECT_LT((s1 - swing_reference(a, b, timing, timing.T_ss - h)).norm() / h, 1e-6);
  for (int i = 1; i < 100; ++i) EXPECT_GT(swing_reference(a, b, timing, i * timing.T_ss / 100).z(), 0.0);
  EXPECT_EQ(swing_reference(a, b, timing, timing.T_ss + 0.1).head<2>(), s1.head<2>());
  EXPECT_THROW(swing_reference(a, b, timing, 1.5), QueryError);
}

TEST(MassReferences, Midpoints) {
  const MassReferences m = mass_references({0.0, 0.0}, {0.1, 0.0}, {0.2, 0.0});
  EXPECT_NEAR(m.stance.x(), 0.05, 1e-15);
  EXPECT_NEAR(m.swing.x(), 0.15, 1e-15);
  EXPECT_EQ(m.torso.x(), 0.1);
}

TEST(GaitScheduleTest, ContinuityOverFiveSteps) {
  const GaitSchedule sched(straight_plan(5), GaitTiming{}, ThreeMassParams{}, 0.02);
  GaitSample prev = sched.sample(0);
  for (long k = 1; k <= sched.end_cycle() + 20; ++k) {
    const GaitSample g = sched.sample(k);
    EXPECT_LT((g.roles.stance - 0.5 * (g.zmp + g.hip)).norm(), 1e-15);
    EXPECT_LT((g.roles.stance - prev.roles.stance).norm(), 0.02) << k;
    EXPECT_LT((g.hip - prev.hip).norm(), 0.01) << k;
    for (int leg = 0; leg < 2; ++leg) {
      EXPECT_LT((g.leg_ref[static_cast<size_t>(leg)] - prev.leg_ref[static_cast<size_t>(leg)]).norm(), 0.01)
          << "leg " << leg << " k " << k;
    }
    prev = g;
  }
}

TEST(GaitScheduleTest, PhaseBoundariesAfterHundredSteps) {
  const GaitTiming timing;
  const GaitSchedule sched(straight_plan(100), timing, ThreeMassParams{}, 0.02);
  EXPECT_EQ(sched.ss_cycles(), 40);
  EXPECT_EQ(sched.ds_cycles(), 10);
  EXPECT_EQ(sched.sample(0).phase, WalkPhase::idle);
  EXPECT_EQ(sched.sample(sched.idle_cycles()).phase, WalkPhase::initialize);
  for (int i = 0; i < 100; ++i) {
    const long k0 = sched.step_start(i);
    EXPECT_EQ(sched.sample(k0 - 1).phase, i == 0 ? WalkPhase::initialize : WalkPhase::double_support);
    EXPECT_EQ(sched.sample(k0).phase, WalkPhase::single_support);
    EXPECT_EQ(sched.sample(k0 + 39).phase, WalkPhase::single_support);
    EXPECT_EQ(sched.sample(k0 + 40).phase, WalkPhase::double_support);
    EXPECT_EQ(sched.sample(k0).step, i);
    const double t = (k0 - sched.walk_start()) * 0.02;
    EXPECT_NEAR(t, i * timing.step_period(), 1e-9);
    EXPECT_EQ(sched.sample(k0).zmp, support_points(sched.plan())[static_cast<size_t>(i)]);
  }
  EXPECT_EQ(sched.end_cycle(), sched.walk_start() + 100 * 50);
}

TEST(GaitScheduleTest, RejectsNonIntegerDurations) {
  GaitTiming timing;
  timing.T_ss = 0.81;
  EXPECT_THROW(GaitSchedule(straight_plan(1), timing, ThreeMassParams{}, 0.02), ParameterError);
}

TEST(AssembleBundle, StandingPlanIsConstant) {
  FootstepPlan plan;
  plan.initial = standing_feet({0.3, -0.2}, 0.0, 0.2);
  const GaitSchedule sched(plan, GaitTiming{}, ThreeMassParams{}, 0.02);
  for (int axis = 0; axis < 2; ++axis) {
    const ReferenceBundle b = assemble_bundle(sched, axis, 0, 80);
    ASSERT_EQ(b.r_z.size(), 80u);
    for (size_t j = 0; j < 80; ++j) {
      EXPECT_EQ(b.r_z[j], b.r_z[0]);
      EXPECT_EQ(b.r_st[j], b.r_st[0]);
      EXPECT_EQ(b.r_sw[j], b.r_sw[0]);
    }
  }
}

TEST(AssembleBundle, RampAtExpectedIndices) {
  const FootstepPlan plan = straight_plan(4);
  const GaitTiming timing;
  const GaitSchedule sched(plan, timing, ThreeMassParams{}, 0.02);
  const long k = sched.step_start(1) + 20;
  const ReferenceBundle b = assemble_bundle(sched, 1, k, 80);
  for (int j = 1; j <= 80; ++j) {
    const long c = k + j;
    const double t = (c - sched.walk_start()) * 0.02;
    EXPECT_EQ(b.r_z[static_cast<size_t>(j - 1)], sched.sample(c).zmp.y()) << j;
    EXPECT_EQ(b.r_st[static_cast<size_t>(j - 1)], sched.sample(c).leg_ref[0].y()) << j;
    EXPECT_NEAR(b.r_z[static_cast<size_t>(j - 1)], zmp_reference(plan, timing, t).y(), 1e-12) << j;
  }
  // Window entries 19..28 are the double support of step 1.
  const double y1 = plan.steps[0].y;
  const double y2 = plan.steps[1].y;
  EXPECT_EQ(b.r_z[18], y1);
  EXPECT_NEAR(b.r_z[19], y1, 1e-12);
  EXPECT_NEAR(b.r_z[20], y1 + 0.1 * (y2 - y1), 1e-12);
  EXPECT_NEAR(b.r_z[28], y1 + 0.9 * (y2 - y1), 1e-12);
  EXPECT_EQ(b.r_z[29], y2);
}

TEST(AssembleBundle, TailHoldsFinalValues) {
  const FootstepPlan plan = straight_plan(2);
  const GaitSchedule sched(plan, GaitTiming{}, ThreeMassParams{}, 0.02);
  const ReferenceBundle b = assemble_bundle(sched, 0, sched.end_cycle() - 10, 80);
  const Eigen::Vector2d mid = plan.final_state().midpoint();
  for (size_t j = 10; j < 80; ++j) {
    EXPECT_NEAR(b.r_z[j], mid.x(), 1e-15);
    EXPECT_EQ(b.r_st[j], b.r_st[79]);
    EXPECT_EQ(b.r_sw[j], b.r_sw[79]);
  }
}

TEST(ReferenceCsv, HeaderAndRows) {
  const GaitSchedule sched(straight_plan(2), GaitTiming{}, ThreeMassParams{}, 0.02);
  const auto path = std::filesystem::temp_directory_path() / "triwalk_ref_test.csv";
  export_reference_csv(sched, 50, path.string());
  std::ifstream in(path);
  std::string line;
  std::getline(in, line);
  EXPECT_EQ(line, "t,r_z_x,r_z_y,r_st_x,r_st_y,r_sw_x,r_sw_y,hip_x,hip_y,swing_z");
  int rows = 0;
  while (std::getline(in, line)) ++rows;
  EXPECT_EQ(rows, 50);
  std::filesystem::remove(path);
}

}  // namespace
}  // namespace triwalk
