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

#include <cstdio>
#include <exception>
#include <fstream>
#include <iostream>
#include <string>

#include "CLI11.hpp"
#include "triwalk/footstep.hpp"
#include "triwalk/harness.hpp"
#include "triwalk/refgen.hpp"

namespace {

using namespace triwalk;

int cmd_run(const std::string& path, const std::string& out_dir, const std::optional<std::uint64_t>& seed) {
  Scenario sc = load_scenario(path);
  if (seed) sc.noise.seed = *seed;
  const RunMetrics m = run(sc);
  const RunSummary& s = m.summary;
  std::printf("%s: %ld cycles, completed=%s fall=%s\n", s.name.c_str(), s.cycles, s.completed ? "yes" : "no",
              s.fall_detected ? "yes" : "no");
  std::printf("  zmp outside scaled polygon: %ld cycles (max %.4f m), outside unscaled: %ld\n",
              s.zmp_violation_cycles, s.max_excursion, s.outside_cycles);
  std::printf("  tracking rms: zmp %.4f m, stance %.4f m, swing %.4f m; softened cycles %ld\n", s.rms_zmp,
              s.rms_stance, s.rms_swing, s.softened_cycles);
  std::printf("  cycle time: mean %.3f ms, p99 %.3f ms\n", m.timing.mean_ms, m.timing.p99_ms);
  if (!s.fault.empty()) std::printf("  fault: %s\n", s.fault.c_str());
  if (!out_dir.empty()) export_traces(m, out_dir);
  return s.completed && !s.fall_detected ? 0 : 1;
}

int cmd_withstand(const std::string& path, const std::string& direction, double tol, double low, double high) {
  if (direction != "fwd" && direction != "bwd") throw ParameterError("--direction must be fwd or bwd");
  const Scenario sc = load_scenario(path);
  const WithstandResult r = max_withstand(sc, direction == "fwd" ? 1 : -1, low, high, tol);
  std::printf("max withstanding force (%s): %.1f N after %zu runs\n", direction.c_str(), r.force,
              r.probes.size());
  for (const auto& [fell, survived] : r.monotonicity_violations) {
    std::printf("  non-monotone: %.1f N fell but %.1f N survived\n", fell, survived);
  }
  return 0;
}

int cmd_plan(const std::string& path, const std::string& out) {
  const MapFile mf = map_from_json(read_json_file(path));
  const PlanResult r = plan_footsteps(mf);
  std::ofstream f(out);
  if (!f) throw Error("cannot write '" + out + "'");
  nlohmann::json j = to_json(r.plan);
  j["path_cost"] = r.path.cost;
  f << j.dump(2) << '\n';
  std::printf("%zu path cells, cost %.6f m, %zu footsteps -> %s\n", r.path.cells.size(), r.path.cost,
              r.plan.steps.size(), out.c_str());
  return 0;
}

int cmd_reference(const std::string& path, const std::string& out) {
  const Scenario sc = load_scenario(path);
  if (sc.mode != PlanMode::path) throw ParameterError("reference export needs a footstep plan scenario");
  const GaitSchedule s(sc.plan, sc.engine.timing, sc.engine.params, sc.engine.mpc.Ts);
  export_reference_csv(s, sc.cycles(), out);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"three-mass biped walking MPC harness"};
  app.require_subcommand(1);

  std::string scenario, out_dir;
  std::optional<std::uint64_t> seed;
  auto* run = app.add_subcommand("run", "simulate a scenario");
  run->add_option("scenario", scenario, "scenario JSON")->required()->check(CLI::ExistingFile);
  run->add_option("--out", out_dir, "directory for trace.csv and summary.json");
  run->add_option("--seed", seed, "noise seed override");

  std::string direction;
  double tol = 5.0, low = 0.0, high = 2000.0;
  auto* ws = app.add_subcommand("withstand", "bisect the largest survivable impulse");
  ws->add_option("scenario", scenario, "scenario JSON with one disturbance")->required()->check(CLI::ExistingFile);
  ws->add_option("--direction", direction, "fwd or bwd")->required();
  ws->add_option("--tol", tol, "bracket width (N)");
  ws->add_option("--low", low, "surviving amplitude (N)");
  ws->add_option("--high", high, "falling amplitude (N)");

  std::string map, plan_out;
  auto* plan = app.add_subcommand("plan", "plan footsteps on a grid map");
  plan->add_option("map", map, "map JSON")->required()->check(CLI::ExistingFile);
  plan->add_option("--out", plan_out, "plan JSON")->required();

  std::string ref_out;
  auto* ref = app.add_subcommand("reference", "export the reference trajectories of a scenario");
  ref->add_option("scenario", scenario, "scenario JSON")->required()->check(CLI::ExistingFile);
  ref->add_option("--out", ref_out, "CSV file")->required();

  CLI11_PARSE(app, argc, argv);
  try {
    if (*run) return cmd_run(scenario, out_dir, seed);
    if (*ws) return cmd_withstand(scenario, direction, tol, low, high);
    if (*plan) return cmd_plan(map, plan_out);
    if (*ref) return cmd_reference(scenario, ref_out);
  } catch (const std::exception& e) {
    std::fprintf(stderr, "triwalk: %s\n", e.what());
    return 2;
  }
  return 2;
}
