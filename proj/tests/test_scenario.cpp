#include <string>

#include "doctest.h"
#include "lf/errors.hpp"
#include "lf/scenario.hpp"

using namespace lf;

namespace {

// Expects parse_scenario(text) to throw and returns the diagnostic path.
std::string parse_fails_at(const std::string& text) {
  try {
    (void)parse_scenario(text);
  } catch (const ScenarioError& e) {
    return e.where;
  }
  FAIL("expected a ScenarioError");
  return "";
}

}  // namespace

TEST_CASE("minimal scenario parses with documented defaults") {
  Scenario s = parse_scenario(R"({"mission":{"goals":[[5.0,3.0,1.0]]}})");
  CHECK(s.version == 1);
  CHECK(s.seed == 0);
  CHECK(s.workspace.bounds_min == Vec3{0, 0, 0});
  CHECK(s.workspace.bounds_max == Vec3{6, 6, 2});
  CHECK(!s.workspace.planar);
  CHECK(s.workspace.dynamic_margin == 0.05);
  CHECK(s.workspace.obstacles.empty());
  CHECK(s.n_agents == 1);
  CHECK(s.r_agent == 0.2);
  CHECK(s.starts.empty());
  CHECK(s.mission.mode == MissionMode::Oneshot);
  CHECK(s.mission.duration_s == 60.0);
  CHECK(s.mission.speed_mps == 0.5);
  CHECK(s.mission.goals.size() == 1);
  CHECK(s.mission.goals[0] == Vec3{5, 3, 1});
  CHECK(s.planner.d_travel == 0.0);
  CHECK(s.planner.r_target == 0.15);
  CHECK(s.planner.eps_dup == -1.0);
  CHECK(s.roadmap.lattice_h == 0.5);
  CHECK(s.roadmap.connect_radius == 0.95);
  CHECK(s.roadmap.neighbor_radius == 1.0);
  CHECK(s.controller.ctrl_hz == 100.0);
  CHECK(s.controller.q_pos == 8.0);
  CHECK(s.controller.a_max == 6.0);
  CHECK(s.runtime.replan_hz == 10.0);
  CHECK(s.runtime.sigma_repair == 0.05);
  CHECK(s.runtime.deadline_fraction == 0.8);
  CHECK(s.runtime.kappa_miss == 10);
  CHECK(s.runtime.budget_expansions == 0);

  // resolved quantities: auto step length follows speed and replan rate
  CHECK(s.d_travel() == doctest::Approx(0.05).epsilon(1e-12));
  CHECK(s.delta_reuse() == doctest::Approx(0.025).epsilon(1e-12));
  CHECK(s.dt_step() == doctest::Approx(0.1).epsilon(1e-12));
}

TEST_CASE("explicit step length overrides the auto resolution") {
  Scenario s = parse_scenario(
      R"({"mission":{"goals":[[5,3,1]]},"planner":{"d_travel":0.4},)"
      R"("runtime":{"delta_reuse":0.3}})");
  CHECK(s.d_travel() == 0.4);
  CHECK(s.delta_reuse() == 0.3);
}

TEST_CASE("canonical dump of the minimal scenario is frozen") {
  Scenario s = parse_scenario(R"({"mission":{"goals":[[5.0,3.0,1.0]]}})");
  const std::string expected = R"({
  "version": 1,
  "seed": 0,
  "workspace": {
    "bounds": {
      "min": [
        0.0,
        0.0,
        0.0
      ],
      "max": [
        6.0,
        6.0,
        2.0
      ]
    },
    "planar": false,
    "dynamic_margin": 0.05,
    "obstacles": []
  },
  "agents": {
    "n": 1,
    "r_agent": 0.2
  },
  "mission": {
    "mode": "oneshot",
    "duration_s": 60.0,
    "speed_mps": 0.5,
    "formation_radius": 1.0,
    "goals": [
      [
        5.0,
        3.0,
        1.0
      ]
    ]
  },
  "planner": {
    "d_travel": 0.0,
    "r_target": 0.15,
    "eps_dup": -1.0,
    "p_skip": 0.5,
    "lns_k": 2
  },
  "roadmap": {
    "lattice_h": 0.5,
    "connect_radius": 0.95,
    "neighbor_radius": 1.0
  },
  "controller": {
    "ctrl_hz": 100.0,
    "q_pos": 8.0,
    "q_vel": 4.0,
    "r_acc": 1.0,
    "k_ff": 1.0,
    "a_max": 6.0
  },
  "runtime": {
    "replan_hz": 10.0,
    "delta_reuse": -1.0,
    "sigma_repair": 0.05,
    "deadline_fraction": 0.8,
    "kappa_miss": 10,
    "budget_expansions": 0,
    "sigma_disturbance": 0.0
  }
}
)";
  CHECK(dump_scenario(s) == expected);
}

TEST_CASE("parse-dump-parse round trip is byte-stable on a rich scenario") {
  const std::string text = R"({
    "version": 1,
    "seed": 77,
    "workspace": {
      "bounds": {"min": [0, 0, 0], "max": [8, 7, 3]},
      "dynamic_margin": 0.1,
      "obstacles": [
        {"type": "pole", "xy": [3.5, 3.5], "radius": 0.25},
        {"type": "pole", "xy": [1, 1], "radius": 0.2, "z": [0.5, 2.5],
         "schedule": [[0, 1, 1, 0.5], [10, 5, 1, 0.5], [20, 1, 1, 0.5]]},
        {"type": "sphere", "center": [6, 2, 1.5], "radius": 0.4},
        {"type": "box", "min": [2, 5, 0], "max": [3, 6, 3]}
      ]
    },
    "agents": {
      "n": 3,
      "r_agent": 0.15,
      "starts": [[1, 3, 1], [1, 4, 1], [1, 5, 1]]
    },
    "mission": {
      "mode": "synchronous",
      "duration_s": 90.5,
      "speed_mps": 0.4,
      "goal_region": {"center": [5.5, 4.5, 1.2], "radius": 1.5}
    },
    "planner": {"d_travel": 0.08, "r_target": 0.12, "p_skip": 0.4},
    "runtime": {"replan_hz": 5, "budget_expansions": 9000,
                "sigma_disturbance": 0.2}
  })";
  Scenario s = parse_scenario(text);
  const std::string once = dump_scenario(s);
  Scenario again = parse_scenario(once);
  CHECK(dump_scenario(again) == once);

  // spot checks that the rich fields survived
  CHECK(again.workspace.obstacles.size() == 4);
  CHECK(again.workspace.obstacles[1].schedule.size() == 3);
  CHECK(again.workspace.obstacles[1].z0 == 0.5);
  CHECK(again.workspace.obstacles[3].kind == Obstacle::Kind::Box);
  CHECK(again.starts.size() == 3);
  CHECK(again.mission.mode == MissionMode::Synchronous);
  CHECK(again.mission.goal_region.has_value());
  CHECK(again.mission.goal_region->radius == 1.5);
  CHECK(again.runtime.budget_expansions == 9000);
  CHECK(again.runtime.sigma_disturbance == 0.2);
}

TEST_CASE("pole z extent defaults to the workspace height") {
  Scenario s = parse_scenario(
      R"({"workspace":{"bounds":{"min":[0,0,0.5],"max":[4,4,2.5]},)"
      R"("obstacles":[{"type":"pole","xy":[2,2],"radius":0.3}]},)"
      R"("mission":{"goals":[[3,3,1]]}})");
  CHECK(s.workspace.obstacles[0].z0 == 0.5);
  CHECK(s.workspace.obstacles[0].z1 == 2.5);
}

TEST_CASE("unknown keys are rejected with the offending path") {
  CHECK(parse_fails_at(R"({"missionn":{}})") == "/missionn");
  CHECK(parse_fails_at(R"({"mission":{"goals":[[5,3,1]],"cadence":3}})") ==
        "/mission/cadence");
  CHECK(parse_fails_at(
            R"({"mission":{"goals":[[5,3,1]]},"controller":{"qpos":8}})") ==
        "/controller/qpos");
  CHECK(parse_fails_at(
            R"({"workspace":{"obstacles":[{"type":"sphere","center":[1,1,1],)"
            R"("radius":0.3,"rad":1}]},"mission":{"goals":[[5,3,1]]}})") ==
        "/workspace/obstacles/0/rad");
  CHECK(parse_fails_at(
            R"({"mission":{"mode":"synchronous","goal_region":)"
            R"({"center":[3,3,1],"radius":1,"shape":"disc"}}})") ==
        "/mission/goal_region/shape");
}

TEST_CASE("malformed values carry positioned diagnostics") {
  CHECK(parse_fails_at("[1,2]") == "/");
  CHECK(parse_fails_at("{nope") == "/");
  CHECK(parse_fails_at(R"({"version":2})") == "/version");
  CHECK(parse_fails_at(R"({"seed":-4})") == "/seed");
  CHECK(parse_fails_at(R"({"agents":{"n":-1}})") == "/agents/n");
  CHECK(parse_fails_at(R"({"agents":{"n":"two"}})") == "/agents/n");
  CHECK(parse_fails_at(R"({"agents":{"r_agent":"wide"}})") == "/agents/r_agent");
  CHECK(parse_fails_at(R"({"workspace":{"bounds":{"min":[0,0]}}})") ==
        "/workspace/bounds/min");
  CHECK(parse_fails_at(R"({"agents":{"starts":[[1,1]]}})") == "/agents/starts/0");
  CHECK(parse_fails_at(R"({"mission":{"goals":[[1,1,"z"]]}})") ==
        "/mission/goals/0/2");
  CHECK(parse_fails_at(R"({"mission":{"mode":"sync"}})") == "/mission/mode");
  CHECK(parse_fails_at(R"({"workspace":{"planar":1}})") == "/workspace/planar");
}

TEST_CASE("range violations carry positioned diagnostics") {
  CHECK(parse_fails_at(
            R"({"mission":{"goals":[[5,3,1]],"duration_s":0}})") ==
        "/mission/duration_s");
  CHECK(parse_fails_at(
            R"({"mission":{"goals":[[5,3,1]],"speed_mps":-0.5}})") ==
        "/mission/speed_mps");
  CHECK(parse_fails_at(
            R"({"mission":{"goals":[[5,3,1]]},"planner":{"d_travel":-0.1}})") ==
        "/planner/d_travel");
  CHECK(parse_fails_at(
            R"({"mission":{"goals":[[5,3,1]]},"planner":{"p_skip":1.5}})") ==
        "/planner/p_skip");
  CHECK(parse_fails_at(
            R"({"mission":{"goals":[[5,3,1]]},"runtime":{"replan_hz":25}})") ==
        "/runtime/replan_hz");
  CHECK(parse_fails_at(
            R"({"mission":{"goals":[[5,3,1]]},"runtime":{"deadline_fraction":0}})") ==
        "/runtime/deadline_fraction");
  CHECK(parse_fails_at(
            R"({"mission":{"goals":[[5,3,1]]},"controller":{"q_pos":0}})") ==
        "/controller/q_pos");
  CHECK(parse_fails_at(
            R"({"mission":{"goals":[[5,3,1]]},"roadmap":{"lattice_h":0}})") ==
        "/roadmap/lattice_h");
}

TEST_CASE("control rate must dominate the replanning rate") {
  const std::string bad =
      R"({"mission":{"goals":[[5,3,1]]},"controller":{"ctrl_hz":40},)"
      R"("runtime":{"replan_hz":10}})";
  CHECK(parse_fails_at(bad) == "/controller/ctrl_hz");
  // exactly 5x is allowed
  Scenario s = parse_scenario(
      R"({"mission":{"goals":[[5,3,1]]},"controller":{"ctrl_hz":50},)"
      R"("runtime":{"replan_hz":10}})");
  CHECK(s.controller.ctrl_hz == 50.0);
}

TEST_CASE("start placement violations name the agents involved") {
  // two starts closer than 2 * r_agent: the error cites both indices
  try {
    (void)parse_scenario(
        R"({"agents":{"n":2,"starts":[[1,1,1],[1.25,1,1]]},)"
        R"("mission":{"goals":[[4,1,1],[5,1,1]]}})");
    FAIL("expected a ScenarioError");
  } catch (const ScenarioError& e) {
    CHECK(e.where == "/agents/starts");
    CHECK(std::string(e.what()).find("agents 0 and 1") != std::string::npos);
  }

  // start inside an obstacle
  CHECK(parse_fails_at(
            R"({"workspace":{"obstacles":[{"type":"sphere","center":[1,1,1],)"
            R"("radius":0.5}]},"agents":{"starts":[[1.2,1,1]]},)"
            R"("mission":{"goals":[[4,1,1]]}})") == "/agents/starts/0");

  // start sphere poking out of the bounds
  CHECK(parse_fails_at(
            R"({"agents":{"starts":[[0.1,3,1]]},"mission":{"goals":[[4,3,1]]}})") ==
        "/agents/starts/0");

  // wrong count
  CHECK(parse_fails_at(
            R"({"agents":{"n":2,"starts":[[1,1,1]]},)"
            R"("mission":{"goals":[[4,1,1],[5,1,1]]}})") == "/agents/starts");
}

TEST_CASE("goal lists are validated like starts") {
  CHECK(parse_fails_at(
            R"({"agents":{"n":2,"starts":[[1,1,1],[1,2,1]]},)"
            R"("mission":{"goals":[[4,1,1]]}})") == "/mission/goals");
  // goals so close that settled agents cannot keep 2*r_agent apart
  try {
    (void)parse_scenario(
        R"({"agents":{"n":2,"starts":[[1,1,1],[1,2,1]]},)"
        R"("mission":{"goals":[[4,1,1],[4.05,1,1]]}})");
    FAIL("expected a ScenarioError");
  } catch (const ScenarioError& e) {
    CHECK(e.where == "/mission/goals");
    CHECK(std::string(e.what()).find("goals 0 and 1") != std::string::npos);
  }
  CHECK(parse_fails_at(
            R"({"mission":{"goals":[[5.95,3,1]]}})") == "/mission/goals/0");
}

TEST_CASE("mission modes demand matching goal sources") {
  CHECK(parse_fails_at(R"({"mission":{"mode":"oneshot"}})") == "/mission");
  CHECK(parse_fails_at(
            R"({"mission":{"goals":[[5,3,1]],)"
            R"("goal_region":{"center":[3,3,1],"radius":1}}})") == "/mission");
  CHECK(parse_fails_at(R"({"mission":{"mode":"synchronous"}})") == "/mission");
  CHECK(parse_fails_at(
            R"({"mission":{"mode":"asynchronous","goals":[[5,3,1]]}})") ==
        "/mission/goals");
  CHECK(parse_fails_at(R"({"mission":{"mode":"target_following"}})") ==
        "/mission");
  CHECK(parse_fails_at(
            R"({"mission":{"mode":"oneshot","goals":[[5,3,1]],)"
            R"("target_path":[[0,3,3,1]]}})") == "/mission/target_path");

  Scenario follow = parse_scenario(
      R"({"mission":{"mode":"target_following",)"
      R"("target_path":[[0,2,2,1],[30,4,4,1]],"formation_radius":0.8}})");
  CHECK(follow.mission.target_path.size() == 2);
  CHECK(follow.mission.formation_radius == 0.8);
}

TEST_CASE("obstacle records are validated in place") {
  CHECK(parse_fails_at(
            R"({"workspace":{"obstacles":[{"type":"wall"}]}})") ==
        "/workspace/obstacles/0/type");
  CHECK(parse_fails_at(
            R"({"workspace":{"obstacles":[{"type":"pole","radius":0.3}]}})") ==
        "/workspace/obstacles/0/xy");
  CHECK(parse_fails_at(
            R"({"workspace":{"obstacles":[{"type":"pole","xy":[1,1],)"
            R"("radius":0}]}})") == "/workspace/obstacles/0/radius");
  CHECK(parse_fails_at(
            R"({"workspace":{"obstacles":[{"type":"box","min":[2,2,0],)"
            R"("max":[1,3,2]}]}})") == "/workspace/obstacles/0/max");
  CHECK(parse_fails_at(
            R"({"workspace":{"obstacles":[{"type":"sphere","center":[1,1,1],)"
            R"("radius":0.3,"schedule":[[0,1,1,1],[0,2,1,1]]}]}})") ==
        "/workspace/obstacles/0/schedule/1/0");
  CHECK(parse_fails_at(
            R"({"workspace":{"obstacles":[{"type":"sphere","center":[1,1,1],)"
            R"("radius":0.3,"schedule":[]}]}})") ==
        "/workspace/obstacles/0/schedule");
}

TEST_CASE("planar scenarios pin all placements to the floor height") {
  const std::string planar_ws =
      R"("workspace":{"bounds":{"min":[0,0,1],"max":[6,6,1]},"planar":true})";
  Scenario s = parse_scenario(
      "{" + planar_ws + R"(,"agents":{"starts":[[1,3,1]]},)" +
      R"("mission":{"goals":[[5,3,1]]}})");
  CHECK(s.workspace.planar);

  CHECK(parse_fails_at("{" + planar_ws + R"(,"agents":{"starts":[[1,3,1.4]]},)" +
                       R"("mission":{"goals":[[5,3,1]]}})") == "/agents/starts/0");
  CHECK(parse_fails_at("{" + planar_ws + R"(,"agents":{"starts":[[1,3,1]]},)" +
                       R"("mission":{"goals":[[5,3,0.8]]}})") ==
        "/mission/goals/0");
}

TEST_CASE("plan artifacts round-trip through JSON") {
  Plan plan;
  plan.steps = {{{1, 2, 1}, {4, 2, 1}}, {{1.5, 2, 1}, {3.5, 2, 1}},
                {{1.5, 2, 1}, {3.0, 2, 1}}};
  plan.finalize(0.5, {{1.5, 2, 1}, {3.0, 2, 1}});
  plan.feasible = true;

  Plan back = plan_from_json(plan_to_json(plan));
  REQUIRE(back.steps.size() == plan.steps.size());
  for (std::size_t k = 0; k < plan.steps.size(); ++k) {
    for (std::size_t i = 0; i < plan.steps[k].size(); ++i) {
      CHECK(back.steps[k][i] == plan.steps[k][i]);  // bitwise
    }
  }
  CHECK(back.flowtime == plan.flowtime);
  CHECK(back.normalized_cost == plan.normalized_cost);
  CHECK(back.feasible == plan.feasible);
  CHECK(back.settled == plan.settled);
}

TEST_CASE("plan parsing tolerates extra keys but rejects bad structure") {
  // extra metadata from another tool is fine
  Plan p = plan_from_json(
      R"({"steps":[[[1,1,1]],[[1.5,1,1]]],"flowtime":1.0,)"
      R"("normalized_cost":1.0,"feasible":true,"producer":"other-tool"})");
  CHECK(p.steps.size() == 2);
  CHECK(p.flowtime == 1.0);

  // flowtime recomputed from steps when the key is missing
  Plan q = plan_from_json(R"({"steps":[[[1,1,1]],[[1.5,1,1]]]})");
  CHECK(q.flowtime == 1.0);

  // the degenerate already-settled plan is representable
  Plan empty = plan_from_json(R"({"steps":[]})");
  CHECK(empty.steps.empty());
  CHECK(empty.flowtime == 0.0);

  CHECK_THROWS_AS((void)plan_from_json(R"({"flowtime":3})"), ScenarioError);
  CHECK_THROWS_AS((void)plan_from_json(R"({"steps":{}})"), ScenarioError);
  CHECK_THROWS_AS((void)plan_from_json(R"({"steps":[[[1,1,1]],[[1,1,1],[2,2,2]]]})"),
                  ScenarioError);
  CHECK_THROWS_AS((void)plan_from_json(R"({"steps":[[[1,1]]]})"), ScenarioError);
}

TEST_CASE("loading a missing file reports the path") {
  try {
    (void)load_scenario("/nonexistent/dir/s.json");
    FAIL("expected a ScenarioError");
  } catch (const ScenarioError& e) {
    CHECK(e.where == "/nonexistent/dir/s.json");
  }
  CHECK_THROWS_AS((void)load_plan("/nonexistent/dir/p.json"), ScenarioError);
}
