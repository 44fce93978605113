#include <algorithm>
#include <cmath>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "doctest.h"
#include "lf/errors.hpp"
#include "lf/planner.hpp"
#include "lf/runtime.hpp"
#include "lf/scenario.hpp"
#include "lf/validate.hpp"

using namespace lf;

namespace {

Workspace arena() {
  Workspace ws;
  ws.bounds_min = {0, 0, 0};
  ws.bounds_max = {6, 6, 2};
  return ws;
}

Obstacle pole(double x, double y, double r) {
  Obstacle o;
  o.kind = Obstacle::Kind::Pole;
  o.center = {x, y, 0};
  o.radius = r;
  o.z0 = 0.0;
  o.z1 = 2.0;
  return o;
}

// Straight-line plan along +x in an empty arena; passes the checker at
// r_agent 0.2, r_target 0.15, d_travel 0.5.
Plan line_plan(const Vec3& from, int steps_count, double step) {
  Plan p;
  for (int k = 0; k <= steps_count; ++k) {
    p.steps.push_back({Vec3{from.x + step * k, from.y, from.z}});
  }
  p.finalize(step, {p.steps.back()[0]});
  p.feasible = true;
  return p;
}

double max_dev(const Configuration& a, const Configuration& b) {
  double d = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) d = std::max(d, (a[i] - b[i]).norm());
  return d;
}

// Strips every line containing a wall-clock field so byte comparisons see
// only the reproducible content.
std::string strip_wall_lines(const std::string& text) {
  std::istringstream in(text);
  std::string out, line;
  while (std::getline(in, line)) {
    if (line.find("wall") == std::string::npos) {
      out += line;
      out += '\n';
    }
  }
  return out;
}

// Blanks the wall_ms column (index 5) of an events CSV.
std::string strip_events_wall(const std::string& text) {
  std::istringstream in(text);
  std::string out, line;
  bool header = true;
  while (std::getline(in, line)) {
    if (!header) {
      int commas = 0;
      std::size_t begin = std::string::npos, end = std::string::npos;
      for (std::size_t i = 0; i < line.size(); ++i) {
        if (line[i] != ',') continue;
        ++commas;
        if (commas == 5) begin = i + 1;
        if (commas == 6) end = i;
      }
      if (begin != std::string::npos && end != std::string::npos) {
        line = line.substr(0, begin) + line.substr(end);
      }
    }
    header = false;
    out += line;
    out += '\n';
  }
  return out;
}

}  // namespace

TEST_CASE("query repair returns feasible queries unchanged and fixes offenders") {
  Workspace ws = arena();
  ws.obstacles.push_back(pole(3, 3, 0.3));

  SUBCASE("feasible query is returned bitwise unchanged") {
    Configuration q = {{1, 1, 1}, {5, 5, 1}};
    Rng rng(1);
    Configuration out = repair_query(q, ws, 0.2, 0.05, 0.5, rng);
    REQUIRE(out.size() == 2);
    CHECK(out[0] == q[0]);
    CHECK(out[1] == q[1]);
  }

  SUBCASE("coincident agents get separated within one step") {
    Configuration q = {{1.5, 1.5, 1}, {1.5, 1.5, 1}};
    Rng rng(7);
    Configuration out = repair_query(q, ws, 0.2, 0.05, 0.5, rng);
    CHECK((out[0] - out[1]).norm() >= 0.4);
    CHECK((out[0] - q[0]).norm() <= 0.5 + 1e-12);
    CHECK((out[1] - q[1]).norm() <= 0.5 + 1e-12);

    Rng rng2(7);
    Configuration again = repair_query(q, ws, 0.2, 0.05, 0.5, rng2);
    CHECK(again[0] == out[0]);
    CHECK(again[1] == out[1]);
  }

  SUBCASE("an agent inside an obstacle is moved into free space") {
    Configuration q = {{3, 3, 1}};
    Rng rng(3);
    Configuration out = repair_query(q, ws, 0.2, 0.05, 0.6, rng);
    CHECK(ws.point_free(out[0], 0.2));
    CHECK((out[0] - q[0]).norm() <= 0.6 + 1e-12);
  }

  SUBCASE("an unfixable query raises the repair error") {
    Workspace deep = arena();
    Obstacle ball;
    ball.kind = Obstacle::Kind::Sphere;
    ball.center = {3, 3, 1};
    ball.radius = 1.0;
    deep.obstacles.push_back(ball);
    Configuration q = {{3, 3, 1}};
    Rng rng(5);
    CHECK_THROWS_AS(repair_query(q, deep, 0.2, 0.05, 0.1, rng, 0.0, 0.0, 200),
                    RepairFailedError);
  }
}

TEST_CASE("plan reuse returns the matching suffix and rejects stale plans") {
  Workspace ws = arena();
  Plan prev = line_plan({1, 3, 1}, 8, 0.5);  // 1.0 -> 5.0 along x at y=3
  std::vector<Vec3> targets = {prev.steps.back()[0]};
  CheckParams chk;
  chk.r_agent = 0.2;
  chk.r_target = 0.15;
  chk.d_travel = 0.5;

  SUBCASE("zero deviation in a static world reuses the whole plan") {
    auto got = try_reuse(prev.steps[0], prev, 0.25, targets, ws, chk);
    REQUIRE(got.has_value());
    REQUIRE(got->steps.size() == prev.steps.size());
    CHECK(got->steps.front()[0] == prev.steps.front()[0]);
    CHECK(got->steps.back()[0] == prev.steps.back()[0]);
    CHECK(got->feasible);
  }

  SUBCASE("one step of progress reuses the one-step-shorter suffix") {
    auto got = try_reuse(prev.steps[1], prev, 0.25, targets, ws, chk);
    REQUIRE(got.has_value());
    CHECK(got->steps.size() == prev.steps.size() - 1);
    CHECK(got->steps.front()[0] == prev.steps[1][0]);
  }

  SUBCASE("deviation beyond the threshold everywhere yields nothing") {
    Configuration off = {{2.0, 3.6, 1.0}};  // 0.6 in y from every step
    CHECK(max_dev(off, prev.steps[0]) > 0.5);
    CHECK_FALSE(try_reuse(off, prev, 0.25, targets, ws, chk).has_value());
  }

  SUBCASE("a changed target invalidates every suffix") {
    std::vector<Vec3> moved = {{1, 5, 1}};
    CHECK_FALSE(try_reuse(prev.steps[1], prev, 0.25, moved, ws, chk).has_value());
  }

  SUBCASE("an obstacle that moved onto the path invalidates the suffix") {
    Workspace blocked = arena();
    blocked.obstacles.push_back(pole(4, 3, 0.3));
    CHECK_FALSE(
        try_reuse(prev.steps[1], prev, 0.25, targets, blocked, chk).has_value());
  }
}

TEST_CASE("free-position sampling respects bounds, separation, and regions") {
  Workspace ws = arena();
  ws.obstacles.push_back(pole(3, 3, 0.4));

  SUBCASE("box sampling is free, separated, and reproducible") {
    Rng rng(17);
    auto pts = sample_free_positions(ws, 20, 0.2, 0.5, rng);
    REQUIRE(pts.size() == 20);
    for (std::size_t i = 0; i < pts.size(); ++i) {
      CHECK(ws.inside_shrunk(pts[i], 0.2));
      CHECK(ws.point_free(pts[i], 0.2));
      for (std::size_t j = i + 1; j < pts.size(); ++j) {
        CHECK((pts[i] - pts[j]).norm() >= 0.5);
      }
    }
    Rng rng2(17);
    auto again = sample_free_positions(ws, 20, 0.2, 0.5, rng2);
    CHECK(again == pts);
  }

  SUBCASE("disc sampling stays inside the region at its height") {
    GoalRegion disc;
    disc.center = {3, 3, 1};
    disc.radius = 1.5;
    Rng rng(23);
    auto pts = sample_free_positions(ws, 8, 0.2, 0.4, rng, 0.0, &disc);
    for (const Vec3& p : pts) {
      CHECK(std::hypot(p.x - 3.0, p.y - 3.0) <= 1.5 + 1e-12);
      CHECK(p.z == 1.0);
      CHECK(ws.point_free(p, 0.2));
    }
  }

  SUBCASE("keep-clear positions are honored") {
    std::vector<Vec3> clear = {{2, 2, 1}};
    Rng rng(29);
    auto pts = sample_free_positions(ws, 6, 0.2, 0.9, rng, 0.0, nullptr, &clear);
    for (const Vec3& p : pts) CHECK((p - clear[0]).norm() >= 0.9);
  }

  SUBCASE("impossible density raises a domain error") {
    Rng rng(31);
    CHECK_THROWS_AS(sample_free_positions(ws, 50, 0.2, 2.0, rng, 0.0, nullptr,
                                          nullptr, 20000),
                    DomainError);
  }

  SUBCASE("planar sampling pins z to the floor") {
    Workspace flat = arena();
    flat.bounds_max.z = 0.0;
    flat.planar = true;
    Rng rng(37);
    auto pts = sample_free_positions(flat, 5, 0.2, 0.5, rng);
    for (const Vec3& p : pts) CHECK(p.z == 0.0);
  }
}

TEST_CASE("single-robot oneshot mission arrives cleanly inside the goal radius") {
  Scenario sc;
  sc.seed = 7;
  sc.n_agents = 1;
  sc.starts = {{1, 1, 1}};
  sc.mission.mode = MissionMode::Oneshot;
  sc.mission.goals = {{5, 5, 1}};
  sc.mission.duration_s = 30.0;
  sc.runtime.budget_expansions = 4000;

  MetricsLog m = run_mission(sc);
  CHECK(m.completed);
  CHECK(m.goals_assigned == 1);
  CHECK(m.goals_reached == 1);
  CHECK(m.collision_ticks == 0);
  CHECK(m.misses == 0);
  CHECK(m.max_tracking_error <= 0.15);
  REQUIRE(m.tasks.size() == 1);
  CHECK(m.tasks[0].arrived_s > 0.0);
  CHECK(m.tasks[0].arrived_s < 30.0);
  CHECK(m.tasks[0].distance == doctest::Approx(std::sqrt(32.0)));
  CHECK(m.replans >= 2);
  CHECK(m.duration_s < 30.0);  // ended at arrival, not at the cap
}

TEST_CASE("plan reuse keeps a static-world replanning stream warm") {
  Scenario sc;
  sc.seed = 3;
  sc.n_agents = 2;
  sc.starts = {{1, 1, 1}, {5, 1, 1}};
  sc.mission.mode = MissionMode::Oneshot;
  sc.mission.goals = {{5, 5, 1}, {1, 5, 1}};  // crossing diagonals
  sc.mission.duration_s = 25.0;
  sc.runtime.budget_expansions = 4000;

  MetricsLog m = run_mission(sc);
  CHECK(m.completed);
  CHECK(m.collision_ticks == 0);
  CHECK(m.misses == 0);
  REQUIRE(m.replans >= 10);
  // Every cycle after the cold start should find the previous plan reusable.
  CHECK(m.reuse_hits >= static_cast<int>(0.8 * (m.replans - 1)));
  CHECK_FALSE(m.replan_log[0].reuse);

  // Reused cycles publish a plan faster than cold solves.
  double hit_sum = 0.0, cold_sum = 0.0;
  int hits = 0, colds = 0;
  for (const ReplanRecord& r : m.replan_log) {
    if (!r.success) continue;
    if (r.reuse) {
      hit_sum += r.t_first_wall_ms;
      ++hits;
    } else {
      cold_sum += r.t_first_wall_ms;
      ++colds;
    }
  }
  REQUIRE(hits > 0);
  REQUIRE(colds > 0);
  CHECK(hit_sum / hits < cold_sum / colds);
}

TEST_CASE("synchronous and asynchronous goal streams behave differently") {
  Scenario base;
  base.seed = 11;
  base.n_agents = 3;
  base.mission.duration_s = 40.0;
  base.mission.goal_region = GoalRegion{{3, 3, 1}, 1.8};
  base.runtime.budget_expansions = 4000;

  SUBCASE("synchronous rounds release every task at the same instant") {
    Scenario sc = base;
    sc.mission.mode = MissionMode::Synchronous;
    MetricsLog m = run_mission(sc);
    CHECK(m.completed);
    CHECK(m.collision_ticks == 0);
    CHECK(m.goals_assigned >= 6);  // at least one full round turnover
    CHECK(m.goals_assigned % 3 == 0);

    // Group released tasks by release time: each group must contain all three
    // agents (the whole team flips together).
    std::set<double> release_times;
    for (const TaskRecord& t : m.tasks) {
      if (t.released_s >= 0.0) release_times.insert(t.released_s);
    }
    CHECK(!release_times.empty());
    for (double rt : release_times) {
      std::set<int> agents;
      for (const TaskRecord& t : m.tasks) {
        if (t.released_s == rt) agents.insert(t.agent);
      }
      CHECK(agents.size() == 3);
    }

    // Someone always waits for the team: total wait strictly positive.
    double wait = 0.0;
    for (const TaskRecord& t : m.tasks) {
      if (t.released_s >= 0.0 && t.arrived_s >= 0.0) {
        CHECK(t.released_s >= t.arrived_s);
        wait += t.released_s - t.arrived_s;
      }
    }
    CHECK(wait > 0.0);
  }

  SUBCASE("asynchronous arrivals are released and reassigned immediately") {
    Scenario sc = base;
    sc.mission.mode = MissionMode::Asynchronous;
    MetricsLog m = run_mission(sc);
    CHECK(m.completed);
    CHECK(m.collision_ticks == 0);
    CHECK(m.goals_reached >= 6);
    for (const TaskRecord& t : m.tasks) {
      if (t.released_s >= 0.0) {
        CHECK(t.arrived_s == t.released_s);  // no waiting in lifelong mode
      }
      if (t.arrived_s >= 0.0) {
        CHECK(t.arrived_s - t.assigned_s <= 60.0);  // static-world liveness
      }
    }
  }
}

TEST_CASE("a mission aborts after consecutive planner misses") {
  Scenario sc;
  sc.seed = 1;
  sc.n_agents = 1;
  sc.starts = {{1, 1, 1}};
  sc.mission.mode = MissionMode::Oneshot;
  sc.mission.goals = {{5, 5, 1}};
  sc.mission.duration_s = 60.0;
  sc.runtime.budget_expansions = 1;  // never enough to find a plan

  CHECK_THROWS_AS(run_mission(sc), MissionAbortedError);
  try {
    run_mission(sc);
  } catch (const MissionAbortedError& e) {
    CHECK(std::string(e.what()).find("missed 10") != std::string::npos);
  }
}

TEST_CASE("the online safety counter flags real physical proximity") {
  // Bypass the scenario validator on purpose: two plants start closer than
  // the collision limit 2*r_agent - 0.01, so the checker must fire while the
  // repaired plan pulls them apart.
  Scenario sc;
  sc.seed = 2;
  sc.n_agents = 2;
  sc.r_agent = 0.3;
  sc.starts = {{3.0, 3.0, 1.0}, {3.55, 3.0, 1.0}};
  sc.mission.mode = MissionMode::Oneshot;
  sc.mission.goals = {{1.5, 3, 1}, {5, 3, 1}};
  sc.mission.duration_s = 20.0;
  sc.planner.d_travel = 0.5;   // repair headroom of one full-size step
  sc.runtime.replan_hz = 1.0;  // keep per-period advance above delta_reuse
  sc.controller.ctrl_hz = 20.0;
  sc.runtime.budget_expansions = 4000;

  MetricsLog m = run_mission(sc);
  CHECK(m.collision_ticks >= 1);
  CHECK(m.collision_ticks < m.ticks);
  CHECK(m.completed);

  SUBCASE("a replan cadence the reference cannot outrun is rejected") {
    // At 10 Hz the reference advances 0.05 m per period, below the 0.25 m
    // reuse threshold, so every cycle would re-anchor the same prefix step.
    Scenario stalled = sc;
    stalled.runtime.replan_hz = 10.0;
    stalled.controller.ctrl_hz = 100.0;
    CHECK_THROWS_AS(run_mission(stalled), DomainError);
  }
}

TEST_CASE("moving-target formation following keeps the team on the circle") {
  Scenario sc;
  sc.seed = 19;
  sc.n_agents = 2;
  sc.starts = {{1, 2, 1}, {1, 4, 1}};
  sc.mission.mode = MissionMode::TargetFollowing;
  sc.mission.target_path = {{0.0, {2.5, 3, 1}}, {20.0, {4.0, 3, 1}}};
  sc.mission.formation_radius = 1.0;
  sc.mission.duration_s = 24.0;
  sc.runtime.budget_expansions = 4000;

  MetricsLog m = run_mission(sc);
  CHECK(m.completed);
  CHECK(m.collision_ticks == 0);
  CHECK(m.misses == 0);

  SUBCASE("a slot ring too tight for the team is rejected up front") {
    Scenario bad = sc;
    bad.n_agents = 8;
    bad.starts.clear();
    bad.mission.formation_radius = 0.3;
    CHECK_THROWS_AS(run_mission(bad), DomainError);
  }
}

TEST_CASE("metrics and trajectory artifacts reproduce byte-for-byte") {
  Scenario sc;
  sc.seed = 11;
  sc.n_agents = 3;
  sc.mission.mode = MissionMode::Asynchronous;
  sc.mission.duration_s = 15.0;
  sc.mission.goal_region = GoalRegion{{3, 3, 1}, 1.8};
  sc.runtime.budget_expansions = 4000;
  sc.runtime.sigma_disturbance = 0.1;

  std::ostringstream traj1, ev1, traj2, ev2;
  MetricsLog m1 = run_mission(sc, &traj1, &ev1);
  MetricsLog m2 = run_mission(sc, &traj2, &ev2);

  std::string j1 = metrics_to_json(m1);
  std::string j2 = metrics_to_json(m2);
  CHECK(strip_wall_lines(j1) == strip_wall_lines(j2));
  CHECK(j1.find("\"completed\"") != std::string::npos);
  CHECK(j1.find("\"wall_ms_total\"") != std::string::npos);

  CHECK(traj1.str() == traj2.str());
  CHECK(traj1.str().rfind("tick,robot,px,py,pz,refx,refy,refz,err\n", 0) == 0);

  CHECK(strip_events_wall(ev1.str()) == strip_events_wall(ev2.str()));
  CHECK(ev1.str().rfind("t_s,event,agent,", 0) == 0);
  CHECK(ev1.str().find(",replan,-1,") != std::string::npos);
  CHECK(ev1.str().find(",goal,") != std::string::npos);
}

TEST_CASE("bench instances and the scalability sweep are reproducible") {
  SUBCASE("instance recipe: five poles, separated free endpoints") {
    BenchInstance inst = make_bench_instance(8, 0.2, Rng(42));
    CHECK(inst.ws.obstacles.size() == 5);
    REQUIRE(inst.starts.size() == 8);
    REQUIRE(inst.goals.size() == 8);
    for (std::size_t i = 0; i < 8; ++i) {
      CHECK(inst.ws.point_free(inst.starts[i], 0.2));
      CHECK(inst.ws.point_free(inst.goals[i], 0.2));
      CHECK((inst.goals[i] - inst.starts[i]).norm() >= 1.0);
      for (std::size_t j = i + 1; j < 8; ++j) {
        CHECK((inst.starts[i] - inst.starts[j]).norm() >= 0.7);
        CHECK((inst.goals[i] - inst.goals[j]).norm() >= 0.7);
      }
    }
    BenchInstance again = make_bench_instance(8, 0.2, Rng(42));
    CHECK(again.starts == inst.starts);
    CHECK(again.goals == inst.goals);
    CHECK(again.ws.obstacles[0].center == inst.ws.obstacles[0].center);
  }

  SUBCASE("sweep rows are deterministic in budget mode") {
    auto rows = bench_scalability({1, 2}, 2, 1000.0, 5, 0.2, 30000);
    REQUIRE(rows.size() == 4);
    for (const BenchRow& r : rows) {
      CHECK(r.success);
      CHECK(r.cost > 0.5);
      CHECK(r.cost < 4.0);
    }
    // A lone robot with a meter-plus leg should land near the straight-line
    // optimum even before refinement tightens the path.
    CHECK(rows[0].n == 1);
    CHECK(rows[0].cost > 0.7);
    CHECK(rows[0].cost < 2.5);

    auto rows2 = bench_scalability({1, 2}, 2, 1000.0, 5, 0.2, 30000);
    std::string csv1 = bench_to_csv(rows);
    std::string csv2 = bench_to_csv(rows2);
    // The wall-time column varies; compare the reproducible columns.
    auto strip_time = [](const std::string& csv) {
      std::istringstream in(csv);
      std::string out, line;
      while (std::getline(in, line)) {
        std::size_t a = line.rfind(',');
        std::size_t b = line.rfind(',', a - 1);
        out += line.substr(0, b) + line.substr(a);
        out += '\n';
      }
      return out;
    };
    CHECK(strip_time(csv1) == strip_time(csv2));
    CHECK(csv1.rfind("n,instance,success,t_first_ms,cost\n", 0) == 0);
  }
}
