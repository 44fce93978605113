#include "lf/runtime.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <ostream>
#include <string>
#include <utility>

#include "json.hpp"
#include "lf/errors.hpp"
#include "lf/tracking.hpp"

namespace lf {

namespace {

using ojson = nlohmann::ordered_json;

constexpr double kPi = 3.14159265358979323846;

// Planning happens at an inflated agent radius so that bounded tracking error
// cannot turn a feasible plan into a physical near-miss.
constexpr double kPlanMargin = 0.10;

// Tolerance of the online safety checker: a tick counts as a collision only
// when a measured distance undercuts its limit by more than this.
constexpr double kSimEps = 0.01;

double wall_ms_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() -
                                                   t0)
      .count();
}

void append_num(std::string& out, double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.9g", v);
  out += buf;
}

// True when every agent's position passes bounds, obstacle, and pairwise
// separation tests at radius r (obstacles frozen at t, scheduled ones
// inflated by dyn_inflate). `bad` is sized to q and flags the offenders.
bool find_offenders(const Configuration& q, const Workspace& ws, double r,
                    double t, double dyn_inflate, std::vector<char>& bad) {
  const std::size_t n = q.size();
  bad.assign(n, 0);
  bool any = false;
  for (std::size_t i = 0; i < n; ++i) {
    if (!ws.inside_shrunk(q[i], r) || !ws.point_free(q[i], r, t, dyn_inflate)) {
      bad[i] = 1;
      any = true;
    }
  }
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      if ((q[i] - q[j]).norm() < 2.0 * r) {
        bad[i] = bad[j] = 1;
        any = true;
      }
    }
  }
  return any;
}

}  // namespace

Configuration repair_query(const Configuration& q, const Workspace& ws,
                           double r_agent, double sigma_repair, double d_travel,
                           Rng& rng, double t, double dyn_inflate, int max_rounds) {
  Configuration cur = q;
  std::vector<char> bad;
  if (!find_offenders(cur, ws, r_agent, t, dyn_inflate, bad)) return cur;

  double sigma = sigma_repair;
  for (int round = 0; round < max_rounds; ++round) {
    for (std::size_t i = 0; i < cur.size(); ++i) {
      if (!bad[i]) continue;
      Vec3 p = cur[i];
      p.x += rng.gauss(sigma);
      p.y += rng.gauss(sigma);
      if (!ws.planar) p.z += rng.gauss(sigma);
      // Keep the repaired point reachable within one plan step of the
      // original query position.
      Vec3 d = p - q[i];
      double len = d.norm();
      if (len > d_travel) p = q[i] + d * (d_travel / len);
      cur[i] = p;
    }
    if (!find_offenders(cur, ws, r_agent, t, dyn_inflate, bad)) return cur;
    if ((round + 1) % 10 == 0) sigma = std::min(sigma * 2.0, d_travel);
  }

  int stuck = -1;
  for (std::size_t i = 0; i < bad.size(); ++i) {
    if (bad[i]) {
      stuck = static_cast<int>(i);
      break;
    }
  }
  throw RepairFailedError("could not repair planning query after " +
                          std::to_string(max_rounds) + " rounds (agent " +
                          std::to_string(stuck) +
                          " still infeasible within one step of its position)");
}

std::optional<Plan> try_reuse(const Configuration& q_new, const Plan& prev,
                              double delta_reuse, const std::vector<Vec3>& targets,
                              const Workspace& ws, const CheckParams& chk) {
  if (prev.steps.empty() || prev.steps[0].size() != q_new.size()) {
    return std::nullopt;
  }
  const std::size_t n = q_new.size();
  for (std::size_t k = 0; k < prev.steps.size(); ++k) {
    double dev = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      dev = std::max(dev, (prev.steps[k][i] - q_new[i]).norm());
    }
    if (dev > delta_reuse) continue;
    std::vector<Configuration> suffix(prev.steps.begin() +
                                          static_cast<std::ptrdiff_t>(k),
                                      prev.steps.end());
    if (!check_plan(suffix, suffix[0], targets, ws, chk).empty()) continue;
    Plan out;
    out.steps = std::move(suffix);
    out.finalize(chk.d_travel, targets);
    out.feasible = true;
    return out;
  }
  return std::nullopt;
}

std::vector<Vec3> sample_free_positions(const Workspace& ws, std::size_t n,
                                        double r_agent, double min_sep, Rng& rng,
                                        double t, const GoalRegion* disc,
                                        const std::vector<Vec3>* keep_clear,
                                        int max_attempts) {
  std::vector<Vec3> out;
  out.reserve(n);
  for (int attempt = 0; out.size() < n; ++attempt) {
    if (attempt >= max_attempts) {
      throw DomainError("could not sample " + std::to_string(n) +
                        " free positions (placed " + std::to_string(out.size()) +
                        " after " + std::to_string(max_attempts) + " attempts)");
    }
    Vec3 p;
    if (disc) {
      double rad = disc->radius * std::sqrt(rng.uniform());
      double ang = 2.0 * kPi * rng.uniform();
      p = {disc->center.x + rad * std::cos(ang),
           disc->center.y + rad * std::sin(ang), disc->center.z};
    } else {
      p.x = rng.uniform(ws.bounds_min.x + r_agent, ws.bounds_max.x - r_agent);
      p.y = rng.uniform(ws.bounds_min.y + r_agent, ws.bounds_max.y - r_agent);
      p.z = ws.planar ? ws.bounds_min.z
                      : rng.uniform(ws.bounds_min.z + r_agent,
                                    ws.bounds_max.z - r_agent);
    }
    if (ws.planar) p.z = ws.bounds_min.z;
    if (!ws.inside_shrunk(p, r_agent)) continue;
    if (!ws.point_free(p, r_agent, t)) continue;
    bool clear = true;
    for (const Vec3& q : out) {
      if ((q - p).norm() < min_sep) {
        clear = false;
        break;
      }
    }
    if (clear && keep_clear) {
      for (const Vec3& q : *keep_clear) {
        if ((q - p).norm() < min_sep) {
          clear = false;
          break;
        }
      }
    }
    if (clear) out.push_back(p);
  }
  return out;
}

std::string metrics_to_json(const MetricsLog& m) {
  ojson j;
  j["completed"] = m.completed;
  j["duration_s"] = m.duration_s;
  j["ticks"] = m.ticks;
  j["collision_ticks"] = m.collision_ticks;
  j["goals_assigned"] = m.goals_assigned;
  j["goals_reached"] = m.goals_reached;
  j["replans"] = m.replans;
  j["reuse_hits"] = m.reuse_hits;
  j["misses"] = m.misses;
  j["max_tracking_error"] = m.max_tracking_error;
  j["mean_tracking_error"] = m.mean_tracking_error;
  j["per_robot_max_error"] = m.per_robot_max_error;
  ojson tasks = ojson::array();
  for (const TaskRecord& t : m.tasks) {
    ojson row;
    row["agent"] = t.agent;
    row["assigned_s"] = t.assigned_s;
    row["arrived_s"] = t.arrived_s;
    row["released_s"] = t.released_s;
    row["distance"] = t.distance;
    tasks.push_back(std::move(row));
  }
  j["tasks"] = std::move(tasks);
  ojson replans = ojson::array();
  for (const ReplanRecord& r : m.replan_log) {
    ojson row;
    row["t_s"] = r.t_s;
    row["reuse"] = r.reuse;
    row["success"] = r.success;
    row["flowtime"] = r.flowtime;
    row["expansions"] = r.expansions;
    row["wall_ms"] = r.wall_ms;
    row["t_first_wall_ms"] = r.t_first_wall_ms;
    replans.push_back(std::move(row));
  }
  j["replan_log"] = std::move(replans);
  j["wall_ms_total"] = m.wall_ms_total;
  return j.dump(2) + "\n";
}

namespace {

// Greedy nearest-slot matching of agents (by index) to evenly spaced points
// on the formation circle around the scripted target. A slot that is not
// collision-free keeps the agent on its previous goal.
void assign_formation_slots(const Workspace& ws, const MissionSpec& mission,
                            double r_plan, double t,
                            const std::vector<Vec3>& positions,
                            std::vector<Vec3>& goals) {
  const std::size_t n = goals.size();
  const Vec3 target = sample_schedule(mission.target_path, t);
  std::vector<Vec3> slots(n);
  std::vector<char> taken(n, 0);
  for (std::size_t k = 0; k < n; ++k) {
    double ang = 2.0 * kPi * static_cast<double>(k) / static_cast<double>(n);
    slots[k] = {target.x + mission.formation_radius * std::cos(ang),
                target.y + mission.formation_radius * std::sin(ang), target.z};
    if (ws.planar) slots[k].z = ws.bounds_min.z;
  }
  for (std::size_t i = 0; i < n; ++i) {
    int best = -1;
    double best_d = 0.0;
    for (std::size_t k = 0; k < n; ++k) {
      if (taken[k]) continue;
      if (!ws.inside_shrunk(slots[k], r_plan) ||
          !ws.point_free(slots[k], r_plan, t)) {
        continue;
      }
      double d = (slots[k] - positions[i]).norm();
      if (best < 0 || d < best_d) {
        best = static_cast<int>(k);
        best_d = d;
      }
    }
    if (best >= 0) {
      taken[static_cast<std::size_t>(best)] = 1;
      goals[i] = slots[static_cast<std::size_t>(best)];
    }
    // else: keep the previous goal; the slot ring is partly blocked.
  }
}

// Shared endpoint derivation: run_mission passes its live streams (later
// goal resampling continues the same sequence); initial_endpoints derives
// fresh ones, which yields identical first draws because streams are pure
// functions of the master seed and label.
MissionEndpoints derive_endpoints(const Scenario& sc, Rng& start_rng,
                                  Rng& goals_rng) {
  const Workspace& ws = sc.workspace;
  const std::size_t n = sc.n_agents;
  const double r_plan = sc.r_agent + kPlanMargin;
  const double goal_sep = 2.0 * (r_plan + sc.planner.r_target);

  MissionEndpoints ep;
  ep.starts = sc.starts;
  if (ep.starts.empty()) {
    ep.starts = sample_free_positions(ws, n, r_plan, goal_sep, start_rng, 0.0);
  }

  auto sampled = [&] {
    return sample_free_positions(
        ws, n, r_plan, goal_sep, goals_rng, 0.0,
        sc.mission.goal_region ? &*sc.mission.goal_region : nullptr, nullptr);
  };

  switch (sc.mission.mode) {
    case MissionMode::Oneshot:
      ep.goals = sc.mission.goals.empty() ? sampled() : sc.mission.goals;
      break;
    case MissionMode::Synchronous:
    case MissionMode::Asynchronous:
      ep.goals = sampled();
      break;
    case MissionMode::TargetFollowing: {
      if (n >= 2) {
        const double chord = 2.0 * sc.mission.formation_radius *
                             std::sin(kPi / static_cast<double>(n));
        if (chord < goal_sep) {
          throw DomainError(
              "formation slots too close: " + std::to_string(n) +
              " agents on a circle of radius " +
              std::to_string(sc.mission.formation_radius) +
              " leave a slot spacing of " + std::to_string(chord) +
              " m, need at least " + std::to_string(goal_sep) + " m");
        }
      }
      ep.goals = ep.starts;
      assign_formation_slots(ws, sc.mission, r_plan, 0.0, ep.starts, ep.goals);
      break;
    }
  }
  return ep;
}

}  // namespace

MissionEndpoints initial_endpoints(const Scenario& sc) {
  Rng master(sc.seed);
  Rng start_rng = master.stream("starts");
  Rng goals_rng = master.stream("goals");
  return derive_endpoints(sc, start_rng, goals_rng);
}

MetricsLog run_mission(const Scenario& sc, std::ostream* traj_csv,
                       std::ostream* events_csv) {
  const Workspace& ws = sc.workspace;
  const std::size_t n = sc.n_agents;
  const MissionMode mode = sc.mission.mode;
  const double r_plan = sc.r_agent + kPlanMargin;
  const double r_target = sc.planner.r_target;
  const double d_trav = sc.d_travel();
  const double step_s = sc.dt_step();
  const double dt = 1.0 / sc.controller.ctrl_hz;
  const double delta = sc.delta_reuse();
  const double goal_sep = 2.0 * (r_plan + r_target);

  // Liveness guard: the reference must be able to advance past the reuse
  // threshold between consecutive replans, or every cycle re-anchors the
  // interpolators at the same prefix step and the robots never make progress.
  if (sc.mission.speed_mps / sc.runtime.replan_hz <= delta + 1e-12) {
    char buf[256];
    std::snprintf(buf, sizeof buf,
                  "reference advance per replan period (%.4g m) must exceed the "
                  "plan-reuse threshold (%.4g m); lower replan_hz, raise "
                  "speed_mps, or shrink d_travel/delta_reuse",
                  sc.mission.speed_mps / sc.runtime.replan_hz, delta);
    throw DomainError(buf);
  }

  MetricsLog m;
  m.per_robot_max_error.assign(n, 0.0);
  double err_sum = 0.0;

  Rng master(sc.seed);
  Rng start_rng = master.stream("starts");
  Rng goals_rng = master.stream("goals");
  std::vector<Rng> dist_rng;
  dist_rng.reserve(n);
  for (std::size_t i = 0; i < n; ++i) dist_rng.push_back(master.stream("dist", i));

  const ControlGains gains = derive_gains(sc.controller);

  const MissionEndpoints ep = derive_endpoints(sc, start_rng, goals_rng);
  const Configuration& starts = ep.starts;

  std::vector<RobotState> plant(n);
  for (std::size_t i = 0; i < n; ++i) plant[i].p = starts[i];

  if (traj_csv) *traj_csv << "tick,robot,px,py,pz,refx,refy,refz,err\n";
  if (events_csv) {
    *events_csv << "t_s,event,agent,reuse,success,wall_ms,flowtime,expansions,x,y,z\n";
  }

  auto event_goal = [&](double t, std::size_t agent, const Vec3& g) {
    if (!events_csv) return;
    std::string row;
    append_num(row, t);
    row += ",goal,";
    row += std::to_string(agent);
    row += ",0,0,0,0,0,";
    append_num(row, g.x);
    row += ',';
    append_num(row, g.y);
    row += ',';
    append_num(row, g.z);
    row += '\n';
    *events_csv << row;
  };

  // --- goal flow -----------------------------------------------------------
  std::vector<Vec3> goals(n);
  std::vector<char> arrived(n, 0);
  std::vector<int> task_of(n, -1);

  auto assign_goal = [&](std::size_t i, const Vec3& g, double t) {
    goals[i] = g;
    arrived[i] = 0;
    if (task_of[i] >= 0) {
      m.tasks[static_cast<std::size_t>(task_of[i])].released_s = t;
    }
    TaskRecord rec;
    rec.agent = static_cast<int>(i);
    rec.assigned_s = t;
    rec.distance = (g - plant[i].p).norm();
    task_of[i] = static_cast<int>(m.tasks.size());
    m.tasks.push_back(rec);
    ++m.goals_assigned;
    event_goal(t, i, g);
  };

  auto sample_goals = [&](std::size_t count, double t,
                          const std::vector<Vec3>* keep_clear) {
    return sample_free_positions(ws, count, r_plan, goal_sep, goals_rng, t,
                                 sc.mission.goal_region ? &*sc.mission.goal_region
                                                        : nullptr,
                                 keep_clear);
  };

  if (mode == MissionMode::TargetFollowing) {
    goals = ep.goals;  // formation slots carry no task bookkeeping
  } else {
    for (std::size_t i = 0; i < n; ++i) assign_goal(i, ep.goals[i], 0.0);
  }

  // --- planning state -------------------------------------------------------
  TeamRoadmaps team(ws, sc.roadmap, r_plan);
  Plan current;
  std::vector<PathInterpolator> interp;
  double publish_t = 0.0;

  auto cmd_ref = [&](std::size_t i, double t) -> TrajectorySample {
    if (interp.empty()) {
      TrajectorySample s;
      s.t = t;
      s.p_ref = starts[i];
      return s;
    }
    return interp[i].sample(t - publish_t);
  };

  const long period_ticks = std::max<long>(
      1, std::lround(sc.controller.ctrl_hz / sc.runtime.replan_hz));
  long next_replan = 0;
  int replan_idx = 0;
  int miss_streak = 0;
  std::string last_failure;

  auto do_replan = [&](double t, long at_tick) {
    const auto t0 = std::chrono::steady_clock::now();

    Configuration refs(n);
    for (std::size_t i = 0; i < n; ++i) refs[i] = cmd_ref(i, t).p_ref;
    Rng repair_rng = master.stream("repair", static_cast<std::uint64_t>(replan_idx));
    Configuration q0 = repair_query(refs, ws, r_plan, sc.runtime.sigma_repair,
                                    d_trav, repair_rng, t, ws.dynamic_margin);

    CheckParams chk;
    chk.r_agent = r_plan;
    chk.r_target = r_target;
    chk.d_travel = d_trav;
    chk.t = t;
    chk.dyn_inflate = ws.dynamic_margin;

    std::optional<Plan> seed;
    if (!current.steps.empty()) {
      seed = try_reuse(q0, current, delta, goals, ws, chk);
    }

    ProblemQuery q;
    q.starts = seed ? seed->steps[0] : q0;
    q.targets = goals;
    q.r_agent = r_plan;
    q.r_target = r_target;
    q.d_travel = d_trav;
    q.t = t;
    q.deadline = sc.runtime.budget_expansions > 0
                     ? Deadline::budget(sc.runtime.budget_expansions)
                     : Deadline::wall(sc.runtime.deadline_fraction * 1000.0 /
                                      sc.runtime.replan_hz);
    q.seed = master.stream("plan", static_cast<std::uint64_t>(replan_idx)).seed();
    q.seed_plan = seed ? &*seed : nullptr;

    PlannerParams prm;
    prm.eps_dup = sc.planner.eps_dup;
    prm.p_skip = sc.planner.p_skip;
    prm.lns_k = sc.planner.lns_k;
    prm.roadmap = sc.roadmap;

    SolveStats st;
    std::optional<Plan> out;
    try {
      out = solve(q, ws, prm, &st, &team);
    } catch (const TargetBlockedError& e) {
      last_failure = e.what();
    } catch (const EmptyRoadmapError& e) {
      last_failure = e.what();
    }

    // Adopt the solver output only when it strictly improves on the reused
    // suffix; otherwise republish the suffix verbatim so the reference path
    // under the trackers does not change shape every cycle.  A verified
    // suffix also covers a cycle where the solver itself comes up empty.
    const Plan* chosen = nullptr;
    if (out && (!seed || out->flowtime < seed->flowtime)) {
      chosen = &*out;
    } else if (seed) {
      chosen = &*seed;
    }

    ReplanRecord rec;
    rec.t_s = t;
    rec.reuse = seed.has_value();
    rec.success = chosen != nullptr;
    rec.flowtime = chosen ? chosen->flowtime : -1.0;
    rec.expansions = st.expansions;
    rec.wall_ms = wall_ms_since(t0);
    rec.t_first_wall_ms = st.t_first_ms;
    m.replan_log.push_back(rec);
    ++m.replans;
    m.wall_ms_total += rec.wall_ms;
    if (seed) ++m.reuse_hits;

    if (chosen) {
      current = *chosen;
      std::vector<PathInterpolator> next;
      next.reserve(n);
      for (std::size_t i = 0; i < n; ++i) {
        next.emplace_back(agent_path(current.steps, i), step_s);
      }
      interp = std::move(next);  // whole-plan swap: trackers never see a torn plan
      publish_t = t;
      miss_streak = 0;
    } else {
      ++m.misses;
      ++miss_streak;
      if (!st.failure.empty()) last_failure = st.failure;
      if (miss_streak >= sc.runtime.kappa_miss) {
        char buf[64];
        std::snprintf(buf, sizeof buf, "%.3f", t);
        throw MissionAbortedError(
            "planner missed " + std::to_string(miss_streak) +
            " consecutive cycles by t=" + buf + " s (last failure: " +
            (last_failure.empty() ? "none recorded" : last_failure) + ")");
      }
    }

    if (events_csv) {
      std::string row;
      append_num(row, t);
      row += ",replan,-1,";
      row += rec.reuse ? '1' : '0';
      row += ',';
      row += rec.success ? '1' : '0';
      row += ',';
      append_num(row, rec.wall_ms);
      row += ',';
      append_num(row, rec.flowtime);
      row += ',';
      append_num(row, static_cast<double>(rec.expansions));
      row += ",0,0,0\n";
      *events_csv << row;
    }

    ++replan_idx;
    next_replan = at_tick + period_ticks;
  };

  // --- main loop ------------------------------------------------------------
  const long max_ticks =
      std::lround(sc.mission.duration_s * sc.controller.ctrl_hz);
  long tick = 0;
  bool oneshot_done = false;

  for (; tick < max_ticks; ++tick) {
    const double t = static_cast<double>(tick) * dt;

    // 1. Arrivals and goal flow (plant state at time t).
    if (mode != MissionMode::TargetFollowing) {
      for (std::size_t i = 0; i < n; ++i) {
        if (arrived[i]) continue;
        if ((plant[i].p - goals[i]).norm() <= r_target) {
          arrived[i] = 1;
          m.tasks[static_cast<std::size_t>(task_of[i])].arrived_s = t;
          ++m.goals_reached;
          if (mode == MissionMode::Asynchronous) {
            std::vector<Vec3> others;
            others.reserve(n - 1);
            for (std::size_t j = 0; j < n; ++j) {
              if (j != i) others.push_back(goals[j]);
            }
            assign_goal(i, sample_goals(1, t, &others)[0], t);
            next_replan = std::min(next_replan, tick);
          }
        }
      }
      bool all = true;
      for (std::size_t i = 0; i < n; ++i) {
        if (!arrived[i]) {
          all = false;
          break;
        }
      }
      if (all && mode == MissionMode::Oneshot) {
        oneshot_done = true;
        break;
      }
      if (all && mode == MissionMode::Synchronous) {
        std::vector<Vec3> fresh = sample_goals(n, t, nullptr);
        for (std::size_t i = 0; i < n; ++i) assign_goal(i, fresh[i], t);
        next_replan = std::min(next_replan, tick);
      }
    }

    // 2. Replanning (periodic grid, pulled earlier by goal updates).
    if (tick == next_replan) {
      if (mode == MissionMode::TargetFollowing) {
        std::vector<Vec3> ppos(n);
        for (std::size_t i = 0; i < n; ++i) ppos[i] = plant[i].p;
        assign_formation_slots(ws, sc.mission, r_plan, t, ppos, goals);
      }
      do_replan(t, tick);
    }

    // 3. Track and step the plants.
    for (std::size_t i = 0; i < n; ++i) {
      const TrajectorySample ref = cmd_ref(i, t);
      const double err = (plant[i].p - ref.p_ref).norm();
      err_sum += err;
      m.max_tracking_error = std::max(m.max_tracking_error, err);
      m.per_robot_max_error[i] = std::max(m.per_robot_max_error[i], err);
      if (traj_csv) {
        std::string row = std::to_string(tick);
        row += ',';
        row += std::to_string(i);
        for (double v : {plant[i].p.x, plant[i].p.y, plant[i].p.z, ref.p_ref.x,
                         ref.p_ref.y, ref.p_ref.z, err}) {
          row += ',';
          append_num(row, v);
        }
        row += '\n';
        *traj_csv << row;
      }
      Vec3 u = control_step(plant[i], ref, gains);
      if (sc.runtime.sigma_disturbance > 0.0) {
        Vec3 w = sample_disturbance(sc.runtime.sigma_disturbance, dist_rng[i]);
        if (ws.planar) w.z = 0.0;
        u += w;
      }
      plant[i] = step_plant(plant[i], u, dt);
    }

    // 4. Online safety check on the stepped state (time t + dt).
    const double t_next = static_cast<double>(tick + 1) * dt;
    bool breach = false;
    for (std::size_t i = 0; i < n && !breach; ++i) {
      const Vec3& p = plant[i].p;
      const double rb = sc.r_agent - kSimEps;
      if (p.x < ws.bounds_min.x + rb || p.x > ws.bounds_max.x - rb ||
          p.y < ws.bounds_min.y + rb || p.y > ws.bounds_max.y - rb) {
        breach = true;
        break;
      }
      if (ws.planar) {
        if (p.z < ws.bounds_min.z - kSimEps || p.z > ws.bounds_max.z + kSimEps) {
          breach = true;
          break;
        }
      } else if (p.z < ws.bounds_min.z + rb || p.z > ws.bounds_max.z - rb) {
        breach = true;
        break;
      }
      for (const Obstacle& o : ws.obstacles) {
        if (o.point_distance(p, t_next) < sc.r_agent - kSimEps) {
          breach = true;
          break;
        }
      }
    }
    for (std::size_t i = 0; i < n && !breach; ++i) {
      for (std::size_t j = i + 1; j < n; ++j) {
        if ((plant[i].p - plant[j].p).norm() < 2.0 * sc.r_agent - kSimEps) {
          breach = true;
          break;
        }
      }
    }
    if (breach) ++m.collision_ticks;
  }

  m.ticks = tick;
  m.duration_s = static_cast<double>(tick) * dt;
  m.completed = mode == MissionMode::Oneshot ? oneshot_done : true;
  if (n > 0 && tick > 0) {
    m.mean_tracking_error = err_sum / (static_cast<double>(tick) * static_cast<double>(n));
  }
  return m;
}

BenchInstance make_bench_instance(std::size_t n, double r_agent, Rng rng) {
  BenchInstance b;
  b.ws.bounds_min = {0, 0, 0};
  b.ws.bounds_max = {6, 6, 2};
  Rng pole_rng = rng.stream("poles");
  for (int k = 0; k < 5; ++k) {
    Obstacle o;
    o.kind = Obstacle::Kind::Pole;
    o.center = {pole_rng.uniform(0.5, 5.5), pole_rng.uniform(0.5, 5.5), 0.0};
    o.radius = 0.2;
    o.z0 = 0.0;
    o.z1 = 2.0;
    b.ws.obstacles.push_back(o);
  }
  const double min_sep = 2.0 * (r_agent + 0.15);
  Rng s_rng = rng.stream("starts");
  Rng g_rng = rng.stream("goals");
  b.starts = sample_free_positions(b.ws, n, r_agent, min_sep, s_rng);

  // Every robot's goal sits at least one meter from its own start so the
  // normalized benchmark cost measures a real traversal, not a doorstep hop.
  constexpr double kMinLeg = 1.0;
  b.goals.reserve(n);
  for (int attempt = 0; b.goals.size() < n; ++attempt) {
    if (attempt >= 100000) {
      throw DomainError("could not sample benchmark goals (placed " +
                        std::to_string(b.goals.size()) + " of " +
                        std::to_string(n) + ")");
    }
    Vec3 p{g_rng.uniform(b.ws.bounds_min.x + r_agent, b.ws.bounds_max.x - r_agent),
           g_rng.uniform(b.ws.bounds_min.y + r_agent, b.ws.bounds_max.y - r_agent),
           g_rng.uniform(b.ws.bounds_min.z + r_agent, b.ws.bounds_max.z - r_agent)};
    if (!b.ws.inside_shrunk(p, r_agent) || !b.ws.point_free(p, r_agent, 0.0)) {
      continue;
    }
    if ((p - b.starts[b.goals.size()]).norm() < kMinLeg) continue;
    bool clear = true;
    for (const Vec3& q : b.goals) {
      if ((q - p).norm() < min_sep) {
        clear = false;
        break;
      }
    }
    if (clear) b.goals.push_back(p);
  }
  return b;
}

std::vector<BenchRow> bench_scalability(const std::vector<std::size_t>& agent_counts,
                                        int instances, double limit_ms,
                                        std::uint64_t seed, double r_agent,
                                        std::uint64_t budget_expansions) {
  std::vector<BenchRow> rows;
  Rng master(seed);
  for (std::size_t n : agent_counts) {
    for (int i = 0; i < instances; ++i) {
      Rng inst_rng = master.stream(
          "bench", static_cast<std::uint64_t>(n) * 1000003ULL +
                       static_cast<std::uint64_t>(i));
      BenchRow row;
      row.n = n;
      row.instance = i;
      try {
        BenchInstance inst = make_bench_instance(n, r_agent, inst_rng);
        ProblemQuery q;
        q.starts = inst.starts;
        q.targets = inst.goals;
        q.r_agent = r_agent;
        q.r_target = 0.15;
        q.d_travel = 0.5;
        q.deadline = budget_expansions > 0 ? Deadline::budget(budget_expansions)
                                           : Deadline::wall(limit_ms);
        q.seed = inst_rng.stream("solve").seed();
        // t_first_ms pins the first incumbent; the remaining budget refines
        // it so the cost column reflects the plan a caller would actually get.
        PlannerParams prm;
        SolveStats st;
        std::optional<Plan> plan = solve(q, inst.ws, prm, &st);
        row.success = plan.has_value();
        row.t_first_ms = st.t_first_ms;
        if (plan) row.cost = plan->normalized_cost;
      } catch (const DomainError&) {
        row.success = false;
      }
      rows.push_back(row);
    }
  }
  return rows;
}

std::string bench_to_csv(const std::vector<BenchRow>& rows) {
  std::string out = "n,instance,success,t_first_ms,cost\n";
  for (const BenchRow& r : rows) {
    out += std::to_string(r.n);
    out += ',';
    out += std::to_string(r.instance);
    out += ',';
    out += r.success ? '1' : '0';
    out += ',';
    append_num(out, r.t_first_ms);
    out += ',';
    append_num(out, r.cost);
    out += '\n';
  }
  return out;
}

}  // namespace lf
