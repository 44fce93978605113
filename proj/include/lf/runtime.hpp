#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "lf/planner.hpp"
#include "lf/scenario.hpp"
#include "lf/validate.hpp"

namespace lf {

// Makes a query configuration feasible for planning at radius `r_agent`:
// positions already pairwise >= 2*r_agent apart, inside the bounds, and
// point-free (against obstacles frozen at time t, scheduled ones inflated by
// dyn_inflate) are returned unchanged. Otherwise only the offending agents
// are perturbed with zero-mean Gaussian noise of scale sigma_repair, the
// scale doubling every 10 failed rounds up to d_travel. Each agent's total
// displacement from its input position is hard-capped at d_travel, so a
// repaired query is always reachable within one plan step. Deterministic
// under the rng. Throws RepairFailedError after `max_rounds` rounds.
Configuration repair_query(const Configuration& q, const Workspace& ws,
                           double r_agent, double sigma_repair, double d_travel,
                           Rng& rng, double t = 0.0, double dyn_inflate = 0.0,
                           int max_rounds = 1000);

// Warm-start scan: returns the suffix [Q^k .. Q^T] of `prev` for the smallest
// k whose configuration deviates from q_new by at most delta_reuse in the
// max-over-agents norm AND whose suffix still passes the full plan checker
// (current obstacle positions, current targets). The returned plan's first
// step replaces the query. nullopt when no step qualifies.
std::optional<Plan> try_reuse(const Configuration& q_new, const Plan& prev,
                              double delta_reuse, const std::vector<Vec3>& targets,
                              const Workspace& ws, const CheckParams& chk);

// Samples `n` positions uniformly in the workspace box (or in the horizontal
// disc when `disc` is given), each point-free at radius r_agent (obstacles
// frozen at time t) and pairwise at least min_sep apart. Planar workspaces
// pin z to the floor height. Throws DomainError when attempts run out.
std::vector<Vec3> sample_free_positions(const Workspace& ws, std::size_t n,
                                        double r_agent, double min_sep, Rng& rng,
                                        double t = 0.0,
                                        const GoalRegion* disc = nullptr,
                                        const std::vector<Vec3>* keep_clear = nullptr,
                                        int max_attempts = 100000);

// One planner invocation inside a mission.
struct ReplanRecord {
  double t_s = 0.0;          // simulated trigger time
  bool reuse = false;        // warm start taken
  bool success = false;      // a plan was published
  double flowtime = -1.0;    // published plan flowtime (steps), -1 on miss
  std::uint64_t expansions = 0;
  double wall_ms = 0.0;      // solve wall time (excluded from byte comparisons)
  double t_first_wall_ms = 0.0;  // wall time to first incumbent
};

// One goal assignment to one agent.
struct TaskRecord {
  int agent = -1;
  double assigned_s = 0.0;
  double arrived_s = -1.0;   // first tick within r_target; -1 if never
  double released_s = -1.0;  // when the next goal replaced this one; -1 at end
  double distance = 0.0;     // start-to-goal straight-line distance
};

struct MetricsLog {
  bool completed = false;    // oneshot: all arrived; otherwise: ran to duration
  double duration_s = 0.0;   // simulated time actually run
  long ticks = 0;
  int collision_ticks = 0;   // ticks with any separation/obstacle/bounds breach
  int goals_assigned = 0;
  int goals_reached = 0;
  int replans = 0;
  int reuse_hits = 0;
  int misses = 0;            // replans that published nothing
  double max_tracking_error = 0.0;
  double mean_tracking_error = 0.0;
  std::vector<double> per_robot_max_error;
  std::vector<TaskRecord> tasks;
  std::vector<ReplanRecord> replan_log;
  double wall_ms_total = 0.0;
};

// Canonical JSON rendering of a metrics log. Every wall-clock-timed field
// name contains "wall"; all other values are reproducible when the scenario
// fixes the planner effort via runtime.budget_expansions.
std::string metrics_to_json(const MetricsLog& m);

// The starting configuration and first goal set of a scenario, derived with
// the same seeded streams and placement rules a mission uses. Offline
// planning and plan checking call this so their endpoints agree with what a
// simulation of the same scenario would do. Throws DomainError when sampling
// fails or the formation ring cannot hold the team.
struct MissionEndpoints {
  Configuration starts;
  std::vector<Vec3> goals;
};
MissionEndpoints initial_endpoints(const Scenario& sc);

// Closed-loop lockstep simulation of a whole scenario: trackers step the
// plants at ctrl_hz against the latest published plan; the planner runs on
// its own periodic schedule (plus goal-update triggers), each cycle building
// roadmaps from the frozen world snapshot, repairing the query, attempting
// plan reuse, and publishing atomically; goals flow per the mission mode; an
// online checker counts separation/obstacle/bounds breaches every tick.
// Optional sinks receive per-tick trajectory rows and per-event rows as CSV.
// Throws MissionAbortedError after kappa_miss consecutive planner misses and
// RepairFailedError when a query cannot be made feasible.
MetricsLog run_mission(const Scenario& sc, std::ostream* traj_csv = nullptr,
                       std::ostream* events_csv = nullptr);

// One random planning instance of the scalability recipe: a 6x6x2 m arena
// with five random poles of radius 0.2, n agents at radius r_agent, starts
// and goals sampled free with safe separation.
struct BenchInstance {
  Workspace ws;
  Configuration starts;
  std::vector<Vec3> goals;
};
BenchInstance make_bench_instance(std::size_t n, double r_agent, Rng rng);

struct BenchRow {
  std::size_t n = 0;
  int instance = 0;
  bool success = false;
  double t_first_ms = 0.0;   // wall time to first solution (excluded from
                             // byte comparisons)
  double cost = -1.0;        // normalized flowtime, -1 on failure
};

// Seeded sweep over team sizes: for each n, `instances` random instances are
// solved with the given wall-time limit (or a fixed expansion budget when
// budget_expansions > 0, making rows byte-reproducible). r_agent applies to
// the whole sweep.
std::vector<BenchRow> bench_scalability(const std::vector<std::size_t>& agent_counts,
                                        int instances, double limit_ms,
                                        std::uint64_t seed, double r_agent = 0.2,
                                        std::uint64_t budget_expansions = 0);

// CSV rendering of bench results (header: n,instance,success,t_first_ms,cost).
std::string bench_to_csv(const std::vector<BenchRow>& rows);

}  // namespace lf
