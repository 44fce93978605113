#pragma once

#include <cstdint>
#include <limits>
#include <optional>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "lf/plan.hpp"
#include "lf/rng.hpp"
#include "lf/roadmap.hpp"
#include "lf/workspace.hpp"

namespace lf {

// Search budget. Wall time is the production limit; the expansion count gives
// a machine-independent budget for byte-reproducible runs (one expansion = one
// joint-configuration generation attempt; refinement bookkeeping that does not
// expand, e.g. a smoothing attempt, is charged one expansion as well so pure
// expansion budgets always terminate).
struct Deadline {
  double wall_ms = std::numeric_limits<double>::infinity();
  std::uint64_t expansions = std::numeric_limits<std::uint64_t>::max();

  static Deadline wall(double ms) {
    Deadline d;
    d.wall_ms = ms;
    return d;
  }
  static Deadline budget(std::uint64_t n) {
    Deadline d;
    d.expansions = n;
    return d;
  }
};

struct PlannerParams {
  double eps_dup = -1.0;  // duplicate tolerance (m); <= 0 means 0.25 * d_travel
  double p_skip = 0.5;    // interior-waypoint drop probability while smoothing
  int lns_k = 2;          // agents replanned per neighborhood round
  std::uint64_t mc_restarts =
      std::numeric_limits<std::uint64_t>::max();  // cap on restarts
  bool refine = true;   // spend leftover budget improving the first plan
  bool verbose = false; // log improvement events to stderr

  // Lattice parameters, used only when no shared TeamRoadmaps is supplied.
  RoadmapParams roadmap{};

  // Expansion slices interleaving the refinement strategies per cycle.
  std::uint64_t bnb_slice = 2000;
  std::uint64_t mc_slice = 4000;
  std::uint64_t lns_slice = 1500;
  int lns_rounds = 4;
};

struct ProblemQuery {
  Configuration starts;        // current agent positions (assumed feasible)
  std::vector<Vec3> targets;   // one target per agent
  double r_agent = 0.2;
  double r_target = 0.15;
  double d_travel = 0.5;       // per-step travel distance
  double t = 0.0;              // world snapshot time the search plans against
  Deadline deadline{};
  std::uint64_t seed = 0;
  const Plan* seed_plan = nullptr;  // verified warm start; skips initial search
};

struct SolveStats {
  std::uint64_t expansions = 0;
  std::uint64_t nodes = 0;  // joint search nodes created
  int max_depth = 0;
  double t_first_ms = -1.0;  // wall time until the first feasible plan
  double t_total_ms = 0.0;
  std::uint64_t first_expansions = 0;  // expansions until the first plan
  bool from_seed = false;
  // (wall_ms since solve start, flowtime) per incumbent improvement,
  // including the first plan.
  std::vector<std::pair<double, double>> trace;
  std::string failure;  // diagnostics when no plan was found
};

// Candidate moves out of p: the six signed axis primitives of length d_travel
// rotated so +x tracks the local descent direction, then the stay-in-place
// primitive, in the pinned order [+x, -x, +y, -y, +z, -z, stay]. Planar
// roadmaps suppress the vertical pair (five candidates, stay still last).
// Candidates are not collision-filtered here; filtering happens jointly in
// generate_configuration.
std::vector<Vec3> successor_set(const Vec3& p, const Roadmap& rm, double d_travel);

// A path treated as a moving obstacle during neighborhood replanning: the
// scripted agent traverses steps[min(k, last)] and parks at the end.
struct ScriptedPath {
  std::vector<Vec3> steps;
};

// Query bundle shared by every joint-step generation within one search.
struct StepContext {
  const std::vector<Roadmap>* roadmaps = nullptr;
  const CollisionContext* ctx = nullptr;  // frozen-time obstacle queries
  const std::vector<Vec3>* targets = nullptr;
  double r_agent = 0.0;
  double r_target = 0.0;
  double d_travel = 0.0;
  const std::vector<ScriptedPath>* scripted = nullptr;  // may be null
};

// One synchronous joint step. Agents commit one by one in `order`; the first
// forced_moves.size() of them take the given successor indices verbatim.
// Unconstrained agents greedily take their best-scoring candidate that clears
// obstacles, scripted paths, and every already-committed agent; a candidate
// blocked only by a committed agent triggers one level of priority
// inheritance (the blocker re-chooses) before giving up. Returns nullopt when
// some agent ends up with no valid move. `depth` indexes scripted paths (the
// step runs from depth to depth+1).
std::optional<Configuration> generate_configuration(const Configuration& from,
                                                    const std::vector<int>& order,
                                                    const std::vector<int>& forced_moves,
                                                    int depth,
                                                    const StepContext& sc, Rng& rng);

// Approximate joint-configuration visited set. Configurations hash by
// concatenated per-agent voxel triples at resolution eps; a lookup probes the
// query's own bucket plus each per-agent single-axis +-1 shifted bucket and
// exact-verifies candidates with the max-over-agents Euclidean test. Never
// reports a false duplicate; may miss one whose voxel key differs from the
// stored entry in two or more coordinates (costs extra search only).
class DuplicateIndex {
 public:
  DuplicateIndex(double eps, std::size_t agents);

  // `key` partitions the index (used for time-indexed sub-searches).
  bool contains(const Configuration& q, int key = 0) const;
  void insert(const Configuration& q, int key = 0);
  std::size_t size() const { return pool_.size(); }

 private:
  std::uint64_t agent_hash(std::size_t agent, const Vec3& p) const;
  std::uint64_t agent_hash_cell(std::size_t agent, std::int64_t cx, std::int64_t cy,
                                std::int64_t cz) const;
  bool bucket_match(std::uint64_t bucket, const Configuration& q, int key) const;

  double eps_;
  std::size_t agents_;
  std::vector<Configuration> pool_;
  std::vector<int> pool_keys_;
  std::unordered_map<std::uint64_t, std::vector<std::uint32_t>> buckets_;
  mutable std::vector<std::uint64_t> hash_scratch_;
};

// One shortcut attempt on a single agent's moving prefix: drops interior
// waypoints with probability p_skip, resamples the same number of steps
// uniformly in arc length, and commits only if every step stays within
// d_travel, obstacle-free, and >= 2*r_agent from every other agent. Returns
// true when the plan was updated; flowtime never increases.
bool smooth_path(Plan& plan, std::size_t agent, const StepContext& sc,
                 double p_skip, Rng& rng);

// Full-horizon coupled search: depth-first over joint configurations with
// lazily generated per-agent constraints, then anytime refinement
// (branch-and-bound continuation, Monte-Carlo restarts, large-neighborhood
// replanning, path smoothing) until the deadline. Returns nullopt when no
// feasible plan was found in time (stats->failure carries diagnostics).
// Throws TargetBlockedError / EmptyRoadmapError when the instance is
// unsolvable as posed. When `team` is supplied its radius must equal
// q.r_agent and its lattice is reused; otherwise roadmaps are built from
// prm.roadmap. Scheduled obstacles are inflated by ws.dynamic_margin.
std::optional<Plan> solve(const ProblemQuery& q, const Workspace& ws,
                          const PlannerParams& prm = {}, SolveStats* stats = nullptr,
                          const TeamRoadmaps* team = nullptr);

}  // namespace lf
