#include "lf/planner.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <deque>
#include <numeric>

#include "lf/errors.hpp"
#include "lf/validate.hpp"

namespace lf {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

inline std::uint64_t mix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ull;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
  return x ^ (x >> 31);
}

}  // namespace

std::vector<Vec3> successor_set(const Vec3& p, const Roadmap& rm, double d_travel) {
  Mat3 R = Mat3::identity();
  if (auto dir = rm.preferred_direction(p)) R = rotation_to(*dir);
  static const Vec3 axes[6] = {{1, 0, 0}, {-1, 0, 0}, {0, 1, 0},
                               {0, -1, 0}, {0, 0, 1}, {0, 0, -1}};
  const int na = rm.base->planar() ? 4 : 6;
  std::vector<Vec3> out;
  out.reserve(na + 1);
  for (int a = 0; a < na; ++a) out.push_back(p + (R * axes[a]) * d_travel);
  out.push_back(p);  // stay-in-place, always last
  return out;
}

// ---------------------------------------------------------------------------
// DuplicateIndex

DuplicateIndex::DuplicateIndex(double eps, std::size_t agents)
    : eps_(eps), agents_(agents) {}

std::uint64_t DuplicateIndex::agent_hash_cell(std::size_t agent, std::int64_t cx,
                                              std::int64_t cy, std::int64_t cz) const {
  std::uint64_t h = mix64(0x51ED270Bull * (agent + 1));
  h = mix64(h ^ static_cast<std::uint64_t>(cx));
  h = mix64(h ^ static_cast<std::uint64_t>(cy));
  h = mix64(h ^ static_cast<std::uint64_t>(cz));
  return h;
}

std::uint64_t DuplicateIndex::agent_hash(std::size_t agent, const Vec3& p) const {
  return agent_hash_cell(agent, static_cast<std::int64_t>(std::floor(p.x / eps_)),
                         static_cast<std::int64_t>(std::floor(p.y / eps_)),
                         static_cast<std::int64_t>(std::floor(p.z / eps_)));
}

bool DuplicateIndex::bucket_match(std::uint64_t bucket, const Configuration& q,
                                  int key) const {
  auto it = buckets_.find(bucket);
  if (it == buckets_.end()) return false;
  const double eps2 = eps_ * eps_;
  for (std::uint32_t idx : it->second) {
    if (pool_keys_[idx] != key) continue;
    const Configuration& s = pool_[idx];
    bool close = true;
    for (std::size_t i = 0; i < agents_; ++i) {
      if ((q[i] - s[i]).norm2() > eps2) {
        close = false;
        break;
      }
    }
    if (close) return true;
  }
  return false;
}

bool DuplicateIndex::contains(const Configuration& q, int key) const {
  if (pool_.empty()) return false;
  hash_scratch_.resize(agents_);
  const std::uint64_t base = mix64(0xC0FFEEull + static_cast<std::uint64_t>(key) * 0x9E3779B97F4A7C15ull);
  std::uint64_t sum = base;
  for (std::size_t i = 0; i < agents_; ++i) {
    hash_scratch_[i] = agent_hash(i, q[i]);
    sum += hash_scratch_[i];
  }
  if (bucket_match(sum, q, key)) return true;
  for (std::size_t i = 0; i < agents_; ++i) {
    const std::int64_t cx = static_cast<std::int64_t>(std::floor(q[i].x / eps_));
    const std::int64_t cy = static_cast<std::int64_t>(std::floor(q[i].y / eps_));
    const std::int64_t cz = static_cast<std::int64_t>(std::floor(q[i].z / eps_));
    for (int axis = 0; axis < 3; ++axis) {
      for (int dir = -1; dir <= 1; dir += 2) {
        std::uint64_t shifted =
            agent_hash_cell(i, cx + (axis == 0 ? dir : 0), cy + (axis == 1 ? dir : 0),
                            cz + (axis == 2 ? dir : 0));
        if (bucket_match(sum - hash_scratch_[i] + shifted, q, key)) return true;
      }
    }
  }
  return false;
}

void DuplicateIndex::insert(const Configuration& q, int key) {
  const std::uint64_t base = mix64(0xC0FFEEull + static_cast<std::uint64_t>(key) * 0x9E3779B97F4A7C15ull);
  std::uint64_t sum = base;
  for (std::size_t i = 0; i < agents_; ++i) sum += agent_hash(i, q[i]);
  buckets_[sum].push_back(static_cast<std::uint32_t>(pool_.size()));
  pool_.push_back(q);
  pool_keys_.push_back(key);
}

// ---------------------------------------------------------------------------
// Joint-step generation

std::optional<Configuration> generate_configuration(const Configuration& from,
                                                    const std::vector<int>& order,
                                                    const std::vector<int>& forced_moves,
                                                    int depth,
                                                    const StepContext& sc, Rng& rng) {
  const std::size_t n = from.size();
  const auto& rms = *sc.roadmaps;
  const double two_r = 2.0 * sc.r_agent;

  Configuration to = from;  // meaningful only where `committed`
  std::vector<int> commit_order;
  commit_order.reserve(n);
  std::vector<std::vector<Vec3>> cand(n);
  std::vector<std::vector<int>> ranked(n);  // candidate indices, best first
  std::vector<int> chosen(n, -1);
  std::vector<char> rechooseable(n, 0);

  auto scripted_ok = [&](std::size_t i, const Vec3& c) {
    if (!sc.scripted) return true;
    for (const ScriptedPath& s : *sc.scripted) {
      if (s.steps.empty()) continue;
      const std::size_t last = s.steps.size() - 1;
      const Vec3& a = s.steps[std::min(static_cast<std::size_t>(depth), last)];
      const Vec3& b = s.steps[std::min(static_cast<std::size_t>(depth) + 1, last)];
      if (pair_min_distance(from[i], c, a, b) < two_r) return false;
    }
    return true;
  };

  for (std::size_t k = 0; k < order.size(); ++k) {
    const std::size_t i = static_cast<std::size_t>(order[k]);
    cand[i] = successor_set(from[i], rms[i], sc.d_travel);
    const int m = static_cast<int>(cand[i].size());

    if (k < forced_moves.size()) {
      // Constrained agent: the forced primitive is taken verbatim or the
      // whole constraint is infeasible.
      const int mv = forced_moves[k];
      if (mv < 0 || mv >= m) return std::nullopt;
      const Vec3& c = cand[i][mv];
      if (!sc.ctx->segment_free(from[i], c)) return std::nullopt;
      if (!scripted_ok(i, c)) return std::nullopt;
      for (int j : commit_order) {
        if (pair_min_distance(from[i], c, from[j], to[j]) < two_r) return std::nullopt;
      }
      to[i] = c;
      chosen[i] = mv;
      commit_order.push_back(static_cast<int>(i));
      continue;
    }

    // Unconstrained: rank candidates by the potential at the landing point;
    // staying scores zero once inside the target radius, else the current
    // potential plus a half-step idling penalty. Ties break on fresh rng.
    const Roadmap& rm = rms[i];
    const int stay = m - 1;
    std::vector<double> score(m);
    std::vector<std::uint64_t> tie(m);
    for (int a = 0; a < m; ++a) {
      if (a == stay) {
        score[a] = from[i].dist((*sc.targets)[i]) <= sc.r_target
                       ? 0.0
                       : rm.cost_to_go(from[i]) + 0.5 * sc.d_travel;
      } else {
        score[a] = rm.cost_to_go(cand[i][a]);
      }
      tie[a] = rng.next_u64();
    }
    ranked[i].resize(m);
    std::iota(ranked[i].begin(), ranked[i].end(), 0);
    std::sort(ranked[i].begin(), ranked[i].end(), [&](int a, int b) {
      if (score[a] != score[b]) return score[a] < score[b];
      return tie[a] < tie[b];
    });
    rechooseable[i] = 1;

    int pick = -1;
    int fallback = -1;  // best candidate blocked only by a committed agent
    int fallback_blocker = -1;
    for (int a : ranked[i]) {
      const Vec3& c = cand[i][a];
      if (!sc.ctx->segment_free(from[i], c)) continue;
      if (!scripted_ok(i, c)) continue;
      int blocker = -1;
      for (int j : commit_order) {
        if (pair_min_distance(from[i], c, from[j], to[j]) < two_r) {
          blocker = j;
          break;
        }
      }
      if (blocker < 0) {
        pick = a;
        break;
      }
      if (fallback < 0) {
        fallback = a;
        fallback_blocker = blocker;
      }
    }

    if (pick < 0 && fallback >= 0 && rechooseable[fallback_blocker]) {
      // One level of priority inheritance: the blocker re-chooses so this
      // agent can take its best pair-blocked candidate.
      const std::size_t j = static_cast<std::size_t>(fallback_blocker);
      const Vec3& c_star = cand[i][fallback];
      for (int b : ranked[j]) {
        if (b == chosen[j]) continue;
        const Vec3& cj = cand[j][b];
        if (!sc.ctx->segment_free(from[j], cj)) continue;
        if (!scripted_ok(j, cj)) continue;
        if (pair_min_distance(from[j], cj, from[i], c_star) < two_r) continue;
        bool clear = true;
        for (int a2 : commit_order) {
          if (a2 == static_cast<int>(j)) continue;
          if (pair_min_distance(from[j], cj, from[a2], to[a2]) < two_r) {
            clear = false;
            break;
          }
        }
        if (!clear) continue;
        to[j] = cj;
        chosen[j] = b;
        pick = fallback;
        break;
      }
    }

    if (pick < 0) return std::nullopt;  // stuck
    to[i] = cand[i][pick];
    chosen[i] = pick;
    commit_order.push_back(static_cast<int>(i));
  }
  return to;
}

// ---------------------------------------------------------------------------
// Depth-first joint search with lazy constraints

namespace {

struct BudgetState {
  std::chrono::steady_clock::time_point t0;
  Deadline dl;
  std::uint64_t expansions = 0;

  double elapsed_ms() const {
    return std::chrono::duration<double, std::milli>(
               std::chrono::steady_clock::now() - t0)
        .count();
  }
  // In pure-expansion mode (wall_ms infinite) no clock is consulted, keeping
  // decisions byte-reproducible.
  bool spent() const {
    if (expansions >= dl.expansions) return true;
    return std::isfinite(dl.wall_ms) && elapsed_ms() >= dl.wall_ms;
  }
};

// Low-level lazy constraint: binds agent order[depth-1] to primitive `move`,
// inheriting the bindings of its parent chain. Node 0 is the empty constraint.
struct LowNode {
  std::int32_t parent;
  std::uint16_t depth;
  std::uint8_t move;
};

struct HighNode {
  Configuration config;
  std::int32_t parent = -1;
  std::int32_t depth = 0;
  std::uint32_t head = 0;  // next constraint to process (FIFO)
  std::vector<LowNode> tree;
  std::vector<int> order;  // agent processing order for this node
  // Step index of each agent's most recent position change in the prefix
  // ending at this node (0 = never moved). Settle indices of any extension
  // can only be >= these, which is what the pruning bound leans on.
  std::vector<std::uint16_t> last_move;
};

class Search {
 public:
  // `jitter_order` re-randomizes the agent priority order (used by restarts
  // and neighborhood sub-searches so they explore genuinely different plans;
  // continuous scores almost never tie, so tie draws alone do not diversify).
  Search(const StepContext& sc, const Configuration& starts, double eps_dup,
         int dedup_horizon, Rng rng, bool jitter_order = false)
      : sc_(sc),
        n_(starts.size()),
        rng_(std::move(rng)),
        visited_(eps_dup, starts.size()),
        dedup_horizon_(dedup_horizon) {
    if (jitter_order) {
      order_jitter_.resize(n_);
      for (auto& j : order_jitter_) j = rng_.uniform(0.5, 2.0);
    }
    tiekey_.resize(n_);
    for (auto& k : tiekey_) k = rng_.next_u64();
    HighNode root;
    root.config = starts;
    root.tree.push_back({-1, 0, 0});
    root.order = make_order(starts);
    root.last_move.assign(n_, 0);
    pool_.push_back(std::move(root));
    stack_.push_back(0);
    visited_.insert(starts, 0);
  }

  bool exhausted() const { return stack_.empty(); }
  std::uint64_t nodes() const { return pool_.size(); }
  int max_depth() const { return max_depth_; }

  enum class Outcome { Improved, Exhausted, Budget };

  // Runs until a plan with flowtime strictly below `bound` is found (filled
  // into *out), the stack empties, or the slice/global budget runs out.
  Outcome run(BudgetState& budget, std::uint64_t slice, double bound,
              std::vector<Configuration>* out) {
    std::uint64_t used = 0;
    while (!stack_.empty()) {
      if (budget.spent() || used >= slice) return Outcome::Budget;
      const int top = stack_.back();
      HighNode& nd = pool_[top];
      if (nd.head >= nd.tree.size()) {
        stack_.pop_back();
        continue;
      }
      const std::uint32_t ci = nd.head++;
      const LowNode c = nd.tree[ci];
      if (c.depth < n_) {
        // Lazily extend the constraint tree: children bind the next agent in
        // this node's order to each primitive in turn.
        const int m_count = move_count();
        for (int m = 0; m < m_count; ++m) {
          nd.tree.push_back({static_cast<std::int32_t>(ci),
                             static_cast<std::uint16_t>(c.depth + 1),
                             static_cast<std::uint8_t>(m)});
        }
      }
      forced_.assign(c.depth, 0);
      for (const LowNode* w = &c; w->depth > 0; w = &nd.tree[w->parent]) {
        forced_[w->depth - 1] = w->move;
      }
      ++budget.expansions;
      ++used;
      auto q = generate_configuration(nd.config, nd.order, forced_, nd.depth, sc_, rng_);
      if (!q) continue;
      if (all_at_goal(*q)) {
        // Goal configurations are leaves: any extension only raises settle
        // indices, so flowtime can never improve past this point.
        const double flow = flowtime_lb(*q, nd);  // exact here: all settled
        if (flow < bound) {
          *out = extract_path(top, *q);
          return Outcome::Improved;
        }
        continue;
      }
      const int key = dedup_horizon_ > 0 ? std::min(nd.depth + 1, dedup_horizon_) : 0;
      if (visited_.contains(*q, key)) continue;
      visited_.insert(*q, key);
      if (bound < kInf && flowtime_lb(*q, nd) >= bound) continue;
      HighNode child;
      child.config = std::move(*q);
      child.parent = top;
      child.depth = nd.depth + 1;
      child.tree.push_back({-1, 0, 0});
      child.order = make_order(child.config);
      child.last_move.resize(n_);
      for (std::size_t i = 0; i < n_; ++i) {
        child.last_move[i] = (child.config[i] == nd.config[i])
                                 ? nd.last_move[i]
                                 : static_cast<std::uint16_t>(child.depth);
      }
      max_depth_ = std::max(max_depth_, child.depth);
      pool_.push_back(std::move(child));
      stack_.push_back(static_cast<int>(pool_.size()) - 1);
    }
    return Outcome::Exhausted;
  }

 private:
  int move_count() const { return (*sc_.roadmaps)[0].base->planar() ? 5 : 7; }

  bool all_at_goal(const Configuration& q) const {
    for (std::size_t i = 0; i < n_; ++i) {
      if (q[i].dist((*sc_.targets)[i]) > sc_.r_target) return false;
    }
    return true;
  }

  // Admissible flowtime lower bound for any plan extending parent node `nd`
  // by the joint step to `q` (depth nd.depth + 1). An agent still outside its
  // target radius needs at least ceil((dist - r_target) / d_travel) further
  // moves, each one step later than the current depth; an agent inside the
  // radius may already be settled, so only its recorded last move counts.
  double flowtime_lb(const Configuration& q, const HighNode& nd) const {
    const double depth = nd.depth + 1;
    double lb = 0.0;
    for (std::size_t i = 0; i < n_; ++i) {
      const double dist = q[i].dist((*sc_.targets)[i]);
      if (dist > sc_.r_target) {
        lb += depth + std::ceil((dist - sc_.r_target) / sc_.d_travel - 1e-9);
      } else if (!(q[i] == nd.config[i])) {
        lb += depth;
      } else {
        lb += nd.last_move[i];
      }
    }
    return lb;
  }

  std::vector<int> make_order(const Configuration& q) const {
    std::vector<double> phi(n_);
    for (std::size_t i = 0; i < n_; ++i) {
      phi[i] = (*sc_.roadmaps)[i].cost_to_go(q[i]);
      if (!order_jitter_.empty()) phi[i] *= order_jitter_[i];
    }
    std::vector<int> order(n_);
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](int a, int b) {
      if (phi[a] != phi[b]) return phi[a] > phi[b];  // farthest first
      if (tiekey_[a] != tiekey_[b]) return tiekey_[a] < tiekey_[b];
      return a < b;
    });
    return order;
  }

  std::vector<Configuration> extract_path(int leaf_parent, const Configuration& last) const {
    std::vector<Configuration> steps;
    for (int v = leaf_parent; v >= 0; v = pool_[v].parent) steps.push_back(pool_[v].config);
    std::reverse(steps.begin(), steps.end());
    steps.push_back(last);
    return steps;
  }

  StepContext sc_;
  std::size_t n_;
  Rng rng_;
  DuplicateIndex visited_;
  int dedup_horizon_;
  std::deque<HighNode> pool_;
  std::vector<int> stack_;
  std::vector<double> order_jitter_;  // empty unless this search diversifies
  std::vector<std::uint64_t> tiekey_;
  std::vector<int> forced_;
  int max_depth_ = 0;
};

// ---------------------------------------------------------------------------
// Refinement helpers

// Roulette selection (weight = settle step) of k distinct agents, sorted.
std::vector<std::size_t> pick_lns_agents(const std::vector<int>& settled, int k,
                                         Rng& rng) {
  std::vector<double> w(settled.begin(), settled.end());
  std::vector<std::size_t> out;
  for (int it = 0; it < k; ++it) {
    double total = 0.0;
    for (double x : w) total += x;
    if (total <= 0.0) break;
    const double r = rng.uniform(0.0, total);
    double acc = 0.0;
    std::size_t pick = w.size();
    for (std::size_t i = 0; i < w.size(); ++i) {
      if (w[i] <= 0.0) continue;
      acc += w[i];
      if (r < acc || pick == w.size()) pick = i;
      if (r < acc) break;
    }
    out.push_back(pick);
    w[pick] = 0.0;
  }
  std::sort(out.begin(), out.end());
  return out;
}

// One large-neighborhood round: replan a roulette-chosen agent subset against
// the rest of the incumbent held fixed as moving obstacles; accept only a
// strict flowtime improvement that passes the independent checker.
bool try_lns(Plan& best, const ProblemQuery& q, const StepContext& base_sc,
             const std::vector<Roadmap>& rms, const Workspace& ws,
             const PlannerParams& prm, const CheckParams& chk, double eps_dup,
             BudgetState& budget, Rng& pick_rng, Rng sub_rng,
             std::uint64_t* nodes_out, int* depth_out) {
  const std::size_t n = best.num_agents();
  auto subset = pick_lns_agents(best.settled, std::min<int>(prm.lns_k, n), pick_rng);
  if (subset.empty()) return false;

  double sub_incumbent = 0.0;
  for (std::size_t i : subset) sub_incumbent += best.settled[i];
  if (sub_incumbent <= 0.0) return false;

  Configuration sub_starts;
  std::vector<Vec3> sub_targets;
  std::vector<Roadmap> sub_rms;
  for (std::size_t i : subset) {
    sub_starts.push_back(best.steps[0][i]);
    sub_targets.push_back(q.targets[i]);
    sub_rms.push_back(rms[i]);
  }
  std::vector<ScriptedPath> scripted;
  std::vector<char> in_subset(n, 0);
  for (std::size_t i : subset) in_subset[i] = 1;
  for (std::size_t j = 0; j < n; ++j) {
    if (!in_subset[j]) scripted.push_back({agent_path(best.steps, j)});
  }

  StepContext sc = base_sc;
  sc.roadmaps = &sub_rms;
  sc.targets = &sub_targets;
  sc.scripted = &scripted;

  const int t_old = best.horizon();
  Search sub(sc, sub_starts, eps_dup, t_old, std::move(sub_rng),
             /*jitter_order=*/true);
  std::vector<Configuration> sub_steps;
  const auto oc = sub.run(budget, prm.lns_slice, sub_incumbent, &sub_steps);
  *nodes_out += sub.nodes();
  *depth_out = std::max(*depth_out, sub.max_depth());
  if (oc != Search::Outcome::Improved) return false;

  const int t_sub = static_cast<int>(sub_steps.size()) - 1;
  const int t_new = std::max(t_old, t_sub);
  std::vector<Configuration> merged(t_new + 1, Configuration(n));
  for (int k = 0; k <= t_new; ++k) {
    std::size_t si = 0;
    for (std::size_t j = 0; j < n; ++j) {
      if (in_subset[j]) {
        merged[k][j] = sub_steps[std::min(k, t_sub)][si++];
      } else {
        merged[k][j] = best.steps[std::min(k, t_old)][j];
      }
    }
  }
  trim_trailing_stays(merged);

  Plan candidate;
  candidate.steps = std::move(merged);
  candidate.finalize(q.d_travel, q.targets);
  if (candidate.flowtime >= best.flowtime) return false;
  // The sub-search never sees interactions past its own horizon (fixed agents
  // may still be moving there), so the full checker has the final word.
  if (!check_plan(candidate.steps, q.starts, q.targets, ws, chk).empty()) return false;
  candidate.feasible = true;
  best = std::move(candidate);
  return true;
}

// One smoothing attempt on `agent`: drop interior waypoints of the moving
// prefix with probability p_skip, resample the same number of steps uniformly
// in arc length, and accept only if every step stays short, obstacle-free,
// and separated from all other agents. Returns true when committed.
bool try_smooth(std::vector<Configuration>& steps, std::size_t agent, int settled,
                const StepContext& sc, double p_skip, Rng& rng) {
  const int s = settled;
  if (s < 2) return false;

  std::vector<Vec3> kept;
  kept.reserve(s + 1);
  kept.push_back(steps[0][agent]);
  for (int k = 1; k < s; ++k) {
    if (rng.uniform() >= p_skip) kept.push_back(steps[k][agent]);
  }
  kept.push_back(steps[s][agent]);

  std::vector<double> acc(kept.size(), 0.0);
  for (std::size_t i = 1; i < kept.size(); ++i) {
    acc[i] = acc[i - 1] + kept[i - 1].dist(kept[i]);
  }
  const double total = acc.back();

  std::vector<Vec3> np(s + 1);
  np[0] = kept.front();
  np[s] = kept.back();
  if (total <= 0.0) {
    for (int k = 1; k < s; ++k) np[k] = kept.front();
  } else {
    std::size_t seg = 0;
    for (int k = 1; k < s; ++k) {
      const double tgt = total * k / s;
      while (seg + 1 < acc.size() && acc[seg + 1] < tgt) ++seg;
      const double den = acc[seg + 1] - acc[seg];
      const double u = den > 0.0 ? (tgt - acc[seg]) / den : 0.0;
      np[k] = kept[seg] + (kept[seg + 1] - kept[seg]) * u;
    }
  }

  const double two_r = 2.0 * sc.r_agent;
  const std::size_t n = steps[0].size();
  for (int k = 0; k < s; ++k) {
    if (np[k].dist(np[k + 1]) > sc.d_travel + 1e-9) return false;
    if (!sc.ctx->segment_free(np[k], np[k + 1])) return false;
    for (std::size_t j = 0; j < n; ++j) {
      if (j == agent) continue;
      if (pair_min_distance(np[k], np[k + 1], steps[k][j], steps[k + 1][j]) < two_r) {
        return false;
      }
    }
  }
  for (int k = 1; k < s; ++k) steps[k][agent] = np[k];
  return true;
}

}  // namespace

bool smooth_path(Plan& plan, std::size_t agent, const StepContext& sc,
                 double p_skip, Rng& rng) {
  if (agent >= plan.num_agents() || plan.settled.size() != plan.num_agents()) {
    return false;
  }
  if (!try_smooth(plan.steps, agent, plan.settled[agent], sc, p_skip, rng)) {
    return false;
  }
  trim_trailing_stays(plan.steps);
  plan.finalize(sc.d_travel, *sc.targets);
  return true;
}

// ---------------------------------------------------------------------------
// solve

std::optional<Plan> solve(const ProblemQuery& q, const Workspace& ws,
                          const PlannerParams& prm, SolveStats* stats,
                          const TeamRoadmaps* team) {
  SolveStats local;
  SolveStats& st = stats ? *stats : local;
  st = SolveStats{};
  BudgetState budget{std::chrono::steady_clock::now(), q.deadline, 0};

  const std::size_t n = q.starts.size();
  if (n == 0) throw DomainError("planning query has no agents");
  if (q.targets.size() != n) throw DomainError("planning query targets/starts size mismatch");
  if (q.d_travel <= 0.0) throw DomainError("d_travel must be positive");
  const double eps_dup = prm.eps_dup > 0.0 ? prm.eps_dup : 0.25 * q.d_travel;

  const CheckParams chk{q.r_agent, q.r_target, q.d_travel, q.t,
                        ws.dynamic_margin,     1e-9,        1e-9};

  auto finish = [&](Plan&& p) {
    p.feasible = check_plan(p.steps, q.starts, q.targets, ws, chk).empty();
    st.t_total_ms = budget.elapsed_ms();
    st.expansions = budget.expansions;
    return std::move(p);
  };

  // Trivial instance: every agent already inside its target radius.
  bool already_done = true;
  for (std::size_t i = 0; i < n; ++i) {
    if (q.starts[i].dist(q.targets[i]) > q.r_target) {
      already_done = false;
      break;
    }
  }
  if (already_done) {
    Plan p;
    p.steps = {q.starts};
    p.finalize(q.d_travel, q.targets);
    st.t_first_ms = budget.elapsed_ms();
    st.trace.push_back({st.t_first_ms, 0.0});
    return finish(std::move(p));
  }

  std::optional<TeamRoadmaps> own;
  const TeamRoadmaps* tr = team;
  if (!tr) {
    own.emplace(ws, prm.roadmap, q.r_agent);
    tr = &*own;
  }
  std::vector<Roadmap> rms = tr->build(q.t, q.targets);  // throws TargetBlockedError
  CollisionContext ctx = tr->context(q.t);

  const StepContext sc{&rms, &ctx, &q.targets, q.r_agent, q.r_target, q.d_travel,
                       nullptr};

  Rng search_rng = Rng(q.seed).stream("planner");
  Search primary(sc, q.starts, eps_dup, 0, search_rng.stream("dfs"));

  Plan best;
  bool have = false;
  auto record = [&](std::vector<Configuration>&& steps) {
    Plan p;
    p.steps = std::move(steps);
    p.finalize(q.d_travel, q.targets);
    best = std::move(p);
    have = true;
    st.trace.push_back({budget.elapsed_ms(), best.flowtime});
    if (prm.verbose) {
      std::fprintf(stderr, "[plan] flowtime %.0f after %llu expansions\n",
                   best.flowtime,
                   static_cast<unsigned long long>(budget.expansions));
    }
  };

  if (q.seed_plan) {
    best = *q.seed_plan;
    trim_trailing_stays(best.steps);
    best.finalize(q.d_travel, q.targets);
    have = true;
    st.from_seed = true;
    st.t_first_ms = budget.elapsed_ms();
    st.first_expansions = 0;
    st.trace.push_back({st.t_first_ms, best.flowtime});
  } else {
    std::vector<Configuration> steps;
    const auto oc = primary.run(budget, std::numeric_limits<std::uint64_t>::max(),
                                kInf, &steps);
    if (oc != Search::Outcome::Improved) {
      char buf[160];
      std::snprintf(buf, sizeof buf,
                    "%s: %llu expansions, %llu nodes, max depth %d",
                    oc == Search::Outcome::Exhausted
                        ? "search space exhausted without reaching the goal"
                        : "no solution within deadline",
                    static_cast<unsigned long long>(budget.expansions),
                    static_cast<unsigned long long>(primary.nodes()),
                    primary.max_depth());
      st.failure = buf;
      st.nodes = primary.nodes();
      st.max_depth = primary.max_depth();
      st.expansions = budget.expansions;
      st.t_total_ms = budget.elapsed_ms();
      return std::nullopt;
    }
    record(std::move(steps));
    st.t_first_ms = st.trace.back().first;
    st.first_expansions = budget.expansions;
  }

  std::uint64_t extra_nodes = 0;
  int extra_depth = 0;

  if (prm.refine) {
    Rng mc_master = search_rng.stream("mc");
    Rng lns_pick = search_rng.stream("lns-pick");
    Rng lns_sub_master = search_rng.stream("lns-sub");
    Rng smooth_rng = search_rng.stream("smooth");
    std::uint64_t mc_done = 0, lns_round = 0;

    while (!budget.spent() && best.flowtime > 0.0) {
      // (a) branch-and-bound continuation of the primary search
      if (!primary.exhausted()) {
        std::vector<Configuration> steps;
        if (primary.run(budget, prm.bnb_slice, best.flowtime, &steps) ==
            Search::Outcome::Improved) {
          record(std::move(steps));
        }
      }
      if (budget.spent() || best.flowtime <= 0.0) break;

      // (b) Monte-Carlo restart with reshuffled agent orders and tie-breaks
      if (mc_done < prm.mc_restarts) {
        Search mc(sc, q.starts, eps_dup, 0, mc_master.stream("r", mc_done),
                  /*jitter_order=*/true);
        ++mc_done;
        std::vector<Configuration> steps;
        const auto oc = mc.run(budget, prm.mc_slice, best.flowtime, &steps);
        extra_nodes += mc.nodes();
        extra_depth = std::max(extra_depth, mc.max_depth());
        if (oc == Search::Outcome::Improved) record(std::move(steps));
      }
      if (budget.spent() || best.flowtime <= 0.0) break;

      // (c) large-neighborhood replanning
      for (int r = 0; r < prm.lns_rounds && !budget.spent(); ++r) {
        if (try_lns(best, q, sc, rms, ws, prm, chk, eps_dup, budget, lns_pick,
                    lns_sub_master.stream("r", lns_round), &extra_nodes,
                    &extra_depth)) {
          st.trace.push_back({budget.elapsed_ms(), best.flowtime});
          if (prm.verbose) {
            std::fprintf(stderr, "[plan] lns flowtime %.0f\n", best.flowtime);
          }
        }
        ++lns_round;
      }
      if (budget.spent()) break;

      // (d) smoothing sweep (charged one expansion per attempt so pure
      // expansion budgets drain)
      for (std::size_t i = 0; i < n && !budget.spent(); ++i) {
        ++budget.expansions;
        const double before = best.flowtime;
        if (smooth_path(best, i, sc, prm.p_skip, smooth_rng) &&
            best.flowtime < before) {
          st.trace.push_back({budget.elapsed_ms(), best.flowtime});
        }
      }
    }
  }

  st.nodes = primary.nodes() + extra_nodes;
  st.max_depth = std::max(primary.max_depth(), extra_depth);
  (void)have;
  return finish(std::move(best));
}

}  // namespace lf
