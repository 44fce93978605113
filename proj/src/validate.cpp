#include "lf/validate.hpp"

#include <cmath>
#include <cstdio>
#include <limits>

namespace lf {

std::string Violation::describe() const {
  char buf[160];
  switch (condition) {
    case Condition::Start:
      std::snprintf(buf, sizeof buf, "start: agent %d is %.6g from its queried start",
                    agent, margin);
      break;
    case Condition::Goal:
      std::snprintf(buf, sizeof buf,
                    "goal: agent %d ends %.6g beyond the target radius", agent, margin);
      break;
    case Condition::StepLength:
      std::snprintf(buf, sizeof buf,
                    "step-length: agent %d moves %.6g too far at step %d->%d", agent,
                    margin, step, step + 1);
      break;
    case Condition::Obstacle:
      std::snprintf(buf, sizeof buf,
                    "obstacle: agent %d penetrates %.6g at step %d->%d", agent, margin,
                    step, step + 1);
      break;
    case Condition::Separation:
      std::snprintf(buf, sizeof buf,
                    "separation: agents %d and %d come %.6g too close at step %d->%d",
                    agent, agent2, margin, step, step + 1);
      break;
  }
  return buf;
}

namespace {

// Depth of penetration of the swept sphere along [a,b] into any obstacle or
// past the workspace boundary, at snapshot time t. 0 when clear.
double segment_penetration(const Workspace& ws, const Vec3& a, const Vec3& b,
                           double r, double t, double dyn_inflate) {
  double worst = 0.0;
  if (!ws.inside_shrunk(a, r) || !ws.inside_shrunk(b, r)) {
    double over = 0.0;
    for (const Vec3& p : {a, b}) {
      over = std::max(over, (ws.bounds_min.x + r) - p.x);
      over = std::max(over, p.x - (ws.bounds_max.x - r));
      over = std::max(over, (ws.bounds_min.y + r) - p.y);
      over = std::max(over, p.y - (ws.bounds_max.y - r));
      double zr = ws.planar ? 0.0 : r;
      over = std::max(over, (ws.bounds_min.z + zr) - p.z);
      over = std::max(over, p.z - (ws.bounds_max.z - zr));
    }
    worst = std::max(worst, over);
  }
  for (const Obstacle& ob : ws.obstacles) {
    double need = r + (ob.dynamic() ? dyn_inflate : 0.0);
    if (!ob.segment_clear(a, b, need, t)) {
      worst = std::max(worst, need - ob.segment_distance(a, b, t));
    }
  }
  return worst;
}

}  // namespace

std::vector<Violation> check_plan(const std::vector<Configuration>& steps,
                                  const Configuration& starts,
                                  const std::vector<Vec3>& targets,
                                  const Workspace& ws, const CheckParams& prm) {
  std::vector<Violation> out;
  const std::size_t n = starts.size();
  if (steps.empty() || steps[0].size() != n || targets.size() != n) {
    out.push_back({Violation::Condition::Start, -1, -1, -1,
                   std::numeric_limits<double>::infinity()});
    return out;
  }
  for (const Configuration& q : steps) {
    if (q.size() != n) {
      out.push_back({Violation::Condition::Start, -1, -1, -1,
                     std::numeric_limits<double>::infinity()});
      return out;
    }
  }

  const int T = static_cast<int>(steps.size()) - 1;

  for (std::size_t i = 0; i < n; ++i) {
    double d0 = steps[0][i].dist(starts[i]);
    if (d0 > prm.start_tol) {
      out.push_back({Violation::Condition::Start, 0, static_cast<int>(i), -1, d0});
    }
    double dg = steps[T][i].dist(targets[i]);
    if (dg > prm.r_target) {
      out.push_back(
          {Violation::Condition::Goal, T, static_cast<int>(i), -1, dg - prm.r_target});
    }
  }

  for (int k = 0; k < T; ++k) {
    const Configuration& a = steps[k];
    const Configuration& b = steps[k + 1];
    for (std::size_t i = 0; i < n; ++i) {
      double len = a[i].dist(b[i]);
      if (len > prm.d_travel + prm.step_slack) {
        out.push_back({Violation::Condition::StepLength, k, static_cast<int>(i), -1,
                       len - prm.d_travel});
      }
      double pen = segment_penetration(ws, a[i], b[i], prm.r_agent, prm.t, prm.dyn_inflate);
      if (pen > 0.0) {
        out.push_back(
            {Violation::Condition::Obstacle, k, static_cast<int>(i), -1, pen});
      }
      for (std::size_t j = i + 1; j < n; ++j) {
        double sep = pair_min_distance(a[i], b[i], a[j], b[j]);
        if (sep < 2.0 * prm.r_agent) {
          out.push_back({Violation::Condition::Separation, k, static_cast<int>(i),
                         static_cast<int>(j), 2.0 * prm.r_agent - sep});
        }
      }
    }
  }
  return out;
}

}  // namespace lf
