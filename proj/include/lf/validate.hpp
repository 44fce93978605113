#pragma once

#include <string>
#include <vector>

#include "lf/plan.hpp"
#include "lf/workspace.hpp"

namespace lf {

// One broken feasibility condition found by check_plan.
struct Violation {
  enum class Condition {
    Start,       // steps[0][i] differs from the queried start
    Goal,        // final position farther than r_target from the target
    StepLength,  // per-step travel exceeds d_travel
    Obstacle,    // swept segment hits an obstacle or leaves the bounds
    Separation,  // two agents approach closer than 2*r_agent
  };

  Condition condition;
  int step = -1;   // violating step index (segment step -> step+1 for motion checks)
  int agent = -1;
  int agent2 = -1;  // second agent for Separation, else -1
  double margin = 0.0;  // positive amount by which the condition is broken

  std::string describe() const;
};

struct CheckParams {
  double r_agent = 0.0;
  double r_target = 0.0;
  double d_travel = 0.0;
  double t = 0.0;            // world snapshot time the plan was made for
  double dyn_inflate = 0.0;  // extra margin applied to scheduled obstacles
  double start_tol = 1e-9;   // tolerance on the start-position match
  double step_slack = 1e-9;  // absolute slack on the step-length check only
};

// Independent feasibility checker. Walks the whole plan and reports every
// violated condition (empty result == feasible). Uses only workspace
// primitives; shares no code with the search.
std::vector<Violation> check_plan(const std::vector<Configuration>& steps,
                                  const Configuration& starts,
                                  const std::vector<Vec3>& targets,
                                  const Workspace& ws, const CheckParams& prm);

}  // namespace lf
