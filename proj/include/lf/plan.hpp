#pragma once

#include <cstddef>
#include <vector>

#include "lf/geom.hpp"

namespace lf {

// Joint position of all agents at one discrete step.
using Configuration = std::vector<Vec3>;

// Index of the last step at which each agent moved.  An agent that never
// moves settles at step 0.  Positions are compared bitwise: the stay
// primitive copies the previous position verbatim, so an agent "moved" at
// step k exactly when steps[k][i] differs from steps[k-1][i].
std::vector<int> settled_steps(const std::vector<Configuration>& steps);

// Sum of settle times over all agents.
double flowtime_of(const std::vector<int>& settled);

// Flowtime converted to distance and divided by the summed straight-line
// start-to-target distances.  Returns 0 when the denominator is ~0 (every
// agent already starts at its target).
double normalized_cost_of(const std::vector<int>& settled, double d_travel,
                          const Configuration& starts,
                          const std::vector<Vec3>& targets);

// Drops trailing steps in which no agent moves (keeps at least the start).
void trim_trailing_stays(std::vector<Configuration>& steps);

// Path of one agent across all steps.
std::vector<Vec3> agent_path(const std::vector<Configuration>& steps,
                             std::size_t agent);

struct Plan {
  // steps[0] is the start configuration; steps[k][i] is agent i after k moves.
  std::vector<Configuration> steps;
  std::vector<int> settled;  // per-agent settle step
  double flowtime = 0.0;
  double normalized_cost = 0.0;
  bool feasible = false;  // set from the independent plan checker

  std::size_t num_agents() const { return steps.empty() ? 0 : steps[0].size(); }
  int horizon() const { return steps.empty() ? 0 : static_cast<int>(steps.size()) - 1; }

  // Recomputes settled/flowtime/normalized_cost from steps.
  void finalize(double d_travel, const std::vector<Vec3>& targets);
};

}  // namespace lf
