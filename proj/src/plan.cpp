#include "lf/plan.hpp"

#include <cmath>

namespace lf {

std::vector<int> settled_steps(const std::vector<Configuration>& steps) {
  if (steps.empty()) return {};
  const std::size_t n = steps[0].size();
  std::vector<int> settled(n, 0);
  for (std::size_t k = 1; k < steps.size(); ++k) {
    for (std::size_t i = 0; i < n; ++i) {
      if (!(steps[k][i] == steps[k - 1][i])) settled[i] = static_cast<int>(k);
    }
  }
  return settled;
}

double flowtime_of(const std::vector<int>& settled) {
  double sum = 0.0;
  for (int s : settled) sum += s;
  return sum;
}

double normalized_cost_of(const std::vector<int>& settled, double d_travel,
                          const Configuration& starts,
                          const std::vector<Vec3>& targets) {
  double denom = 0.0;
  for (std::size_t i = 0; i < starts.size(); ++i) denom += starts[i].dist(targets[i]);
  if (denom < 1e-12) return 0.0;
  return flowtime_of(settled) * d_travel / denom;
}

void trim_trailing_stays(std::vector<Configuration>& steps) {
  while (steps.size() > 1) {
    const Configuration& last = steps.back();
    const Configuration& prev = steps[steps.size() - 2];
    bool any_move = false;
    for (std::size_t i = 0; i < last.size(); ++i) {
      if (!(last[i] == prev[i])) {
        any_move = true;
        break;
      }
    }
    if (!any_move) {
      steps.pop_back();
    } else {
      break;
    }
  }
}

std::vector<Vec3> agent_path(const std::vector<Configuration>& steps,
                             std::size_t agent) {
  std::vector<Vec3> path;
  path.reserve(steps.size());
  for (const Configuration& q : steps) path.push_back(q[agent]);
  return path;
}

void Plan::finalize(double d_travel, const std::vector<Vec3>& targets) {
  settled = settled_steps(steps);
  flowtime = flowtime_of(settled);
  normalized_cost = steps.empty()
                        ? 0.0
                        : normalized_cost_of(settled, d_travel, steps[0], targets);
}

}  // namespace lf
