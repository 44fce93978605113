#include "lf/cli.hpp"

#include <cstdio>
#include <fstream>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "lf/errors.hpp"
#include "lf/planner.hpp"
#include "lf/runtime.hpp"
#include "lf/scenario.hpp"
#include "lf/validate.hpp"

namespace lf {
namespace {

void append_num(std::string& s, double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.9g", v);
  s += buf;
}

// Writes an artifact to `path`, or to `out` when path is "-".
int write_artifact(const std::string& path, const std::string& content,
                   std::ostream& out, std::ostream& err) {
  if (path == "-") {
    out << content;
    return 0;
  }
  std::ofstream f(path, std::ios::binary);
  if (!f) {
    err << "error: cannot open '" << path << "' for writing\n";
    return 2;
  }
  f << content;
  f.close();
  if (!f) {
    err << "error: failed while writing '" << path << "'\n";
    return 2;
  }
  return 0;
}

Scenario load_with_seed(const std::string& path, bool has_seed,
                        std::uint64_t seed) {
  Scenario sc = load_scenario(path);
  if (has_seed) sc.seed = seed;
  return sc;
}

}  // namespace

int cmd_plan(const PlanCmd& c, std::ostream& out, std::ostream& err) {
  try {
    Scenario sc = load_with_seed(c.scenario_path, c.has_seed, c.seed);
    if (c.print_config) {
      out << dump_scenario(sc);
      return 0;
    }

    const MissionEndpoints ep = initial_endpoints(sc);

    ProblemQuery q;
    q.starts = ep.starts;
    q.targets = ep.goals;
    q.r_agent = sc.r_agent;
    q.r_target = sc.planner.r_target;
    q.d_travel = sc.d_travel();
    q.deadline = sc.runtime.budget_expansions > 0
                     ? Deadline::budget(sc.runtime.budget_expansions)
                     : Deadline::wall(c.limit_ms);
    q.seed = Rng(sc.seed).stream("plan", 0).seed();

    PlannerParams prm;
    prm.eps_dup = sc.planner.eps_dup;
    prm.p_skip = sc.planner.p_skip;
    prm.lns_k = sc.planner.lns_k;
    prm.roadmap = sc.roadmap;

    SolveStats st;
    std::optional<Plan> plan = solve(q, sc.workspace, prm, &st);

    if (!c.trace_path.empty()) {
      std::string csv = "time_ms,flowtime\n";
      for (const auto& [t_ms, flow] : st.trace) {
        append_num(csv, t_ms);
        csv += ',';
        append_num(csv, flow);
        csv += '\n';
      }
      int rc = write_artifact(c.trace_path, csv, out, err);
      if (rc != 0) return rc;
    }

    if (!plan) {
      err << "error: no feasible plan within the deadline";
      if (!st.failure.empty()) err << " (" << st.failure << ")";
      err << '\n';
      return 1;
    }
    return write_artifact(c.out_path, plan_to_json(*plan), out, err);
  } catch (const UsageError& e) {
    err << "error: " << e.what() << '\n';
    return 2;
  } catch (const DomainError& e) {
    err << "error: " << e.what() << '\n';
    return 1;
  }
}

int cmd_simulate(const SimulateCmd& c, std::ostream& out, std::ostream& err) {
  try {
    Scenario sc = load_with_seed(c.scenario_path, c.has_seed, c.seed);
    if (c.print_config) {
      out << dump_scenario(sc);
      return 0;
    }

    std::ofstream traj_f, events_f;
    if (!c.traj_path.empty()) {
      traj_f.open(c.traj_path, std::ios::binary);
      if (!traj_f) {
        err << "error: cannot open '" << c.traj_path << "' for writing\n";
        return 2;
      }
    }
    if (!c.events_path.empty()) {
      events_f.open(c.events_path, std::ios::binary);
      if (!events_f) {
        err << "error: cannot open '" << c.events_path << "' for writing\n";
        return 2;
      }
    }

    MetricsLog m = run_mission(sc, traj_f.is_open() ? &traj_f : nullptr,
                               events_f.is_open() ? &events_f : nullptr);

    traj_f.close();
    events_f.close();
    if ((!c.traj_path.empty() && !traj_f) ||
        (!c.events_path.empty() && !events_f)) {
      err << "error: failed while writing trajectory/event CSV\n";
      return 2;
    }

    int rc = write_artifact(c.out_path, metrics_to_json(m), out, err);
    if (rc != 0) return rc;
    if (!m.completed) {
      err << "error: mission did not complete within " << m.duration_s
          << " s\n";
      return 1;
    }
    return 0;
  } catch (const UsageError& e) {
    err << "error: " << e.what() << '\n';
    return 2;
  } catch (const DomainError& e) {
    err << "error: " << e.what() << '\n';
    return 1;
  }
}

int cmd_bench(const BenchCmd& c, std::ostream& out, std::ostream& err) {
  if (c.agents.empty() || c.instances < 1) {
    err << "error: bench needs at least one team size and one instance\n";
    return 2;
  }
  for (std::size_t n : c.agents) {
    if (n < 1) {
      err << "error: team sizes must be at least 1\n";
      return 2;
    }
  }
  if (c.limit_ms <= 0.0 && c.budget == 0) {
    err << "error: either --limit-ms or --budget must be positive\n";
    return 2;
  }
  try {
    std::vector<BenchRow> rows = bench_scalability(
        c.agents, c.instances, c.limit_ms, c.seed, c.r_agent, c.budget);
    return write_artifact(c.out_path, bench_to_csv(rows), out, err);
  } catch (const DomainError& e) {
    err << "error: " << e.what() << '\n';
    return 1;
  }
}

int cmd_check(const CheckCmd& c, std::ostream& out, std::ostream& err) {
  Scenario sc;
  Plan plan;
  try {
    sc = load_scenario(c.scenario_path);
    if (c.print_config) {
      out << dump_scenario(sc);
      return 0;
    }
    plan = load_plan(c.plan_path);
  } catch (const UsageError& e) {
    err << "error: " << e.what() << '\n';
    return 2;
  }

  try {
    const MissionEndpoints ep = initial_endpoints(sc);

    // An empty step list is the degenerate "already there" plan: it stands
    // for the single configuration the query starts from.
    std::vector<Configuration> steps =
        plan.steps.empty() ? std::vector<Configuration>{ep.starts} : plan.steps;

    if (steps[0].size() != ep.starts.size()) {
      out << "agent-count mismatch: plan has " << steps[0].size()
          << " agents, scenario has " << ep.starts.size() << "\n";
      out << "FAIL: 1 violation\n";
      return 1;
    }

    CheckParams prm;
    prm.r_agent = sc.r_agent;
    prm.r_target = sc.planner.r_target;
    prm.d_travel = sc.d_travel();
    std::vector<Violation> viols =
        check_plan(steps, ep.starts, ep.goals, sc.workspace, prm);

    if (viols.empty()) {
      out << "ok: " << steps.size() << " step(s), " << ep.starts.size()
          << " agent(s), zero violations\n";
      return 0;
    }
    for (const Violation& v : viols) out << v.describe() << '\n';
    out << "FAIL: " << viols.size() << " violation(s)\n";
    return 1;
  } catch (const DomainError& e) {
    err << "error: " << e.what() << '\n';
    return 1;
  }
}

}  // namespace lf
