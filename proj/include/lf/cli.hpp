#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

namespace lf {

// In-process implementations of the command-line verbs, wrapped by the thin
// argv parser in tools/lf.cpp so every behavior is unit-testable. Each
// returns the process exit code:
//   0  success
//   1  domain failure (no feasible plan, checker violations, aborted or
//      unfinished mission)
//   2  usage error (unreadable files, schema violations, bad flags)
// Human-readable diagnostics go to `err`; artifacts go to the file named by
// the command, or to `out` when the path is "-".

inline constexpr const char* kCliVersion = "0.1.0";

// Solve the scenario's first planning query once and write the plan JSON.
struct PlanCmd {
  std::string scenario_path;
  std::string out_path;      // plan JSON; "-" writes to `out`
  std::string trace_path;    // optional per-improvement CSV (time_ms,flowtime)
  double limit_ms = 1000.0;  // wall deadline unless the scenario pins a budget
  std::uint64_t seed = 0;    // replaces the scenario seed when has_seed
  bool has_seed = false;
  bool print_config = false;  // echo the canonical scenario JSON and stop
};
int cmd_plan(const PlanCmd& c, std::ostream& out, std::ostream& err);

// Run the closed-loop mission and write the metrics JSON.
struct SimulateCmd {
  std::string scenario_path;
  std::string out_path;     // metrics JSON; "-" writes to `out`
  std::string traj_path;    // optional per-tick trajectory CSV
  std::string events_path;  // optional replan/goal event CSV
  std::uint64_t seed = 0;
  bool has_seed = false;
  bool print_config = false;
};
int cmd_simulate(const SimulateCmd& c, std::ostream& out, std::ostream& err);

// Sweep solver scalability over team sizes and write one CSV row per solve.
struct BenchCmd {
  std::vector<std::size_t> agents = {2, 4, 8, 16, 32};
  int instances = 100;
  double limit_ms = 1000.0;
  std::uint64_t seed = 1;
  std::uint64_t budget = 0;  // expansion budget; 0 keeps the wall deadline
  double r_agent = 0.2;
  std::string out_path;  // CSV; "-" writes to `out`
};
int cmd_bench(const BenchCmd& c, std::ostream& out, std::ostream& err);

// Verify a plan file against a scenario with the independent feasibility
// checker; prints one line per violation with the broken margin.
struct CheckCmd {
  std::string scenario_path;
  std::string plan_path;
  bool print_config = false;
};
int cmd_check(const CheckCmd& c, std::ostream& out, std::ostream& err);

}  // namespace lf
