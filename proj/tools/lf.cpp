// Command-line driver: argument parsing only; all verb logic lives in
// lf::cmd_* so it can be exercised in-process by the test suite.

#include <iostream>
#include <string>

#include "CLI11.hpp"
#include "lf/cli.hpp"

int main(int argc, char** argv) {
  CLI::App app{"multi-robot path planning, tracking, and simulation toolkit"};
  app.set_version_flag("-V,--version", std::string("lf ") + lf::kCliVersion);
  app.require_subcommand(1);

  lf::PlanCmd pc;
  CLI::App* plan = app.add_subcommand(
      "plan", "solve a scenario's first planning query and write plan JSON");
  plan->add_option("-s,--scenario", pc.scenario_path, "scenario JSON file")
      ->required();
  plan->add_option("-o,--out", pc.out_path, "output plan JSON ('-' = stdout)")
      ->required();
  plan->add_option("--trace", pc.trace_path,
                   "write per-improvement cost trace CSV (time_ms,flowtime)");
  plan->add_option("--limit-ms", pc.limit_ms,
                   "wall deadline in ms (ignored when the scenario sets "
                   "an expansion budget)");
  plan->add_option("--seed", pc.seed, "override the scenario seed");
  plan->add_flag("--print-config", pc.print_config,
                 "echo the canonical scenario (defaults filled) and exit");

  lf::SimulateCmd sim;
  CLI::App* simulate = app.add_subcommand(
      "simulate", "run the closed-loop mission and write metrics JSON");
  simulate->add_option("-s,--scenario", sim.scenario_path, "scenario JSON file")
      ->required();
  simulate
      ->add_option("-o,--out", sim.out_path, "output metrics JSON ('-' = stdout)")
      ->required();
  simulate->add_option("--traj", sim.traj_path,
                       "write per-tick trajectory CSV");
  simulate->add_option("--events", sim.events_path,
                       "write replan/goal event CSV");
  simulate->add_option("--seed", sim.seed, "override the scenario seed");
  simulate->add_flag("--print-config", sim.print_config,
                     "echo the canonical scenario (defaults filled) and exit");

  lf::BenchCmd bc;
  CLI::App* bench = app.add_subcommand(
      "bench", "sweep solver scalability over team sizes, write CSV");
  bench->add_option("--agents", bc.agents, "team sizes (comma separated)")
      ->delimiter(',');
  bench->add_option("--instances", bc.instances, "instances per team size");
  bench->add_option("--limit-ms", bc.limit_ms, "wall deadline per solve in ms");
  bench->add_option("--seed", bc.seed, "sweep seed");
  bench->add_option("--budget", bc.budget,
                    "expansion budget per solve (makes rows reproducible)");
  bench->add_option("--r-agent", bc.r_agent, "agent radius in m");
  bench->add_option("-o,--out", bc.out_path, "output CSV ('-' = stdout)")
      ->required();

  lf::CheckCmd cc;
  CLI::App* check = app.add_subcommand(
      "check", "verify a plan file against a scenario, report violations");
  check->add_option("-s,--scenario", cc.scenario_path, "scenario JSON file")
      ->required();
  check->add_option("-p,--plan", cc.plan_path, "plan JSON file")->required();
  check->add_flag("--print-config", cc.print_config,
                  "echo the canonical scenario (defaults filled) and exit");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  if (app.got_subcommand(plan)) {
    pc.has_seed = plan->count("--seed") > 0;
    return lf::cmd_plan(pc, std::cout, std::cerr);
  }
  if (app.got_subcommand(simulate)) {
    sim.has_seed = simulate->count("--seed") > 0;
    return lf::cmd_simulate(sim, std::cout, std::cerr);
  }
  if (app.got_subcommand(bench)) return lf::cmd_bench(bc, std::cout, std::cerr);
  if (app.got_subcommand(check)) return lf::cmd_check(cc, std::cout, std::cerr);
  return 2;
}
