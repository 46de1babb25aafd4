#include "cutsched/cli.hpp"
#include "cutsched/oracles.hpp"

#include <CLI11.hpp>

#include <iostream>

namespace {

using namespace cutsched;

struct Flags {
  std::string mode = "both";
  std::string cls = "random";
  std::optional<int> count;
  std::optional<double> rate;
};

void add_common(CLI::App& cmd, RunConfig& cfg, Flags& flags) {
  cmd.add_option("--mode", flags.mode, "lo, locc or both")
      ->check(CLI::IsMember({"lo", "locc", "both"}, CLI::ignore_case));
  cmd.add_option("--workload", cfg.workload, "workload file (JSON lines)");
  cmd.add_option("--fleet", cfg.fleet, "fleet file; default from $CUTSCHED_FLEET");
  cmd.add_option("--out", cfg.out, "output directory");
  cmd.add_option("--seed", cfg.seed, "workload seed");
  cmd.add_option("--class", flags.cls, "workload class when generating")
      ->check(CLI::IsMember({"small", "large", "random"}));
  cmd.add_option("--count", flags.count, "number of generated jobs")->check(CLI::NonNegativeNumber);
  cmd.add_option("--rate", flags.rate, "arrival rate of generated jobs (1/s)")
      ->check(CLI::PositiveNumber);
  cmd.add_option("--window", cfg.scheduler.window, "queued jobs per scheduling round")
      ->check(CLI::PositiveNumber);
  cmd.add_option("--theta", cfg.scheduler.budget.adaptive_threshold,
                 "adaptive cut threshold as a fraction of the largest device")
      ->check(CLI::Range(0.0, 1.0));
  cmd.add_option("--budget", cfg.scheduler.budget.max_overhead, "sampling overhead budget")
      ->check(CLI::PositiveNumber);
  cmd.add_option("--lambda", cfg.scheduler.grouping.lambda, "causal span weight in group cost")
      ->check(CLI::NonNegativeNumber);
  cmd.add_option("--lambda-fidelity", cfg.scheduler.lambda_fidelity,
                 "LPST weight in device choice")
      ->check(CLI::NonNegativeNumber);
  cmd.add_option("--cmax", cfg.scheduler.grouping.c_max, "jobs per group")
      ->check(CLI::PositiveNumber);
}

} // namespace

int main(int argc, char** argv) {
  CLI::App app{"Schedules circuit-cutting workloads on a fleet of quantum processors."};
  app.require_subcommand(0, 1);
  bool self_check = false;
  app.add_flag("--self-check", self_check, "run the exhaustive-oracle suites and exit");

  RunConfig cfg;
  Flags flags;
  struct Sub {
    const char* name;
    const char* help;
    Command command;
  };
  const Sub subs[] = {
      {"gen-workload", "write a synthetic workload", Command::GenWorkload},
      {"schedule", "plan a workload offline and emit reports and Gantt charts",
       Command::Schedule},
      {"simulate", "run the discrete-event simulation and emit metrics", Command::Simulate},
      {"report", "recompute metrics and charts from saved traces", Command::Report},
  };
  for (const auto& s : subs) {
    auto* cmd = app.add_subcommand(s.name, s.help);
    add_common(*cmd, cfg, flags);
    cmd->callback([&cfg, command = s.command] { cfg.command = command; });
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitValidation;
  }

  if (self_check) {
    return oracle::run_self_check(std::cout) ? kExitOk : kExitFailure;
  }
  if (app.get_subcommands().empty()) {
    std::cerr << app.help();
    return kExitValidation;
  }
  cfg.mode = *parse_mode_selection(flags.mode);
  cfg.workload_class = *parse_workload_class(flags.cls);
  cfg.count = flags.count;
  cfg.arrival_rate = flags.rate;
  return run(cfg, std::cout, std::cerr);
}
