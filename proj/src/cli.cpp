#include "cutsched/cli.hpp"

#include "cutsched/errors.hpp"
#include "cutsched/fleet.hpp"
#include "cutsched/io.hpp"
#include "cutsched/report.hpp"
#include "cutsched/simkernel.hpp"

#include <cstdlib>
#include <map>
#include <vector>

namespace cutsched {

std::optional<ModeSelection> parse_mode_selection(std::string_view text) {
  if (text == "lo" || text == "LO") {
    return ModeSelection::LO;
  }
  if (text == "locc" || text == "LOCC") {
    return ModeSelection::LOCC;
  }
  if (text == "both") {
    return ModeSelection::Both;
  }
  return std::nullopt;
}

namespace {

using Files = std::map<std::filesystem::path, std::string>;

Fleet resolve_fleet(const RunConfig& config) {
  if (!config.fleet.empty()) {
    return load_fleet(config.fleet);
  }
  if (const char* env = std::getenv(kFleetEnv); env != nullptr && *env != '\0') {
    return load_fleet(env);
  }
  return default_fleet();
}

std::vector<Job> resolve_workload(const RunConfig& config) {
  if (!config.workload.empty()) {
    return load_workload(config.workload);
  }
  WorkloadSpec spec = WorkloadSpec::defaults(config.workload_class);
  spec.seed = config.seed;
  if (config.count) {
    spec.count = *config.count;
  }
  if (config.arrival_rate) {
    spec.arrival_rate = *config.arrival_rate;
  }
  validate(spec);
  return gen_workload(spec);
}

std::vector<CutMode> selected_modes(ModeSelection sel) {
  switch (sel) {
  case ModeSelection::LO:
    return {CutMode::LO};
  case ModeSelection::LOCC:
    return {CutMode::LOCC};
  case ModeSelection::Both:
    return {CutMode::LO, CutMode::LOCC};
  }
  return {};
}

std::string suffix(CutMode mode) { return std::string(to_string(mode)); }

Files gen_workload_cmd(const RunConfig& config, std::ostream& out) {
  const auto jobs = resolve_workload(config);
  out << "generated " << jobs.size() << " jobs\n";
  return {{config.out / "workload.jsonl", serialize_workload(jobs)}};
}

Files schedule_cmd(const RunConfig& config, std::ostream& out) {
  const Fleet fleet = resolve_fleet(config);
  const auto jobs = resolve_workload(config);
  Files files;
  for (CutMode mode : selected_modes(config.mode)) {
    SchedulerConfig sc = config.scheduler;
    sc.mode = mode;
    const PlanResult plan = adaptive_schedule(jobs, fleet, sc);
    files[config.out / ("schedule_" + suffix(mode) + ".json")] = schedule_report_json(plan, mode);
    files[config.out / ("gantt_" + suffix(mode) + ".svg")] =
        gantt_svg(plan.schedule, fleet, suffix(mode) + " schedule");
    out << suffix(mode) << ": " << plan.schedule.placements.size() << " groups, "
        << plan.cuts.size() << " cuts, makespan " << format_double(plan.schedule.makespan)
        << " s\n";
  }
  return files;
}

Files write_metrics(const RunConfig& config, const std::vector<MetricsRow>& rows,
                    std::ostream& out, Files files) {
  const std::string csv = metrics_csv(rows);
  files[config.out / "metrics.csv"] = csv;
  files[config.out / "metrics.json"] = metrics_json(rows);
  out << csv;
  return files;
}

Files simulate_cmd(const RunConfig& config, std::ostream& out) {
  const Fleet fleet = resolve_fleet(config);
  const auto jobs = resolve_workload(config);
  Files files;
  std::vector<MetricsRow> rows;
  for (CutMode mode : selected_modes(config.mode)) {
    SchedulerConfig sc = config.scheduler;
    sc.mode = mode;
    const SimResult sim = simulate(jobs, fleet, sc);
    rows.push_back({suffix(mode), sim.metrics});
    files[config.out / ("trace_" + suffix(mode) + ".jsonl")] = serialize_trace(sim.trace);
    files[config.out / ("gantt_sim_" + suffix(mode) + ".svg")] =
        gantt_svg(sim.executed, fleet, suffix(mode) + " simulation");
    for (const auto& id : sim.dropped) {
      out << "dropped " << id << " (" << suffix(mode) << ")\n";
    }
  }
  return write_metrics(config, rows, out, std::move(files));
}

Files report_cmd(const RunConfig& config, std::ostream& out) {
  const Fleet fleet = resolve_fleet(config);
  Files files;
  std::vector<MetricsRow> rows;
  for (CutMode mode : selected_modes(config.mode)) {
    const auto path = config.out / ("trace_" + suffix(mode) + ".jsonl");
    if (!std::filesystem::exists(path)) {
      if (config.mode == ModeSelection::Both) {
        continue;
      }
      throw ValidationError("missing trace " + path.string());
    }
    const Trace trace = parse_trace(read_file(path));
    rows.push_back({suffix(mode), compute_metrics(trace)});
    files[config.out / ("gantt_sim_" + suffix(mode) + ".svg")] =
        gantt_svg(schedule_from_trace(trace), fleet, suffix(mode) + " simulation");
  }
  if (rows.empty()) {
    throw ValidationError("no trace files in " + config.out.string());
  }
  return write_metrics(config, rows, out, std::move(files));
}

} // namespace

int run(const RunConfig& config, std::ostream& out, std::ostream& err) {
  try {
    validate(config.scheduler);
    Files files;
    switch (config.command) {
    case Command::GenWorkload:
      files = gen_workload_cmd(config, out);
      break;
    case Command::Schedule:
      files = schedule_cmd(config, out);
      break;
    case Command::Simulate:
      files = simulate_cmd(config, out);
      break;
    case Command::Report:
      files = report_cmd(config, out);
      break;
    }
    std::filesystem::create_directories(config.out);
    for (const auto& [path, contents] : files) {
      write_file_atomic(path, contents);
    }
    return kExitOk;
  } catch (const UnschedulableError& e) {
    err << "error: unschedulable job " << e.job_id() << ": " << e.what() << "\n";
    return kExitUnschedulable;
  } catch (const InfeasibleCutError& e) {
    err << "error: " << e.what() << "\n";
    return kExitUnschedulable;
  } catch (const ParseError& e) {
    err << "error: " << e.what() << "\n";
    return kExitValidation;
  } catch (const ValidationError& e) {
    err << "error: " << e.what() << "\n";
    return kExitValidation;
  } catch (const std::filesystem::filesystem_error& e) {
    err << "error: " << e.what() << "\n";
    return kExitFailure;
  } catch (const std::runtime_error& e) {
    // Unreadable input files land here.
    err << "error: " << e.what() << "\n";
    return kExitValidation;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitFailure;
  }
}

} // namespace cutsched
