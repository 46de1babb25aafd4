#pragma once

#include "cutsched/scheduler.hpp"
#include "cutsched/workload.hpp"

#include <cstdint>
#include <filesystem>
#include <optional>
#include <ostream>
#include <string>

namespace cutsched {

enum class Command { GenWorkload, Schedule, Simulate, Report };
enum class ModeSelection { LO, LOCC, Both };

std::optional<ModeSelection> parse_mode_selection(std::string_view text);

inline constexpr int kExitOk = 0;
inline constexpr int kExitFailure = 1;
inline constexpr int kExitValidation = 2;
inline constexpr int kExitUnschedulable = 3;

/// Environment variable naming the fleet file used when --fleet is absent.
inline constexpr const char* kFleetEnv = "CUTSCHED_FLEET";

struct RunConfig {
  Command command = Command::Simulate;
  ModeSelection mode = ModeSelection::Both;
  /// Input workload; generated from `workload_class` and `seed` when empty.
  std::filesystem::path workload;
  /// Fleet file; falls back to $CUTSCHED_FLEET, then the built-in fleet.
  std::filesystem::path fleet;
  /// Output directory (created if missing). `report` also reads traces here.
  std::filesystem::path out = ".";
  std::uint64_t seed = 1;
  WorkloadClass workload_class = WorkloadClass::RandomHeterogeneous;
  std::optional<int> count;
  std::optional<double> arrival_rate;
  /// Scheduler settings; mode is filled per run.
  SchedulerConfig scheduler;
};

/**
 * Executes one command. Files are rendered in memory and written atomically
 * after the whole command succeeded. Returns a process exit code:
 * 0 success, 2 invalid input, 3 a job could not be scheduled.
 */
int run(const RunConfig& config, std::ostream& out, std::ostream& err);

} // namespace cutsched
