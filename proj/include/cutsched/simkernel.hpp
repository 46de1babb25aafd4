#pragma once

#include "cutsched/fleet.hpp"
#include "cutsched/scheduler.hpp"
#include "cutsched/workload.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace cutsched {

/// Kinds in queue priority order for events sharing a timestamp.
enum class EventKind { Arrival, GroupStart, GroupFinish, WindowDispatch };

struct TraceMember {
  std::string id;
  std::string root_id;
  /// Variants of one fragment share this id.
  std::string fragment;
  Stage stage = Stage::Flat;
  std::optional<int> cut_index;
  int n_cut = 0;
  std::int64_t shots = 0;
  int qubits = 0;
  /// LPST of the member on the device it ran on.
  double lpst = 0.0;
};

enum class TraceKind { Arrival, GroupStart, GroupFinish, Precedence, Drop };

std::string_view to_string(TraceKind kind);

/**
 * One line of the simulation log. Which fields are meaningful depends on
 * `kind`:
 *   Arrival     time, job
 *   GroupStart  time, placement, device, finish, mode_tag, members
 *   GroupFinish time, placement, device
 *   Precedence  time (of the downstream start), placement (downstream),
 *               upstream, delay
 *   Drop        time, job, reason
 */
struct TraceRecord {
  TraceKind kind = TraceKind::Arrival;
  Seconds time = 0.0;
  std::string job;
  std::uint64_t placement = 0;
  std::string device;
  Seconds finish = 0.0;
  ModeTag mode_tag = ModeTag::Plain;
  std::vector<TraceMember> members;
  std::uint64_t upstream = 0;
  Seconds delay = 0.0;
  std::string reason;
};

using Trace = std::vector<TraceRecord>;

struct Metrics {
  double avg_queue_length = 0.0;
  Seconds t_wait = 0.0;
  Seconds t_run = 0.0;
  Seconds t_total = 0.0;
  /// Mean over completed jobs. A cut job scores the sum over its fragments
  /// of the mean variant LPST, i.e. one reconstructed trial.
  double mean_lpst = 0.0;
  std::int64_t workload_changes = 0;
  Seconds makespan = 0.0;

  friend bool operator==(const Metrics&, const Metrics&) = default;
};

struct SimResult {
  Metrics metrics;
  Trace trace;
  /// Executed placements and precedence edges, in start order.
  Schedule executed;
  std::vector<std::string> dropped;
  /// Number of times the scheduler was invoked.
  std::int64_t dispatches = 0;
  /// Planning rounds whose outer-iteration makespans ever increased, or
  /// that needed more than (candidate jobs + 1) outer iterations. Both stay
  /// zero for a correct cutting loop.
  std::int64_t plans_non_monotone = 0;
  std::int64_t plans_over_bound = 0;
};

/**
 * Event-driven run of the queued system. Arrivals and device completions
 * trigger planning over the oldest `config.window` queued jobs plus the
 * unstarted sub-jobs of cut jobs already running; placements that can start
 * immediately are committed and never revoked. Jobs that cannot be placed are
 * dropped and logged.
 */
SimResult simulate(const std::vector<Job>& workload, const Fleet& fleet,
                   const SchedulerConfig& config);

/// All metrics recomputed from a trace alone.
Metrics compute_metrics(const Trace& trace);

/**
 * Integral of the number of arrived, not yet started jobs over time, divided
 * by the horizon (time of the last record). 0 for a zero horizon.
 */
double time_weighted_queue_length(const Trace& trace);

/// JSON lines, one record per line.
std::string serialize_trace(const Trace& trace);
Trace parse_trace(std::string_view text);

} // namespace cutsched
