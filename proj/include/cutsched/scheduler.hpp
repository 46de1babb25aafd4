#pragma once

#include "cutsched/cutplan.hpp"
#include "cutsched/fleet.hpp"
#include "cutsched/grouping.hpp"
#include "cutsched/workload.hpp"

#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

namespace cutsched {

enum class ModeTag { Plain, UpstreamGroup, DownstreamGroup };

std::string_view to_string(ModeTag tag);

struct Placement {
  std::uint64_t id = 0;
  Group group;
  std::string device;
  Seconds start = 0.0;
  Seconds finish = 0.0;
  ModeTag mode_tag = ModeTag::Plain;
};

/// downstream may not start before upstream.finish + delay.
struct PrecedenceEdge {
  std::uint64_t upstream = 0;
  std::uint64_t downstream = 0;
  Seconds delay = 0.0;
};

struct Schedule {
  std::vector<Placement> placements;
  std::vector<PrecedenceEdge> precedence;
  Seconds makespan = 0.0;

  [[nodiscard]] const Placement* find(std::uint64_t id) const;
};

struct SchedulerConfig {
  CutMode mode = CutMode::LO;
  CutBudget budget;
  GroupingParams grouping;
  /// Queued jobs considered per scheduler invocation.
  int window = 50;
  /// Weight of mean member LPST when choosing a device.
  double lambda_fidelity = 0.1;
  /// Classical bits sent per cut per shot.
  double beta_comm = kDefaultBetaComm;
};

void validate(const SchedulerConfig& config);

/// An upstream group that already started in an earlier planning round.
struct CommittedUpstream {
  std::uint64_t placement_id = 0;
  std::string device;
  Seconds finish = 0.0;
  std::string parent_id;
  int cut_index = 0;
};

/// Memoized cut decisions, keyed by job id and mode.
using CutCache = std::map<std::string, std::optional<CutPlan>>;

/**
 * Planning state carried in from a running system. The defaults describe an
 * idle fleet at time zero.
 */
struct PlanningContext {
  Seconds now = 0.0;
  /// Busy-until time per device name; absent devices are free at `now`.
  std::map<std::string, Seconds> device_ready;
  std::vector<CommittedUpstream> committed_upstream;
  /// Parents with sub-jobs already running; their remaining work goes first.
  std::set<std::string> in_flight;
  std::uint64_t first_placement_id = 0;
  CutCache* cut_cache = nullptr;
};

/**
 * List scheduling of groups. Jobs are taken in descending runtime order (in-
 * flight parents first); the head job picks the device minimizing
 *   finish - lambda_fidelity * mean member LPST
 * and a group is packed around it for that device's capacity. Downstream
 * groups wait for every upstream sibling placement plus the classical delay.
 *
 * Throws UnschedulableError naming a job wider than every device.
 */
Schedule generate_initial_schedule(const std::vector<Job>& jobs, const Fleet& fleet,
                                   const SchedulerConfig& config,
                                   const PlanningContext& ctx = {});

/**
 * Free slots of width q_max_sub left beside the scheduled groups:
 *   sum over placements of floor((Q_m - demand) / q_max_sub)
 * With `count_idle_devices`, each device without any placement adds
 * floor(Q_m / q_max_sub).
 */
std::int64_t count_slots(const Schedule& schedule, const Fleet& fleet, int q_max_sub,
                         bool count_idle_devices = false);

Seconds makespan(const Schedule& schedule);

struct PlanResult {
  Schedule schedule;
  /// Every cut applied, mandatory ones first.
  std::vector<CutPlan> cuts;
  /// Ids of jobs cut by the improvement loop (not mandatory).
  std::vector<std::string> adaptive_cuts;
  /// Makespan of the schedule built at the start of each outer iteration.
  std::vector<Seconds> iteration_makespans;
  int outer_iterations = 0;
};

/**
 * Adaptive cutting loop. Jobs wider than every device are cut first
 * regardless of budget or slots. Then, repeatedly: build a schedule, walk its
 * jobs in order and try cutting each eligible one; a cut is kept when its
 * sub-jobs fit the free slots and the rebuilt makespan does not grow.
 */
PlanResult adaptive_schedule(const std::vector<Job>& jobs, const Fleet& fleet,
                             const SchedulerConfig& config,
                             const PlanningContext& ctx = {});

/// True if `job` may be cut by the improvement loop.
bool cut_eligible(const Job& job, const Fleet& fleet, const CutBudget& budget);

} // namespace cutsched
