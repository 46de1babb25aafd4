#pragma once

#include "cutsched/fleet.hpp"
#include "cutsched/scheduler.hpp"
#include "cutsched/simkernel.hpp"

#include <string>
#include <string_view>
#include <vector>

namespace cutsched {

/// Schedule report: placements, precedence edges, applied cuts.
std::string schedule_report_json(const PlanResult& plan, CutMode mode);

struct MetricsRow {
  std::string mode;
  Metrics metrics;
};

/// Header: Mode,Length,T_wait,T_run,T_total,LPST,WorkloadChanges
std::string metrics_csv(const std::vector<MetricsRow>& rows);
std::vector<MetricsRow> parse_metrics_csv(std::string_view text);

/// Same rows with every Metrics field, makespan included.
std::string metrics_json(const std::vector<MetricsRow>& rows);

/**
 * SVG Gantt chart: one lane per fleet device, one `rect.bar` per placement
 * spanning its start and finish. Member stripes are colored by root job id,
 * so a job keeps its color across charts.
 */
std::string gantt_svg(const Schedule& schedule, const Fleet& fleet, std::string_view title);

/// Rebuilds placements (start, finish, device, members) from a trace.
Schedule schedule_from_trace(const Trace& trace);

} // namespace cutsched
