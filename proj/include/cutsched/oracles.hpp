#pragma once

// Exhaustive reference solvers for small instances. Test and self-check use
// only; none of this code calls into the modules it is compared against.

#include "cutsched/fleet.hpp"
#include "cutsched/grouping.hpp"
#include "cutsched/workload.hpp"

#include <cstdint>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

namespace cutsched::oracle {

struct OracleLimit {
  int max_qubits = 12;
  int max_jobs = 8;
  int max_groups_x_devices = 12;
};

/**
 * Minimum crossing weight over every assignment of qubits to two non-empty
 * sides of at most `q_target` qubits each. nullopt if no assignment fits.
 * Throws OracleLimitError above `limit.max_qubits`.
 */
std::optional<int> brute_min_cut(const Circuit& circuit, int q_target,
                                 const OracleLimit& limit = {});

struct PartitionOptimum {
  /// Minimum summed group cost over feasible set partitions.
  double cost = 0.0;
  /// One partition attaining `cost`, as index lists.
  std::vector<std::vector<std::size_t>> groups;
  /// Fewest groups of any feasible partition (not necessarily the cheapest).
  int min_groups = 0;
};

/// Independent group cost: +infinity for infeasible groups.
double reference_group_cost(const std::vector<const Job*>& group,
                            const std::vector<Seconds>& runtimes, const GroupingParams& params);

/// Enumerates all set partitions of `jobs`. nullopt if none is feasible.
std::optional<PartitionOptimum> brute_partition(const std::vector<Job>& jobs,
                                                const std::vector<Seconds>& runtimes,
                                                const GroupingParams& params,
                                                const OracleLimit& limit = {});

struct AssignEdge {
  std::size_t from = 0;
  std::size_t to = 0;
  Seconds delay = 0.0;
};

/// Groups as opaque tasks: runtime per device (+infinity = does not fit).
struct AssignInstance {
  std::vector<std::vector<Seconds>> runtime;
  std::vector<Seconds> release;
  std::vector<AssignEdge> edges;
};

/**
 * Minimum makespan over every device assignment and every task order that
 * respects precedence, each task starting as early as its device, release
 * time and predecessors allow. +infinity when some task fits no device.
 */
Seconds brute_assign(const AssignInstance& instance, const OracleLimit& limit = {});

/// Convenience form computing runtimes from job groups on `fleet`.
Seconds brute_assign(const std::vector<std::vector<Job>>& groups, const Fleet& fleet,
                     const std::vector<AssignEdge>& edges, const OracleLimit& limit = {});

struct SuiteResult {
  std::string name;
  int instances = 0;
  int failures = 0;
  std::string first_failure;

  [[nodiscard]] bool passed() const { return failures == 0; }
};

/// find_bipartition against brute_min_cut on random circuits of <= 12 qubits.
SuiteResult check_min_cut(int instances, std::uint64_t seed);

/// Greedy grouping against brute_partition: feasibility and group count.
SuiteResult check_partition(int instances, std::uint64_t seed);

/// Initial schedule (lambda_fidelity = 0) within `ratio` of brute_assign.
SuiteResult check_assignment(int instances, std::uint64_t seed, double ratio = 1.5);

/// Runs the three suites above and prints one line per suite.
bool run_self_check(std::ostream& out, std::uint64_t seed = 1);

} // namespace cutsched::oracle
