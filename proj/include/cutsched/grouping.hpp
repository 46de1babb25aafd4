#pragma once

#include "cutsched/workload.hpp"

#include <map>
#include <set>
#include <span>
#include <string>
#include <vector>

namespace cutsched {

/// Jobs co-executed on one device at the same time.
struct Group {
  std::vector<Job> members;
  int qubit_demand = 0;
  /// Longest member runtime on the assigned device; 0 until assigned.
  Seconds runtime_bound = 0.0;

  /// parent id -> stages of that parent present in the group.
  [[nodiscard]] std::map<std::string, std::set<Stage>> stage_signature() const;
};

struct GroupingParams {
  int q_dev = 127;
  int c_max = 8;
  /// Weight of the causal-span term of the group cost.
  double lambda = 1.0;
};

void validate(const GroupingParams& params);

/// 0 for flat and upstream jobs, 1 for downstream jobs.
int causal_index(const Job& job);

/// Same parent, different stage: the pair may never share a group.
bool conflicts(const Job& a, const Job& b);

/**
 * Runtime imbalance plus weighted causal span of a candidate group, or
 * +infinity when the group breaks capacity, cardinality or the
 * upstream/downstream exclusion. `runtimes` is aligned with `group`.
 * Throws std::domain_error on a non-positive runtime.
 */
double group_cost(std::span<const Job> group, std::span<const Seconds> runtimes,
                  const GroupingParams& params);

/// Incremental admission test shared by the batch and per-device packers.
class GroupBuilder {
public:
  GroupBuilder(int capacity, int c_max) : capacity_(capacity), c_max_(c_max) {}

  /// Admits `job` unless it breaks cardinality, capacity or a causal conflict.
  bool try_add(const Job& job, std::size_t index);

  [[nodiscard]] const std::vector<std::size_t>& indices() const { return indices_; }
  [[nodiscard]] int qubits_used() const { return used_; }
  [[nodiscard]] bool full() const {
    return static_cast<int>(indices_.size()) >= c_max_ || used_ >= capacity_;
  }

private:
  int capacity_;
  int c_max_;
  int used_ = 0;
  std::vector<std::size_t> indices_;
  std::vector<const Job*> members_;
};

/// Indices of `jobs` in descending runtime, ties by ascending job id.
std::vector<std::size_t> runtime_order(std::span<const Job> jobs,
                                       std::span<const Seconds> runtimes);

/**
 * Greedy packing: open a group, scan the remaining jobs in runtime order and
 * admit each that fits, repeat until every job is placed. Groups come back in
 * creation order with members in admission order.
 * Throws CapacityError naming the first job wider than q_dev.
 */
std::vector<std::vector<std::size_t>> partition_indices(std::span<const Job> jobs,
                                                        std::span<const Seconds> runtimes,
                                                        const GroupingParams& params);

std::vector<Group> partition_groups(std::span<const Job> jobs,
                                    std::span<const Seconds> runtimes,
                                    const GroupingParams& params);

} // namespace cutsched
