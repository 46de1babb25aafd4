#include "cutsched/grouping.hpp"

#include "cutsched/errors.hpp"

#include <algorithm>
#include <limits>
#include <numeric>
#include <stdexcept>

namespace cutsched {

std::map<std::string, std::set<Stage>> Group::stage_signature() const {
  std::map<std::string, std::set<Stage>> sig;
  for (const auto& job : members) {
    if (job.parent_id) {
      sig[*job.parent_id].insert(job.stage);
    }
  }
  return sig;
}

void validate(const GroupingParams& params) {
  if (params.q_dev < 1) {
    throw ValidationError("q_dev must be positive");
  }
  if (params.c_max < 1) {
    throw ValidationError("c_max must be at least 1");
  }
  if (!(params.lambda >= 0.0)) {
    throw ValidationError("lambda must be non-negative");
  }
}

int causal_index(const Job& job) { return job.stage == Stage::Downstream ? 1 : 0; }

bool conflicts(const Job& a, const Job& b) {
  return a.parent_id && b.parent_id && *a.parent_id == *b.parent_id && a.stage != b.stage;
}

double group_cost(std::span<const Job> group, std::span<const Seconds> runtimes,
                  const GroupingParams& params) {
  if (group.empty()) {
    throw std::invalid_argument("group_cost of an empty group");
  }
  if (runtimes.size() != group.size()) {
    throw std::invalid_argument("group_cost: runtimes must align with the group");
  }
  for (Seconds t : runtimes) {
    if (!(t > 0.0)) {
      throw std::domain_error("group_cost: runtimes must be strictly positive");
    }
  }
  constexpr double kInf = std::numeric_limits<double>::infinity();
  if (static_cast<int>(group.size()) > params.c_max) {
    return kInf;
  }
  int demand = 0;
  for (const auto& job : group) {
    demand += job.qubits();
  }
  if (demand > params.q_dev) {
    return kInf;
  }
  for (std::size_t i = 0; i < group.size(); ++i) {
    for (std::size_t j = i + 1; j < group.size(); ++j) {
      if (conflicts(group[i], group[j])) {
        return kInf;
      }
    }
  }
  const auto [t_min, t_max] = std::minmax_element(runtimes.begin(), runtimes.end());
  int c_min = 1;
  int c_max = 0;
  for (const auto& job : group) {
    c_min = std::min(c_min, causal_index(job));
    c_max = std::max(c_max, causal_index(job));
  }
  const double imbalance = *t_max / *t_min - 1.0;
  const double span = params.lambda * static_cast<double>(c_max - c_min);
  return imbalance + span;
}

bool GroupBuilder::try_add(const Job& job, std::size_t index) {
  if (static_cast<int>(indices_.size()) >= c_max_) {
    return false;
  }
  if (used_ + job.qubits() > capacity_) {
    return false;
  }
  for (const Job* member : members_) {
    if (conflicts(job, *member)) {
      return false;
    }
  }
  indices_.push_back(index);
  members_.push_back(&job);
  used_ += job.qubits();
  return true;
}

std::vector<std::size_t> runtime_order(std::span<const Job> jobs,
                                       std::span<const Seconds> runtimes) {
  std::vector<std::size_t> order(jobs.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    if (runtimes[a] != runtimes[b]) {
      return runtimes[a] > runtimes[b];
    }
    return jobs[a].id < jobs[b].id;
  });
  return order;
}

std::vector<std::vector<std::size_t>> partition_indices(std::span<const Job> jobs,
                                                        std::span<const Seconds> runtimes,
                                                        const GroupingParams& params) {
  validate(params);
  if (runtimes.size() != jobs.size()) {
    throw std::invalid_argument("partition: runtimes must align with jobs");
  }
  for (const auto& job : jobs) {
    if (job.qubits() > params.q_dev) {
      throw CapacityError("job " + job.id + " needs " + std::to_string(job.qubits()) +
                          " qubits, more than the group capacity " +
                          std::to_string(params.q_dev));
    }
  }
  std::vector<std::size_t> remaining = runtime_order(jobs, runtimes);
  std::vector<std::vector<std::size_t>> groups;
  while (!remaining.empty()) {
    GroupBuilder builder(params.q_dev, params.c_max);
    std::vector<std::size_t> rest;
    rest.reserve(remaining.size());
    for (std::size_t idx : remaining) {
      if (!builder.try_add(jobs[idx], idx)) {
        rest.push_back(idx);
      }
    }
    groups.push_back(builder.indices());
    remaining = std::move(rest);
  }
  return groups;
}

std::vector<Group> partition_groups(std::span<const Job> jobs,
                                    std::span<const Seconds> runtimes,
                                    const GroupingParams& params) {
  std::vector<Group> out;
  for (const auto& idxs : partition_indices(jobs, runtimes, params)) {
    Group g;
    for (std::size_t i : idxs) {
      g.members.push_back(jobs[i]);
      g.qubit_demand += jobs[i].qubits();
    }
    out.push_back(std::move(g));
  }
  return out;
}

} // namespace cutsched
