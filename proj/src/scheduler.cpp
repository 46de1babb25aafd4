#include "cutsched/scheduler.hpp"

#include "cutsched/errors.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <tuple>
#include <unordered_map>

namespace cutsched {

std::string_view to_string(ModeTag tag) {
  switch (tag) {
  case ModeTag::Plain:
    return "plain";
  case ModeTag::UpstreamGroup:
    return "upstream";
  case ModeTag::DownstreamGroup:
    return "downstream";
  }
  return "plain";
}

const Placement* Schedule::find(std::uint64_t id) const {
  for (const auto& p : placements) {
    if (p.id == id) {
      return &p;
    }
  }
  return nullptr;
}

void validate(const SchedulerConfig& config) {
  if (config.window < 1) {
    throw ValidationError("window must be at least 1");
  }
  if (!(config.lambda_fidelity >= 0.0)) {
    throw ValidationError("lambda_fidelity must be non-negative");
  }
  if (!(config.beta_comm > 0.0)) {
    throw ValidationError("beta_comm must be positive");
  }
  if (config.budget.max_overhead < 1) {
    throw ValidationError("budget must be at least 1");
  }
  if (!(config.budget.adaptive_threshold > 0.0 && config.budget.adaptive_threshold <= 1.0)) {
    throw ValidationError("theta must lie in (0, 1]");
  }
  if (config.grouping.c_max < 1) {
    throw ValidationError("c_max must be at least 1");
  }
  if (!(config.grouping.lambda >= 0.0)) {
    throw ValidationError("lambda must be non-negative");
  }
}

Seconds makespan(const Schedule& schedule) {
  Seconds out = 0.0;
  for (const auto& p : schedule.placements) {
    out = std::max(out, p.finish);
  }
  return out;
}

std::int64_t count_slots(const Schedule& schedule, const Fleet& fleet, int q_max_sub,
                         bool count_idle_devices) {
  if (q_max_sub < 1) {
    throw std::invalid_argument("q_max_sub must be positive");
  }
  std::int64_t slots = 0;
  std::set<std::string> used;
  for (const auto& p : schedule.placements) {
    const Device* d = fleet.find(p.device);
    if (d == nullptr) {
      continue;
    }
    used.insert(p.device);
    const int avail = d->num_qubits - p.group.qubit_demand;
    if (avail > 0) {
      slots += avail / q_max_sub;
    }
  }
  if (count_idle_devices) {
    for (const auto& d : fleet.devices) {
      if (!used.contains(d.name)) {
        slots += d.num_qubits / q_max_sub;
      }
    }
  }
  return slots;
}

namespace {

std::string sibling_key(const Job& job) {
  return *job.parent_id + '#' + std::to_string(job.cut_index.value_or(0));
}

struct UpstreamRef {
  std::uint64_t placement_id;
  const Device* device;
  Seconds finish;
};

struct Candidate {
  const Device* device = nullptr;
  std::vector<std::size_t> members;
  Seconds start = 0.0;
  Seconds finish = 0.0;
  double score = 0.0;
  double tiebreak = 0.0;
  double cost = 0.0;
  int same_device = 0;
};

bool differs(double a, double b) {
  return std::abs(a - b) > 1e-9 * std::max({1.0, std::abs(a), std::abs(b)});
}

bool better(const Candidate& a, const Candidate& b) {
  if (differs(a.score, b.score)) {
    return a.score < b.score;
  }
  if (differs(a.tiebreak, b.tiebreak)) {
    return a.tiebreak < b.tiebreak;
  }
  if (a.cost != b.cost) {
    return a.cost < b.cost;
  }
  if (a.same_device != b.same_device) {
    return a.same_device < b.same_device;
  }
  return a.device->name < b.device->name;
}

/// Per-job quantities reused across device evaluations.
struct JobFacts {
  std::int64_t two_q = 0;
  Seconds ref_runtime = 0.0;
  /// ref_runtime plus, for upstream jobs, the longest downstream tail.
  Seconds rank = 0.0;
  int pool = 0;
  int priority = 1;
  /// Devices wide enough for the job.
  std::size_t fits = 0;
  /// Index into the device list when exactly one device can hold the job.
  std::optional<std::size_t> only_device;
  Seconds only_runtime = 0.0;
};

} // namespace

Schedule generate_initial_schedule(const std::vector<Job>& jobs, const Fleet& fleet,
                                   const SchedulerConfig& config,
                                   const PlanningContext& ctx) {
  validate(config);
  validate(fleet);
  const int max_cap = fleet.max_capacity();
  for (const auto& job : jobs) {
    if (job.qubits() > max_cap) {
      throw UnschedulableError(job.id, "job " + job.id + " needs " +
                                           std::to_string(job.qubits()) +
                                           " qubits; no device is that large");
    }
  }

  const std::size_t n = jobs.size();
  const Device& ref = fleet.reference_device();
  std::vector<JobFacts> facts(n);
  std::unordered_map<std::string, std::size_t> up_unplaced;
  for (std::size_t i = 0; i < n; ++i) {
    const Job& job = jobs[i];
    facts[i].two_q = job.circuit.two_q_gates();
    facts[i].ref_runtime = runtime_estimate(job, ref);
    facts[i].pool = job.stage == Stage::Downstream ? 1 : 0;
    facts[i].priority = ctx.in_flight.contains(job.root_id()) ? 0 : 1;
    if (job.stage == Stage::Upstream) {
      ++up_unplaced[sibling_key(job)];
    }
  }
  std::unordered_map<std::string, Seconds> tail;
  for (std::size_t i = 0; i < n; ++i) {
    const Job& job = jobs[i];
    if (job.stage == Stage::Downstream) {
      const auto n_sub = static_cast<std::int64_t>(2 * overhead(CutMode::LOCC, job.n_cut));
      const Seconds t = classical_delay(job.n_cut, job.shots, config.beta_comm, ref.tau_link,
                                        ref.gamma_proc, n_sub) +
                        facts[i].ref_runtime;
      auto& slot = tail[sibling_key(job)];
      slot = std::max(slot, t);
    }
  }
  for (std::size_t i = 0; i < n; ++i) {
    facts[i].rank = facts[i].ref_runtime;
    if (jobs[i].stage == Stage::Upstream) {
      if (auto it = tail.find(sibling_key(jobs[i])); it != tail.end()) {
        facts[i].rank += it->second;
      }
    }
  }

  std::vector<const Device*> devices;
  for (const auto& d : fleet.devices) {
    devices.push_back(&d);
  }
  std::sort(devices.begin(), devices.end(),
            [](const Device* a, const Device* b) { return a->name < b->name; });

  std::vector<std::size_t> fits_last(n, 0);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t k = 0; k < devices.size(); ++k) {
      if (jobs[i].qubits() <= devices[k]->num_qubits) {
        ++facts[i].fits;
        fits_last[i] = k;
      }
    }
  }

  // Most constrained jobs first, then longest remaining chain.
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    if (facts[a].priority != facts[b].priority) {
      return facts[a].priority < facts[b].priority;
    }
    if (facts[a].fits != facts[b].fits) {
      return facts[a].fits < facts[b].fits;
    }
    if (facts[a].rank != facts[b].rank) {
      return facts[a].rank > facts[b].rank;
    }
    return jobs[a].id < jobs[b].id;
  });

  // Work that can only run on one device. A device choice is scored by the
  // later of its own finish and the time that device still needs for its
  // exclusive backlog, so a small job does not take the one device a wide
  // job depends on.
  std::vector<Seconds> exclusive(devices.size(), 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    if (facts[i].fits == 1) {
      const std::size_t last = fits_last[i];
      facts[i].only_device = last;
      facts[i].only_runtime = runtime_estimate(jobs[i], *devices[last]);
      exclusive[last] += facts[i].only_runtime;
    }
  }

  std::unordered_map<std::string, Seconds> ready;
  for (const Device* d : devices) {
    Seconds t = ctx.now;
    if (auto it = ctx.device_ready.find(d->name); it != ctx.device_ready.end()) {
      t = std::max(t, it->second);
    }
    ready[d->name] = t;
  }

  std::unordered_map<std::string, std::vector<UpstreamRef>> upstream;
  for (const auto& c : ctx.committed_upstream) {
    const Device* d = fleet.find(c.device);
    if (d == nullptr) {
      throw ValidationError("committed placement on unknown device " + c.device);
    }
    upstream[c.parent_id + '#' + std::to_string(c.cut_index)].push_back(
        {c.placement_id, d, c.finish});
  }

  auto is_ready = [&](std::size_t i) {
    const Job& job = jobs[i];
    if (job.stage != Stage::Downstream) {
      return true;
    }
    auto it = up_unplaced.find(sibling_key(job));
    return it == up_unplaced.end() || it->second == 0;
  };
  auto feed_delay = [&](const Job& job, const Device& from, const Device& to) {
    const auto n_sub = static_cast<std::int64_t>(2 * overhead(CutMode::LOCC, job.n_cut));
    return classical_delay(job.n_cut, job.shots, config.beta_comm, from.tau_link,
                           to.gamma_proc, n_sub);
  };
  auto earliest = [&](std::size_t i, const Device& d) {
    const Job& job = jobs[i];
    Seconds t = std::max({ready[d.name], ctx.now, job.arrival_time});
    if (job.stage == Stage::Downstream) {
      if (auto it = upstream.find(sibling_key(job)); it != upstream.end()) {
        for (const auto& u : it->second) {
          t = std::max(t, u.finish + feed_delay(job, *u.device, d));
        }
      }
    }
    return t;
  };

  Schedule schedule;
  std::uint64_t next_id = ctx.first_placement_id;
  std::vector<char> placed(n, 0);
  std::size_t remaining = n;
  std::vector<Seconds> member_runtimes;

  while (remaining > 0) {
    std::size_t head = n;
    for (std::size_t i : order) {
      if (!placed[i] && is_ready(i)) {
        head = i;
        break;
      }
    }
    if (head == n) {
      throw std::logic_error("scheduler: no ready job although work remains");
    }
    const Job& head_job = jobs[head];

    std::optional<Candidate> best;
    for (std::size_t k = 0; k < devices.size(); ++k) {
      const Device* d = devices[k];
      if (head_job.qubits() > d->num_qubits) {
        continue;
      }
      Candidate cand;
      cand.device = d;
      cand.start = earliest(head, *d);
      GroupBuilder builder(d->num_qubits, config.grouping.c_max);
      builder.try_add(head_job, head);
      for (std::size_t i : order) {
        if (builder.full()) {
          break;
        }
        if (i == head || placed[i] || facts[i].pool != facts[head].pool || !is_ready(i) ||
            jobs[i].qubits() > d->num_qubits - builder.qubits_used()) {
          continue;
        }
        if (earliest(i, *d) > cand.start) {
          continue;
        }
        builder.try_add(jobs[i], i);
      }
      cand.members = builder.indices();

      Seconds runtime = 0.0;
      double lpst_sum = 0.0;
      member_runtimes.clear();
      std::vector<Job> member_jobs;
      for (std::size_t i : cand.members) {
        const Seconds rt = runtime_estimate(jobs[i], *d);
        member_runtimes.push_back(rt);
        runtime = std::max(runtime, rt);
        lpst_sum += lpst(facts[i].two_q, jobs[i].circuit.one_q_gates, jobs[i].qubits(), *d);
        member_jobs.push_back(jobs[i]);
      }
      cand.finish = cand.start + runtime;
      const double mean_lpst = lpst_sum / static_cast<double>(cand.members.size());
      Seconds backlog = exclusive[k];
      for (std::size_t i : cand.members) {
        if (facts[i].only_device) {
          backlog -= facts[i].only_runtime;
        }
      }
      cand.score = cand.finish + std::max(0.0, backlog);
      for (std::size_t e = 0; e < devices.size(); ++e) {
        if (e != k && exclusive[e] > 0.0) {
          cand.score = std::max(cand.score, ready[devices[e]->name] + exclusive[e]);
        }
      }
      cand.score = std::max(cand.score, cand.finish);
      // lambda = 0 must not turn a -inf LPST into NaN.
      const double bonus = config.lambda_fidelity > 0.0 ? config.lambda_fidelity * mean_lpst : 0.0;
      cand.score -= bonus;
      cand.tiebreak = cand.finish - bonus;
      GroupingParams params = config.grouping;
      params.q_dev = d->num_qubits;
      cand.cost = group_cost(member_jobs, member_runtimes, params);
      if (head_job.stage == Stage::Downstream) {
        for (std::size_t i : cand.members) {
          auto it = upstream.find(sibling_key(jobs[i]));
          if (it == upstream.end()) {
            continue;
          }
          for (const auto& u : it->second) {
            if (u.device == d) {
              cand.same_device = 1;
            }
          }
        }
      }
      if (!best || better(cand, *best)) {
        best = std::move(cand);
      }
    }
    if (!best) {
      throw UnschedulableError(head_job.id, "job " + head_job.id + " fits no device");
    }

    Placement placement;
    placement.id = next_id++;
    placement.device = best->device->name;
    placement.start = best->start;
    placement.finish = best->finish;
    bool has_up = false;
    bool has_down = false;
    std::map<std::uint64_t, Seconds> edges;
    for (std::size_t i : best->members) {
      const Job& job = jobs[i];
      if (facts[i].only_device) {
        exclusive[*facts[i].only_device] -= facts[i].only_runtime;
      }
      placed[i] = 1;
      --remaining;
      placement.group.members.push_back(job);
      placement.group.qubit_demand += job.qubits();
      placement.group.runtime_bound =
          std::max(placement.group.runtime_bound, runtime_estimate(job, *best->device));
      has_up = has_up || job.stage == Stage::Upstream;
      has_down = has_down || job.stage == Stage::Downstream;
      if (job.stage == Stage::Downstream) {
        if (auto it = upstream.find(sibling_key(job)); it != upstream.end()) {
          for (const auto& u : it->second) {
            auto& delay = edges[u.placement_id];
            delay = std::max(delay, feed_delay(job, *u.device, *best->device));
          }
        }
      }
    }
    placement.mode_tag = has_up     ? ModeTag::UpstreamGroup
                         : has_down ? ModeTag::DownstreamGroup
                                    : ModeTag::Plain;
    for (std::size_t i : best->members) {
      const Job& job = jobs[i];
      if (job.stage == Stage::Upstream) {
        const auto key = sibling_key(job);
        --up_unplaced[key];
        auto& refs = upstream[key];
        if (refs.empty() || refs.back().placement_id != placement.id) {
          refs.push_back({placement.id, best->device, placement.finish});
        }
      }
    }
    for (const auto& [up_id, delay] : edges) {
      schedule.precedence.push_back({up_id, placement.id, delay});
    }
    ready[placement.device] = placement.finish;
    schedule.placements.push_back(std::move(placement));
  }
  schedule.makespan = makespan(schedule);
  return schedule;
}

bool cut_eligible(const Job& job, const Fleet& fleet, const CutBudget& budget) {
  if (job.is_sub_job() || job.stage != Stage::Flat || job.qubits() < 2) {
    return false;
  }
  return job.qubits() >= budget.adaptive_threshold * fleet.max_capacity();
}

PlanResult adaptive_schedule(const std::vector<Job>& jobs, const Fleet& fleet,
                             const SchedulerConfig& config, const PlanningContext& ctx) {
  validate(config);
  validate(fleet);
  const int max_cap = fleet.max_capacity();

  CutCache local_cache;
  CutCache& cache = ctx.cut_cache != nullptr ? *ctx.cut_cache : local_cache;
  auto cached_plan = [&](const Job& job, bool mandatory) -> std::optional<CutPlan> {
    const std::string key =
        std::string(to_string(config.mode)) + (mandatory ? "!" : ":") + job.id;
    if (auto it = cache.find(key); it != cache.end()) {
      return it->second;
    }
    auto plan = plan_cut(job, config.mode, max_cap, config.budget, mandatory);
    cache.emplace(key, plan);
    return plan;
  };

  PlanResult result;
  std::vector<Job> current;
  current.reserve(jobs.size());
  for (const auto& job : jobs) {
    if (job.qubits() <= max_cap) {
      current.push_back(job);
      continue;
    }
    if (job.is_sub_job()) {
      throw UnschedulableError(job.id, "sub-job " + job.id + " is wider than every device");
    }
    std::optional<CutPlan> plan;
    try {
      plan = cached_plan(job, true);
    } catch (const InfeasibleCutError& e) {
      throw UnschedulableError(job.id, e.what());
    }
    for (auto& sub : expand_cut(job, *plan)) {
      current.push_back(std::move(sub));
    }
    result.cuts.push_back(std::move(*plan));
  }

  for (;;) {
    ++result.outer_iterations;
    Schedule initial = generate_initial_schedule(current, fleet, config, ctx);
    const Seconds t_initial = initial.makespan;
    result.iteration_makespans.push_back(t_initial);

    std::vector<const Placement*> by_time;
    for (const auto& p : initial.placements) {
      by_time.push_back(&p);
    }
    std::stable_sort(by_time.begin(), by_time.end(), [](const Placement* a, const Placement* b) {
      return std::tie(a->start, a->device, a->id) < std::tie(b->start, b->device, b->id);
    });

    bool improved = false;
    for (const Placement* p : by_time) {
      for (const Job& job : p->group.members) {
        if (!cut_eligible(job, fleet, config.budget)) {
          continue;
        }
        auto plan = cached_plan(job, false);
        if (!plan) {
          continue;
        }
        auto subs = expand_cut(job, *plan);
        int q_max_sub = 0;
        for (const auto& s : subs) {
          q_max_sub = std::max(q_max_sub, s.qubits());
        }
        const auto slots = count_slots(initial, fleet, q_max_sub, true);
        if (static_cast<std::int64_t>(subs.size()) > slots) {
          continue;
        }
        std::vector<Job> candidate;
        candidate.reserve(current.size() + subs.size());
        for (const auto& j : current) {
          if (j.id == job.id) {
            for (auto& s : subs) {
              candidate.push_back(std::move(s));
            }
          } else {
            candidate.push_back(j);
          }
        }
        Schedule cand = generate_initial_schedule(candidate, fleet, config, ctx);
        if (cand.makespan <= t_initial) {
          result.adaptive_cuts.push_back(job.id);
          result.cuts.push_back(std::move(*plan));
          current = std::move(candidate);
          improved = true;
          break;
        }
      }
      if (improved) {
        break;
      }
    }
    if (!improved) {
      result.schedule = std::move(initial);
      return result;
    }
  }
}

} // namespace cutsched
