#include "cutsched/oracles.hpp"

#include "cutsched/cutplan.hpp"
#include "cutsched/errors.hpp"
#include "cutsched/scheduler.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>
#include <sstream>

namespace cutsched::oracle {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

} // namespace

std::optional<int> brute_min_cut(const Circuit& circuit, int q_target,
                                 const OracleLimit& limit) {
  const int n = circuit.num_qubits;
  if (n > limit.max_qubits) {
    throw OracleLimitError("brute_min_cut: " + std::to_string(n) + " qubits exceeds limit " +
                           std::to_string(limit.max_qubits));
  }
  std::optional<int> best;
  const std::uint32_t full = (1U << n) - 1U;
  for (std::uint32_t mask = 1; mask < full; ++mask) {
    const int a = std::popcount(mask);
    if (a > q_target || n - a > q_target) {
      continue;
    }
    int crossing = 0;
    for (const auto& e : circuit.coupling) {
      const bool sa = ((mask >> e.a) & 1U) != 0;
      const bool sb = ((mask >> e.b) & 1U) != 0;
      if (sa != sb) {
        crossing += e.weight;
      }
    }
    if (!best || crossing < *best) {
      best = crossing;
    }
  }
  return best;
}

double reference_group_cost(const std::vector<const Job*>& group,
                            const std::vector<Seconds>& runtimes,
                            const GroupingParams& params) {
  if (group.empty() || static_cast<int>(group.size()) > params.c_max) {
    return kInf;
  }
  int width = 0;
  int lowest = 2;
  int highest = -1;
  for (const Job* j : group) {
    width += j->circuit.num_qubits;
    const int c = j->stage == Stage::Downstream ? 1 : 0;
    lowest = std::min(lowest, c);
    highest = std::max(highest, c);
  }
  if (width > params.q_dev) {
    return kInf;
  }
  for (const Job* x : group) {
    for (const Job* y : group) {
      if (x != y && x->parent_id && y->parent_id && *x->parent_id == *y->parent_id &&
          x->stage != y->stage) {
        return kInf;
      }
    }
  }
  const double longest = *std::max_element(runtimes.begin(), runtimes.end());
  const double shortest = *std::min_element(runtimes.begin(), runtimes.end());
  return longest / shortest - 1.0 + params.lambda * (highest - lowest);
}

std::optional<PartitionOptimum> brute_partition(const std::vector<Job>& jobs,
                                                const std::vector<Seconds>& runtimes,
                                                const GroupingParams& params,
                                                const OracleLimit& limit) {
  const std::size_t n = jobs.size();
  if (static_cast<int>(n) > limit.max_jobs) {
    throw OracleLimitError("brute_partition: " + std::to_string(n) + " jobs exceeds limit " +
                           std::to_string(limit.max_jobs));
  }
  if (n == 0) {
    return PartitionOptimum{};
  }
  // Restricted growth strings enumerate each set partition exactly once.
  std::vector<std::size_t> label(n, 0);
  std::vector<std::size_t> prefix_max(n, 0);
  std::optional<PartitionOptimum> best;
  for (;;) {
    const std::size_t blocks = prefix_max[n - 1] + 1;
    std::vector<std::vector<std::size_t>> groups(blocks);
    for (std::size_t i = 0; i < n; ++i) {
      groups[label[i]].push_back(i);
    }
    double total = 0.0;
    for (const auto& g : groups) {
      std::vector<const Job*> members;
      std::vector<Seconds> rts;
      for (std::size_t i : g) {
        members.push_back(&jobs[i]);
        rts.push_back(runtimes[i]);
      }
      total += reference_group_cost(members, rts, params);
    }
    if (total < kInf) {
      if (!best) {
        best = PartitionOptimum{total, groups, static_cast<int>(blocks)};
      } else {
        if (total < best->cost) {
          best->cost = total;
          best->groups = groups;
        }
        best->min_groups = std::min(best->min_groups, static_cast<int>(blocks));
      }
    }

    // Next restricted growth string.
    std::size_t i = n - 1;
    while (i > 0 && label[i] > prefix_max[i - 1]) {
      --i;
    }
    if (i == 0) {
      break;
    }
    ++label[i];
    prefix_max[i] = std::max(prefix_max[i - 1], label[i]);
    for (std::size_t k = i + 1; k < n; ++k) {
      label[k] = 0;
      prefix_max[k] = prefix_max[i];
    }
  }
  return best;
}

Seconds brute_assign(const AssignInstance& instance, const OracleLimit& limit) {
  const std::size_t g = instance.runtime.size();
  if (g == 0) {
    return 0.0;
  }
  const std::size_t d = instance.runtime.front().size();
  if (static_cast<int>(g * d) > limit.max_groups_x_devices ||
      static_cast<int>(g) > limit.max_jobs) {
    throw OracleLimitError("brute_assign: instance of " + std::to_string(g) + " groups x " +
                           std::to_string(d) + " devices exceeds limit");
  }
  std::vector<std::size_t> assign(g, 0);
  Seconds best = kInf;
  for (;;) {
    bool fits = true;
    for (std::size_t t = 0; t < g; ++t) {
      fits = fits && std::isfinite(instance.runtime[t][assign[t]]);
    }
    if (fits) {
      std::vector<std::size_t> perm(g);
      std::iota(perm.begin(), perm.end(), std::size_t{0});
      do {
        std::vector<std::size_t> pos(g);
        for (std::size_t k = 0; k < g; ++k) {
          pos[perm[k]] = k;
        }
        bool ordered = true;
        for (const auto& e : instance.edges) {
          ordered = ordered && pos[e.from] < pos[e.to];
        }
        if (!ordered) {
          continue;
        }
        std::vector<Seconds> free_at(d, 0.0);
        std::vector<Seconds> finish(g, 0.0);
        Seconds span = 0.0;
        for (std::size_t t : perm) {
          Seconds start = free_at[assign[t]];
          if (t < instance.release.size()) {
            start = std::max(start, instance.release[t]);
          }
          for (const auto& e : instance.edges) {
            if (e.to == t) {
              start = std::max(start, finish[e.from] + e.delay);
            }
          }
          finish[t] = start + instance.runtime[t][assign[t]];
          free_at[assign[t]] = finish[t];
          span = std::max(span, finish[t]);
        }
        best = std::min(best, span);
      } while (std::next_permutation(perm.begin(), perm.end()));
    }
    std::size_t k = 0;
    while (k < g && ++assign[k] == d) {
      assign[k++] = 0;
    }
    if (k == g) {
      break;
    }
  }
  return best;
}

Seconds brute_assign(const std::vector<std::vector<Job>>& groups, const Fleet& fleet,
                     const std::vector<AssignEdge>& edges, const OracleLimit& limit) {
  AssignInstance inst;
  inst.edges = edges;
  for (const auto& group : groups) {
    std::vector<Seconds> row;
    Seconds release = 0.0;
    for (const auto& dev : fleet.devices) {
      int width = 0;
      Seconds longest = 0.0;
      for (const auto& j : group) {
        width += j.circuit.num_qubits;
        const Seconds per_shot = j.circuit.depth * dev.t_2q + dev.t_readout;
        longest = std::max(longest, static_cast<double>(j.shots) * per_shot + dev.t_load);
      }
      row.push_back(width <= dev.num_qubits ? longest : kInf);
    }
    for (const auto& j : group) {
      release = std::max(release, j.arrival_time);
    }
    inst.runtime.push_back(std::move(row));
    inst.release.push_back(release);
  }
  return brute_assign(inst, limit);
}

namespace {

Circuit random_graph(int n, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::uniform_int_distribution<int> weight(1, 3);
  const double density = 0.15 + 0.5 * unit(rng);
  Circuit c;
  c.num_qubits = n;
  c.depth = 1;
  for (int a = 0; a < n; ++a) {
    for (int b = a + 1; b < n; ++b) {
      if (unit(rng) < density) {
        c.coupling.push_back({a, b, weight(rng)});
      }
    }
  }
  return c;
}

Job plain_job(std::string id, int width, int depth, std::int64_t shots) {
  Job j;
  j.id = std::move(id);
  j.circuit.id = j.id;
  j.circuit.num_qubits = width;
  j.circuit.depth = depth;
  j.shots = shots;
  return j;
}

void note_failure(SuiteResult& r, const std::string& what) {
  if (r.failures++ == 0) {
    r.first_failure = what;
  }
}

} // namespace

SuiteResult check_min_cut(int instances, std::uint64_t seed) {
  SuiteResult r{"min-cut vs exhaustive", instances, 0, {}};
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<int> width(2, 12);
  for (int k = 0; k < instances; ++k) {
    const int n = width(rng);
    Circuit c = random_graph(n, rng);
    std::uniform_int_distribution<int> target((n + 1) / 2, n);
    const int q = target(rng);
    const auto want = brute_min_cut(c, q);
    const Bipartition got = find_bipartition(c, q);
    const auto a = static_cast<int>(got.part_a.size());
    const auto b = static_cast<int>(got.part_b.size());
    if (!want || got.n_cut != *want || a + b != n || a == 0 || b == 0 || a > q || b > q) {
      std::ostringstream msg;
      msg << "instance " << k << ": n=" << n << " q=" << q << " got " << got.n_cut
          << " want " << (want ? std::to_string(*want) : "none");
      note_failure(r, msg.str());
    }
  }
  return r;
}

SuiteResult check_partition(int instances, std::uint64_t seed) {
  SuiteResult r{"grouping vs exhaustive", instances, 0, {}};
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<int> count(1, 8);
  std::uniform_int_distribution<int> width(5, 60);
  std::uniform_int_distribution<int> stage(0, 2);
  std::uniform_int_distribution<int> parent(0, 2);
  std::uniform_real_distribution<double> rt(1.0, 10.0);
  for (int k = 0; k < instances; ++k) {
    GroupingParams params;
    params.q_dev = (k % 2 == 0) ? 127 : 64;
    params.c_max = 2 + k % 3;
    params.lambda = 1.0;
    std::vector<Job> jobs;
    std::vector<Seconds> runtimes;
    const int n = count(rng);
    for (int i = 0; i < n; ++i) {
      Job j = plain_job("x" + std::to_string(i), std::min(width(rng), params.q_dev), 1, 1);
      const int s = stage(rng);
      if (s != 0) {
        j.parent_id = "p" + std::to_string(parent(rng));
        j.stage = s == 1 ? Stage::Upstream : Stage::Downstream;
        j.cut_index = 0;
        j.n_cut = 1;
      }
      jobs.push_back(std::move(j));
      runtimes.push_back(rt(rng));
    }
    const auto greedy = partition_indices(jobs, runtimes, params);
    const auto best = brute_partition(jobs, runtimes, params);
    std::vector<int> seen(jobs.size(), 0);
    bool ok = best.has_value();
    for (const auto& g : greedy) {
      std::vector<const Job*> members;
      std::vector<Seconds> rts;
      for (std::size_t i : g) {
        ++seen[i];
        members.push_back(&jobs[i]);
        rts.push_back(runtimes[i]);
      }
      ok = ok && std::isfinite(reference_group_cost(members, rts, params));
    }
    ok = ok && std::all_of(seen.begin(), seen.end(), [](int c) { return c == 1; });
    ok = ok && static_cast<int>(greedy.size()) >= best->min_groups;
    if (!ok) {
      note_failure(r, "instance " + std::to_string(k) + ": infeasible or non-partition output");
    }
  }
  return r;
}

SuiteResult check_assignment(int instances, std::uint64_t seed, double ratio) {
  SuiteResult r{"initial schedule vs exhaustive assignment", instances, 0, {}};
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<int> device_count(1, 3);
  std::uniform_int_distribution<int> group_count(1, 4);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  const int capacities[] = {27, 33, 53, 65, 127};
  std::uniform_int_distribution<int> cap_pick(0, 4);
  std::uniform_int_distribution<int> depth(5, 80);
  std::uniform_int_distribution<std::int64_t> shots(500, 5000);

  for (int k = 0; k < instances; ++k) {
    Fleet fleet;
    const int d = device_count(rng);
    int widest = 0;
    for (int i = 0; i < d; ++i) {
      Device dev;
      dev.name = "d" + std::to_string(i);
      dev.num_qubits = capacities[cap_pick(rng)];
      dev.t_2q = 3e-7 + 4e-7 * unit(rng);
      dev.t_readout = 4e-6;
      dev.t_load = 0.25;
      dev.tau_link = 1e-6;
      dev.gamma_proc = 0.01;
      widest = std::max(widest, dev.num_qubits);
      fleet.devices.push_back(dev);
    }
    const int g = group_count(rng);
    std::uniform_int_distribution<int> width(2, widest);
    std::vector<Job> jobs;
    for (int i = 0; i < g; ++i) {
      jobs.push_back(plain_job("g" + std::to_string(i), width(rng), depth(rng), shots(rng)));
    }
    std::vector<AssignEdge> edges;
    if (g >= 2 && unit(rng) < 0.3) {
      // Turn the first two jobs into the two halves of one LOCC cut.
      for (int i = 0; i < 2; ++i) {
        jobs[i].parent_id = "p";
        jobs[i].stage = i == 0 ? Stage::Upstream : Stage::Downstream;
        jobs[i].cut_index = 0;
        jobs[i].n_cut = 1;
        jobs[i].shots = jobs[0].shots;
      }
      const Seconds delay = 1 * 2.0 * 1e-6 * static_cast<double>(jobs[0].shots) + 0.01 * 8;
      edges.push_back({0, 1, delay});
    }

    SchedulerConfig config;
    config.lambda_fidelity = 0.0;
    config.grouping.c_max = 1;
    const Schedule s = generate_initial_schedule(jobs, fleet, config);

    std::vector<std::vector<Job>> groups;
    for (const auto& j : jobs) {
      groups.push_back({j});
    }
    const Seconds opt = brute_assign(groups, fleet, edges);
    if (!(s.makespan <= ratio * opt * (1.0 + 1e-12))) {
      std::ostringstream msg;
      msg << "instance " << k << ": makespan " << s.makespan << " vs optimum " << opt;
      note_failure(r, msg.str());
    }
  }
  return r;
}

bool run_self_check(std::ostream& out, std::uint64_t seed) {
  const SuiteResult suites[] = {
      check_min_cut(200, seed),
      check_partition(300, seed),
      check_assignment(100, seed),
  };
  bool all = true;
  for (const auto& s : suites) {
    out << (s.passed() ? "PASS " : "FAIL ") << s.name << " (" << s.instances << " instances";
    if (!s.passed()) {
      out << ", " << s.failures << " failed; " << s.first_failure;
    }
    out << ")\n";
    all = all && s.passed();
  }
  return all;
}

} // namespace cutsched::oracle
