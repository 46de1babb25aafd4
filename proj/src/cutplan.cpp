#include "cutsched/cutplan.hpp"

#include "cutsched/errors.hpp"

#include <algorithm>
#include <cstdlib>
#include <limits>
#include <queue>
#include <tuple>
#include <utility>

namespace cutsched {

std::string_view to_string(CutMode mode) {
  return mode == CutMode::LO ? "LO" : "LOCC";
}

std::optional<CutMode> parse_cut_mode(std::string_view text) {
  if (text == "LO" || text == "lo") {
    return CutMode::LO;
  }
  if (text == "LOCC" || text == "locc") {
    return CutMode::LOCC;
  }
  return std::nullopt;
}

int crossing_weight(const Circuit& circuit, const std::vector<bool>& in_a) {
  int total = 0;
  for (const auto& e : circuit.coupling) {
    if (in_a[static_cast<std::size_t>(e.a)] != in_a[static_cast<std::size_t>(e.b)]) {
      total += e.weight;
    }
  }
  return total;
}

namespace {

using Adjacency = std::vector<std::vector<std::pair<int, int>>>;

Adjacency build_adjacency(const Circuit& circuit) {
  Adjacency adj(static_cast<std::size_t>(circuit.num_qubits));
  for (const auto& e : circuit.coupling) {
    adj[static_cast<std::size_t>(e.a)].emplace_back(e.b, e.weight);
    adj[static_cast<std::size_t>(e.b)].emplace_back(e.a, e.weight);
  }
  return adj;
}

void check_feasible(const Circuit& circuit, int q_target) {
  const int n = circuit.num_qubits;
  if (n < 2) {
    throw InfeasibleCutError("circuit " + circuit.id +
                             " has fewer than two qubits and cannot be split");
  }
  if (q_target < 1 || (n + 1) / 2 > q_target) {
    throw InfeasibleCutError("circuit " + circuit.id + " with " + std::to_string(n) +
                             " qubits cannot be split into halves of at most " +
                             std::to_string(q_target));
  }
}

Bipartition to_bipartition(const std::vector<bool>& in_a, int n_cut) {
  Bipartition out;
  for (std::size_t q = 0; q < in_a.size(); ++q) {
    (in_a[q] ? out.part_a : out.part_b).push_back(static_cast<int>(q));
  }
  out.n_cut = n_cut;
  return out;
}

Bipartition exact_bipartition(const Circuit& circuit, int q_target) {
  const int n = circuit.num_qubits;
  // Qubit 0 is pinned to side A; the size bound is symmetric.
  std::tuple<int, int, std::uint32_t> best{std::numeric_limits<int>::max(), 0, 0};
  const std::uint32_t full = (1u << n) - 1u;
  for (std::uint32_t mask = 1; mask < full; mask += 2) {
    const int size_a = __builtin_popcount(mask);
    const int size_b = n - size_a;
    if (size_a > q_target || size_b > q_target) {
      continue;
    }
    int cut = 0;
    for (const auto& e : circuit.coupling) {
      if (((mask >> e.a) & 1u) != ((mask >> e.b) & 1u)) {
        cut += e.weight;
      }
    }
    std::tuple<int, int, std::uint32_t> key{cut, std::abs(size_a - size_b), mask};
    if (key < best) {
      best = key;
    }
  }
  std::vector<bool> in_a(static_cast<std::size_t>(n));
  for (int q = 0; q < n; ++q) {
    in_a[static_cast<std::size_t>(q)] = ((std::get<2>(best) >> q) & 1u) != 0;
  }
  return to_bipartition(in_a, std::get<0>(best));
}

/// Single-vertex move passes with rollback to the best prefix, as in
/// Fiduccia-Mattheyses. Objective is (crossing weight, size imbalance).
void refine(const Adjacency& adj, int q_target, std::vector<bool>& in_a) {
  const int n = static_cast<int>(adj.size());
  constexpr int kMaxPasses = 64;

  for (int pass = 0; pass < kMaxPasses; ++pass) {
    int size_a = static_cast<int>(std::count(in_a.begin(), in_a.end(), true));
    std::vector<int> gain(static_cast<std::size_t>(n), 0);
    int cut = 0;
    for (int v = 0; v < n; ++v) {
      for (auto [u, w] : adj[static_cast<std::size_t>(v)]) {
        const bool same = in_a[static_cast<std::size_t>(u)] == in_a[static_cast<std::size_t>(v)];
        gain[static_cast<std::size_t>(v)] += same ? -w : w;
        if (!same && v < u) {
          cut += w;
        }
      }
    }
    std::vector<char> locked(static_cast<std::size_t>(n), 0);
    std::vector<int> moves;
    moves.reserve(static_cast<std::size_t>(n));
    auto imbalance = [n](int a) { return std::abs(2 * a - n); };
    std::pair<int, int> best{cut, imbalance(size_a)};
    std::size_t best_prefix = 0;

    for (int step = 0; step < n; ++step) {
      int pick = -1;
      std::pair<int, int> pick_key{};
      for (int v = 0; v < n; ++v) {
        if (locked[static_cast<std::size_t>(v)]) {
          continue;
        }
        const bool from_a = in_a[static_cast<std::size_t>(v)];
        const int new_a = from_a ? size_a - 1 : size_a + 1;
        if (new_a < 1 || n - new_a < 1 || new_a > q_target || n - new_a > q_target) {
          continue;
        }
        // Higher gain first, then the move leaving better balance.
        std::pair<int, int> key{-gain[static_cast<std::size_t>(v)], imbalance(new_a)};
        if (pick < 0 || key < pick_key) {
          pick = v;
          pick_key = key;
        }
      }
      if (pick < 0) {
        break;
      }
      const auto pv = static_cast<std::size_t>(pick);
      cut -= gain[pv];
      size_a += in_a[pv] ? -1 : 1;
      in_a[pv] = !in_a[pv];
      locked[pv] = 1;
      gain[pv] = -gain[pv];
      for (auto [u, w] : adj[pv]) {
        const auto uu = static_cast<std::size_t>(u);
        // Edge (pick, u) flipped between internal and external.
        gain[uu] += (in_a[uu] == in_a[pv]) ? -2 * w : 2 * w;
      }
      moves.push_back(pick);
      std::pair<int, int> now{cut, imbalance(size_a)};
      if (now < best) {
        best = now;
        best_prefix = moves.size();
      }
    }
    for (std::size_t i = moves.size(); i > best_prefix; --i) {
      const auto v = static_cast<std::size_t>(moves[i - 1]);
      in_a[v] = !in_a[v];
    }
    if (best_prefix == 0) {
      break;
    }
  }
}

std::vector<bool> contiguous_seed(int n) {
  std::vector<bool> in_a(static_cast<std::size_t>(n), false);
  for (int q = 0; q < (n + 1) / 2; ++q) {
    in_a[static_cast<std::size_t>(q)] = true;
  }
  return in_a;
}

std::vector<bool> bfs_seed(const Adjacency& adj) {
  const int n = static_cast<int>(adj.size());
  std::vector<bool> in_a(static_cast<std::size_t>(n), false);
  std::vector<char> seen(static_cast<std::size_t>(n), 0);
  int taken = 0;
  const int want = (n + 1) / 2;
  for (int root = 0; root < n && taken < want; ++root) {
    if (seen[static_cast<std::size_t>(root)]) {
      continue;
    }
    std::queue<int> frontier;
    frontier.push(root);
    seen[static_cast<std::size_t>(root)] = 1;
    while (!frontier.empty() && taken < want) {
      const int v = frontier.front();
      frontier.pop();
      in_a[static_cast<std::size_t>(v)] = true;
      ++taken;
      auto neighbours = adj[static_cast<std::size_t>(v)];
      std::sort(neighbours.begin(), neighbours.end());
      for (auto [u, w] : neighbours) {
        if (!seen[static_cast<std::size_t>(u)]) {
          seen[static_cast<std::size_t>(u)] = 1;
          frontier.push(u);
        }
      }
    }
  }
  return in_a;
}

} // namespace

Bipartition refine_bipartition(const Circuit& circuit, int q_target) {
  check_feasible(circuit, q_target);
  const int n = circuit.num_qubits;
  const auto adj = build_adjacency(circuit);

  std::optional<Bipartition> best;
  for (auto seed : {contiguous_seed(n), bfs_seed(adj)}) {
    refine(adj, q_target, seed);
    auto candidate = to_bipartition(seed, crossing_weight(circuit, seed));
    auto imbalance = [](const Bipartition& b) {
      return std::abs(static_cast<int>(b.part_a.size()) - static_cast<int>(b.part_b.size()));
    };
    if (!best || std::pair{candidate.n_cut, imbalance(candidate)} <
                     std::pair{best->n_cut, imbalance(*best)}) {
      best = std::move(candidate);
    }
  }
  // Keep qubit 0 on side A so that the side labels are canonical.
  if (!best->part_a.empty() && best->part_a.front() != 0) {
    std::swap(best->part_a, best->part_b);
  }
  return *best;
}

Bipartition find_bipartition(const Circuit& circuit, int q_target) {
  check_feasible(circuit, q_target);
  if (circuit.num_qubits <= kExactBipartitionLimit) {
    return exact_bipartition(circuit, q_target);
  }
  return refine_bipartition(circuit, q_target);
}

std::uint64_t overhead(OverheadKind kind, int n_cut) {
  if (n_cut < 0) {
    throw std::invalid_argument("n_cut must be non-negative");
  }
  std::uint64_t base = 9;
  if (kind == OverheadKind::LOCC) {
    base = 4;
  } else if (kind == OverheadKind::LOWire) {
    base = 16;
  }
  std::uint64_t result = 1;
  for (int i = 0; i < n_cut; ++i) {
    if (result > std::numeric_limits<std::uint64_t>::max() / base) {
      throw OverheadOverflowError("overhead " + std::to_string(base) + "^" +
                                  std::to_string(n_cut) + " overflows 64 bits");
    }
    result *= base;
  }
  return result;
}

std::uint64_t overhead(CutMode mode, int n_cut) {
  return overhead(mode == CutMode::LO ? OverheadKind::LO : OverheadKind::LOCC, n_cut);
}

std::optional<CutPlan> plan_cut(const Job& job, CutMode mode, int fleet_max_q,
                                const CutBudget& budget, bool mandatory) {
  if (job.stage != Stage::Flat || job.parent_id) {
    throw ValidationError("job " + job.id + " is already a sub-job and cannot be cut again");
  }
  Bipartition split;
  int ancillas = 0;
  try {
    if (mode == CutMode::LO) {
      split = find_bipartition(job.circuit, fleet_max_q);
    } else {
      // Fragments grow by one ancilla per crossing gate; shrink the target
      // until both sides still fit.
      int target = fleet_max_q;
      for (;;) {
        split = find_bipartition(job.circuit, target);
        const int widest = static_cast<int>(std::max(split.part_a.size(), split.part_b.size()));
        if (widest + split.n_cut <= fleet_max_q) {
          break;
        }
        const int next = std::min(target - 1, fleet_max_q - split.n_cut);
        if (next < 1) {
          throw InfeasibleCutError("job " + job.id + ": no LOCC split leaves room for ancillas");
        }
        target = next;
      }
      ancillas = split.n_cut;
    }
  } catch (const InfeasibleCutError&) {
    if (mandatory) {
      throw;
    }
    return std::nullopt;
  }

  std::uint64_t cost = 0;
  try {
    cost = overhead(mode, split.n_cut);
  } catch (const OverheadOverflowError&) {
    if (mandatory) {
      throw InfeasibleCutError("job " + job.id + ": cut overhead overflows");
    }
    return std::nullopt;
  }
  if (mandatory) {
    if (cost > budget.hard_max_overhead) {
      throw InfeasibleCutError("job " + job.id + ": mandatory cut with " +
                               std::to_string(split.n_cut) + " crossing gates exceeds " +
                               "the expansion ceiling of " +
                               std::to_string(budget.hard_max_overhead));
    }
  } else if (cost > budget.max_overhead) {
    return std::nullopt;
  }

  CutPlan plan;
  plan.parent_id = job.id;
  plan.part_a = std::move(split.part_a);
  plan.part_b = std::move(split.part_b);
  plan.n_cut = split.n_cut;
  plan.mode = mode;
  plan.overhead = cost;
  plan.ancilla_per_side = ancillas;
  return plan;
}

namespace {

Circuit fragment_circuit(const Circuit& parent, const std::vector<int>& part,
                         std::int64_t one_q_share, int ancillas) {
  std::vector<int> local(static_cast<std::size_t>(parent.num_qubits), -1);
  for (std::size_t i = 0; i < part.size(); ++i) {
    local[static_cast<std::size_t>(part[i])] = static_cast<int>(i);
  }
  Circuit c;
  c.num_qubits = static_cast<int>(part.size()) + ancillas;
  c.depth = parent.depth;
  c.one_q_gates = one_q_share;
  std::vector<CouplingEdge> edges;
  int next_ancilla = static_cast<int>(part.size());
  for (const auto& e : parent.coupling) {
    const int la = local[static_cast<std::size_t>(e.a)];
    const int lb = local[static_cast<std::size_t>(e.b)];
    if (la >= 0 && lb >= 0) {
      edges.push_back({la, lb, e.weight});
    } else if (ancillas > 0 && (la >= 0 || lb >= 0)) {
      // Each crossing gate is teleported through its own ancilla, entangled
      // with the data qubit that stays on this side.
      const int data = la >= 0 ? la : lb;
      for (int k = 0; k < e.weight; ++k) {
        edges.push_back({data, next_ancilla++, 1});
      }
    }
  }
  c.coupling = canonical_coupling(std::move(edges));
  return c;
}

} // namespace

std::vector<Job> expand_cut(const Job& job, const CutPlan& plan) {
  const int n = job.circuit.num_qubits;
  const std::int64_t one_q_a =
      job.circuit.one_q_gates * static_cast<std::int64_t>(plan.part_a.size()) / n;
  const std::int64_t one_q_b = job.circuit.one_q_gates - one_q_a;

  const Circuit frag_a = fragment_circuit(job.circuit, plan.part_a, one_q_a,
                                          plan.ancilla_per_side);
  const Circuit frag_b = fragment_circuit(job.circuit, plan.part_b, one_q_b,
                                          plan.ancilla_per_side);

  // Without crossing gates there is nothing to feed forward.
  const bool causal = plan.mode == CutMode::LOCC && plan.n_cut > 0;
  const int cut_index = 0;

  std::vector<Job> subs;
  subs.reserve(static_cast<std::size_t>(plan.sub_job_count()));
  auto emit = [&](const Circuit& frag, char side, Stage stage) {
    for (std::uint64_t v = 0; v < plan.overhead; ++v) {
      Job sub;
      sub.id = job.id + ".c" + std::to_string(cut_index) + "." + side + ".v" + std::to_string(v);
      sub.circuit = frag;
      sub.circuit.id = sub.id;
      sub.shots = job.shots;
      sub.arrival_time = job.arrival_time;
      sub.parent_id = job.id;
      sub.stage = stage;
      sub.cut_index = cut_index;
      sub.n_cut = plan.n_cut;
      subs.push_back(std::move(sub));
    }
  };
  emit(frag_a, 'A', causal ? Stage::Upstream : Stage::Flat);
  emit(frag_b, 'B', causal ? Stage::Downstream : Stage::Flat);
  return subs;
}

std::string fragment_id(const Job& job) {
  if (!job.is_sub_job()) {
    return job.id;
  }
  const auto pos = job.id.rfind(".v");
  return pos == std::string::npos ? job.id : job.id.substr(0, pos);
}

std::vector<Job> try_cut(const Job& job, CutMode mode, int fleet_max_q,
                         const CutBudget& budget, bool mandatory) {
  auto plan = plan_cut(job, mode, fleet_max_q, budget, mandatory);
  if (!plan) {
    return {};
  }
  return expand_cut(job, *plan);
}

Seconds classical_delay(int n_cut, std::int64_t shots, double beta_comm,
                        Seconds tau_link, Seconds gamma_proc, std::int64_t n_sub) {
  return static_cast<double>(n_cut) * beta_comm * tau_link * static_cast<double>(shots) +
         gamma_proc * static_cast<double>(n_sub);
}

} // namespace cutsched
