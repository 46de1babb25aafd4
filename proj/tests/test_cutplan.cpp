#include "cutsched/cutplan.hpp"
#include "cutsched/errors.hpp"
#include "cutsched/oracles.hpp"

#include <gtest/gtest.h>

#include <algorithm>
#include <random>
#include <set>

using namespace cutsched;

namespace {

Circuit line(int n) {
  Circuit c{"line", n, 1, {}, 0};
  for (int i = 0; i + 1 < n; ++i) {
    c.coupling.push_back({i, i + 1, 1});
  }
  return c;
}

Circuit ring(int n) {
  Circuit c = line(n);
  c.coupling.push_back({0, n - 1, 1});
  c.coupling = canonical_coupling(c.coupling);
  return c;
}

Circuit complete(int n) {
  Circuit c{"k", n, 1, {}, 0};
  for (int a = 0; a < n; ++a) {
    for (int b = a + 1; b < n; ++b) {
      c.coupling.push_back({a, b, 1});
    }
  }
  return c;
}

Job flat(std::string id, Circuit c, std::int64_t shots = 1000) {
  Job j;
  j.id = std::move(id);
  j.circuit = std::move(c);
  j.circuit.id = j.id;
  j.shots = shots;
  j.arrival_time = 2.5;
  return j;
}

std::uint64_t ipow(std::uint64_t base, int k) {
  std::uint64_t out = 1;
  while (k-- > 0) {
    out *= base;
  }
  return out;
}

void expect_partition(const Bipartition& p, int n, int q_target) {
  std::set<int> all(p.part_a.begin(), p.part_a.end());
  all.insert(p.part_b.begin(), p.part_b.end());
  EXPECT_EQ(static_cast<int>(all.size()), n);
  EXPECT_EQ(p.part_a.size() + p.part_b.size(), static_cast<std::size_t>(n));
  EXPECT_FALSE(p.part_a.empty());
  EXPECT_FALSE(p.part_b.empty());
  EXPECT_LE(static_cast<int>(p.part_a.size()), q_target);
  EXPECT_LE(static_cast<int>(p.part_b.size()), q_target);
}

} // namespace

TEST(Bipartition, TwoQubits) {
  const Bipartition p = find_bipartition(line(2), 1);
  EXPECT_EQ(p.part_a, std::vector<int>{0});
  EXPECT_EQ(p.part_b, std::vector<int>{1});
  EXPECT_EQ(p.n_cut, 1);
}

TEST(Bipartition, LineOfSix) { EXPECT_EQ(find_bipartition(line(6), 3).n_cut, 1); }

TEST(Bipartition, CompleteFour) { EXPECT_EQ(find_bipartition(complete(4), 2).n_cut, 4); }

TEST(Bipartition, InfeasibleTarget) {
  EXPECT_THROW(find_bipartition(line(7), 3), InfeasibleCutError);
  EXPECT_THROW(find_bipartition(line(1), 3), InfeasibleCutError);
}

TEST(Bipartition, MatchesExhaustiveOnSmallCircuits) {
  const auto r = oracle::check_min_cut(200, 11);
  EXPECT_TRUE(r.passed()) << r.first_failure;
}

TEST(Bipartition, HeuristicIsValidOnWideCircuits) {
  for (std::uint64_t seed = 0; seed < 30; ++seed) {
    std::mt19937_64 rng(seed);
    const int n = 13 + static_cast<int>(seed * 7 % 150);
    const Circuit c = gen_random_circuit(n, 20, rng);
    const int q = (n + 1) / 2 + static_cast<int>(seed % 5);
    const Bipartition p = refine_bipartition(c, q);
    expect_partition(p, n, q);
    std::vector<bool> in_a(static_cast<std::size_t>(n), false);
    for (int v : p.part_a) {
      in_a[static_cast<std::size_t>(v)] = true;
    }
    EXPECT_EQ(crossing_weight(c, in_a), p.n_cut);
    EXPECT_TRUE(std::find(p.part_a.begin(), p.part_a.end(), 0) != p.part_a.end());
  }
}

TEST(Bipartition, HeuristicFindsBlockBoundary) {
  // The generator joins blocks of 24 qubits by a single gate.
  std::mt19937_64 rng(1);
  const Circuit c = gen_random_circuit(142, 30, rng);
  EXPECT_EQ(find_bipartition(c, 127).n_cut, 1);
}

TEST(Overhead, Examples) {
  EXPECT_EQ(overhead(OverheadKind::LO, 0), 1U);
  EXPECT_EQ(overhead(OverheadKind::LO, 2), 81U);
  EXPECT_EQ(overhead(OverheadKind::LOCC, 2), 16U);
  EXPECT_EQ(overhead(OverheadKind::LOWire, 2), 256U);
  EXPECT_EQ(overhead(OverheadKind::LOCC, 4), 256U);
}

TEST(Overhead, ExactPowers) {
  for (int k = 0; k <= 6; ++k) {
    EXPECT_EQ(overhead(OverheadKind::LO, k), ipow(9, k));
    EXPECT_EQ(overhead(OverheadKind::LOCC, k), ipow(4, k));
    EXPECT_EQ(overhead(OverheadKind::LOWire, k), ipow(16, k));
    EXPECT_EQ(overhead(CutMode::LO, k), overhead(OverheadKind::LO, k));
  }
}

TEST(Overhead, Overflow) {
  EXPECT_NO_THROW(overhead(OverheadKind::LOWire, 15));
  EXPECT_THROW(overhead(OverheadKind::LOWire, 16), OverheadOverflowError);
  EXPECT_THROW(overhead(OverheadKind::LO, 21), OverheadOverflowError);
  EXPECT_THROW(overhead(OverheadKind::LO, -1), std::invalid_argument);
}

TEST(TryCut, RejectedByBudget) {
  const Job j = flat("k4", complete(4));
  EXPECT_TRUE(try_cut(j, CutMode::LO, 2, CutBudget{}, false).empty());
  EXPECT_EQ(try_cut(j, CutMode::LO, 2, CutBudget{}, true).size(), 2U * 6561U);
}

TEST(TryCut, SubJobCounts) {
  for (auto [c, k] : {std::pair{line(20), 1}, std::pair{ring(20), 2}}) {
    const Job j = flat("p", c);
    const auto lo = try_cut(j, CutMode::LO, 12, CutBudget{}, false);
    const auto locc = try_cut(j, CutMode::LOCC, 12, CutBudget{}, false);
    EXPECT_EQ(lo.size(), 2 * ipow(9, k));
    EXPECT_EQ(locc.size(), 2 * ipow(4, k));
    EXPECT_LT(locc.size(), lo.size());
  }
}

TEST(TryCut, MandatoryWideJobLO) {
  std::mt19937_64 rng(1);
  const Job j = flat("big", gen_random_circuit(142, 30, rng), 3375);
  const auto subs = try_cut(j, CutMode::LO, 127, CutBudget{}, true);
  ASSERT_EQ(subs.size(), 18U);
  for (const auto& s : subs) {
    EXPECT_NEAR(s.qubits(), 71, 2);
    EXPECT_EQ(s.shots, 3375);
    EXPECT_EQ(s.stage, Stage::Flat);
    EXPECT_EQ(s.parent_id, std::optional<std::string>("big"));
    EXPECT_EQ(s.cut_index, 0);
    EXPECT_EQ(s.n_cut, 1);
    EXPECT_EQ(s.arrival_time, 2.5);
    EXPECT_EQ(s.circuit.depth, 30);
    EXPECT_NO_THROW(validate(s));
  }
}

TEST(TryCut, MandatoryWideJobLOCC) {
  std::mt19937_64 rng(1);
  const Job j = flat("big", gen_random_circuit(142, 30, rng), 3375);
  const auto subs = try_cut(j, CutMode::LOCC, 127, CutBudget{}, true);
  ASSERT_EQ(subs.size(), 8U);
  int up = 0;
  int down = 0;
  int width_a = 0;
  int width_b = 0;
  for (const auto& s : subs) {
    EXPECT_EQ(s.shots, 3375);
    EXPECT_NO_THROW(validate(s));
    if (s.stage == Stage::Upstream) {
      ++up;
      width_a = s.qubits();
    } else {
      ASSERT_EQ(s.stage, Stage::Downstream);
      ++down;
      width_b = s.qubits();
    }
  }
  EXPECT_EQ(up, 4);
  EXPECT_EQ(down, 4);
  EXPECT_EQ(width_a + width_b, 142 + 2);
  EXPECT_NEAR(width_a, 72, 2);
}

TEST(TryCut, FragmentsPartitionQubits) {
  for (std::uint64_t seed = 0; seed < 25; ++seed) {
    std::mt19937_64 rng(seed);
    const Job j = flat("p", gen_random_circuit(28 + static_cast<int>(seed), 10, rng));
    for (CutMode mode : {CutMode::LO, CutMode::LOCC}) {
      const auto plan = plan_cut(j, mode, j.qubits() - 2, CutBudget{}, true);
      ASSERT_TRUE(plan);
      const auto subs = expand_cut(j, *plan);
      ASSERT_EQ(subs.size(), plan->sub_job_count());
      std::set<std::string> frags;
      int width = 0;
      for (const auto& s : subs) {
        if (frags.insert(fragment_id(s)).second) {
          width += s.qubits();
        }
      }
      EXPECT_EQ(frags.size(), 2U);
      const int extra = mode == CutMode::LOCC ? 2 * plan->n_cut : 0;
      EXPECT_EQ(width, j.qubits() + extra);
      std::int64_t one_q = 0;
      for (const auto& f : frags) {
        const auto it = std::find_if(subs.begin(), subs.end(),
                                     [&](const Job& s) { return fragment_id(s) == f; });
        one_q += it->circuit.one_q_gates;
      }
      EXPECT_EQ(one_q, j.circuit.one_q_gates);
    }
  }
}

TEST(TryCut, OptionalCutsRespectBudget) {
  CutBudget tight;
  tight.max_overhead = 9;
  for (std::uint64_t seed = 0; seed < 40; ++seed) {
    std::mt19937_64 rng(seed);
    const Job j = flat("p", gen_random_circuit(8 + static_cast<int>(seed % 10), 6, rng));
    const auto plan = plan_cut(j, CutMode::LO, j.qubits() - 1, tight, false);
    if (plan) {
      EXPECT_LE(plan->overhead, tight.max_overhead);
    }
  }
}

TEST(TryCut, SubJobCannotBeCutAgain) {
  const auto subs = try_cut(flat("p", line(10)), CutMode::LO, 5, CutBudget{}, true);
  EXPECT_THROW(plan_cut(subs.front(), CutMode::LO, 3, CutBudget{}, true), ValidationError);
}

TEST(ClassicalDelay, Examples) {
  const double tau = 1e-6;
  EXPECT_DOUBLE_EQ(classical_delay(1, 1, 2.0, tau, 0.0, 1), 2 * tau);
  EXPECT_NEAR(classical_delay(1, 4096, 2.0, 1e-6, 10e-3, 8), 0.088192, 1e-12);
}

TEST(ClassicalDelay, Linear) {
  const double base = classical_delay(1, 100, 2.0, 1e-6, 0.0, 4);
  EXPECT_DOUBLE_EQ(classical_delay(3, 100, 2.0, 1e-6, 0.0, 4), 3 * base);
  EXPECT_DOUBLE_EQ(classical_delay(1, 300, 2.0, 1e-6, 0.0, 4), 3 * base);
  EXPECT_DOUBLE_EQ(classical_delay(1, 100, 6.0, 1e-6, 0.0, 4), 3 * base);
  EXPECT_DOUBLE_EQ(classical_delay(1, 100, 2.0, 3e-6, 0.0, 4), 3 * base);
}
