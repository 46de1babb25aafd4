#include "cutsched/errors.hpp"
#include "cutsched/oracles.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <sstream>

using namespace cutsched;

namespace {

Job make(std::string id, int qubits, std::optional<std::string> parent = std::nullopt,
         Stage stage = Stage::Flat) {
  Job j;
  j.id = std::move(id);
  j.circuit.num_qubits = qubits;
  j.parent_id = std::move(parent);
  j.stage = stage;
  return j;
}

} // namespace

TEST(BruteMinCut, HandExamples) {
  Circuit tri{"t", 3, 1, {{0, 1, 1}, {0, 2, 1}, {1, 2, 1}}, 0};
  EXPECT_EQ(oracle::brute_min_cut(tri, 2), 2);
  Circuit weighted{"w", 4, 1, {{0, 1, 5}, {1, 2, 1}, {2, 3, 5}}, 0};
  EXPECT_EQ(oracle::brute_min_cut(weighted, 2), 1);
  EXPECT_EQ(oracle::brute_min_cut(weighted, 3), 1);
  EXPECT_FALSE(oracle::brute_min_cut(weighted, 1));
}

TEST(BruteMinCut, LimitEnforced) {
  Circuit wide{"w", 13, 1, {}, 0};
  EXPECT_THROW(oracle::brute_min_cut(wide, 7), OracleLimitError);
}

TEST(BrutePartition, PairsWhenTheyFit) {
  GroupingParams p;
  p.q_dev = 10;
  p.c_max = 2;
  const std::vector<Job> jobs{make("a", 5), make("b", 5), make("c", 5)};
  const auto best = oracle::brute_partition(jobs, {1.0, 1.0, 1.0}, p);
  ASSERT_TRUE(best);
  EXPECT_EQ(best->min_groups, 2);
  EXPECT_EQ(best->cost, 0.0);
}

TEST(BrutePartition, SeparatesSameParentStages) {
  const std::vector<Job> jobs{make("u", 2, "p", Stage::Upstream),
                              make("d", 2, "p", Stage::Downstream)};
  const auto best = oracle::brute_partition(jobs, {1.0, 1.0}, GroupingParams{});
  ASSERT_TRUE(best);
  EXPECT_EQ(best->min_groups, 2);
}

TEST(BrutePartition, LimitEnforced) {
  std::vector<Job> jobs;
  std::vector<Seconds> t;
  for (int i = 0; i < 9; ++i) {
    jobs.push_back(make("j" + std::to_string(i), 1));
    t.push_back(1.0);
  }
  EXPECT_THROW(oracle::brute_partition(jobs, t, GroupingParams{}), OracleLimitError);
}

TEST(ReferenceCost, WorkedExamples) {
  const Job a = make("a", 1);
  const Job b = make("b", 1);
  EXPECT_EQ(oracle::reference_group_cost({&a}, {2.0}, GroupingParams{}), 0.0);
  EXPECT_EQ(oracle::reference_group_cost({&a, &b}, {2.0, 4.0}, GroupingParams{}), 1.0);
}

TEST(BruteAssign, UnfittableTaskIsInfinite) {
  oracle::AssignInstance inst;
  const double inf = std::numeric_limits<double>::infinity();
  inst.runtime = {{inf}};
  EXPECT_TRUE(std::isinf(oracle::brute_assign(inst)));
  EXPECT_EQ(oracle::brute_assign(oracle::AssignInstance{}), 0.0);
}

TEST(BruteAssign, ReleaseTimesRespected) {
  oracle::AssignInstance inst;
  inst.runtime = {{1.0}, {1.0}};
  inst.release = {0.0, 5.0};
  EXPECT_DOUBLE_EQ(oracle::brute_assign(inst), 6.0);
}

TEST(SelfCheck, AllSuitesPass) {
  std::ostringstream out;
  EXPECT_TRUE(oracle::run_self_check(out, 3)) << out.str();
  EXPECT_EQ(out.str().find("FAIL"), std::string::npos);
}
