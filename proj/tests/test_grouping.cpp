#include "cutsched/errors.hpp"
#include "cutsched/grouping.hpp"
#include "cutsched/oracles.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <random>
#include <set>

using namespace cutsched;

namespace {

Job make(std::string id, int qubits, std::optional<std::string> parent = std::nullopt,
         Stage stage = Stage::Flat) {
  Job j;
  j.id = std::move(id);
  j.circuit.id = j.id;
  j.circuit.num_qubits = qubits;
  j.parent_id = std::move(parent);
  j.stage = stage;
  return j;
}

double cost(const std::vector<Job>& g, const std::vector<Seconds>& t,
            const GroupingParams& p = {}) {
  return group_cost(g, t, p);
}

struct RandomSet {
  std::vector<Job> jobs;
  std::vector<Seconds> runtimes;
  GroupingParams params;
};

RandomSet random_set(std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  RandomSet s;
  s.params.q_dev = std::uniform_int_distribution<int>(20, 127)(rng);
  s.params.c_max = std::uniform_int_distribution<int>(1, 8)(rng);
  const int n = std::uniform_int_distribution<int>(1, 40)(rng);
  std::uniform_int_distribution<int> width(1, s.params.q_dev);
  std::uniform_int_distribution<int> kind(0, 3);
  std::uniform_int_distribution<int> parent(0, 4);
  std::uniform_real_distribution<double> rt(0.1, 10.0);
  for (int i = 0; i < n; ++i) {
    const std::string id = "j" + std::to_string(i);
    switch (kind(rng)) {
    case 0:
      s.jobs.push_back(make(id, width(rng)));
      break;
    case 1:
      s.jobs.push_back(make(id, width(rng), "p" + std::to_string(parent(rng)), Stage::Flat));
      break;
    case 2:
      s.jobs.push_back(make(id, width(rng), "p" + std::to_string(parent(rng)), Stage::Upstream));
      break;
    default:
      s.jobs.push_back(
          make(id, width(rng), "p" + std::to_string(parent(rng)), Stage::Downstream));
    }
    s.runtimes.push_back(rt(rng));
  }
  return s;
}

} // namespace

TEST(GroupCost, Singleton) { EXPECT_EQ(cost({make("a", 5)}, {3.0}), 0.0); }

TEST(GroupCost, TwoToFour) { EXPECT_EQ(cost({make("a", 5), make("b", 5)}, {2.0, 4.0}), 1.0); }

TEST(GroupCost, SameParentUpDownInfinite) {
  const double c = cost({make("u", 5, "p", Stage::Upstream), make("d", 5, "p", Stage::Downstream)},
                        {1.0, 1.0});
  EXPECT_TRUE(std::isinf(c));
  EXPECT_GT(c, 0.0);
}

TEST(GroupCost, CrossParentSpan) {
  GroupingParams p;
  p.lambda = 1.0;
  EXPECT_EQ(cost({make("u", 5, "p", Stage::Upstream), make("d", 5, "q", Stage::Downstream)},
                 {1.0, 1.0}, p),
            1.0);
  p.lambda = 0.25;
  EXPECT_EQ(cost({make("u", 5, "p", Stage::Upstream), make("d", 5, "q", Stage::Downstream)},
                 {1.0, 1.0}, p),
            0.25);
}

TEST(GroupCost, CapacityAndCardinality) {
  GroupingParams p;
  p.q_dev = 10;
  p.c_max = 2;
  EXPECT_TRUE(std::isinf(cost({make("a", 6), make("b", 5)}, {1.0, 1.0}, p)));
  EXPECT_TRUE(std::isinf(cost({make("a", 1), make("b", 1), make("c", 1)}, {1.0, 1.0, 1.0}, p)));
  EXPECT_EQ(cost({make("a", 5), make("b", 5)}, {1.0, 1.0}, p), 0.0);
}

TEST(GroupCost, NonPositiveRuntimeThrows) {
  EXPECT_THROW(cost({make("a", 1)}, {0.0}), std::domain_error);
  EXPECT_THROW(cost({make("a", 1)}, {-1.0}), std::domain_error);
}

TEST(GroupCost, MatchesReferenceImplementation) {
  for (std::uint64_t seed = 0; seed < 300; ++seed) {
    RandomSet s = random_set(seed);
    const std::size_t n = std::min<std::size_t>(s.jobs.size(), 5);
    std::vector<Job> g(s.jobs.begin(), s.jobs.begin() + static_cast<std::ptrdiff_t>(n));
    std::vector<Seconds> t(s.runtimes.begin(), s.runtimes.begin() + static_cast<std::ptrdiff_t>(n));
    std::vector<const Job*> ptrs;
    for (const auto& j : g) {
      ptrs.push_back(&j);
    }
    const double a = group_cost(g, t, s.params);
    const double b = oracle::reference_group_cost(ptrs, t, s.params);
    if (std::isinf(b)) {
      EXPECT_TRUE(std::isinf(a));
    } else {
      EXPECT_NEAR(a, b, 1e-12);
    }
  }
}

TEST(Conflicts, OnlySameParentDifferentStage) {
  EXPECT_TRUE(conflicts(make("a", 1, "p", Stage::Upstream), make("b", 1, "p", Stage::Downstream)));
  EXPECT_FALSE(conflicts(make("a", 1, "p", Stage::Upstream), make("b", 1, "p", Stage::Upstream)));
  EXPECT_FALSE(conflicts(make("a", 1, "p", Stage::Upstream), make("b", 1, "q", Stage::Downstream)));
  EXPECT_FALSE(conflicts(make("a", 1), make("b", 1)));
}

TEST(Partition, EmptyInput) {
  EXPECT_TRUE(partition_indices({}, {}, GroupingParams{}).empty());
}

TEST(Partition, TooWideJobThrows) {
  GroupingParams p;
  p.q_dev = 10;
  const std::vector<Job> jobs{make("a", 11)};
  EXPECT_THROW(partition_indices(jobs, std::vector<Seconds>{1.0}, p), CapacityError);
}

TEST(Partition, LongestFirstGreedy) {
  GroupingParams p;
  p.q_dev = 10;
  p.c_max = 8;
  const std::vector<Job> jobs{make("a", 6), make("b", 5), make("c", 4)};
  const std::vector<Seconds> t{1.0, 3.0, 2.0};
  const auto groups = partition_indices(jobs, t, p);
  ASSERT_EQ(groups.size(), 2U);
  EXPECT_EQ(groups[0], (std::vector<std::size_t>{1, 2}));
  EXPECT_EQ(groups[1], (std::vector<std::size_t>{0}));
}

TEST(Partition, SplitsSameParentStages) {
  const std::vector<Job> jobs{make("u", 3, "p", Stage::Upstream),
                              make("d", 3, "p", Stage::Downstream)};
  const auto groups = partition_groups(jobs, std::vector<Seconds>{1.0, 1.0}, GroupingParams{});
  ASSERT_EQ(groups.size(), 2U);
  for (const auto& g : groups) {
    EXPECT_EQ(g.stage_signature().at("p").size(), 1U);
  }
}

// Property: exact partition, every group feasible.
TEST(Partition, RandomSetsAreFeasiblePartitions) {
  for (std::uint64_t seed = 0; seed < 1000; ++seed) {
    const RandomSet s = random_set(seed);
    const auto groups = partition_indices(s.jobs, s.runtimes, s.params);
    std::multiset<std::size_t> seen;
    for (const auto& g : groups) {
      ASSERT_FALSE(g.empty());
      ASSERT_LE(static_cast<int>(g.size()), s.params.c_max);
      int demand = 0;
      std::vector<Job> members;
      std::vector<Seconds> t;
      for (std::size_t i : g) {
        seen.insert(i);
        demand += s.jobs[i].qubits();
        members.push_back(s.jobs[i]);
        t.push_back(s.runtimes[i]);
      }
      ASSERT_LE(demand, s.params.q_dev);
      for (const auto& [parent, stages] : partition_groups(members, t, s.params).front()
                                              .stage_signature()) {
        (void)parent;
        ASSERT_FALSE(stages.count(Stage::Upstream) && stages.count(Stage::Downstream));
      }
      ASSERT_TRUE(std::isfinite(group_cost(members, t, s.params)));
    }
    ASSERT_EQ(seen.size(), s.jobs.size());
    for (std::size_t i = 0; i < s.jobs.size(); ++i) {
      ASSERT_EQ(seen.count(i), 1U);
    }
  }
}

TEST(Partition, DeterministicForPermutedInput) {
  RandomSet s = random_set(42);
  const auto a = partition_groups(s.jobs, s.runtimes, s.params);
  std::reverse(s.jobs.begin(), s.jobs.end());
  std::reverse(s.runtimes.begin(), s.runtimes.end());
  const auto b = partition_groups(s.jobs, s.runtimes, s.params);
  ASSERT_EQ(a.size(), b.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    EXPECT_EQ(a[i].members, b[i].members);
  }
}

TEST(Partition, AgreesWithExhaustiveOracle) {
  const auto r = oracle::check_partition(200, 5);
  EXPECT_TRUE(r.passed()) << r.first_failure;
}

TEST(GroupBuilder, RespectsLimits) {
  GroupBuilder b(10, 2);
  const Job a = make("a", 4);
  const Job big = make("big", 7);
  const Job c = make("c", 6);
  const Job d = make("d", 1);
  EXPECT_TRUE(b.try_add(a, 0));
  EXPECT_FALSE(b.try_add(big, 1));
  EXPECT_TRUE(b.try_add(c, 2));
  EXPECT_TRUE(b.full());
  EXPECT_FALSE(b.try_add(d, 3));
  EXPECT_EQ(b.qubits_used(), 10);
  EXPECT_EQ(b.indices(), (std::vector<std::size_t>{0, 2}));
}
