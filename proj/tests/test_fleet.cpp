#include "cutsched/cutplan.hpp"
#include "cutsched/errors.hpp"
#include "cutsched/fleet.hpp"

#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <random>

using namespace cutsched;

namespace {

Device ideal(int qubits = 127) {
  Device d;
  d.name = "ideal";
  d.num_qubits = qubits;
  d.t_2q = 1e-6;
  d.t_readout = 1e-9;
  return d;
}

Job job_of(int qubits, int depth, std::int64_t shots) {
  Job j;
  j.id = "j";
  j.circuit.num_qubits = qubits;
  j.circuit.depth = depth;
  j.shots = shots;
  return j;
}

} // namespace

TEST(Fleet, DefaultFleetShape) {
  const Fleet f = default_fleet();
  EXPECT_NO_THROW(validate(f));
  EXPECT_EQ(f.devices.size(), 11U);
  EXPECT_EQ(f.max_capacity(), 127);
  EXPECT_EQ(std::count_if(f.devices.begin(), f.devices.end(),
                          [](const Device& d) { return d.num_qubits == 127; }),
            2);
  for (const auto& d : f.devices) {
    if (d.num_qubits != 127) {
      EXPECT_GE(d.num_qubits, 27);
      EXPECT_LE(d.num_qubits, 65);
    }
  }
}

TEST(Fleet, EmptyFileRejected) {
  try {
    parse_fleet(R"({"format":"cutsched.fleet","version":1})"
                "\n");
    FAIL();
  } catch (const ValidationError& e) {
    EXPECT_STREQ(e.what(), "fleet must contain at least one device");
  }
}

TEST(Fleet, RoundTrip) {
  const auto path = std::filesystem::temp_directory_path() / "cutsched_test_fleet.jsonl";
  save_fleet(default_fleet(), path);
  EXPECT_EQ(load_fleet(path), default_fleet());
  std::filesystem::remove(path);
}

TEST(Fleet, DuplicateNamesRejected) {
  Fleet f;
  f.devices = {ideal(), ideal()};
  EXPECT_THROW(validate(f), ValidationError);
}

TEST(Fleet, ClassificationStableUnderReordering) {
  Fleet f = default_fleet();
  const int before = f.max_capacity();
  const std::string ref = f.reference_device().name;
  std::reverse(f.devices.begin(), f.devices.end());
  EXPECT_EQ(f.max_capacity(), before);
  EXPECT_EQ(f.reference_device().name, ref);
}

TEST(Runtime, SingleShot) {
  Device d = ideal();
  d.t_readout = 1e-30;
  d.t_2q = 1e-6;
  EXPECT_NEAR(runtime_estimate(job_of(2, 1, 1), d), 1e-6, 1e-20);
}

TEST(Runtime, WorkedExample) {
  Device d = ideal();
  d.t_2q = 0.5e-6;
  d.t_readout = 4e-6;
  d.t_load = 1.0;
  EXPECT_NEAR(runtime_estimate(job_of(10, 50, 1000), d), 1.029, 1e-12);
}

TEST(Runtime, LinearInShots) {
  const Device d = default_fleet().devices.front();
  const double one = runtime_estimate(job_of(10, 20, 1000), d) - d.t_load;
  const double two = runtime_estimate(job_of(10, 20, 2000), d) - d.t_load;
  EXPECT_DOUBLE_EQ(two, 2 * one);
}

TEST(Runtime, AtLeastLoadTime) {
  for (const auto& d : default_fleet().devices) {
    EXPECT_GE(runtime_estimate(job_of(2, 1, 1), d), d.t_load);
  }
}

TEST(Runtime, TooWideThrows) {
  EXPECT_THROW(runtime_estimate(job_of(128, 1, 1), ideal()), CapacityError);
}

TEST(Lpst, ErrorFreeIsZero) {
  Circuit c{"c", 3, 2, {{0, 1, 2}, {1, 2, 1}}, 4};
  EXPECT_EQ(lpst(c, ideal()), 0.0);
}

TEST(Lpst, SingleGate) {
  Device d = ideal();
  d.err_2q = 0.01;
  Circuit c{"c", 2, 1, {{0, 1, 1}}, 0};
  EXPECT_NEAR(lpst(c, d), -0.01005033585350145, 1e-15);
}

TEST(Lpst, MonotoneInErrorRates) {
  Circuit c{"c", 3, 2, {{0, 1, 2}, {1, 2, 1}}, 4};
  Device d = default_fleet().devices.front();
  const double base = lpst(c, d);
  for (double Device::*field : {&Device::err_1q, &Device::err_2q, &Device::err_readout}) {
    Device worse = d;
    worse.*field += 0.01;
    EXPECT_LT(lpst(c, worse), base);
  }
}

TEST(Lpst, CertainFailure) {
  Device d = ideal();
  d.err_readout = 1.0;
  Circuit c{"c", 2, 1, {}, 0};
  EXPECT_EQ(lpst(c, d), -std::numeric_limits<double>::infinity());
  d.err_readout = 0.0;
  d.err_2q = 1.0;
  EXPECT_EQ(lpst(c, d), 0.0);
}

// Fragments of an LO cut drop exactly the crossing gates.
TEST(Lpst, AdditiveOverLoFragments) {
  const Device d = default_fleet().devices.front();
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    std::mt19937_64 rng(seed);
    Job j;
    j.id = "p";
    j.circuit = gen_random_circuit(26 + static_cast<int>(seed % 20), 15, rng);
    j.shots = 100;
    const auto plan = plan_cut(j, CutMode::LO, j.qubits() - 1, CutBudget{}, true);
    ASSERT_TRUE(plan);
    const auto subs = expand_cut(j, *plan);
    const Job* a = nullptr;
    const Job* b = nullptr;
    for (const auto& s : subs) {
      if (s.id.find(".A.") != std::string::npos) {
        a = &s;
      } else {
        b = &s;
      }
    }
    ASSERT_TRUE(a && b);
    const double crossing = plan->n_cut * std::log1p(-d.err_2q);
    EXPECT_NEAR(lpst(j, d), lpst(*a, d) + lpst(*b, d) + crossing, 1e-9);
  }
}
