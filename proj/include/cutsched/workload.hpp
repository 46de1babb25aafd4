#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <random>
#include <string>
#include <string_view>
#include <vector>

namespace cutsched {

/// Durations and timestamps are seconds of simulated time.
using Seconds = double;

/// Weighted undirected qubit pair; weight counts two-qubit gates on the pair.
struct CouplingEdge {
  int a = 0;
  int b = 0;
  int weight = 1;

  friend bool operator==(const CouplingEdge&, const CouplingEdge&) = default;
};

/**
 * Abstract description of a quantum program: register width, layer depth and
 * the multigraph of two-qubit interactions. No gate identities are kept.
 */
struct Circuit {
  std::string id;
  int num_qubits = 1;
  int depth = 1;
  /// Canonical form: a < b, one entry per pair, sorted by (a, b).
  std::vector<CouplingEdge> coupling;
  std::int64_t one_q_gates = 0;

  [[nodiscard]] std::int64_t volume() const {
    return static_cast<std::int64_t>(num_qubits) * depth;
  }
  /// Total two-qubit gate count (sum of coupling weights).
  [[nodiscard]] std::int64_t two_q_gates() const;

  friend bool operator==(const Circuit&, const Circuit&) = default;
};

/// Merges parallel edges, orders endpoints and sorts. Self loops are dropped.
std::vector<CouplingEdge> canonical_coupling(std::vector<CouplingEdge> edges);

enum class Stage { Flat, Upstream, Downstream };

std::string_view to_string(Stage stage);
std::optional<Stage> parse_stage(std::string_view text);

struct Job {
  std::string id;
  Circuit circuit;
  std::int64_t shots = 1;
  Seconds arrival_time = 0.0;
  std::optional<std::string> parent_id;
  Stage stage = Stage::Flat;
  std::optional<int> cut_index;
  /// Crossing gates of the originating cut; 0 for uncut jobs.
  int n_cut = 0;

  [[nodiscard]] int qubits() const { return circuit.num_qubits; }
  /// Id of the user-submitted job this (sub-)job belongs to.
  [[nodiscard]] const std::string& root_id() const {
    return parent_id ? *parent_id : id;
  }
  [[nodiscard]] bool is_sub_job() const { return parent_id.has_value(); }

  friend bool operator==(const Job&, const Job&) = default;
};

/// Throws ValidationError if the circuit's structural invariants fail.
void validate(const Circuit& circuit);
/// Throws ValidationError if the job (or its circuit) is inconsistent.
void validate(const Job& job);

enum class WorkloadClass { Small, LargeMandatory, RandomHeterogeneous };

std::string_view to_string(WorkloadClass cls);
std::optional<WorkloadClass> parse_workload_class(std::string_view text);

struct IntRange {
  int lo = 1;
  int hi = 1;

  [[nodiscard]] bool empty() const { return hi < lo; }
  friend bool operator==(const IntRange&, const IntRange&) = default;
};

/// Shape parameters of the synthetic circuit generator.
struct CircuitGenParams {
  /// Qubits are laid out on a line and split into blocks of this size; only a
  /// single gate crosses each block boundary.
  int block_size = 24;
  /// Fraction of intra-block gates placed between non-adjacent qubits.
  double long_range_fraction = 0.1;
};

struct WorkloadSpec {
  WorkloadClass cls = WorkloadClass::Small;
  int count = 50;
  /// Poisson arrival rate in jobs per second.
  double arrival_rate = 0.5;
  /// Width range of regular jobs; clipped to capacity_threshold.
  IntRange width_range{2, 40};
  IntRange depth_range{5, 50};
  /// Fraction of jobs wider than capacity_threshold.
  double large_fraction = 0.0;
  IntRange large_width_range{128, 160};
  /// Widest job that fits the largest default device.
  int capacity_threshold = 127;
  std::uint64_t seed = 0;
  CircuitGenParams circuit;

  /// Defaults for each experiment class.
  static WorkloadSpec defaults(WorkloadClass cls);
};

void validate(const WorkloadSpec& spec);

struct ShotRule {
  std::int64_t base = 1000;
  double factor = 1.5;
};

/**
 * Shots grow geometrically with the decade of the circuit volume:
 * round(base * factor^floor(log10(max(width * depth, 1)))).
 */
std::int64_t shots_for_volume(int width, int depth, std::int64_t base = 1000,
                              double factor = 1.5);

Circuit gen_random_circuit(int width, int depth, std::mt19937_64& rng,
                           const CircuitGenParams& params = {},
                           std::string id = {});

std::vector<Job> gen_workload(const WorkloadSpec& spec,
                              const ShotRule& shots = {});

// Workload files: JSON lines, header first.
inline constexpr int kWorkloadFormatVersion = 1;

std::string serialize_workload(const std::vector<Job>& jobs);
std::vector<Job> parse_workload(std::string_view text);
void save_workload(const std::vector<Job>& jobs,
                   const std::filesystem::path& path);
std::vector<Job> load_workload(const std::filesystem::path& path);

} // namespace cutsched
