#pragma once

#include "cutsched/workload.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace cutsched {

/// Execution strategy for a cut circuit.
enum class CutMode { LO, LOCC };

/// Overhead families: LO gate cuts, LOCC cuts, LO wire cuts.
enum class OverheadKind { LO, LOCC, LOWire };

std::string_view to_string(CutMode mode);
std::optional<CutMode> parse_cut_mode(std::string_view text);

struct Bipartition {
  std::vector<int> part_a;
  std::vector<int> part_b;
  /// Total coupling weight crossing the partition.
  int n_cut = 0;
};

struct CutPlan {
  std::string parent_id;
  std::vector<int> part_a;
  std::vector<int> part_b;
  int n_cut = 0;
  CutMode mode = CutMode::LO;
  /// 9^n_cut (LO) or 4^n_cut (LOCC).
  std::uint64_t overhead = 1;
  /// Bell-pair ancillas added to each fragment; LOCC only.
  int ancilla_per_side = 0;

  /// Number of sub-jobs the plan expands into: two fragments times overhead.
  [[nodiscard]] std::uint64_t sub_job_count() const { return 2 * overhead; }
};

struct CutBudget {
  /// Global sampling budget for adaptive cuts (729 = three LO gate cuts).
  std::uint64_t max_overhead = 729;
  /// A flat job is adaptively cut-eligible once q_j >= threshold * max Q_m.
  double adaptive_threshold = 0.5;
  /// Ceiling for mandatory cuts, which otherwise bypass the budget.
  std::uint64_t hard_max_overhead = 6561;
};

/// Circuits up to this width are bipartitioned by exhaustive search.
inline constexpr int kExactBipartitionLimit = 12;

/**
 * Minimum-crossing bipartition with both sides non-empty and at most
 * `q_target` qubits. Exact for small circuits; otherwise a deterministic
 * Kernighan-Lin style move refinement. Among equal crossings the more
 * balanced split wins.
 *
 * Throws InfeasibleCutError when ceil(n / 2) > q_target.
 */
Bipartition find_bipartition(const Circuit& circuit, int q_target);

/// The heuristic path of find_bipartition, exposed for testing at any width.
Bipartition refine_bipartition(const Circuit& circuit, int q_target);

/// Crossing weight of a given side assignment (true = side A).
int crossing_weight(const Circuit& circuit, const std::vector<bool>& in_a);

/// 9^n, 4^n or 16^n exactly. Throws OverheadOverflowError past 2^64 - 1.
std::uint64_t overhead(OverheadKind kind, int n_cut);
std::uint64_t overhead(CutMode mode, int n_cut);

/**
 * Chooses a bipartition of a flat job for `mode`. Returns nullopt when an
 * optional cut is rejected (budget exceeded, cut would not help). Mandatory
 * cuts skip the budget but throw InfeasibleCutError if no split fits.
 */
std::optional<CutPlan> plan_cut(const Job& job, CutMode mode, int fleet_max_q,
                                const CutBudget& budget, bool mandatory);

/// Sub-jobs realizing `plan`: `overhead` variants of each fragment.
std::vector<Job> expand_cut(const Job& job, const CutPlan& plan);

/// Fragment a sub-job belongs to (its id without the variant suffix); the
/// job's own id for uncut jobs.
std::string fragment_id(const Job& job);

/// plan_cut followed by expand_cut; empty when the cut is rejected.
std::vector<Job> try_cut(const Job& job, CutMode mode, int fleet_max_q,
                         const CutBudget& budget, bool mandatory);

/// Default classical bits per cut per shot (one Bell measurement).
inline constexpr double kDefaultBetaComm = 2.0;

/**
 * Feed-forward latency between the upstream and downstream halves of an
 * LOCC cut: n_cut * beta_comm * tau_link * shots + gamma_proc * n_sub.
 */
Seconds classical_delay(int n_cut, std::int64_t shots, double beta_comm,
                        Seconds tau_link, Seconds gamma_proc, std::int64_t n_sub);

} // namespace cutsched
