#pragma once

#include "cutsched/workload.hpp"

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace cutsched {

/// One processor module of the fleet, with device-wide calibration figures.
struct Device {
  std::string name;
  int num_qubits = 1;
  double err_1q = 0.0;
  double err_2q = 0.0;
  double err_readout = 0.0;
  Seconds t_1q = 1e-8;
  Seconds t_2q = 1e-7;
  Seconds t_readout = 1e-6;
  /// Load/unload overhead paid once per executed group.
  Seconds t_load = 0.0;
  /// Classical interconnect latency to peer modules.
  Seconds tau_link = 1e-6;
  /// Classical post-processing per sub-job.
  Seconds gamma_proc = 0.0;

  friend bool operator==(const Device&, const Device&) = default;
};

struct Fleet {
  std::vector<Device> devices;

  [[nodiscard]] int max_capacity() const;
  /// Largest device, ties broken by name. Used as the runtime reference when
  /// ordering jobs before any device is chosen.
  [[nodiscard]] const Device& reference_device() const;
  [[nodiscard]] const Device* find(std::string_view name) const;

  friend bool operator==(const Fleet&, const Fleet&) = default;
};

/// Throws ValidationError on empty fleets, duplicate names, bad figures.
void validate(const Fleet& fleet);

/// Eleven synthetic modules: two peer-linked 127-qubit devices plus nine
/// smaller ones of 27 to 65 qubits with varied error rates.
Fleet default_fleet();

inline constexpr int kFleetFormatVersion = 1;

std::string serialize_fleet(const Fleet& fleet);
Fleet parse_fleet(std::string_view text);
void save_fleet(const Fleet& fleet, const std::filesystem::path& path);
Fleet load_fleet(const std::filesystem::path& path);

/**
 * Wall time to run `job` alone on `device`:
 *   shots * (depth * t_2q + t_readout) + t_load
 * Throws CapacityError when the job is wider than the device.
 */
Seconds runtime_estimate(const Job& job, const Device& device);

/**
 * Log probability of a successful trial, a sum of log-survival terms over
 * two-qubit gates, one-qubit gates and readouts. Always <= 0; returns
 * -infinity when a used error rate equals 1.
 */
double lpst(const Circuit& circuit, const Device& device);
double lpst(const Job& job, const Device& device);
/// Same closed form from precomputed gate and readout counts.
double lpst(std::int64_t two_q_gates, std::int64_t one_q_gates, int qubits,
            const Device& device);

} // namespace cutsched
