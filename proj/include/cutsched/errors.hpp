#pragma once

#include <stdexcept>
#include <string>

namespace cutsched {

/// Malformed input record. The message names the line and field.
class ParseError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// Well-formed input that violates a domain invariant.
class ValidationError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// A job is wider than the device (or group capacity) it was offered to.
class CapacityError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// No bipartition satisfies the requested fragment size bound.
class InfeasibleCutError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// Exact integer overhead does not fit the representable range.
class OverheadOverflowError : public std::overflow_error {
public:
  using std::overflow_error::overflow_error;
};

/// A job cannot be placed on any device of the fleet, even after cutting.
class UnschedulableError : public std::runtime_error {
public:
  UnschedulableError(std::string job_id, const std::string& what)
      : std::runtime_error(what), job_id_(std::move(job_id)) {}

  [[nodiscard]] const std::string& job_id() const noexcept { return job_id_; }

private:
  std::string job_id_;
};

/// Brute-force oracle asked to work beyond its configured limit.
class OracleLimitError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

} // namespace cutsched
