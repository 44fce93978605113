#pragma once

#include <stdexcept>
#include <string>

namespace lf {

// Domain failures callers are expected to handle (exit code 1 in the CLI).
struct DomainError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct TargetBlockedError : DomainError {
  explicit TargetBlockedError(const std::string& what) : DomainError(what) {}
};

struct EmptyRoadmapError : DomainError {
  explicit EmptyRoadmapError(const std::string& what) : DomainError(what) {}
};

struct NonConvergentError : DomainError {
  explicit NonConvergentError(const std::string& what) : DomainError(what) {}
};

struct RepairFailedError : DomainError {
  explicit RepairFailedError(const std::string& what) : DomainError(what) {}
};

struct MissionAbortedError : DomainError {
  explicit MissionAbortedError(const std::string& what) : DomainError(what) {}
};

// Bad inputs: malformed files, out-of-contract arguments (exit code 2 in the CLI).
struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct NotUnitError : UsageError {
  explicit NotUnitError(const std::string& what) : UsageError(what) {}
};

struct ScenarioError : UsageError {
  // `where` is a JSON-pointer-ish path into the offending document.
  ScenarioError(const std::string& where, const std::string& what)
      : UsageError(where + ": " + what), where(where) {}
  std::string where;
};

}  // namespace lf
