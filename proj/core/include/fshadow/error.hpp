#pragma once

#include <stdexcept>
#include <string>

namespace fshadow {

// Precondition or input-contract violation.
class ValidationError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// A requested build exceeds the configured size guard.
class CostGuardError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// The system-row block of the channel is rank deficient for this ancilla count.
class InfeasiblePlanError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class QuadratureError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline void require(bool cond, const std::string& msg) {
  if (!cond) throw ValidationError(msg);
}

}  // namespace fshadow
