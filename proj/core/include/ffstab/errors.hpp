#pragma once

#include <stdexcept>
#include <string>

namespace ffstab {

struct DomainError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

struct ParityError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// No eigenvalue below the kernel threshold.
struct FrustrationError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct GapClosedError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct FlowAccuracyError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct PartitionError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct DivergenceError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct ModelError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Eigenvalue tracking could not be certified on [eps_lo, eps_hi], even after refinement.
class TrackingError : public std::runtime_error {
 public:
  TrackingError(const std::string& what, double eps_lo, double eps_hi)
      : std::runtime_error(what), eps_lo_(eps_lo), eps_hi_(eps_hi) {}
  double eps_lo() const { return eps_lo_; }
  double eps_hi() const { return eps_hi_; }

 private:
  double eps_lo_;
  double eps_hi_;
};

}  // namespace ffstab
