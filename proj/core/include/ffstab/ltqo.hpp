#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "ffstab/spectra.hpp"

namespace ffstab {

struct WitnessOptions {
  int restarts = 20;
  int max_iter = 500;
  double rel_tol = 1e-8;
  double zero_tol = 1e-11;
  std::uint64_t seed = 1;
};

struct WitnessResult {
  double lower_bound = 0.0;
  bool exact_zero = false;
  double basis_residual = 0.0;  // max entry of the (even) linear map on matrix units
  int restarts = 0;
  int iterations = 0;
  Matrix maximizer;  // unitary on b(x,k) attaining lower_bound
};

// The map A -> P_{b(x,n)} (A - omega(A)) P_{b(x,n)} for A on b(x,k), compressed to ker H_{b(x,n)}.
class LTQOWitness {
 public:
  LTQOWitness(KernelCache& cache, int x, int n, int k, bool even_only);

  const Interval& region() const { return region_; }
  const Interval& probe_ball() const { return probe_; }
  int separation() const { return separation_; }
  Eigen::Index observable_dim() const { return rho_omega_.rows(); }

  double omega(const Matrix& a) const;
  // ||P (A - omega(A)) P|| / ||A||
  double objective(const Matrix& a) const;
  double basis_residual() const;
  WitnessResult evaluate(const WitnessOptions& opts, const Matrix* warm_start = nullptr) const;

 private:
  Matrix compressed(const Matrix& a) const;
  Matrix restrict_even(const Matrix& m) const;

  Interval region_;
  Interval probe_;
  int separation_ = 0;
  bool even_only_ = false;
  int d_ = 2;
  Matrix rho_omega_;
  std::vector<Matrix> x_;  // X_ij = rho_ji - delta_ij rho_omega, row-major in (i, j)
  Eigen::Index m_ = 0;
};

WitnessResult ltqo_witness(KernelCache& cache, int x, int n, int k, bool even_only, const WitnessOptions& opts = {});

struct LTQOSample {
  int x = 0;
  int n = 0;
  int k = 0;
  int separation = 0;
  double lower_bound = 0.0;
  bool exact_zero = false;
};

struct FittedDecay {
  enum class Family { Geometric, Power, Step };
  Family family = Family::Step;
  double parameter = 0.0;  // ratio, exponent, or cutoff
  double prefactor = 0.0;
  double residual = 0.0;
};

struct LTQOProfile {
  std::vector<LTQOSample> samples;
  std::optional<FittedDecay> fitted;
  int failures = 0;  // samples contradicting the expected decay
};

FittedDecay fit_omega(const std::vector<LTQOSample>& samples);

}  // namespace ffstab
