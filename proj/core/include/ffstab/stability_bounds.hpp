#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "ffstab/ffunction.hpp"
#include "ffstab/interaction.hpp"
#include "ffstab/ltqo.hpp"

namespace ffstab {

// Monotone LTQO decay Omega(r); negative arguments read as Omega(0).
struct OmegaModel {
  enum class Kind { Zero, Step, Geometric, Power };

  Kind kind = Kind::Zero;
  double prefactor = 0.0;  // plateau for Step, A for A q^r and A (1 + r)^-nu
  double parameter = 0.0;  // cutoff, ratio q, or exponent nu

  static OmegaModel zero() { return {}; }
  static OmegaModel step(double cutoff, double plateau = 2.0) { return {Kind::Step, plateau, cutoff}; }
  static OmegaModel geometric(double A, double q) { return {Kind::Geometric, A, q}; }
  static OmegaModel power(double A, double nu) { return {Kind::Power, A, nu}; }
  static OmegaModel from_fit(const FittedDecay& fit);

  void validate() const;
  double operator()(double r) const;
  std::string describe() const;
};

struct JConstants {
  CertifiedSum J1;
  CertifiedSum J2;
  CertifiedSum J3;
  int n_min = 3;
  long truncation = 0;
};

// J1 = sum_{|n| >= n_min} 20 C |n| [Omega((|n|-1)/2)^{1/2} + F0((|n|-3)/2)], J2 the same without |n|,
// J3 = sum_z Omega(|z|/2) + 2 F0(floor(|z|/2)). Tails are bounded in closed form.
JConstants j_constants(const OmegaModel& omega, const DerivedFSpec& F0, double C, int n_min = 3);

// 20 C eps (eta_norm + phi_norm) [Omega((n-1)/2)^{1/2} + F0((n-3)/2)]
double kappa_bound(int n, double eps, const OmegaModel& omega, const DerivedFSpec& F0, double C, double eta_norm,
                   double phi_norm);

struct FormConstants {
  double delta = 0.0;
  double beta = 0.0;
  double alpha = 0.0;
  double p = 0.0;
  double q = 0.0;
};

// delta, beta, alpha use the per-volume bulk norm; p, q use M_int.
FormConstants form_bound_constants(double eta_norm, double phi_int_norm, double M_int, double gamma0, double C,
                                   const JConstants& J);

struct Threshold {
  double m = 0.0;
  CertifiedSum m_display;  // the double-sum arrangement, summed on its own
  double eps_star = 0.0;
  bool forms_agree = false;
};

Threshold stability_threshold(const JConstants& J, const OmegaModel& omega, const DerivedFSpec& F0, double C,
                              double eta_norm, double M_int, double M_D, double gamma0);

struct StrengthRow {
  Interval lam;
  double bulk_f_norm = 0.0;
  double edge_norm = 0.0;
};

struct EdgeBulkStrengths {
  double M_int = 0.0;
  double M_D = 0.0;
  std::vector<StrengthRow> rows;
};

EdgeBulkStrengths edge_bulk_strengths(const std::function<Interaction(const Interval&)>& phi_for,
                                      const std::vector<Interval>& probes, int D, const DecayFn& F);

struct FormBoundReport {
  int checked = 0;
  int violations = 0;
  double min_slack = 0.0;  // min of rhs - lhs over all vectors
};

FormBoundReport verify_form_bound(const Matrix& H, const Matrix& phi2, double delta, double beta, double eps,
                                  int trials, std::uint64_t seed);

struct BoundConstants {
  double gamma0 = 0.0;
  double C = 0.0;
  std::string C_source;
  double eta_norm = 0.0;
  JConstants J;
  FormConstants form;
  Threshold threshold;
  double M_int = 0.0;
  double M_D = 0.0;
  double eps_star_fermion = 0.0;
  double m_prime_D = 0.0;
  OmegaModel omega;
  DerivedFSpec F0;
};

struct FermionConstants {
  double m_prime_D = 0.0;
  double eps_prime = 0.0;
};

FermionConstants fermion_constants(const BoundConstants& b);

// gamma0 - (m + 2 M_D) eps
double ground_gap_bound(const BoundConstants& b, double eps);
// (1 - p eps) gamma - 2 (q + p T + M_D) eps
double higher_gap_bound(const BoundConstants& b, double gamma, double T, double eps);

// ||Phi^1||_{F_phi} / (eps (eta_norm + psi_norm)), the empirical stand-in for the decomposition constant.
double calibrate_C(double phi1_norm, double eps, double eta_norm, double psi_norm);

BoundConstants assemble_constants(double gamma0, double C, std::string C_source, double eta_norm,
                                  const OmegaModel& omega, const DerivedFSpec& F0, const EdgeBulkStrengths& strengths);

}  // namespace ffstab
