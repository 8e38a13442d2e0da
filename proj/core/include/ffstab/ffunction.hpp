#pragma once

#include <functional>
#include <span>
#include <utility>
#include <vector>

#include "ffstab/lattice.hpp"

namespace ffstab {

// Weight h in F(r) = exp(-h(r)) L / (1 + c r)^kappa.
struct Weight {
  enum class Kind { None, StretchedExp, Tabulated };

  Kind kind = Kind::None;
  double K = 0.0;  // h(r) = K r^s
  double s = 1.0;
  // (r, h) knots for the tabulated kind; linear interpolation, last slope extrapolated.
  std::vector<std::pair<double, double>> table;

  static Weight none() { return {}; }
  static Weight stretched_exp(double K, double s);
  static Weight tabulated(std::vector<std::pair<double, double>> knots);

  double operator()(double r) const;
  void validate() const;
  // Monotone and subadditive on the integer grid [0, rmax].
  bool check_on_grid(int rmax) const;
};

struct FFunctionSpec {
  double L = 1.0;
  double c = 1.0;
  double kappa = 3.0;
  Weight weight;

  void validate() const;
  double log_base(double r) const;  // log F^b(r)
  double log_value(double r) const;
  double base(double r) const;
  double value(double r) const;
  FFunctionSpec scaled(double lambda) const;
};

struct DerivedParams {
  double gamma = 1.0;
  double nu = 1.0;
  double K = 1.0;   // lower constant of h(r) >= K r^t
  double K0 = 2.0 / 7.0;
  double t = 1.0;
  int R = 0;
  double C_Phi = 0.0;
};

struct DerivedFSpec {
  enum class Kind { FPhi, F0, GRegrouped };

  Kind kind = Kind::F0;
  FFunctionSpec base;
  DerivedParams params;

  double log_value(double r) const;
  double value(double r) const;
  // Plateau length below which F_phi is constant.
  double plateau() const { return 18.0 * params.R + 27.0; }
};

using DecayFn = std::function<double(double)>;

double evaluate(const FFunctionSpec& spec, double r);
double evaluate(const DerivedFSpec& spec, double r);
DecayFn as_decay(const FFunctionSpec& spec);
DecayFn as_decay(const DerivedFSpec& spec);

double mu(double r, double kappa);

// Truncated sum plus a rigorous bound on the omitted tail.
struct CertifiedSum {
  double value = 0.0;
  double tail = 0.0;
  double upper() const { return value + tail; }
};

// sum over x in Z of F(|x|)
CertifiedSum summation_norm(const FFunctionSpec& spec);
// Upper estimate of sup_{x,y} sum_z F(|x-z|) F(|z-y|) / F(|x-y|).
CertifiedSum convolution_constant(const FFunctionSpec& spec, int truncation);

DerivedFSpec transform_f_phi(const FFunctionSpec& base, double gamma, double nu, double K, double t,
                             int R);
DerivedFSpec shifted_base(const FFunctionSpec& base, int R);
DerivedFSpec regroup_decay(const FFunctionSpec& base);
// L * sum_{n>=1} n exp(-h(n)/2)
CertifiedSum regroup_constant(const FFunctionSpec& base);

double lieb_robinson_velocity(double convolution_constant, double f_norm);

struct SupportNorm {
  SiteSet support;
  double norm = 0.0;
};

// sup over site pairs of sum_{Z containing x,y} ||Phi(Z)|| / F(|x-y|); exact at finite volume.
double f_norm(std::span<const SupportNorm> terms, const DecayFn& F);

}  // namespace ffstab
