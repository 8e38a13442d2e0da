#include "ffstab/stability_bounds.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <sstream>

#include "ffstab/errors.hpp"

namespace ffstab {

OmegaModel OmegaModel::from_fit(const FittedDecay& fit) {
  switch (fit.family) {
    case FittedDecay::Family::Step:
      return fit.parameter <= 0.0 ? zero() : step(fit.parameter, fit.prefactor > 0.0 ? fit.prefactor : 2.0);
    case FittedDecay::Family::Geometric:
      return geometric(fit.prefactor, fit.parameter);
    case FittedDecay::Family::Power:
      return power(fit.prefactor, fit.parameter);
  }
  return zero();
}

void OmegaModel::validate() const {
  if (prefactor < 0.0) throw DomainError("Omega: negative prefactor");
  switch (kind) {
    case Kind::Zero:
      break;
    case Kind::Step:
      if (parameter < 0.0) throw DomainError("Omega: negative step cutoff");
      break;
    case Kind::Geometric:
      if (!(parameter > 0.0)) throw DomainError("Omega: geometric ratio must be positive");
      if (parameter >= 1.0) throw DivergenceError("Omega: geometric ratio >= 1 does not decay");
      break;
    case Kind::Power:
      if (!(parameter > 0.0)) throw DivergenceError("Omega: power exponent must be positive");
      break;
  }
}

double OmegaModel::operator()(double r) const {
  r = std::max(r, 0.0);
  switch (kind) {
    case Kind::Zero:
      return 0.0;
    case Kind::Step:
      return r < parameter ? prefactor : 0.0;
    case Kind::Geometric:
      return prefactor * std::pow(parameter, r);
    case Kind::Power:
      return prefactor * std::pow(1.0 + r, -parameter);
  }
  return 0.0;
}

std::string OmegaModel::describe() const {
  std::ostringstream os;
  switch (kind) {
    case Kind::Zero:
      os << "zero";
      break;
    case Kind::Step:
      os << "step(cutoff=" << parameter << ", plateau=" << prefactor << ")";
      break;
    case Kind::Geometric:
      os << "geometric(A=" << prefactor << ", q=" << parameter << ")";
      break;
    case Kind::Power:
      os << "power(A=" << prefactor << ", nu=" << parameter << ")";
      break;
  }
  return os.str();
}

namespace {

// Closed-form bounds on one-sided tails n > N. `weighted` adds the factor n.
struct TailBounds {
  const OmegaModel& omega;
  const DerivedFSpec& F0;

  // sum_{n>N} w(n) Omega((n-1)/2)^{1/2}
  double omega_half(long N, bool weighted) const {
    const double A = omega.prefactor;
    switch (omega.kind) {
      case OmegaModel::Kind::Zero:
      case OmegaModel::Kind::Step:
        return 0.0;  // N is chosen past the cutoff
      case OmegaModel::Kind::Geometric: {
        const double rho = std::pow(omega.parameter, 0.25);
        const double pre = std::sqrt(A) / rho;
        const double rN = std::pow(rho, static_cast<double>(N + 1));
        if (!weighted) return pre * rN / (1.0 - rho);
        return pre * rN * ((N + 1) - N * rho) / ((1.0 - rho) * (1.0 - rho));
      }
      case OmegaModel::Kind::Power: {
        const double nu = omega.parameter;
        const double pre = std::sqrt(A) * std::pow(2.0, 0.5 * nu);
        if (weighted) {
          if (nu <= 4.0) throw DivergenceError("J1 diverges: Omega must decay faster than n^-4");
          return pre * std::pow(N + 1.0, 2.0 - 0.5 * nu) / (0.5 * nu - 2.0);
        }
        if (nu <= 2.0) throw DivergenceError("J2 diverges: Omega must decay faster than n^-2");
        return pre * std::pow(N + 1.0, 1.0 - 0.5 * nu) / (0.5 * nu - 1.0);
      }
    }
    return 0.0;
  }

  // sum_{z>N} Omega(z/2)
  double omega_full(long N) const {
    const double A = omega.prefactor;
    switch (omega.kind) {
      case OmegaModel::Kind::Zero:
      case OmegaModel::Kind::Step:
        return 0.0;
      case OmegaModel::Kind::Geometric: {
        const double rho = std::sqrt(omega.parameter);
        return A * std::pow(rho, static_cast<double>(N + 1)) / (1.0 - rho);
      }
      case OmegaModel::Kind::Power: {
        const double nu = omega.parameter;
        if (nu <= 1.0) throw DivergenceError("J3 diverges: Omega must decay faster than 1/n");
        return A * std::pow(2.0, nu) * std::pow(N + 2.0, 1.0 - nu) / (nu - 1.0);
      }
    }
    return 0.0;
  }

  // 1 + c x with x = n/36 - shift, written as alpha + beta n.
  double alpha(double shift) const { return 1.0 - F0.base.c * shift; }
  double beta() const { return F0.base.c / 36.0; }

  // sum_{n>N} w(n) F0((n-3)/2)
  double f0_half(long N, bool weighted) const {
    const double kappa = F0.base.kappa;
    const double a = alpha(1.0 / 12.0 + F0.params.R + 1.5);
    const double b = beta();
    const double y0 = a + b * N;
    if (weighted) {
      if (kappa <= 2.0) throw DivergenceError("J1 diverges: F0 needs kappa > 2");
      return F0.base.L / (b * b) *
             (std::pow(y0, 2.0 - kappa) / (kappa - 2.0) - a * std::pow(y0, 1.0 - kappa) / (kappa - 1.0));
    }
    if (kappa <= 1.0) throw DivergenceError("J2 diverges: F0 needs kappa > 1");
    return F0.base.L / b * std::pow(y0, 1.0 - kappa) / (kappa - 1.0);
  }

  // sum_{z>N} F0(floor(z/2)) <= sum F0((z-1)/2)
  double f0_full(long N) const {
    const double kappa = F0.base.kappa;
    if (kappa <= 1.0) throw DivergenceError("J3 diverges: F0 needs kappa > 1");
    const double y0 = alpha(1.0 / 36.0 + F0.params.R + 1.5) + beta() * N;
    return F0.base.L / beta() * std::pow(y0, 1.0 - kappa) / (kappa - 1.0);
  }
};

void check_f0(const DerivedFSpec& F0) {
  if (F0.kind != DerivedFSpec::Kind::F0) throw DomainError("J constants need the shifted base F0");
  F0.base.validate();
}

long truncation_for(const OmegaModel& omega, const DerivedFSpec& F0, int n_min) {
  long N = 100000;
  const double plateau_end = 36.0 * (F0.params.R + 1.5) + 4.0;
  // n (alpha + beta n)^-kappa is decreasing once alpha < (kappa - 1) beta n.
  const double kappa = F0.base.kappa;
  const double mono = kappa > 1.0 ? std::max(0.0, 1.0 - F0.base.c * (F0.params.R + 1.5)) /
                                        ((kappa - 1.0) * F0.base.c / 36.0)
                                  : 0.0;
  N = std::max<long>(N, static_cast<long>(std::ceil(std::max(plateau_end, mono))) + 1);
  if (omega.kind == OmegaModel::Kind::Step)
    N = std::max<long>(N, static_cast<long>(std::ceil(2.0 * omega.parameter)) + 2);
  return std::max<long>(N, n_min);
}

double bracket(const OmegaModel& omega, const DerivedFSpec& F0, long n) {
  return std::sqrt(omega((n - 1) / 2.0)) + F0.value((n - 3) / 2.0);
}

}  // namespace

JConstants j_constants(const OmegaModel& omega, const DerivedFSpec& F0, double C, int n_min) {
  omega.validate();
  check_f0(F0);
  if (C < 0.0) throw DomainError("j_constants: C must be nonnegative");
  if (n_min < 0) throw DomainError("j_constants: n_min must be nonnegative");
  JConstants J;
  J.n_min = n_min;
  J.truncation = truncation_for(omega, F0, n_min);
  const long N = J.truncation;
  const TailBounds tb{omega, F0};

  double s1 = 0.0;
  double s2 = 0.0;
  // Descending order keeps the small terms from being swamped.
  for (long n = N; n >= std::max(n_min, 1); --n) {
    const double b = bracket(omega, F0, n);
    s1 += n * b;
    s2 += b;
  }
  const double zero_term = n_min == 0 ? bracket(omega, F0, 0) : 0.0;
  J.J1 = {40.0 * C * s1, 40.0 * C * (tb.omega_half(N, true) + tb.f0_half(N, true))};
  J.J2 = {20.0 * C * (2.0 * s2 + zero_term), 40.0 * C * (tb.omega_half(N, false) + tb.f0_half(N, false))};

  double s3 = 0.0;
  for (long z = N; z >= 1; --z) s3 += omega(z / 2.0) + 2.0 * F0.value(std::floor(z / 2.0));
  J.J3 = {2.0 * s3 + omega(0.0) + 2.0 * F0.value(0.0), 2.0 * (tb.omega_full(N) + 2.0 * tb.f0_full(N))};
  return J;
}

double kappa_bound(int n, double eps, const OmegaModel& omega, const DerivedFSpec& F0, double C, double eta_norm,
                   double phi_norm) {
  return 20.0 * C * eps * (eta_norm + phi_norm) * bracket(omega, F0, n);
}

FormConstants form_bound_constants(double eta_norm, double phi_int_norm, double M_int, double gamma0, double C,
                                   const JConstants& J) {
  if (!(gamma0 > 0.0)) throw DomainError("form_bound_constants: gamma0 must be positive");
  FormConstants f;
  const double local = eta_norm + phi_int_norm;
  const double uniform = eta_norm + M_int;
  f.delta = J.J2.upper() * local;
  f.beta = 3.0 / gamma0 * J.J1.upper() * local;
  f.alpha = C * local * (J.J3.upper() + 4.0) + f.delta;
  f.p = 3.0 / gamma0 * J.J1.upper() * uniform;
  f.q = (C * (J.J3.upper() + 4.0) + J.J2.upper()) * uniform;
  return f;
}

Threshold stability_threshold(const JConstants& J, const OmegaModel& omega, const DerivedFSpec& F0, double C,
                              double eta_norm, double M_int, double M_D, double gamma0) {
  if (!(gamma0 > 0.0)) throw DomainError("stability_threshold: gamma0 must be positive");
  Threshold t;
  const double scale = eta_norm + M_int;
  t.m = (3.0 * J.J1.upper() + 2.0 * J.J2.upper() + C * (J.J3.upper() + 8.0)) * scale;
  const double denom = t.m + 2.0 * M_D;
  t.eps_star = denom > 0.0 ? std::min(1.0, gamma0 / denom) : 1.0;

  // Double-sum arrangement, summed directly over |n| >= 3 and z in Z.
  const long N = J.truncation;
  const TailBounds tb{omega, F0};
  double s = 0.0;
  for (long n = N; n >= 3; --n) s += (3.0 * n + 2.0) * bracket(omega, F0, n);
  double z_sum = 0.0;
  for (long z = N; z >= 1; --z) z_sum += omega(z / 2.0) + 2.0 * F0.value(std::floor(z / 2.0));
  z_sum = 2.0 * z_sum + omega(0.0) + 2.0 * F0.value(0.0);
  const double value = (40.0 * C * s + C * (z_sum + 8.0)) * scale;
  const double tail = (40.0 * C * (3.0 * (tb.omega_half(N, true) + tb.f0_half(N, true)) +
                                   2.0 * (tb.omega_half(N, false) + tb.f0_half(N, false))) +
                       2.0 * C * (tb.omega_full(N) + 2.0 * tb.f0_full(N))) *
                      scale;
  t.m_display = {value, tail};
  const double slack = t.m_display.tail + (J.J1.tail * 3.0 + J.J2.tail * 2.0 + C * J.J3.tail) * scale +
                       1e-9 * std::max(1.0, t.m);
  t.forms_agree = J.n_min == 3 && std::abs(t.m - t.m_display.value) <= slack;
  return t;
}

EdgeBulkStrengths edge_bulk_strengths(const std::function<Interaction(const Interval&)>& phi_for,
                                      const std::vector<Interval>& probes, int D, const DecayFn& F) {
  if (probes.empty()) throw DomainError("edge_bulk_strengths: empty probe set");
  EdgeBulkStrengths out;
  for (const auto& lam : probes) {
    Interaction phi = phi_for(lam);
    if (lam.diameter() <= std::max(2 * D, phi.range()))
      throw DomainError("edge_bulk_strengths: probe volume needs diam > max(2D, R)");
    EdgeBulkSplit sp = split_edge_bulk(phi, lam, D);
    StrengthRow row{lam, f_norm(sp.bulk, F), 0.0};
    if (!sp.edge.empty()) {
      const Eigen::Index dim = power(phi.d(), lam.size());
      Matrix h = Matrix::Zero(dim, dim);
      accumulate_hamiltonian(h, sp.edge, lam);
      const RealVector ev = eigvalsh_sectors(h, detect_sectors(h, phi.d(), lam.size()));
      row.edge_norm = std::max(std::abs(ev(0)), std::abs(ev(ev.size() - 1)));
    }
    out.M_int = std::max(out.M_int, row.bulk_f_norm);
    out.M_D = std::max(out.M_D, row.edge_norm);
    out.rows.push_back(row);
  }
  return out;
}

FormBoundReport verify_form_bound(const Matrix& H, const Matrix& phi2, double delta, double beta, double eps,
                                  int trials, std::uint64_t seed) {
  if (H.rows() != phi2.rows() || H.cols() != phi2.cols()) throw DomainError("verify_form_bound: dimension mismatch");
  FormBoundReport rep;
  rep.min_slack = std::numeric_limits<double>::infinity();
  auto check = [&](const Vector& v) {
    const double lhs = std::abs(v.dot(phi2 * v));
    const double rhs = delta * eps + beta * eps * v.dot(H * v).real() + 1e-10;
    rep.min_slack = std::min(rep.min_slack, rhs - lhs);
    ++rep.checked;
    if (lhs > rhs) ++rep.violations;
  };
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> g;
  const Eigen::Index n = H.rows();
  for (int t = 0; t < trials; ++t) {
    Vector v(n);
    for (Eigen::Index i = 0; i < n; ++i) v(i) = Complex(g(rng), g(rng));
    check(v / v.norm());
  }
  const EigenSystem es = eigh(H);
  for (Eigen::Index i = 0; i < n; ++i) check(es.vectors.col(i));
  return rep;
}

FermionConstants fermion_constants(const BoundConstants& b) {
  return {b.threshold.m + 2.0 * b.M_D, b.threshold.eps_star};
}

double ground_gap_bound(const BoundConstants& b, double eps) {
  return b.gamma0 - (b.threshold.m + 2.0 * b.M_D) * eps;
}

double higher_gap_bound(const BoundConstants& b, double gamma, double T, double eps) {
  return (1.0 - b.form.p * eps) * gamma - 2.0 * (b.form.q + b.form.p * T + b.M_D) * eps;
}

double calibrate_C(double phi1_norm, double eps, double eta_norm, double psi_norm) {
  if (!(eps > 0.0) || !(eta_norm + psi_norm > 0.0)) throw DomainError("calibrate_C: need eps > 0 and nonzero norms");
  return phi1_norm / (eps * (eta_norm + psi_norm));
}

BoundConstants assemble_constants(double gamma0, double C, std::string C_source, double eta_norm,
                                  const OmegaModel& omega, const DerivedFSpec& F0, const EdgeBulkStrengths& s) {
  BoundConstants b;
  b.gamma0 = gamma0;
  b.C = C;
  b.C_source = std::move(C_source);
  b.eta_norm = eta_norm;
  b.omega = omega;
  b.F0 = F0;
  b.M_int = s.M_int;
  b.M_D = s.M_D;
  b.J = j_constants(omega, F0, C);
  b.form = form_bound_constants(eta_norm, s.M_int, s.M_int, gamma0, C, b.J);
  b.threshold = stability_threshold(b.J, omega, F0, C, eta_norm, s.M_int, s.M_D, gamma0);
  const FermionConstants fc = fermion_constants(b);
  b.m_prime_D = fc.m_prime_D;
  b.eps_star_fermion = fc.eps_prime;
  return b;
}

}  // namespace ffstab
