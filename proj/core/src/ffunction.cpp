#include "ffstab/ffunction.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include <boost/math/special_functions/gamma.hpp>

#include "ffstab/errors.hpp"

namespace ffstab {

Weight Weight::stretched_exp(double K, double s) {
  Weight w;
  w.kind = Kind::StretchedExp;
  w.K = K;
  w.s = s;
  w.validate();
  return w;
}

Weight Weight::tabulated(std::vector<std::pair<double, double>> knots) {
  Weight w;
  w.kind = Kind::Tabulated;
  w.table = std::move(knots);
  w.validate();
  return w;
}

double Weight::operator()(double r) const {
  switch (kind) {
    case Kind::None:
      return 0.0;
    case Kind::StretchedExp:
      return r <= 0.0 ? 0.0 : K * std::pow(r, s);
    case Kind::Tabulated: {
      if (r <= 0.0) return 0.0;
      auto it = std::upper_bound(table.begin(), table.end(), r,
                                 [](double v, const auto& p) { return v < p.first; });
      std::size_t hi = it == table.end() ? table.size() - 1 : static_cast<std::size_t>(it - table.begin());
      std::size_t lo = hi - 1;
      const auto& [r0, h0] = table[lo];
      const auto& [r1, h1] = table[hi];
      return h0 + (h1 - h0) * (r - r0) / (r1 - r0);
    }
  }
  return 0.0;
}

void Weight::validate() const {
  switch (kind) {
    case Kind::None:
      return;
    case Kind::StretchedExp:
      if (!(K > 0.0)) throw DomainError("weight: K must be positive");
      if (!(s > 0.0 && s <= 1.0)) throw DomainError("weight: s must lie in (0,1]");
      return;
    case Kind::Tabulated:
      if (table.size() < 2) throw DomainError("weight: table needs at least two knots");
      if (table.front().first != 0.0 || table.front().second != 0.0)
        throw DomainError("weight: table must start at (0,0)");
      for (std::size_t i = 1; i < table.size(); ++i) {
        if (!(table[i].first > table[i - 1].first)) throw DomainError("weight: knots not increasing");
        if (table[i].second < table[i - 1].second) throw DomainError("weight: h not monotone");
      }
      return;
  }
}

bool Weight::check_on_grid(int rmax) const {
  for (int u = 0; u <= rmax; ++u) {
    if ((*this)(u + 1) < (*this)(u)) return false;
    for (int v = 0; u + v <= rmax; ++v)
      if ((*this)(u + v) > (*this)(u) + (*this)(v) + 1e-12) return false;
  }
  return true;
}

void FFunctionSpec::validate() const {
  if (!(L > 0.0)) throw DomainError("F-function: L must be positive");
  if (!(c > 0.0)) throw DomainError("F-function: c must be positive");
  if (!(kappa > 2.0)) throw DomainError("F-function: kappa must exceed 2");
  weight.validate();
}

double FFunctionSpec::log_base(double r) const { return std::log(L) - kappa * std::log1p(c * r); }
double FFunctionSpec::log_value(double r) const { return log_base(r) - weight(r); }
double FFunctionSpec::base(double r) const { return std::exp(log_base(r)); }
double FFunctionSpec::value(double r) const { return std::exp(log_value(r)); }

FFunctionSpec FFunctionSpec::scaled(double lambda) const {
  FFunctionSpec out = *this;
  out.L *= lambda;
  return out;
}

double mu(double r, double kappa) {
  const double knee = std::exp(kappa);
  if (r <= knee) return std::pow(std::numbers::e / kappa, kappa);
  return r / std::pow(std::log(r), kappa);
}

double DerivedFSpec::log_value(double r) const {
  const FFunctionSpec& b = base;
  switch (kind) {
    case Kind::FPhi: {
      double u = r <= plateau() ? 0.0 : r / 18.0 - params.R - 1.5;
      double arg = params.K * params.gamma * b.weight(u) / (2.0 * params.nu);
      return -(params.K0 / params.K) * mu(arg, b.kappa) + b.log_base(u);
    }
    case Kind::F0: {
      double u = std::max(0.0, r / 18.0 - params.R - 1.5);
      return b.log_base(u);
    }
    case Kind::GRegrouped:
      return -0.5 * b.weight(r) + std::log(params.C_Phi) - b.kappa * std::log1p(b.c * r);
  }
  return 0.0;
}

double DerivedFSpec::value(double r) const { return std::exp(log_value(r)); }

double evaluate(const FFunctionSpec& spec, double r) {
  if (r < 0.0) throw DomainError("F-function evaluated at negative distance");
  return spec.value(r);
}

double evaluate(const DerivedFSpec& spec, double r) {
  if (r < 0.0) throw DomainError("F-function evaluated at negative distance");
  return spec.value(r);
}

DecayFn as_decay(const FFunctionSpec& spec) {
  return [spec](double r) { return spec.value(r); };
}

DecayFn as_decay(const DerivedFSpec& spec) {
  return [spec](double r) { return spec.value(r); };
}

namespace {

// Bound on sum_{r > N} F^b(r) by the integral from N.
double base_tail(const FFunctionSpec& f, double N) {
  return f.L * std::pow(1.0 + f.c * N, 1.0 - f.kappa) / (f.c * (f.kappa - 1.0));
}

}  // namespace

CertifiedSum summation_norm(const FFunctionSpec& spec) {
  spec.validate();
  CertifiedSum out;
  out.value = spec.value(0.0);
  long N = 0;
  for (long r = 1; r <= 10'000'000; ++r) {
    out.value += 2.0 * spec.value(static_cast<double>(r));
    N = r;
    if ((r & 1023) == 0 && 2.0 * base_tail(spec, static_cast<double>(r)) < 1e-15 * out.value) break;
  }
  out.tail = 2.0 * base_tail(spec, static_cast<double>(N));
  return out;
}

CertifiedSum convolution_constant(const FFunctionSpec& spec, int truncation) {
  if (truncation <= 0) throw DomainError("convolution_constant: truncation must be positive");
  spec.validate();
  const int T = truncation;
  const int Z = std::max(T, 1000);
  std::vector<double> F(static_cast<std::size_t>(T) + Z + 2);
  for (std::size_t r = 0; r < F.size(); ++r) F[r] = spec.value(static_cast<double>(r));
  const double outer_tail = base_tail(spec, Z);

  // Exact-sum region: S(d) = sum_{z=0}^{d} F(z)F(d-z) + 2 sum_{z=1}^{Z} F(z)F(z+d).
  double best = 0.0;
  double best_tail = 0.0;
  for (int d = 0; d <= T; ++d) {
    double s = 0.0;
    for (int z = 0; z <= d; ++z) s += F[z] * F[d - z];
    for (int z = 1; z <= Z; ++z) s += 2.0 * F[z] * F[z + d];
    double ratio = s / F[d];
    double tail = 2.0 * outer_tail;
    if (ratio + tail > best + best_tail) {
      best = ratio;
      best_tail = tail;
    }
  }

  // Beyond the truncation: split the inner sum at M and bound the ratio of base parts.
  const CertifiedSum norm_b = summation_norm(FFunctionSpec{spec.L, spec.c, spec.kappa, Weight::none()});
  const int M = std::max(1, T / 10);
  double head = 0.0;
  for (int z = 0; z <= M; ++z) head += spec.base(z);
  const double rho = std::pow((1.0 + spec.c * (T + 1)) / (1.0 + spec.c * (T + 1 - M)), spec.kappa);
  const double far = (norm_b.upper() - spec.L) +
                     2.0 * (rho * head + std::pow(2.0, spec.kappa) * base_tail(spec, M));
  if (far > best + best_tail) {
    best_tail = far - best;
  }
  return {best, best_tail};
}

DerivedFSpec transform_f_phi(const FFunctionSpec& base, double gamma, double nu, double K, double t,
                             int R) {
  base.validate();
  if (!(gamma > 0.0 && nu > 0.0 && K > 0.0)) throw DomainError("F_phi: parameters must be positive");
  if (!(t > 0.0 && t <= 1.0)) throw DomainError("F_phi: t must lie in (0,1]");
  if (R < 0) throw DomainError("F_phi: negative range");
  DerivedFSpec out;
  out.kind = DerivedFSpec::Kind::FPhi;
  out.base = base;
  out.params.gamma = gamma;
  out.params.nu = nu;
  out.params.K = K;
  out.params.K0 = std::min(K, 2.0 / 7.0);
  out.params.t = t;
  out.params.R = R;
  return out;
}

DerivedFSpec shifted_base(const FFunctionSpec& base, int R) {
  base.validate();
  if (R < 0) throw DomainError("F_0: negative range");
  DerivedFSpec out;
  out.kind = DerivedFSpec::Kind::F0;
  out.base = base;
  out.params.R = R;
  return out;
}

CertifiedSum regroup_constant(const FFunctionSpec& base) {
  base.validate();
  const Weight& h = base.weight;
  if (h.kind == Weight::Kind::None) throw DomainError("regroup_decay: h = 0 gives a divergent constant");
  if (h.kind == Weight::Kind::Tabulated) {
    const auto& [r1, h1] = h.table.back();
    const auto& [r0, h0] = h.table[h.table.size() - 2];
    if (!(h1 > h0)) throw DomainError("regroup_decay: flat weight tail gives a divergent constant");
    (void)r1;
    (void)r0;
  }

  // f(x) = x exp(-h(x)/2) is eventually decreasing; sum until past that point and tiny.
  double start = 1.0;
  if (h.kind == Weight::Kind::StretchedExp) start = std::pow(2.0 / (h.K * h.s), 1.0 / h.s);
  if (h.kind == Weight::Kind::Tabulated) start = h.table.back().first;

  CertifiedSum out;
  long N = 0;
  for (long n = 1; n <= 100'000'000; ++n) {
    double term = n * std::exp(-0.5 * h(static_cast<double>(n)));
    out.value += term;
    N = n;
    if (n > start && term < 1e-18 * out.value) break;
  }
  if (N >= 100'000'000) throw DivergenceError("regroup_decay: partial sums did not settle");

  double tail = 0.0;
  const double x = static_cast<double>(N);
  if (h.kind == Weight::Kind::StretchedExp) {
    double a = 2.0 / h.s;
    double u0 = 0.5 * h.K * std::pow(x, h.s);
    tail = (1.0 / h.s) * std::pow(2.0 / h.K, a) * boost::math::tgamma(a, u0);
  } else {
    const auto& [r1, h1] = h.table.back();
    const auto& [r0, h0] = h.table[h.table.size() - 2];
    double beta = 0.5 * (h1 - h0) / (r1 - r0);
    double c0 = 0.5 * h(x) - beta * x;
    tail = std::exp(-c0 - beta * x) * (x / beta + 1.0 / (beta * beta));
  }
  out.value *= base.L;
  out.tail = base.L * tail;
  return out;
}

DerivedFSpec regroup_decay(const FFunctionSpec& base) {
  DerivedFSpec out;
  out.kind = DerivedFSpec::Kind::GRegrouped;
  out.base = base;
  out.params.C_Phi = regroup_constant(base).upper();
  return out;
}

double lieb_robinson_velocity(double C_F, double fnorm) { return 2.0 * C_F * fnorm; }

double f_norm(std::span<const SupportNorm> terms, const DecayFn& F) {
  int lo = std::numeric_limits<int>::max();
  int hi = std::numeric_limits<int>::min();
  for (const auto& t : terms) {
    if (t.support.empty() || t.norm == 0.0) continue;
    lo = std::min(lo, t.support.min());
    hi = std::max(hi, t.support.max());
  }
  if (lo > hi) return 0.0;
  const int n = hi - lo + 1;
  std::vector<double> acc(static_cast<std::size_t>(n) * n, 0.0);
  for (const auto& t : terms) {
    if (t.norm == 0.0) continue;
    const auto& s = t.support.sites();
    for (std::size_t i = 0; i < s.size(); ++i)
      for (std::size_t j = i; j < s.size(); ++j) acc[(s[i] - lo) * n + (s[j] - lo)] += t.norm;
  }
  double best = 0.0;
  for (int x = 0; x < n; ++x)
    for (int y = x; y < n; ++y) {
      double v = acc[x * n + y];
      if (v > 0.0) best = std::max(best, v / F(y - x));
    }
  return best;
}

}  // namespace ffstab
