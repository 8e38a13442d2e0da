#include "ffstab/spectral_flow.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include <boost/math/quadrature/gauss.hpp>
#include <boost/math/special_functions/binomial.hpp>
#include <boost/math/special_functions/factorials.hpp>

#include "ffstab/errors.hpp"

namespace ffstab {

namespace {

// Centered cardinal B-spline of order k, supported on [-k/2, k/2].
double bspline(double x, int k) {
  x = std::abs(x);
  if (x >= 0.5 * k) return 0.0;
  double s = 0.0;
  for (int j = 0; j <= k; ++j) {
    const double u = x + 0.5 * k - j;
    if (u <= 0.0) break;
    const double term = boost::math::binomial_coefficient<double>(k, j) * std::pow(u, k - 1);
    s += (j % 2 == 0) ? term : -term;
  }
  return s / boost::math::factorial<double>(k - 1);
}

// 1 - M_k(x) / M_k(0). For |x| < 1/2 the piece of M_k through 0 is summed as a power series in x. M_k is even
// and C^(k-2), so its odd coefficients below x^(k-1) vanish; dropping them avoids the cancellation that the plain
// ratio suffers near 0.
double one_minus_bspline_ratio(double x, int k) {
  x = std::abs(x);
  if (x >= 0.5) return 1.0 - bspline(x, k) / bspline(0.0, k);
  const int n = k - 1;
  double c0 = 0.0;
  double rest = 0.0;
  for (int m = 0; m <= n; ++m) {
    if (m % 2 == 1 && m < n) continue;
    double c = 0.0;
    for (int j = 0; 0.5 * k - j >= 0.0; ++j) {
      const double u0 = 0.5 * k - j;
      if (u0 == 0.0 && m < n) continue;  // the knot at 0 only feeds x^n, and only for x > 0
      const double term = boost::math::binomial_coefficient<double>(k, j) * std::pow(u0, n - m);
      c += (j % 2 == 0) ? term : -term;
    }
    c *= boost::math::binomial_coefficient<double>(n, m);
    if (m == 0) c0 = c;
    else rest += c * std::pow(x, m);
  }
  return -rest / c0;
}

void check_weight_args(double gamma, int order) {
  if (!(gamma > 0.0)) throw DomainError("flow weight: gamma must be positive");
  if (order < 2) throw DomainError("flow weight: order must be at least 2");
}

}  // namespace

double weight_transform(double omega, double gamma, int order) {
  check_weight_args(gamma, order);
  return bspline(omega * order / (2.0 * gamma), order) / bspline(0.0, order);
}

double flow_filter(double omega, double gamma, int order) {
  if (std::abs(omega) < 1e-300) return 0.0;
  if (std::abs(omega) >= gamma) return -1.0 / omega;
  check_weight_args(gamma, order);
  return -one_minus_bspline_ratio(omega * order / (2.0 * gamma), order) / omega;
}

TimeQuadrature::TimeQuadrature(double gamma, double omega_max, int order, double tail_tol) {
  check_weight_args(gamma, order);
  if (!(tail_tol > 0.0)) throw DomainError("time quadrature: tail tolerance must be positive");
  const double a = gamma / order;
  // Relative tail of sinc^k beyond T is at most 2 / (pi M_k(0) (k-1) (aT)^(k-1)).
  const double need = 2.0 / (std::numbers::pi * bspline(0.0, order) * (order - 1) * tail_tol);
  T_ = std::pow(need, 1.0 / (order - 1)) / a;

  using GL = boost::math::quadrature::gauss<double, 16>;
  const auto& xs = GL::abscissa();
  const auto& ws = GL::weights();
  const double freq = std::max({omega_max, gamma, 1e-3});
  const double panel = std::min(2.0 * std::numbers::pi / freq, std::numbers::pi / a);
  const int panels = static_cast<int>(std::ceil(T_ / panel));
  const double h = T_ / panels;
  double mass = 0.0;
  auto w = [&](double t) {
    const double u = a * t;
    const double s = std::abs(u) < 1e-8 ? 1.0 - u * u / 6.0 : std::sin(u) / u;
    return std::pow(s, order);
  };
  for (int p = 0; p < panels; ++p) {
    const double mid = (p + 0.5) * h;
    for (std::size_t i = 0; i < xs.size(); ++i) {
      for (int sgn : {-1, 1}) {
        if (xs[i] == 0.0 && sgn < 0) continue;
        const double t = mid + sgn * 0.5 * h * xs[i];
        const double wt = 0.5 * h * ws[i] * w(t);
        t_.push_back(t);
        w_.push_back(wt);
        mass += wt;
      }
    }
  }
  for (auto& v : w_) v *= 0.5 / mass;
}

double TimeQuadrature::one_minus_transform(double omega) const {
  // 2 int_0^inf w(t) (1 - cos t omega) dt, written with sin^2 to keep small omega accurate.
  double s = 0.0;
  for (std::size_t i = 0; i < t_.size(); ++i) {
    const double h = std::sin(0.5 * t_[i] * omega);
    s += w_[i] * h * h;
  }
  return 4.0 * s;
}

Matrix flow_generator(const EigenSystem& h_eig, const Matrix& psi, double gamma, int split, GeneratorMethod method) {
  const Eigen::Index n = h_eig.values.size();
  if (psi.rows() != n || psi.cols() != n) throw DomainError("flow_generator: dimension mismatch");
  if (split <= 0 || split >= n) throw DomainError("flow_generator: split out of range");
  if (!(gamma > 0.0)) throw DomainError("flow_generator: gamma must be positive");
  const RealVector& E = h_eig.values;
  const double g = E(split) - E(split - 1);
  if (g < gamma) throw GapClosedError("flow_generator: gap " + std::to_string(g) + " below " + std::to_string(gamma));

  const Matrix& V = h_eig.vectors;
  Matrix D = V.adjoint() * psi * V;
  std::optional<TimeQuadrature> tq;
  if (method == GeneratorMethod::TimeQuadrature) tq.emplace(gamma, E(n - 1) - E(0));
  for (Eigen::Index j = 0; j < n; ++j)
    for (Eigen::Index i = 0; i <= j; ++i) {
      const double w = E(i) - E(j);
      double W = 0.0;
      if (std::abs(w) > 1e-300) W = tq ? -tq->one_minus_transform(w) / w : flow_filter(w, gamma);
      D(i, j) *= -kI * W;
      if (i != j) D(j, i) *= kI * W;  // W is odd
    }
  Matrix out = V * D * V.adjoint();
  return 0.5 * (out + out.adjoint());
}

LocalOperator flow_generator(const LocalOperator& h, const LocalOperator& psi, double gamma, int split,
                             GeneratorMethod method) {
  if (h.support != psi.support || h.kind != psi.kind || h.d != psi.d)
    throw DomainError("flow_generator: H and Psi must share a support");
  Matrix D = flow_generator(diagonalize(h), psi.matrix, gamma, split, method);
  return LocalOperator(std::move(D), h.support, h.ambient, h.kind, h.d);
}

namespace {

Matrix low_projector(const EigenSystem& es, int k) {
  const Matrix v = es.vectors.leftCols(k);
  return v * v.adjoint();
}

}  // namespace

FlowResult flow_unitaries(const Interaction& eta, const Interaction& psi_bulk, const Interval& lam,
                          const std::vector<double>& eps_grid, double gamma, const FlowOptions& opts) {
  if (eps_grid.empty() || eps_grid.front() != 0.0) throw DomainError("flow_unitaries: eps grid must start at 0");
  for (std::size_t i = 1; i < eps_grid.size(); ++i)
    if (!(eps_grid[i] > eps_grid[i - 1])) throw DomainError("flow_unitaries: eps grid must be increasing");
  if (eta.d() != psi_bulk.d()) throw DomainError("flow_unitaries: local dimensions differ");

  FlowResult res;
  res.lam = lam;
  res.d = eta.d();
  res.eps_grid = eps_grid;
  const Eigen::Index dim = power(res.d, lam.size());
  res.h0 = Matrix::Zero(dim, dim);
  res.psi = Matrix::Zero(dim, dim);
  accumulate_hamiltonian(res.h0, eta, lam);
  accumulate_hamiltonian(res.psi, psi_bulk, lam);
  res.sectors = family_sectors(res.h0, res.psi, res.d, lam.size());

  auto eig = [&](double e) { return eigh_sectors(res.h(e), res.sectors); };
  const EigenSystem es0 = eig(0.0);
  res.kernel_dim = kernel_count(es0.values);
  if (res.kernel_dim == 0) throw FrustrationError("flow_unitaries: H has no kernel");
  if (res.kernel_dim == dim) throw DomainError("flow_unitaries: H vanishes identically");
  res.P0 = low_projector(es0, res.kernel_dim);
  const int k0 = res.kernel_dim;
  auto gen = [&](const EigenSystem& es) { return flow_generator(es, res.psi, gamma, k0); };
  const Matrix id = Matrix::Identity(dim, dim);

  for (int level = 0; level <= opts.max_refine; ++level) {
    const int steps = opts.substeps << level;
    std::vector<Matrix> Us{id};
    std::vector<Matrix> Ds{gen(es0)};
    std::vector<double> resid{0.0};
    std::vector<double> gaps{es0.values(k0) - es0.values(k0 - 1)};
    Matrix U = id;
    Matrix D_lo = Ds.front();
    double worst = 0.0;
    for (std::size_t g = 1; g < eps_grid.size(); ++g) {
      const double h = (eps_grid[g] - eps_grid[g - 1]) / steps;
      double e = eps_grid[g - 1];
      EigenSystem es_hi;
      for (int s = 0; s < steps; ++s) {
        const Matrix D_mid = gen(eig(e + 0.5 * h));
        es_hi = eig(e + h);
        const Matrix D_hi = gen(es_hi);
        const Matrix k1 = kI * D_lo * U;
        const Matrix k2 = kI * D_mid * (U + 0.5 * h * k1);
        const Matrix k3 = kI * D_mid * (U + 0.5 * h * k2);
        const Matrix k4 = kI * D_hi * (U + h * k3);
        U = polar_unitary(U + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4));
        D_lo = D_hi;
        e += h;
      }
      const Matrix P = low_projector(es_hi, k0);
      const double r = operator_norm(P - U * res.P0 * U.adjoint());
      worst = std::max(worst, r);
      Us.push_back(U);
      Ds.push_back(D_lo);
      resid.push_back(r);
      gaps.push_back(es_hi.values(k0) - es_hi.values(k0 - 1));
    }
    if (worst <= opts.tol) {
      res.U = std::move(Us);
      res.D_gen = std::move(Ds);
      res.residual = std::move(resid);
      res.gap = std::move(gaps);
      res.substeps_used = steps;
      break;
    }
    if (level == opts.max_refine)
      throw FlowAccuracyError("flow_unitaries: intertwining residual " + std::to_string(worst) + " above tolerance");
  }

  for (std::size_t g = 0; g < eps_grid.size(); ++g) {
    const Matrix& U = res.U[g];
    res.unitarity.push_back(operator_norm(U.adjoint() * U - id));
    // Minimal rotation from U P(0) U* onto P(eps): the polar part of P P' + Q Q' intertwines them exactly.
    const Matrix P = low_projector(eig(eps_grid[g]), k0);
    const Matrix Pp = U * res.P0 * U.adjoint();
    const Matrix X = P * Pp + (id - P) * (id - Pp);
    res.aligned.push_back(polar_unitary(X) * U);
  }
  return res;
}

int anchor_site(const Term& t, const Interval& lam) {
  if (t.anchor) return t.anchor->center;
  const Interval h = t.key.hull();
  return std::clamp((h.a + h.b + 1) / 2, lam.a, lam.b);
}

std::vector<SupportNorm> Phi1Decomposition::support_norms() const {
  std::vector<SupportNorm> out;
  for (const auto& [key, m] : terms) out.push_back({SiteSet(ball(lam, key.first, key.second)), operator_norm(m)});
  return out;
}

Phi1Decomposition decompose_phi1(const FlowResult& flow, std::size_t index, const Interaction& eta,
                                  const Interaction& psi_bulk) {
  if (index >= flow.eps_grid.size()) throw DomainError("decompose_phi1: grid index out of range");
  const Interval& lam = flow.lam;
  const int d = flow.d;
  const double eps = flow.eps_grid[index];
  const Matrix& U = flow.aligned[index];
  const Eigen::Index dim = flow.h0.rows();
  const SiteSet whole(lam);
  const Matrix& P = flow.P0;
  const Matrix Q = Matrix::Identity(dim, dim) - P;

  Phi1Decomposition dec;
  dec.lam = lam;
  dec.d = d;
  dec.eps = eps;
  dec.V = U.adjoint() * flow.h(eps) * U - flow.h0;

  // Anchored pieces of alpha(H(eps)) - H, then pinched by P(0) so each commutes with it.
  std::map<int, Matrix> pieces;
  auto piece = [&](int x) -> Matrix& {
    auto it = pieces.find(x);
    if (it == pieces.end()) it = pieces.emplace(x, Matrix::Zero(dim, dim)).first;
    return it->second;
  };
  for (const auto& t : eta.terms()) {
    if (!t.key.subset_of(lam)) continue;
    Matrix h = Matrix::Zero(dim, dim);
    add_embedded(h, t.op.matrix, t.op.support, whole, d);
    piece(anchor_site(t, lam)) += U.adjoint() * h * U - h;
  }
  for (const auto& t : psi_bulk.terms()) {
    if (!t.key.subset_of(lam)) continue;
    Matrix h = Matrix::Zero(dim, dim);
    add_embedded(h, t.op.matrix, t.op.support, whole, d);
    piece(anchor_site(t, lam)) += eps * (U.adjoint() * h * U);
  }

  Matrix total = Matrix::Zero(dim, dim);
  for (auto& [x, v] : pieces) {
    const Matrix vp = P * v * P + Q * v * Q;
    const int R = boundary_distances(lam, x).R;
    Matrix prev = Matrix::Zero(dim, dim);
    Matrix sum = Matrix::Zero(dim, dim);
    for (int n = 1; n <= R; ++n) {
      const Interval b = ball(lam, x, n);
      Matrix theta = b == lam ? vp
                              : embed_matrix(partial_trace_matrix(vp, whole, SiteSet(b), d), SiteSet(b), whole, d);
      Matrix layer = theta - prev;
      sum += layer;
      dec.terms.emplace(std::pair{x, n}, std::move(layer));
      prev = std::move(theta);
    }
    dec.max_commutator = std::max(dec.max_commutator, operator_norm(P * sum - sum * P));
    total += sum;
    dec.anchor_sums.emplace(x, std::move(sum));
  }
  dec.reconstruction_error = operator_norm(total - dec.V);
  return dec;
}

double ground_expectation(const Matrix& P, const Matrix& A) {
  const double tr = P.trace().real();
  if (!(tr > 0.5)) throw DomainError("ground_expectation: empty projector");
  return (P * A).trace().real() / tr;
}

Phi1Split split_phi1(const Phi1Decomposition& dec, const Matrix& P) {
  const Eigen::Index dim = P.rows();
  const Matrix id = Matrix::Identity(dim, dim);
  const Matrix Q = id - P;
  const Interval& lam = dec.lam;
  Phi1Split s;
  s.phi_tilde = Matrix::Zero(dim, dim);
  s.boundary_R = Matrix::Zero(dim, dim);
  Matrix phi1 = Matrix::Zero(dim, dim);
  for (const auto& [x, m] : dec.anchor_sums) {
    phi1 += m;
    if (x >= lam.a + 2 && x <= lam.b - 2)
      s.phi_tilde += m;
    else
      s.boundary_R += m;
  }
  s.omega_scalar = ground_expectation(P, s.phi_tilde);
  const Matrix centered = s.phi_tilde - s.omega_scalar * id;
  s.phi2 = Q * centered * Q;
  s.phi3 = P * centered * P;
  s.reconstruction_error = operator_norm(phi1 - (s.phi2 + s.phi3 + s.omega_scalar * id + s.boundary_R));
  s.centering_error = std::abs(ground_expectation(P, s.phi2 + s.phi3));
  s.cross_error = operator_norm(P * s.phi2 * P) + operator_norm(Q * s.phi3 * Q);
  return s;
}

ThetaAssembly theta_assembly(const Phi1Decomposition& dec, KernelCache& cache, int x) {
  const Interval& lam = dec.lam;
  if (!(cache.volume() == lam)) throw DomainError("theta_assembly: cache volume differs");
  const BoundaryDistances bd = boundary_distances(lam, x);
  if (bd.r < 2) throw DomainError("theta_assembly: anchor must lie in Int_2");
  const int r = bd.r;
  const Matrix& P = cache.full_projector();
  const Eigen::Index dim = P.rows();
  const Matrix id = Matrix::Identity(dim, dim);
  const Matrix Q = id - P;
  const std::vector<Matrix> E = resolution_family(cache, x);  // E[n-1] = E_n
  auto Qb = [&](int l) -> Matrix { return id - cache.ball_projector(x, l); };

  std::vector<Matrix> phi(bd.R + 1, Matrix::Zero(dim, dim));  // centered layers, 1-based
  Matrix phi_x = Matrix::Zero(dim, dim);
  for (int k = 1; k <= bd.R; ++k) {
    auto it = dec.terms.find({x, k});
    if (it == dec.terms.end()) continue;
    phi[k] = it->second - ground_expectation(P, it->second) * id;
    phi_x += phi[k];
  }

  ThetaAssembly th;
  th.x = x;
  th.r = r;
  th.alpha = Matrix::Zero(dim, dim);
  for (int n = 3; n <= r; ++n) th.beta.emplace(n, Matrix::Zero(dim, dim));
  const int nx = r / 2;

  for (int k = nx + 1; k <= bd.R; ++k) th.alpha += Q * phi[k] * Q;
  for (int k = 1; k <= nx; ++k) {
    const Matrix& f = phi[k];
    th.alpha += E[r] * f * Qb(r) + Q * f * E[r];
    const Matrix tau = Qb(2 * k) * f * Qb(2 * k);
    if (2 * k >= 3)
      th.beta.at(2 * k) += tau;
    else if (r >= 3)
      th.beta.at(3) += tau;  // P_{b(3)} Q_{b(2)} = 0, so the n = 3 annihilation still holds
    else
      th.alpha += tau;
    for (int n = 2 * k + 1; n <= r; ++n) th.beta.at(n) += E[n - 1] * f * Qb(n - 1) + Qb(n) * f * E[n - 1];
  }

  Matrix rest = Q * phi_x * Q - th.alpha;
  for (const auto& [n, b] : th.beta) {
    rest -= b;
    const Matrix& Pn = cache.ball_projector(x, n);
    th.max_annihilation = std::max(th.max_annihilation, operator_norm(Pn * b) + operator_norm(b * Pn));
  }
  th.reconstruction_error = operator_norm(rest);
  return th;
}

}  // namespace ffstab
