#include "ffstab/spectra.hpp"

#include <algorithm>
#include <cmath>
#include <functional>

#include "ffstab/errors.hpp"

namespace ffstab {

std::vector<int> family_sectors(const Matrix& h0, const Matrix& phi, int d, int n_sites) {
  Matrix pattern = (h0.cwiseAbs() + phi.cwiseAbs()).cast<Complex>();
  return detect_sectors(pattern, d, n_sites);
}

EigenSystem diagonalize(const LocalOperator& h) {
  if (!h.hermitian(1e-10)) throw DomainError("diagonalize: operator is not Hermitian");
  return eigh_sectors(h.matrix, detect_sectors(h.matrix, h.d, h.support.size()));
}

RealVector spectrum(const LocalOperator& h) {
  if (!h.hermitian(1e-10)) throw DomainError("spectrum: operator is not Hermitian");
  return eigvalsh_sectors(h.matrix, detect_sectors(h.matrix, h.d, h.support.size()));
}

int kernel_count(const RealVector& sorted, double rel_tol) {
  if (sorted.size() == 0) return 0;
  const double scale = std::max({1.0, std::abs(sorted(0)), std::abs(sorted(sorted.size() - 1))});
  int k = 0;
  for (Eigen::Index i = 0; i < sorted.size(); ++i)
    if (std::abs(sorted(i)) <= rel_tol * scale) ++k;
  return k;
}

namespace {

SpectrumSplit make_split(double eps, const RealVector& ev, int split) {
  SpectrumSplit s;
  s.eps = eps;
  s.sp0.assign(ev.data(), ev.data() + split);
  s.sp1.assign(ev.data() + split, ev.data() + ev.size());
  s.gamma = s.sp1.empty() || s.sp0.empty() ? std::numeric_limits<double>::infinity()
                                           : s.sp1.front() - s.sp0.back();
  return s;
}

}  // namespace

std::vector<SpectrumSplit> track_split(const Matrix& h0, const Matrix& phi, const std::vector<double>& eps_grid,
                                       int split, const std::vector<int>& sectors, const TrackingOptions& opts) {
  if (eps_grid.empty()) return {};
  for (std::size_t i = 1; i < eps_grid.size(); ++i)
    if (!(eps_grid[i] > eps_grid[i - 1])) throw DomainError("eps grid must be increasing");
  const Eigen::Index n = h0.rows();
  if (split <= 0 || split >= n) throw DomainError("track_split: split index out of range");

  auto eval = [&](double e) { return eigvalsh_sectors(h0 + e * phi, sectors); };
  const RealVector phi_ev = eigvalsh_sectors(phi, sectors);
  const double phi_norm = phi_ev.size() ? std::max(std::abs(phi_ev(0)), std::abs(phi_ev(phi_ev.size() - 1))) : 0.0;
  auto gap = [split](const RealVector& ev) { return ev(split) - ev(split - 1); };

  // Sorted eigenvalues are phi_norm-Lipschitz, so the sorted gap stays positive on
  // [lo, hi] whenever g(lo) + g(hi) exceeds 2 * phi_norm * (hi - lo).
  std::function<void(double, double, const RealVector&, const RealVector&, int)> certify =
      [&](double lo, double hi, const RealVector& ev_lo, const RealVector& ev_hi, int depth) {
        if (gap(ev_lo) + gap(ev_hi) > 2.0 * phi_norm * (hi - lo)) return;
        if (depth >= opts.max_depth || gap(ev_lo) <= 0.0 || gap(ev_hi) <= 0.0) {
          throw TrackingError("eigenvalue tracking ambiguous; refine the grid", lo, hi);
        }
        const double mid = 0.5 * (lo + hi);
        RealVector ev_mid = eval(mid);
        certify(lo, mid, ev_lo, ev_mid, depth + 1);
        certify(mid, hi, ev_mid, ev_hi, depth + 1);
      };

  std::vector<SpectrumSplit> out;
  RealVector prev = eval(eps_grid.front());
  out.push_back(make_split(eps_grid.front(), prev, split));
  for (std::size_t i = 1; i < eps_grid.size(); ++i) {
    RealVector cur = eval(eps_grid[i]);
    certify(eps_grid[i - 1], eps_grid[i], prev, cur, 0);
    out.push_back(make_split(eps_grid[i], cur, split));
    prev = std::move(cur);
  }
  return out;
}

std::vector<SpectrumSplit> gap_curve(const Interaction& eta, const Interaction& phi, const Interval& lam,
                                     const std::vector<double>& eps_grid, const TrackingOptions& opts) {
  if (eps_grid.empty() || eps_grid.front() != 0.0) throw DomainError("gap_curve: grid must start at 0");
  Matrix h0 = local_hamiltonian(eta.domain() == lam ? eta : eta.restricted(lam), lam).matrix;
  Matrix p = local_hamiltonian(phi.domain() == lam ? phi : phi.restricted(lam), lam).matrix;
  auto sectors = family_sectors(h0, p, eta.d(), lam.size());
  const int split = kernel_count(eigvalsh_sectors(h0, sectors), opts.kernel_rel_tol);
  if (split == 0) throw FrustrationError("gap_curve: unperturbed Hamiltonian has no kernel");
  return track_split(h0, p, eps_grid, split, sectors, opts);
}

std::vector<HigherGap> higher_gap_track(const Matrix& h0, const Matrix& phi, double nu, double mu,
                                        const std::vector<double>& eps_grid, const std::vector<int>& sectors,
                                        const TrackingOptions& opts) {
  if (!(nu < mu)) throw DomainError("higher_gap_track: need nu < mu");
  RealVector ev0 = eigvalsh_sectors(h0, sectors);
  // Eigenvalues within rounding of nu or mu count as sitting on the endpoint.
  const double tol = 1e-9 * std::max({1.0, std::abs(nu), std::abs(mu)});
  int below = 0;
  int inside = 0;
  for (Eigen::Index i = 0; i < ev0.size(); ++i) {
    if (ev0(i) <= nu + tol) ++below;
    else if (ev0(i) < mu - tol) ++inside;
  }
  if (inside > 0) throw DomainError("higher_gap_track: (nu, mu) meets the unperturbed spectrum");
  std::vector<double> grid = eps_grid;
  if (grid.empty() || grid.front() != 0.0) grid.insert(grid.begin(), 0.0);
  auto splits = track_split(h0, phi, grid, below, sectors, opts);
  std::vector<HigherGap> out;
  for (const auto& s : splits) out.push_back({s.eps, s.gamma});
  if (eps_grid.empty() || eps_grid.front() != 0.0) out.erase(out.begin());
  return out;
}

LocalOperator ground_projector(const LocalOperator& h, double tol) {
  EigenSystem es = diagonalize(h);
  const Eigen::Index n = es.values.size();
  const double scale = std::max({1.0, std::abs(es.values(0)), std::abs(es.values(n - 1))});
  Eigen::Index k = 0;
  while (k < n && es.values(k) <= tol * scale) ++k;
  if (k == 0) throw FrustrationError("ground_projector: no eigenvalue below threshold");
  Matrix v = es.vectors.leftCols(k);
  return {v * v.adjoint(), h.support, h.ambient, h.kind, h.d};
}

Matrix frustration_free_kernel(const Interaction& eta, const Interval& X) {
  Interaction local = eta.domain() == X ? eta : eta.restricted(X);
  const int d = eta.d();
  std::map<int, std::vector<const Term*>> ending;
  for (const auto& t : local.terms()) ending[t.key.max()].push_back(&t);

  Matrix K = Matrix::Identity(1, 1);
  for (int s = X.a; s <= X.b; ++s) {
    Matrix Kp = kron(K, Matrix::Identity(d, d));
    auto it = ending.find(s);
    if (it == ending.end()) {
      K = std::move(Kp);
      continue;
    }
    const SiteSet region(Interval(X.a, s));
    Matrix TK = Matrix::Zero(Kp.rows(), Kp.cols());
    for (const Term* t : it->second) TK += apply_embedded(t->op.matrix, t->op.support, region, d, Kp);
    Matrix M = Kp.adjoint() * TK;
    M = 0.5 * (M + M.adjoint());
    EigenSystem es = eigh(M);
    const Eigen::Index m = es.values.size();
    const double scale = std::max({1.0, std::abs(es.values(0)), std::abs(es.values(m - 1))});
    if (es.values(0) < -1e-9 * scale) throw DomainError("frustration_free_kernel: terms are not positive semidefinite");
    Eigen::Index k = 0;
    while (k < m && es.values(k) <= 1e-9 * scale) ++k;
    K = Kp * es.vectors.leftCols(k);
    if (k == 0) {
      // Empty kernel: pad the remaining sites so the shape matches the full space.
      K.resize(power(d, X.size()), 0);
      return K;
    }
  }
  return K;
}

KernelCache::KernelCache(Interaction eta, Interval lam) : eta_(std::move(eta)), lam_(lam) {
  if (!eta_.domain().contains(lam_)) throw DomainError("KernelCache: volume outside the interaction domain");
}

const Matrix& KernelCache::isometry(const Interval& X) {
  auto it = isometries_.find(X);
  if (it != isometries_.end()) return it->second;
  if (!lam_.contains(X)) throw DomainError("KernelCache: region outside the volume");
  return isometries_.emplace(X, frustration_free_kernel(eta_, X)).first->second;
}

const Matrix& KernelCache::projector(const Interval& X) {
  auto it = projectors_.find(X);
  if (it != projectors_.end()) return it->second;
  const Matrix& v = isometry(X);
  Matrix p = v * v.adjoint();
  Matrix full = X == lam_ ? p : embed_matrix(p, SiteSet(X), SiteSet(lam_), d());
  return projectors_.emplace(X, std::move(full)).first->second;
}

std::vector<Matrix> resolution_family(KernelCache& cache, int x) {
  const Interval& lam = cache.volume();
  const int r = boundary_distances(lam, x).r;
  if (r < 2) throw DomainError("resolution_family: anchor must lie in Int_2");
  const Eigen::Index n = power(cache.d(), lam.size());
  const Matrix id = Matrix::Identity(n, n);
  std::vector<Matrix> E;
  E.reserve(r + 2);
  E.push_back(id - cache.ball_projector(x, 1));
  for (int k = 2; k <= r; ++k) E.push_back(cache.ball_projector(x, k - 1) - cache.ball_projector(x, k));
  E.push_back(cache.ball_projector(x, r) - cache.full_projector());
  E.push_back(cache.full_projector());
  return E;
}

std::vector<std::vector<int>> interior_partition(const Interval& lam, int n) {
  auto inner = interior(lam, 2);
  if (!inner) return {};
  const int period = 2 * n + 1;
  std::vector<std::vector<int>> parts;
  for (int rep = inner->a; rep <= inner->b && rep < inner->a + period; ++rep) {
    std::vector<int> part;
    for (int x = rep; x <= inner->b; x += period) part.push_back(x);
    parts.push_back(std::move(part));
  }
  return parts;
}

Matrix sigma_projection(KernelCache& cache, const std::vector<int>& part, int n, const std::vector<int>& sigma) {
  if (part.size() != sigma.size()) throw DomainError("sigma_projection: assignment size mismatch");
  const Interval& lam = cache.volume();
  for (std::size_t i = 0; i < part.size(); ++i)
    for (std::size_t j = i + 1; j < part.size(); ++j) {
      Interval bi = ball(lam, part[i], n);
      Interval bj = ball(lam, part[j], n);
      if (!(bi.b < bj.a || bj.b < bi.a)) throw PartitionError("sigma_projection: balls overlap");
    }
  const Eigen::Index dim = power(cache.d(), lam.size());
  Matrix S = Matrix::Identity(dim, dim);
  for (std::size_t i = 0; i < part.size(); ++i) {
    const Matrix& P = cache.ball_projector(part[i], n);
    S = sigma[i] ? Matrix(S - S * P) : Matrix(S * P);
  }
  return S;
}

std::vector<DiameterRow> sp0_diameter_scan(const Interaction& eta,
                                           const std::function<Interaction(const Interval&)>& phi_for,
                                           const std::vector<std::pair<Interval, int>>& schedule, double eps,
                                           int steps, const TrackingOptions& opts) {
  std::vector<DiameterRow> rows;
  for (const auto& [lam, D] : schedule) {
    Interaction bulk = split_edge_bulk(phi_for(lam), lam, D).bulk;
    std::vector<double> grid{0.0};
    for (int i = 1; i <= steps && eps > 0.0; ++i) grid.push_back(eps * i / steps);
    auto curve = gap_curve(eta, bulk, lam, grid, opts);
    rows.push_back({lam.size(), D, eps, curve.back().sp0_diameter(), curve.back().gamma});
  }
  return rows;
}

}  // namespace ffstab
