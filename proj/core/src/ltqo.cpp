#include "ffstab/ltqo.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <random>
#include <set>

#include "ffstab/errors.hpp"

namespace ffstab {

namespace {

// Reduced operator tr_{rest}(|u><v|) on `keep` for vectors on `whole`.
Matrix reduced_outer(const Vector& u, const Vector& v, const SubsystemSplit& sp) {
  const Eigen::Index m = static_cast<Eigen::Index>(sp.sub.size());
  Matrix out = Matrix::Zero(m, m);
  for (Eigen::Index c : sp.rest)
    for (Eigen::Index b = 0; b < m; ++b) {
      const Complex vb = std::conj(v(sp.sub[b] + c));
      if (vb == Complex(0.0)) continue;
      for (Eigen::Index a = 0; a < m; ++a) out(a, b) += u(sp.sub[a] + c) * vb;
    }
  return out;
}

Matrix random_unitary(Eigen::Index n, std::mt19937_64& rng) {
  std::normal_distribution<double> g;
  Matrix z(n, n);
  for (Eigen::Index j = 0; j < n; ++j)
    for (Eigen::Index i = 0; i < n; ++i) z(i, j) = Complex(g(rng), g(rng));
  return polar_unitary(z);
}

}  // namespace

LTQOWitness::LTQOWitness(KernelCache& cache, int x, int n, int k, bool even_only)
    : even_only_(even_only), d_(cache.d()) {
  const Interval& lam = cache.volume();
  const BoundaryDistances bd = boundary_distances(lam, x);
  if (k < 0 || k > bd.r || n < k || n > bd.R) throw DomainError("ltqo_witness: index ranges violated");
  if (even_only && d_ != 2) throw DomainError("ltqo_witness: parity needs d = 2");
  region_ = ball(lam, x, k);
  probe_ = ball(lam, x, n);
  separation_ = cutoff(lam, x, n) - k;

  // omega_lam restricted to the observable region.
  const Matrix& full = cache.isometry(lam);
  if (full.cols() == 0) throw FrustrationError("ltqo_witness: empty ground space");
  const SubsystemSplit in_lam = split_subsystem(SiteSet(region_), SiteSet(lam), d_);
  rho_omega_ = Matrix::Zero(static_cast<Eigen::Index>(in_lam.sub.size()), static_cast<Eigen::Index>(in_lam.sub.size()));
  for (Eigen::Index c = 0; c < full.cols(); ++c) rho_omega_ += reduced_outer(full.col(c), full.col(c), in_lam);
  rho_omega_ /= static_cast<double>(full.cols());

  const Matrix& psi = cache.isometry(probe_);
  m_ = psi.cols();
  if (m_ == 0) throw FrustrationError("ltqo_witness: empty local ground space");
  const SubsystemSplit in_ball = split_subsystem(SiteSet(region_), SiteSet(probe_), d_);
  x_.resize(static_cast<std::size_t>(m_ * m_));
  for (Eigen::Index i = 0; i < m_; ++i)
    for (Eigen::Index j = 0; j < m_; ++j) {
      Matrix rho_ji = reduced_outer(psi.col(j), psi.col(i), in_ball);
      if (i == j) rho_ji -= rho_omega_;
      x_[i * m_ + j] = std::move(rho_ji);
    }
}

Matrix LTQOWitness::restrict_even(const Matrix& m) const {
  if (!even_only_) return m;
  RealVector p = parity_diagonal(region_.size());
  Matrix out = m;
  for (Eigen::Index j = 0; j < out.cols(); ++j)
    for (Eigen::Index i = 0; i < out.rows(); ++i)
      if (p(i) != p(j)) out(i, j) = 0.0;
  return out;
}

double LTQOWitness::omega(const Matrix& a) const { return (a * rho_omega_).trace().real(); }

Matrix LTQOWitness::compressed(const Matrix& a) const {
  Matrix M(m_, m_);
  for (Eigen::Index i = 0; i < m_; ++i)
    for (Eigen::Index j = 0; j < m_; ++j) M(i, j) = (a * x_[i * m_ + j]).trace();
  return M;
}

double LTQOWitness::objective(const Matrix& a) const {
  const double na = operator_norm(a);
  if (na == 0.0) return 0.0;
  return operator_norm(compressed(restrict_even(a))) / na;
}

double LTQOWitness::basis_residual() const {
  // Vanishing on every matrix unit of the (even) algebra is the same as every (even block
  // of) X_ij vanishing entrywise.
  double r = 0.0;
  for (const auto& xij : x_) r = std::max(r, restrict_even(xij).cwiseAbs().maxCoeff());
  return r;
}

WitnessResult LTQOWitness::evaluate(const WitnessOptions& opts, const Matrix* warm_start) const {
  WitnessResult res;
  res.basis_residual = basis_residual();
  const Eigen::Index dim = rho_omega_.rows();
  if (res.basis_residual <= opts.zero_tol) {
    res.exact_zero = true;
    res.maximizer = Matrix::Identity(dim, dim);
    return res;
  }

  // Alternate: top singular pair (u, v) of M(A), then A maximizing |tr(A X_uv)|,
  // which is the adjoint polar factor of X_uv. Each half-step cannot decrease the value.
  std::mt19937_64 rng(opts.seed);
  double best = -1.0;
  auto ascend = [&](Matrix a) {
    double value = 0.0;
    int it = 0;
    for (; it < opts.max_iter; ++it) {
      Eigen::JacobiSVD<Matrix> svd(compressed(a), Eigen::ComputeFullU | Eigen::ComputeFullV);
      Vector u = svd.matrixU().col(0);
      Vector v = svd.matrixV().col(0);
      Matrix xuv = Matrix::Zero(dim, dim);
      for (Eigen::Index i = 0; i < m_; ++i)
        for (Eigen::Index j = 0; j < m_; ++j) xuv += std::conj(u(i)) * v(j) * x_[i * m_ + j];
      xuv = restrict_even(xuv);
      Matrix w = even_only_ ? Matrix::Zero(dim, dim) : polar_unitary(xuv).adjoint().eval();
      if (even_only_) {
        // Polar factor blockwise on the two parity sectors.
        RealVector p = parity_diagonal(region_.size());
        for (double sector : {1.0, -1.0}) {
          std::vector<Eigen::Index> idx;
          for (Eigen::Index i = 0; i < dim; ++i)
            if (p(i) == sector) idx.push_back(i);
          const Eigen::Index s = static_cast<Eigen::Index>(idx.size());
          Matrix blk(s, s);
          for (Eigen::Index c = 0; c < s; ++c)
            for (Eigen::Index r = 0; r < s; ++r) blk(r, c) = xuv(idx[r], idx[c]);
          Matrix pu = polar_unitary(blk).adjoint();
          for (Eigen::Index c = 0; c < s; ++c)
            for (Eigen::Index r = 0; r < s; ++r) w(idx[r], idx[c]) = pu(r, c);
        }
      }
      const double next = std::abs((w * xuv).trace());
      a = std::move(w);
      if (next <= value * (1.0 + opts.rel_tol)) {
        value = std::max(value, next);
        break;
      }
      value = next;
    }
    res.iterations += it + 1;
    if (value > best) {
      best = value;
      res.maximizer = a;
    }
  };

  if (warm_start) {
    if (warm_start->rows() != dim) throw DomainError("ltqo_witness: warm start has wrong dimension");
    ascend(restrict_even(*warm_start));
    ++res.restarts;
  }
  for (int r = 0; r < opts.restarts; ++r) {
    ascend(restrict_even(random_unitary(dim, rng)));
    ++res.restarts;
  }
  res.lower_bound = std::min(2.0, best);
  return res;
}

WitnessResult ltqo_witness(KernelCache& cache, int x, int n, int k, bool even_only, const WitnessOptions& opts) {
  return LTQOWitness(cache, x, n, k, even_only).evaluate(opts);
}

FittedDecay fit_omega(const std::vector<LTQOSample>& samples) {
  std::set<int> seps;
  for (const auto& s : samples) seps.insert(s.separation);
  if (seps.size() < 3) throw DomainError("fit_omega: need samples at three distinct separations");

  auto is_zero = [](const LTQOSample& s) { return s.exact_zero || s.lower_bound == 0.0; };
  if (std::all_of(samples.begin(), samples.end(), is_zero)) return {FittedDecay::Family::Step, 0.0, 0.0, 0.0};

  // Step: every sample at or beyond some separation vanishes, and the largest nonzero lies below it.
  int last_nonzero = std::numeric_limits<int>::min();
  bool any_zero = false;
  double peak = 0.0;
  for (const auto& s : samples) {
    if (is_zero(s)) any_zero = true;
    else {
      last_nonzero = std::max(last_nonzero, s.separation);
      peak = std::max(peak, s.lower_bound);
    }
  }
  if (any_zero) {
    int cutoff = std::numeric_limits<int>::max();
    for (const auto& s : samples)
      if (is_zero(s) && s.separation > last_nonzero) cutoff = std::min(cutoff, s.separation);
    bool clean = cutoff != std::numeric_limits<int>::max();
    for (const auto& s : samples)
      if (s.separation >= cutoff && !is_zero(s)) clean = false;
    if (clean) return {FittedDecay::Family::Step, static_cast<double>(cutoff), peak, 0.0};
  }

  // Least squares in log space on the largest value per separation.
  std::map<int, double> top;
  for (const auto& s : samples)
    if (!is_zero(s) && s.separation >= 1) top[s.separation] = std::max(top[s.separation], s.lower_bound);
  if (top.size() < 2) return {FittedDecay::Family::Step, static_cast<double>(last_nonzero + 1), peak, 0.0};

  auto line_fit = [&](auto abscissa) {
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    const double n = static_cast<double>(top.size());
    for (const auto& [sep, v] : top) {
      double xv = abscissa(sep);
      double yv = std::log(v);
      sx += xv;
      sy += yv;
      sxx += xv * xv;
      sxy += xv * yv;
    }
    const double slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
    const double icpt = (sy - slope * sx) / n;
    double rss = 0;
    for (const auto& [sep, v] : top) {
      double e = std::log(v) - (icpt + slope * abscissa(sep));
      rss += e * e;
    }
    return std::tuple{slope, icpt, std::sqrt(rss / n)};
  };
  auto [gs, gi, gr] = line_fit([](int s) { return static_cast<double>(s); });
  auto [ps, pi, pr] = line_fit([](int s) { return std::log(static_cast<double>(s)); });
  if (gr <= pr + 1e-12) return {FittedDecay::Family::Geometric, std::exp(gs), std::exp(gi), gr};
  return {FittedDecay::Family::Power, -ps, std::exp(pi), pr};
}

}  // namespace ffstab
