#include "ffstab/models.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <string>

#include "ffstab/errors.hpp"

namespace ffstab {

SiteSet Orbital::support(double tol) const {
  std::vector<int> s;
  for (std::size_t i = 0; i < coeffs.size(); ++i)
    if (std::abs(coeffs[i]) > tol) s.push_back(first + static_cast<int>(i));
  return SiteSet(std::move(s));
}

Complex Orbital::coeff(int x) const {
  const int i = x - first;
  if (i < 0 || i >= static_cast<int>(coeffs.size())) return 0.0;
  return coeffs[i];
}

std::vector<const Orbital*> OrbitalModel::inside(const Interval& lam, bool f_family) const {
  std::vector<const Orbital*> out;
  for (const auto& o : f_family ? f : g)
    if (o.support().subset_of(lam)) out.push_back(&o);
  return out;
}

void OrbitalModel::validate(const Interval& window) const {
  if (R < 0 || N0 < 1) throw ModelError("orbital model: need R >= 0 and N0 >= 1");
  std::vector<const Orbital*> all;
  for (bool fam : {true, false}) {
    auto members = inside(window, fam);
    for (std::size_t i = 0; i < members.size(); ++i) {
      const Orbital& o = *members[i];
      if (o.support().empty()) throw ModelError("orbital model: empty orbital");
      if (!o.support().subset_of(Interval(o.center - R, o.center + R)))
        throw ModelError("orbital model: orbital leaves its R-ball around " + std::to_string(o.center));
      for (std::size_t j = i + 1; j < members.size(); ++j)
        if (!set_intersection(o.support(), members[j]->support()).empty())
          throw ModelError("orbital model: overlapping supports within one family");
    }
    all.insert(all.end(), members.begin(), members.end());
  }
  for (std::size_t i = 0; i < all.size(); ++i)
    for (std::size_t j = i; j < all.size(); ++j) {
      Complex ip = 0.0;
      for (int x = window.a; x <= window.b; ++x) ip += std::conj(all[i]->coeff(x)) * all[j]->coeff(x);
      const double target = i == j ? 1.0 : 0.0;
      if (std::abs(ip - target) > 1e-12) throw ModelError("orbital model: orbitals are not orthonormal");
    }
  for (int p = window.a; p <= window.b; ++p)
    for (int q = p + N0 + 1; q <= window.b; ++q) {
      Interval iv(p, q);
      if (inside(iv, true).empty() || inside(iv, false).empty())
        throw ModelError("orbital model: an interval of diameter > N0 misses an orbital");
    }
}

OrbitalModel default_orbital_model(const Interval& window) {
  OrbitalModel m;
  m.R = 1;
  m.N0 = 2;
  const double h = 1.0 / std::sqrt(2.0);
  int start = window.a % 2 == 0 ? window.a : window.a + 1;
  for (int x = start; x + 1 <= window.b; x += 2) {
    m.f.push_back({x, x, {h, h}});
    m.g.push_back({x, x, {h, -h}});
  }
  return m;
}

Matrix orbital_annihilation(const Orbital& o, const Interval& lam) {
  const Eigen::Index n = power(2, lam.size());
  Matrix a = Matrix::Zero(n, n);
  for (int x : o.support())
    if (lam.contains(x)) a += std::conj(o.coeff(x)) * annihilation(lam, x).matrix;
  return a;
}

Interaction orbital_interaction(const OrbitalModel& model, const Interval& window) {
  model.validate(window);
  Interaction eta(InteractionKind::FermionEven, 2, window);
  for (bool fam : {true, false}) {
    for (const Orbital* o : model.inside(window, fam)) {
      const Interval hull = o->support().hull();
      Matrix a = orbital_annihilation(*o, hull);
      Matrix num = a.adjoint() * a;
      Matrix term = fam ? Matrix(Matrix::Identity(num.rows(), num.cols()) - num) : num;
      eta.add(SiteSet(hull), LocalOperator::fermion(term, SiteSet(hull), window));
    }
  }
  return eta;
}

Matrix auxiliary_basis(const OrbitalModel& model, const Interval& lam) {
  if (lam.diameter() <= model.N0) throw DomainError("auxiliary_basis: diameter must exceed N0");
  const int n = lam.size();
  Matrix P = Matrix::Zero(n, n);
  for (bool fam : {true, false})
    for (const Orbital* o : model.inside(lam, fam)) {
      Vector v = Vector::Zero(n);
      for (int x = lam.a; x <= lam.b; ++x) v(x - lam.a) = o->coeff(x);
      P += v * v.adjoint();
    }
  EigenSystem es = eigh(Matrix(Matrix::Identity(n, n) - P));
  std::vector<Eigen::Index> cols;
  for (Eigen::Index i = 0; i < n; ++i)
    if (es.values(i) > 0.5) cols.push_back(i);
  Matrix Z(n, static_cast<Eigen::Index>(cols.size()));
  for (std::size_t c = 0; c < cols.size(); ++c) Z.col(static_cast<Eigen::Index>(c)) = es.vectors.col(cols[c]);

  if (Z.cols() > 6 * model.R) throw ModelError("auxiliary_basis: more than 6R auxiliary vectors");
  if (auto inner = interior(lam, 3 * model.R))
    for (int x = inner->a; x <= inner->b; ++x)
      if (Z.cols() > 0 && Z.row(x - lam.a).cwiseAbs().maxCoeff() > 1e-12)
        throw ModelError("auxiliary_basis: auxiliary vector reaches Int_3R");
  return Z;
}

std::vector<LTQOProbe> all_probes(const Interval& lam, int kmax) {
  std::vector<LTQOProbe> out;
  for (int x = lam.a; x <= lam.b; ++x) {
    const BoundaryDistances bd = boundary_distances(lam, x);
    for (int k = 0; k <= std::min(bd.r, kmax); ++k)
      for (int n = k; n <= bd.R; ++n) out.push_back({x, n, k});
  }
  return out;
}

LTQOProfile verify_orbital_ltqo(const OrbitalModel& model, const Interval& lam, const std::vector<LTQOProbe>& probes,
                                const WitnessOptions& opts) {
  if (lam.diameter() <= 2 * model.D()) throw DomainError("verify_orbital_ltqo: need diam > 2D");
  KernelCache cache(fermion_to_spin(orbital_interaction(model, lam)), lam);
  LTQOProfile prof;
  WitnessOptions o = opts;
  for (const auto& p : probes) {
    o.seed = opts.seed + static_cast<std::uint64_t>(prof.samples.size());
    WitnessResult w = ltqo_witness(cache, p.x, p.n, p.k, true, o);
    LTQOSample s{p.x, p.n, p.k, cutoff(lam, p.x, p.n) - p.k, w.lower_bound, w.exact_zero};
    if (s.separation >= model.D() && !s.exact_zero) ++prof.failures;
    if (s.lower_bound > 2.0) ++prof.failures;
    prof.samples.push_back(s);
  }
  try {
    prof.fitted = fit_omega(prof.samples);
  } catch (const DomainError&) {
  }
  return prof;
}

Matrix aklt_pair_projector() {
  const Matrix sm = spin_minus(3);
  const Matrix id = Matrix::Identity(3, 3);
  const Matrix lower = kron(sm, id) + kron(id, sm);
  Vector v = Vector::Zero(9);
  v(0) = 1.0;  // |m=1, m=1>
  Matrix P = v * v.adjoint();
  for (int step = 0; step < 4; ++step) {
    v = lower * v;
    v.normalize();
    P += v * v.adjoint();
  }
  return P;
}

Interaction aklt_interaction(const Interval& lam) {
  if (lam.size() < 2) throw DomainError("aklt_interaction: need at least two sites");
  Interaction eta(InteractionKind::Spin, 3, lam);
  const Matrix P = aklt_pair_projector();
  for (int x = lam.a; x < lam.b; ++x) {
    SiteSet key(Interval(x, x + 1));
    eta.add(key, LocalOperator::spin(P, key, lam, 3));
  }
  return eta;
}

double perturbation_envelope(const PerturbationParams& p, int n) {
  return p.A * std::exp(-p.K * std::pow(static_cast<double>(n), p.s)) / std::pow(1.0 + n, p.kappa);
}

namespace {

// 0 = I, 1 = X, 2 = Y, 3 = Z
using PauliString = std::vector<int>;

bool anticommute(const PauliString& a, const PauliString& b) {
  int clashes = 0;
  for (std::size_t i = 0; i < a.size(); ++i)
    if (a[i] && b[i] && a[i] != b[i]) ++clashes;
  return clashes % 2 == 1;
}

Matrix pauli_string_matrix(const PauliString& p) {
  static const Matrix single[4] = {Matrix::Identity(2, 2), pauli_x(), pauli_y(), pauli_z()};
  Matrix out = Matrix::Identity(1, 1);
  for (int k : p) out = kron(out, single[k]);
  return out;
}

}  // namespace

Interaction random_even_perturbation(const Interval& lam, const PerturbationParams& params, std::uint64_t seed,
                                     InteractionKind kind) {
  if (params.A < 0.0 || params.K <= 0.0 || params.kappa <= 0.0) throw DomainError("perturbation: bad decay parameters");
  if (!(params.s > 0.0 && params.s <= 1.0)) throw DomainError("perturbation: s must lie in (0,1]");
  Interaction phi(kind, 2, lam);
  if (params.kappa > 2.0) {
    phi.decay = FFunctionSpec{1.0, 1.0, params.kappa,
                              Weight::stretched_exp(params.K / std::pow(2.0, params.s), params.s)};
  }
  if (params.A == 0.0) return phi;

  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<int> letter(0, 3);
  std::uniform_int_distribution<int> count(1, 3);
  std::normal_distribution<double> gauss;
  for (int x = lam.a; x <= lam.b; ++x)
    for (int n = 0; n <= params.max_radius; ++n) {
      const Interval b = ball(lam, x, n);
      const int m = b.size();
      const int want = count(rng);
      std::vector<PauliString> chosen;
      for (int attempt = 0; attempt < 200 && static_cast<int>(chosen.size()) < want; ++attempt) {
        PauliString p(m);
        int flips = 0;
        int ys = 0;
        bool trivial = true;
        for (auto& q : p) {
          q = letter(rng);
          flips += (q == 1 || q == 2);
          ys += (q == 2);
          trivial = trivial && q == 0;
        }
        if (trivial || flips % 2 != 0) continue;
        if (!params.complex_terms && ys % 2 != 0) continue;
        if (std::all_of(chosen.begin(), chosen.end(), [&](const PauliString& c) { return anticommute(c, p); }))
          chosen.push_back(std::move(p));
      }
      std::vector<double> c(chosen.size());
      double norm = 0.0;
      for (auto& v : c) {
        v = gauss(rng);
        norm += v * v;
      }
      norm = std::sqrt(norm);
      const double amp = perturbation_envelope(params, n);
      // Mutually anticommuting Hermitian strings: (sum c_i P_i)^2 = |c|^2, so the norm is |c|.
      const Eigen::Index dim = power(2, m);
      Matrix term = Matrix::Zero(dim, dim);
      for (std::size_t i = 0; i < chosen.size(); ++i) term += (amp * c[i] / norm) * pauli_string_matrix(chosen[i]);
      const AlgebraKind ak = kind == InteractionKind::Spin ? AlgebraKind::Spin : AlgebraKind::Fermion;
      phi.add_ball(x, n, LocalOperator(term, SiteSet(b), lam, ak, 2));
    }
  return phi;
}

Interaction random_spin_perturbation(const Interval& lam, int d, const PerturbationParams& params,
                                     std::uint64_t seed) {
  if (params.A < 0.0 || params.K <= 0.0 || params.kappa <= 0.0) throw DomainError("perturbation: bad decay parameters");
  if (!(params.s > 0.0 && params.s <= 1.0)) throw DomainError("perturbation: s must lie in (0,1]");
  if (d < 2) throw DomainError("perturbation: local dimension must be at least 2");
  Interaction phi(InteractionKind::Spin, d, lam);
  if (params.kappa > 2.0) {
    phi.decay = FFunctionSpec{1.0, 1.0, params.kappa,
                              Weight::stretched_exp(params.K / std::pow(2.0, params.s), params.s)};
  }
  if (params.A == 0.0) return phi;
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss;
  for (int x = lam.a; x <= lam.b; ++x)
    for (int n = 0; n <= params.max_radius; ++n) {
      const Interval b = ball(lam, x, n);
      const Eigen::Index dim = power(d, b.size());
      Matrix m(dim, dim);
      for (Eigen::Index i = 0; i < dim; ++i)
        for (Eigen::Index j = 0; j < dim; ++j)
          m(i, j) = params.complex_terms ? Complex(gauss(rng), gauss(rng)) : Complex(gauss(rng), 0.0);
      Matrix h = 0.5 * (m + m.adjoint());
      h *= perturbation_envelope(params, n) / operator_norm(h);
      phi.add_ball(x, n, LocalOperator::spin(h, SiteSet(b), lam, d));
    }
  return phi;
}

}  // namespace ffstab
