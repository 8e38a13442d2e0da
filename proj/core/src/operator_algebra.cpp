#include "ffstab/operator_algebra.hpp"

#include <bit>
#include <cmath>
#include <string>

#include "ffstab/errors.hpp"

namespace ffstab {

Eigen::Index power(int d, int n) {
  Eigen::Index p = 1;
  for (int i = 0; i < n; ++i) p *= d;
  return p;
}

LocalOperator::LocalOperator(Matrix m, SiteSet support_, Interval ambient_, AlgebraKind kind_, int d_)
    : matrix(std::move(m)), support(std::move(support_)), ambient(ambient_), kind(kind_), d(d_) {
  if (kind == AlgebraKind::Fermion && d != 2) throw DomainError("fermion operators have d = 2");
  if (d < 2) throw DomainError("local dimension must be at least 2");
  if (!support.subset_of(ambient)) throw DomainError("support not contained in ambient interval");
  const Eigen::Index n = power(d, support.size());
  if (matrix.rows() != n || matrix.cols() != n) {
    throw DomainError("matrix dimension " + std::to_string(matrix.rows()) + " does not match support (" +
                      std::to_string(n) + ")");
  }
}

LocalOperator LocalOperator::spin(Matrix m, SiteSet support, Interval ambient, int d) {
  return {std::move(m), std::move(support), ambient, AlgebraKind::Spin, d};
}

LocalOperator LocalOperator::fermion(Matrix m, SiteSet support, Interval ambient) {
  return {std::move(m), std::move(support), ambient, AlgebraKind::Fermion, 2};
}

LocalOperator LocalOperator::identity(SiteSet support, Interval ambient, AlgebraKind kind, int d) {
  Eigen::Index n = power(d, support.size());
  return {Matrix::Identity(n, n), std::move(support), ambient, kind, d};
}

LocalOperator LocalOperator::scalar(Complex c, Interval ambient, AlgebraKind kind, int d) {
  return {Matrix::Constant(1, 1, c), SiteSet{}, ambient, kind, d};
}

LocalOperator LocalOperator::adjoint() const {
  return {matrix.adjoint(), support, ambient, kind, d};
}

SubsystemSplit split_subsystem(const SiteSet& sub, const SiteSet& whole, int d) {
  if (!sub.subset_of(whole)) throw DomainError("subsystem not contained in the whole");
  const int n = whole.size();
  std::vector<Eigen::Index> weight_sub;
  std::vector<Eigen::Index> weight_rest;
  for (int i = 0; i < n; ++i) {
    Eigen::Index w = power(d, n - 1 - i);
    (sub.contains(whole.sites()[i]) ? weight_sub : weight_rest).push_back(w);
  }
  auto offsets = [d](const std::vector<Eigen::Index>& weights) {
    const int k = static_cast<int>(weights.size());
    std::vector<Eigen::Index> off(power(d, k), 0);
    for (Eigen::Index idx = 0; idx < static_cast<Eigen::Index>(off.size()); ++idx) {
      Eigen::Index r = idx;
      Eigen::Index o = 0;
      for (int j = k - 1; j >= 0; --j) {
        o += (r % d) * weights[j];
        r /= d;
      }
      off[idx] = o;
    }
    return off;
  };
  return {offsets(weight_sub), offsets(weight_rest)};
}

void add_embedded(Matrix& target, const Matrix& a, const SiteSet& sub, const SiteSet& whole, int d,
                  Complex coeff) {
  auto sp = split_subsystem(sub, whole, d);
  const Eigen::Index m = a.rows();
  for (Eigen::Index c : sp.rest)
    for (Eigen::Index j = 0; j < m; ++j) {
      const Eigen::Index col = sp.sub[j] + c;
      for (Eigen::Index i = 0; i < m; ++i) target(sp.sub[i] + c, col) += coeff * a(i, j);
    }
}

Matrix embed_matrix(const Matrix& a, const SiteSet& sub, const SiteSet& whole, int d) {
  const Eigen::Index n = power(d, whole.size());
  Matrix out = Matrix::Zero(n, n);
  add_embedded(out, a, sub, whole, d);
  return out;
}

Matrix apply_embedded(const Matrix& a, const SiteSet& sub, const SiteSet& whole, int d, const Matrix& v) {
  auto sp = split_subsystem(sub, whole, d);
  const Eigen::Index m = a.rows();
  Matrix out = Matrix::Zero(v.rows(), v.cols());
  Matrix block(m, v.cols());
  for (Eigen::Index c : sp.rest) {
    for (Eigen::Index i = 0; i < m; ++i) block.row(i) = v.row(sp.sub[i] + c);
    Matrix res = a * block;
    for (Eigen::Index i = 0; i < m; ++i) out.row(sp.sub[i] + c) = res.row(i);
  }
  return out;
}

Matrix partial_trace_matrix(const Matrix& a, const SiteSet& whole, const SiteSet& keep, int d) {
  auto sp = split_subsystem(keep, whole, d);
  const Eigen::Index m = static_cast<Eigen::Index>(sp.sub.size());
  Matrix out = Matrix::Zero(m, m);
  for (Eigen::Index c : sp.rest)
    for (Eigen::Index j = 0; j < m; ++j)
      for (Eigen::Index i = 0; i < m; ++i) out(i, j) += a(sp.sub[i] + c, sp.sub[j] + c);
  out /= static_cast<double>(sp.rest.size());
  return out;
}

namespace {

void require_compatible(const LocalOperator& a, const LocalOperator& b) {
  if (a.kind != b.kind || a.d != b.d || a.ambient != b.ambient) {
    throw DomainError("operators live in different algebras");
  }
}

SiteSet common_support(const LocalOperator& a, const LocalOperator& b) {
  SiteSet u = set_union(a.support, b.support);
  if (a.kind == AlgebraKind::Fermion && !u.empty()) return SiteSet(u.hull());
  return u;
}

}  // namespace

LocalOperator embed(const LocalOperator& op, const SiteSet& target) {
  if (!op.support.subset_of(target)) throw DomainError("embed: support not contained in target");
  if (!target.subset_of(op.ambient)) throw DomainError("embed: target outside ambient interval");
  if (op.support == target) return op;
  if (op.kind == AlgebraKind::Fermion) {
    if (!target.is_interval() || !(op.support.empty() || op.support.is_interval())) {
      throw DomainError("embed: fermion operators need interval supports");
    }
    if (parity_grade(op) != ParityGrade::Even) throw ParityError("embed: odd fermion operator");
  }
  return {embed_matrix(op.matrix, op.support, target, op.d), target, op.ambient, op.kind, op.d};
}

LocalOperator embed(const LocalOperator& op, const Interval& target) { return embed(op, SiteSet(target)); }

LocalOperator operator+(const LocalOperator& a, const LocalOperator& b) {
  require_compatible(a, b);
  if (a.support == b.support) return {a.matrix + b.matrix, a.support, a.ambient, a.kind, a.d};
  SiteSet u = common_support(a, b);
  return {embed(a, u).matrix + embed(b, u).matrix, u, a.ambient, a.kind, a.d};
}

LocalOperator operator-(const LocalOperator& a, const LocalOperator& b) { return a + (-1.0 * b); }

LocalOperator operator*(const LocalOperator& a, const LocalOperator& b) {
  require_compatible(a, b);
  if (a.support == b.support) return {a.matrix * b.matrix, a.support, a.ambient, a.kind, a.d};
  SiteSet u = common_support(a, b);
  return {embed(a, u).matrix * embed(b, u).matrix, u, a.ambient, a.kind, a.d};
}

LocalOperator operator*(Complex c, const LocalOperator& a) {
  return {c * a.matrix, a.support, a.ambient, a.kind, a.d};
}

namespace {

// Bit of site x in an index over lam; the left endpoint is the most significant bit.
int bit_of(const Interval& lam, int x) { return lam.b - x; }

LocalOperator fock_generator(const Interval& lam, int x, bool create) {
  if (!lam.contains(x)) throw DomainError("mode outside interval");
  const Eigen::Index n = power(2, lam.size());
  const int bit = bit_of(lam, x);
  const Eigen::Index mask = Eigen::Index{1} << bit;
  const Eigen::Index preceding = ~((mask << 1) - 1) & (n - 1);
  Matrix m = Matrix::Zero(n, n);
  for (Eigen::Index idx = 0; idx < n; ++idx) {
    const bool occupied = (idx & mask) != 0;
    if (occupied == create) continue;
    const int sign = (std::popcount(static_cast<unsigned long>(idx & preceding)) & 1) ? -1 : 1;
    m(idx ^ mask, idx) = sign;
  }
  return LocalOperator::fermion(std::move(m), SiteSet(lam), lam);
}

}  // namespace

LocalOperator annihilation(const Interval& lam, int x) { return fock_generator(lam, x, false); }
LocalOperator creation(const Interval& lam, int x) { return fock_generator(lam, x, true); }

LocalOperator number_operator(const Interval& lam, const SiteSet& X) {
  if (!X.subset_of(lam)) throw DomainError("number_operator: X not contained in interval");
  const Eigen::Index n = power(2, lam.size());
  Matrix m = Matrix::Zero(n, n);
  for (Eigen::Index idx = 0; idx < n; ++idx) {
    int count = 0;
    for (int x : X) count += (idx >> bit_of(lam, x)) & 1;
    m(idx, idx) = count;
  }
  return LocalOperator::fermion(std::move(m), SiteSet(lam), lam);
}

RealVector parity_diagonal(int n_sites) {
  const Eigen::Index n = power(2, n_sites);
  RealVector p(n);
  for (Eigen::Index idx = 0; idx < n; ++idx)
    p(idx) = (std::popcount(static_cast<unsigned long>(idx)) & 1) ? -1.0 : 1.0;
  return p;
}

namespace {

// Entries connecting equal (even) or opposite (odd) parity.
Matrix parity_component(const LocalOperator& op, bool even) {
  if (op.d != 2) throw DomainError("parity grading needs d = 2");
  RealVector p = parity_diagonal(op.support.size());
  Matrix out = op.matrix;
  for (Eigen::Index j = 0; j < out.cols(); ++j)
    for (Eigen::Index i = 0; i < out.rows(); ++i)
      if ((p(i) == p(j)) != even) out(i, j) = 0.0;
  return out;
}

}  // namespace

LocalOperator even_part(const LocalOperator& op) {
  return {parity_component(op, true), op.support, op.ambient, op.kind, op.d};
}

LocalOperator odd_part(const LocalOperator& op) {
  return {parity_component(op, false), op.support, op.ambient, op.kind, op.d};
}

ParityGrade parity_grade(const LocalOperator& op, double tol) {
  // rho(A) = exp(i pi N) A exp(-i pi N); even iff fixed, odd iff negated.
  RealVector p = parity_diagonal(op.support.size());
  Matrix conj = p.asDiagonal() * op.matrix * p.asDiagonal();
  const double scale = std::max(1.0, op.matrix.cwiseAbs().maxCoeff());
  if ((conj - op.matrix).cwiseAbs().maxCoeff() <= tol * scale) return ParityGrade::Even;
  if ((conj + op.matrix).cwiseAbs().maxCoeff() <= tol * scale) return ParityGrade::Odd;
  return ParityGrade::Mixed;
}

LocalOperator partial_trace(const LocalOperator& op, const SiteSet& keep) {
  if (!keep.subset_of(op.support)) throw DomainError("partial_trace: keep not inside support");
  if (op.kind == AlgebraKind::Fermion) {
    // Defined through the Jordan-Wigner picture, where it agrees with the spin trace on even elements.
    if (parity_grade(op) != ParityGrade::Even) throw ParityError("partial_trace: odd fermion operator");
    if (!(keep.empty() || keep.is_interval())) throw DomainError("partial_trace: fermion keep must be an interval");
  }
  return {partial_trace_matrix(op.matrix, op.support, keep, op.d), keep, op.ambient, op.kind, op.d};
}

LocalOperator partial_trace(const LocalOperator& op, const Interval& keep) {
  return partial_trace(op, SiteSet(keep));
}

LocalOperator delta_layer(const LocalOperator& op, int x, int n) {
  if (n < 0) throw DomainError("delta_layer: negative layer index");
  SiteSet outer = set_intersection(SiteSet(ball(op.ambient, x, n)), op.support);
  LocalOperator theta_n = partial_trace(op, outer);
  if (n == 0) return theta_n;
  SiteSet inner = set_intersection(SiteSet(ball(op.ambient, x, n - 1)), op.support);
  LocalOperator theta_prev = partial_trace(op, inner);
  return {theta_n.matrix - embed_matrix(theta_prev.matrix, inner, outer, op.d), outer, op.ambient, op.kind,
          op.d};
}

RealVector jordan_wigner_signs(int n_sites) {
  // Column s of Q sends the spin state built by JW-images of creators to the Fock state
  // built by the creators themselves; each is a basis vector up to sign.
  const Eigen::Index n = power(2, n_sites);
  RealVector q(n);
  const Matrix z = pauli_z();
  for (Eigen::Index s = 0; s < n; ++s) {
    double fock = 1.0;
    double spin = 1.0;
    Eigen::Index fock_state = 0;
    std::vector<int> spin_state(n_sites, 0);
    for (int site = n_sites - 1; site >= 0; --site) {
      const int bit = n_sites - 1 - site;
      if (((s >> bit) & 1) == 0) continue;
      // Fock creator: sign from occupied modes to the left.
      const Eigen::Index left = fock_state >> (bit + 1);
      fock *= (std::popcount(static_cast<unsigned long>(left)) & 1) ? -1.0 : 1.0;
      fock_state |= Eigen::Index{1} << bit;
      // Spin image: Z on every site to the left, then the raising factor.
      for (int j = 0; j < site; ++j) spin *= z(spin_state[j], spin_state[j]).real();
      spin_state[site] = 1;
    }
    q(s) = fock * spin;
  }
  return q;
}

LocalOperator jordan_wigner(const LocalOperator& op) {
  if (op.kind != AlgebraKind::Fermion) throw DomainError("jordan_wigner: fermion operator expected");
  if (op.support.empty()) return {op.matrix, op.support, op.ambient, AlgebraKind::Spin, 2};
  if (!op.support.is_interval()) throw DomainError("jordan_wigner: support must be an interval");

  const ParityGrade grade = parity_grade(op);
  const Interval X = op.support.hull();
  auto conjugate = [](const Matrix& a, const RealVector& q) { return Matrix(q.asDiagonal() * a * q.asDiagonal()); };

  if (grade == ParityGrade::Even) {
    return LocalOperator::spin(conjugate(op.matrix, jordan_wigner_signs(X.size())), op.support, op.ambient, 2);
  }

  // Odd component: carry the parity string from the left end of the ambient interval.
  const Interval Y(op.ambient.a, X.b);
  Matrix string = Matrix::Identity(1, 1);
  for (int j = Y.a; j < X.a; ++j) string = kron(string, pauli_z());
  Matrix odd_on_y = kron(string, odd_part(op).matrix);
  Matrix even_on_y = embed_matrix(even_part(op).matrix, op.support, SiteSet(Y), 2);
  Matrix image = conjugate(odd_on_y + even_on_y, jordan_wigner_signs(Y.size()));
  return LocalOperator::spin(std::move(image), SiteSet(Y), op.ambient, 2);
}

Matrix pauli_x() {
  Matrix m = Matrix::Zero(2, 2);
  m(0, 1) = m(1, 0) = 1.0;
  return m;
}

Matrix pauli_y() {
  Matrix m = Matrix::Zero(2, 2);
  m(0, 1) = -kI;
  m(1, 0) = kI;
  return m;
}

Matrix pauli_z() {
  Matrix m = Matrix::Zero(2, 2);
  m(0, 0) = 1.0;
  m(1, 1) = -1.0;
  return m;
}

Matrix spin_z(int d) {
  const double S = 0.5 * (d - 1);
  Matrix m = Matrix::Zero(d, d);
  for (int k = 0; k < d; ++k) m(k, k) = S - k;
  return m;
}

Matrix spin_plus(int d) {
  const double S = 0.5 * (d - 1);
  Matrix m = Matrix::Zero(d, d);
  // S+ |m> = sqrt(S(S+1) - m(m+1)) |m+1>; digit k-1 has S_z one higher than digit k.
  for (int k = 1; k < d; ++k) {
    const double mz = S - k;
    m(k - 1, k) = std::sqrt(S * (S + 1) - mz * (mz + 1));
  }
  return m;
}

Matrix spin_minus(int d) { return spin_plus(d).adjoint(); }

}  // namespace ffstab
