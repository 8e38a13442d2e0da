#pragma once

#include <vector>

#include "ffstab/lattice.hpp"
#include "ffstab/linalg.hpp"

namespace ffstab {

enum class AlgebraKind { Spin, Fermion };
enum class ParityGrade { Even, Odd, Mixed };

// Dense operator on the tensor factors of `support`, ordered by site with the
// leftmost site as the most significant digit. Fermion operators use the
// occupation basis with the usual sign of preceding occupied modes.
struct LocalOperator {
  Matrix matrix;
  SiteSet support;
  Interval ambient;
  AlgebraKind kind = AlgebraKind::Spin;
  int d = 2;

  LocalOperator() = default;
  LocalOperator(Matrix m, SiteSet support, Interval ambient, AlgebraKind kind, int d);

  static LocalOperator spin(Matrix m, SiteSet support, Interval ambient, int d);
  static LocalOperator fermion(Matrix m, SiteSet support, Interval ambient);
  static LocalOperator identity(SiteSet support, Interval ambient, AlgebraKind kind, int d);
  static LocalOperator scalar(Complex c, Interval ambient, AlgebraKind kind, int d);

  Eigen::Index dim() const { return matrix.rows(); }
  bool hermitian(double rel_tol = 1e-12) const { return is_hermitian(matrix, rel_tol); }
  double norm() const { return operator_norm(matrix); }
  LocalOperator adjoint() const;
};

// Digit offsets that split an index on `whole` into the `sub` and complementary factors.
struct SubsystemSplit {
  std::vector<Eigen::Index> sub;
  std::vector<Eigen::Index> rest;
};
SubsystemSplit split_subsystem(const SiteSet& sub, const SiteSet& whole, int d);

Eigen::Index power(int d, int n);

// A (on sub) tensor identity, as a matrix on `whole`.
Matrix embed_matrix(const Matrix& a, const SiteSet& sub, const SiteSet& whole, int d);
void add_embedded(Matrix& target, const Matrix& a, const SiteSet& sub, const SiteSet& whole, int d,
                  Complex coeff = 1.0);
// (A tensor identity) * V for column vectors V on `whole`.
Matrix apply_embedded(const Matrix& a, const SiteSet& sub, const SiteSet& whole, int d,
                      const Matrix& v);
// Normalized trace over whole \ keep.
Matrix partial_trace_matrix(const Matrix& a, const SiteSet& whole, const SiteSet& keep, int d);

LocalOperator embed(const LocalOperator& op, const SiteSet& target);
LocalOperator embed(const LocalOperator& op, const Interval& target);
// Sum and product after embedding both operands into a common support.
LocalOperator operator+(const LocalOperator& a, const LocalOperator& b);
LocalOperator operator-(const LocalOperator& a, const LocalOperator& b);
LocalOperator operator*(const LocalOperator& a, const LocalOperator& b);
LocalOperator operator*(Complex c, const LocalOperator& a);

// Fock-space generators on the ambient interval, built from occupation bits.
LocalOperator annihilation(const Interval& lam, int x);
LocalOperator creation(const Interval& lam, int x);
LocalOperator number_operator(const Interval& lam, const SiteSet& X);
// exp(i pi N) on n modes: diagonal of (-1)^{occupation}.
RealVector parity_diagonal(int n_sites);

ParityGrade parity_grade(const LocalOperator& op, double tol = 1e-12);
LocalOperator even_part(const LocalOperator& op);
LocalOperator odd_part(const LocalOperator& op);

LocalOperator partial_trace(const LocalOperator& op, const SiteSet& keep);
LocalOperator partial_trace(const LocalOperator& op, const Interval& keep);
// theta_{X(n)} - theta_{X(n-1)} with X(n) the ambient ball around x, clipped to the support.
LocalOperator delta_layer(const LocalOperator& op, int x, int n);

// Diagonal of the unitary Q with theta(A) = Q* A Q on the given number of modes.
RealVector jordan_wigner_signs(int n_sites);
LocalOperator jordan_wigner(const LocalOperator& op);

// Single-site matrices.
Matrix pauli_x();
Matrix pauli_y();
Matrix pauli_z();
// Spin-S operators with d = 2S+1; digit k carries S_z = S - k.
Matrix spin_z(int d);
Matrix spin_plus(int d);
Matrix spin_minus(int d);

}  // namespace ffstab
