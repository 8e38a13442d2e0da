#pragma once

#include <complex>
#include <vector>

#include <Eigen/Dense>

namespace ffstab {

using Complex = std::complex<double>;
using Matrix = Eigen::MatrixXcd;
using Vector = Eigen::VectorXcd;
using RealMatrix = Eigen::MatrixXd;
using RealVector = Eigen::VectorXd;

inline constexpr Complex kI{0.0, 1.0};

// Ascending eigenvalues with orthonormal eigenvectors in the columns.
struct EigenSystem {
  RealVector values;
  Matrix vectors;
};

bool is_hermitian(const Matrix& m, double rel_tol = 1e-12);
bool is_real(const Matrix& m);

// Dense LAPACK drivers (divide and conquer). Real input takes the dsyevd path.
EigenSystem eigh(const Matrix& h);
RealVector eigvalsh(const Matrix& h);

// Symmetry sector labels for a basis of `n_sites` sites with local dimension d.
// Tries total charge, then charge parity, and falls back to a single sector.
std::vector<int> detect_sectors(const Matrix& h, int d, int n_sites);
bool respects_sectors(const Matrix& h, const std::vector<int>& labels, double abs_tol = 0.0);

// Block diagonalization over precomputed sectors; output is globally sorted.
EigenSystem eigh_sectors(const Matrix& h, const std::vector<int>& labels);
RealVector eigvalsh_sectors(const Matrix& h, const std::vector<int>& labels);

double operator_norm(const Matrix& m);
double trace_norm(const Matrix& m);
Matrix polar_unitary(const Matrix& m);
Matrix kron(const Matrix& a, const Matrix& b);

}  // namespace ffstab
