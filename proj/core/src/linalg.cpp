#include "ffstab/linalg.hpp"

#include <algorithm>
#include <map>
#include <numeric>
#include <string>

#define lapack_complex_float std::complex<float>
#define lapack_complex_double std::complex<double>
#include <lapacke.h>

#include "ffstab/errors.hpp"

namespace ffstab {

bool is_hermitian(const Matrix& m, double rel_tol) {
  if (m.rows() != m.cols()) return false;
  double scale = std::max(1.0, m.cwiseAbs().maxCoeff());
  return (m - m.adjoint()).cwiseAbs().maxCoeff() <= rel_tol * scale;
}

bool is_real(const Matrix& m) { return m.imag().cwiseAbs().maxCoeff() == 0.0; }

namespace {

EigenSystem eigh_real(const Matrix& h, bool want_vectors) {
  const lapack_int n = static_cast<lapack_int>(h.rows());
  RealMatrix a = h.real();
  RealVector w(n);
  lapack_int info = LAPACKE_dsyevd(LAPACK_COL_MAJOR, want_vectors ? 'V' : 'N', 'U', n, a.data(), n,
                                   w.data());
  if (info != 0) throw std::runtime_error("dsyevd failed, info=" + std::to_string(info));
  EigenSystem out;
  out.values = std::move(w);
  if (want_vectors) out.vectors = a.cast<Complex>();
  return out;
}

EigenSystem eigh_complex(const Matrix& h, bool want_vectors) {
  const lapack_int n = static_cast<lapack_int>(h.rows());
  Matrix a = h;
  RealVector w(n);
  lapack_int info = LAPACKE_zheevd(LAPACK_COL_MAJOR, want_vectors ? 'V' : 'N', 'U', n, a.data(), n,
                                   w.data());
  if (info != 0) throw std::runtime_error("zheevd failed, info=" + std::to_string(info));
  EigenSystem out;
  out.values = std::move(w);
  if (want_vectors) out.vectors = std::move(a);
  return out;
}

EigenSystem eigh_impl(const Matrix& h, bool want_vectors) {
  if (h.rows() != h.cols()) throw DomainError("eigh: matrix not square");
  if (h.rows() == 0) return {RealVector(0), Matrix(0, 0)};
  if (!is_hermitian(h, 1e-10)) throw DomainError("eigh: matrix not Hermitian");
  return is_real(h) ? eigh_real(h, want_vectors) : eigh_complex(h, want_vectors);
}

std::vector<int> charge_labels(int d, int n_sites, bool parity_only) {
  long dim = 1;
  for (int i = 0; i < n_sites; ++i) dim *= d;
  std::vector<int> labels(dim);
  for (long idx = 0; idx < dim; ++idx) {
    long r = idx;
    int q = 0;
    while (r > 0) {
      q += static_cast<int>(r % d);
      r /= d;
    }
    labels[idx] = parity_only ? (q & 1) : q;
  }
  return labels;
}

std::map<int, std::vector<Eigen::Index>> group_by_label(const std::vector<int>& labels) {
  std::map<int, std::vector<Eigen::Index>> groups;
  for (Eigen::Index i = 0; i < static_cast<Eigen::Index>(labels.size()); ++i) {
    groups[labels[i]].push_back(i);
  }
  return groups;
}

EigenSystem eigh_sectors_impl(const Matrix& h, const std::vector<int>& labels, bool want_vectors) {
  if (static_cast<Eigen::Index>(labels.size()) != h.rows()) {
    throw DomainError("sector labels do not match matrix dimension");
  }
  auto groups = group_by_label(labels);
  if (groups.size() <= 1) return eigh_impl(h, want_vectors);

  const Eigen::Index n = h.rows();
  RealVector values(n);
  Matrix vectors;
  if (want_vectors) vectors = Matrix::Zero(n, n);
  std::vector<Eigen::Index> column_of;
  Eigen::Index col = 0;
  for (const auto& [label, idx] : groups) {
    const Eigen::Index m = static_cast<Eigen::Index>(idx.size());
    Matrix block(m, m);
    for (Eigen::Index j = 0; j < m; ++j)
      for (Eigen::Index i = 0; i < m; ++i) block(i, j) = h(idx[i], idx[j]);
    EigenSystem es = eigh_impl(block, want_vectors);
    for (Eigen::Index k = 0; k < m; ++k) {
      values(col + k) = es.values(k);
      if (want_vectors)
        for (Eigen::Index i = 0; i < m; ++i) vectors(idx[i], col + k) = es.vectors(i, k);
    }
    col += m;
  }
  std::vector<Eigen::Index> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](Eigen::Index a, Eigen::Index b) { return values(a) < values(b); });
  EigenSystem out;
  out.values.resize(n);
  if (want_vectors) out.vectors.resize(n, n);
  for (Eigen::Index k = 0; k < n; ++k) {
    out.values(k) = values(order[k]);
    if (want_vectors) out.vectors.col(k) = vectors.col(order[k]);
  }
  return out;
}

}  // namespace

EigenSystem eigh(const Matrix& h) { return eigh_impl(h, true); }

RealVector eigvalsh(const Matrix& h) { return eigh_impl(h, false).values; }

bool respects_sectors(const Matrix& h, const std::vector<int>& labels, double abs_tol) {
  const Eigen::Index n = h.rows();
  for (Eigen::Index j = 0; j < n; ++j)
    for (Eigen::Index i = 0; i < n; ++i)
      if (labels[i] != labels[j] && std::abs(h(i, j)) > abs_tol) return false;
  return true;
}

std::vector<int> detect_sectors(const Matrix& h, int d, int n_sites) {
  long dim = 1;
  for (int i = 0; i < n_sites; ++i) dim *= d;
  if (dim != h.rows()) throw DomainError("detect_sectors: dimension mismatch");
  for (bool parity_only : {false, true}) {
    auto labels = charge_labels(d, n_sites, parity_only);
    if (respects_sectors(h, labels)) return labels;
  }
  return std::vector<int>(dim, 0);
}

EigenSystem eigh_sectors(const Matrix& h, const std::vector<int>& labels) {
  return eigh_sectors_impl(h, labels, true);
}

RealVector eigvalsh_sectors(const Matrix& h, const std::vector<int>& labels) {
  return eigh_sectors_impl(h, labels, false).values;
}

double operator_norm(const Matrix& m) {
  if (m.size() == 0) return 0.0;
  if (is_hermitian(m, 1e-13)) return eigvalsh(0.5 * (m + m.adjoint())).cwiseAbs().maxCoeff();
  Matrix g = m.adjoint() * m;
  return std::sqrt(std::max(0.0, eigvalsh(0.5 * (g + g.adjoint())).maxCoeff()));
}

double trace_norm(const Matrix& m) {
  if (m.size() == 0) return 0.0;
  Eigen::BDCSVD<Matrix> svd(m);
  return svd.singularValues().sum();
}

Matrix polar_unitary(const Matrix& m) {
  Eigen::BDCSVD<Matrix> svd(m, Eigen::ComputeFullU | Eigen::ComputeFullV);
  return svd.matrixU() * svd.matrixV().adjoint();
}

Matrix kron(const Matrix& a, const Matrix& b) {
  Matrix out(a.rows() * b.rows(), a.cols() * b.cols());
  for (Eigen::Index i = 0; i < a.rows(); ++i)
    for (Eigen::Index j = 0; j < a.cols(); ++j)
      out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
  return out;
}

}  // namespace ffstab
