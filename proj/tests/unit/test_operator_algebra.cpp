#include <doctest.h>

#include <algorithm>
#include <random>

#include "ffstab/errors.hpp"
#include "ffstab/operator_algebra.hpp"

using namespace ffstab;

namespace {

Matrix random_matrix(Eigen::Index n, std::uint64_t seed, bool hermitian) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> g;
  Matrix m(n, n);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < n; ++j) m(i, j) = Complex(g(rng), g(rng));
  if (hermitian) m = (m + m.adjoint()).eval() / 2.0;
  return m;
}

// Annihilator on an n-site chain: Z on every preceding site, |0><1| at position p, identity after.
Matrix fock_oracle(int n, int p) {
  Matrix z = Matrix::Zero(2, 2);
  z(0, 0) = 1;
  z(1, 1) = -1;
  Matrix low = Matrix::Zero(2, 2);
  low(0, 1) = 1;
  Matrix out = Matrix::Identity(1, 1);
  for (int j = 0; j < n; ++j) out = kron(out, j < p ? z : (j == p ? low : Matrix(Matrix::Identity(2, 2))));
  return out;
}

std::vector<Matrix> paulis() {
  return {Matrix::Identity(2, 2), pauli_x(), pauli_y(), pauli_z()};
}

}  // namespace

TEST_SUITE("operator_algebra") {
  TEST_CASE("embedding with identity") {
    const Interval amb(0, 5);
    LocalOperator id = LocalOperator::identity(SiteSet(Interval(2, 3)), amb, AlgebraKind::Spin, 2);
    LocalOperator e = embed(id, amb);
    CHECK((e.matrix - Matrix::Identity(64, 64)).norm() < 1e-14);

    LocalOperator z = LocalOperator::spin(pauli_z(), SiteSet({1}), Interval(0, 2), 2);
    RealVector ev = eigvalsh(embed(z, Interval(0, 2)).matrix);
    CHECK(std::count_if(ev.begin(), ev.end(), [](double v) { return std::abs(v + 1) < 1e-12; }) == 4);
    CHECK(std::count_if(ev.begin(), ev.end(), [](double v) { return std::abs(v - 1) < 1e-12; }) == 4);
  }

  TEST_CASE("embedding places the operator at its site") {
    const Matrix a = random_matrix(2, 1, false);
    const Matrix e = embed_matrix(a, SiteSet({1}), SiteSet(Interval(0, 2)), 2);
    const Matrix expect = kron(kron(Matrix::Identity(2, 2), a), Matrix::Identity(2, 2));
    CHECK((e - expect).norm() < 1e-14);
  }

  TEST_CASE("Fock generators match the explicit string construction") {
    const Interval lam(3, 7);
    for (int x = lam.a; x <= lam.b; ++x)
      CHECK((annihilation(lam, x).matrix - fock_oracle(lam.size(), x - lam.a)).norm() < 1e-14);
  }

  TEST_CASE("canonical anticommutation relations") {
    const Interval lam(0, 5);
    const Eigen::Index n = 64;
    for (int x = lam.a; x <= lam.b; ++x)
      for (int y = lam.a; y <= lam.b; ++y) {
        const Matrix ax = annihilation(lam, x).matrix, ay = annihilation(lam, y).matrix;
        const Matrix cy = creation(lam, y).matrix;
        const Matrix acomm = ax * cy + cy * ax;
        const Matrix expect = x == y ? Matrix(Matrix::Identity(n, n)) : Matrix(Matrix::Zero(n, n));
        CHECK((acomm - expect).norm() < 1e-12);
        CHECK((ax * ay + ay * ax).norm() < 1e-12);
      }
  }

  TEST_CASE("number operator") {
    CHECK(number_operator(Interval(0, 3), SiteSet()).matrix.norm() == 0.0);
    const Matrix n0 = number_operator(Interval(0, 0), SiteSet({0})).matrix;
    CHECK(std::abs(n0(0, 0)) < 1e-15);
    CHECK(std::abs(n0(1, 1) - 1.0) < 1e-15);
    for (int n = 1; n <= 6; ++n) {
      const Interval lam(0, n - 1);
      CHECK(number_operator(lam, SiteSet(lam)).matrix.trace().real() == doctest::Approx(n * std::pow(2.0, n - 1)));
    }
    const Interval lam(0, 2);
    const Matrix n1 = (creation(lam, 1) * annihilation(lam, 1)).matrix;
    CHECK((n1 - number_operator(lam, SiteSet({1})).matrix).norm() < 1e-14);
    RealVector ev = eigvalsh(n1);
    CHECK(std::count_if(ev.begin(), ev.end(), [](double v) { return std::abs(v) < 1e-12; }) == 4);
  }

  TEST_CASE("parity grades") {
    const Interval lam(0, 2);
    const LocalOperator a = annihilation(lam, 1);
    const LocalOperator hop = creation(lam, 0) * annihilation(lam, 2);
    CHECK(parity_grade(a) == ParityGrade::Odd);
    CHECK(parity_grade(hop) == ParityGrade::Even);
    CHECK(parity_grade(a + hop) == ParityGrade::Mixed);
    CHECK(parity_grade(a * creation(lam, 2)) == ParityGrade::Even);
    CHECK(parity_grade(a * hop) == ParityGrade::Odd);
    CHECK(parity_grade(even_part(a + hop)) == ParityGrade::Even);
    CHECK(((even_part(a + hop) + odd_part(a + hop)).matrix - (a + hop).matrix).norm() < 1e-14);
  }

  TEST_CASE("odd fermion embedding is rejected") {
    const LocalOperator a = annihilation(Interval(1, 1), 1);
    const LocalOperator placed = LocalOperator::fermion(a.matrix, SiteSet({1}), Interval(0, 2));
    CHECK_THROWS_AS(embed(placed, Interval(0, 2)), ParityError);
  }

  TEST_CASE("partial trace of a product") {
    const Matrix B = random_matrix(2, 3, true), C = random_matrix(4, 4, true);
    const LocalOperator op = LocalOperator::spin(kron(B, C), SiteSet(Interval(0, 2)), Interval(0, 2), 2);
    const LocalOperator t = partial_trace(op, SiteSet({0}));
    CHECK((t.matrix - B * (C.trace() / 4.0)).norm() < 1e-12);
    const LocalOperator s = partial_trace(op, SiteSet());
    CHECK(std::abs(s.matrix(0, 0) - op.matrix.trace() / 8.0) < 1e-12);
  }

  TEST_CASE("partial trace equals the unitary twirl") {
    const Matrix A = random_matrix(4, 9, true);
    const LocalOperator op = LocalOperator::spin(A, SiteSet(Interval(0, 1)), Interval(0, 1), 2);
    Matrix twirl = Matrix::Zero(4, 4);
    for (const auto& u : paulis()) {
      const Matrix U = kron(Matrix::Identity(2, 2), u);
      twirl += U * A * U.adjoint() / 4.0;
    }
    const Matrix theta = embed_matrix(partial_trace(op, SiteSet({0})).matrix, SiteSet({0}), SiteSet(Interval(0, 1)), 2);
    CHECK((theta - twirl).norm() < 1e-12);

    Matrix full = Matrix::Zero(4, 4);
    for (const auto& u : paulis())
      for (const auto& v : paulis()) {
        const Matrix U = kron(u, v);
        full += U * A * U.adjoint() / 16.0;
      }
    CHECK((full - Matrix::Identity(4, 4) * partial_trace(op, SiteSet()).matrix(0, 0)).norm() < 1e-12);
  }

  TEST_CASE("partial trace is unital, positive and nested") {
    const SiteSet whole(Interval(0, 3));
    const Interval amb(0, 3);
    CHECK((partial_trace(LocalOperator::identity(whole, amb, AlgebraKind::Spin, 2), SiteSet({1, 2})).matrix -
           Matrix::Identity(4, 4))
              .norm() < 1e-14);
    const Matrix X = random_matrix(16, 11, false);
    const LocalOperator pos = LocalOperator::spin(X * X.adjoint(), whole, amb, 2);
    CHECK(eigvalsh(partial_trace(pos, SiteSet({1, 2})).matrix).minCoeff() >= -1e-12);
    const LocalOperator mid = partial_trace(pos, SiteSet({0, 1, 2}));
    CHECK((partial_trace(mid, SiteSet({1})).matrix - partial_trace(pos, SiteSet({1})).matrix).norm() < 1e-12);
  }

  TEST_CASE("delta layers telescope and vanish beyond the support") {
    const Interval amb(0, 4);
    const LocalOperator A = LocalOperator::spin(random_matrix(32, 5, true), SiteSet(amb), amb, 2);
    Matrix sum = Matrix::Zero(32, 32);
    for (int n = 0; n <= 3; ++n) {
      const LocalOperator layer = delta_layer(A, 1, n);
      sum += embed_matrix(layer.matrix, layer.support, SiteSet(amb), 2);
    }
    CHECK((sum - A.matrix).norm() < 1e-11);

    const Matrix small = random_matrix(8, 6, true);
    const LocalOperator B = LocalOperator::spin(embed_matrix(small, SiteSet(Interval(1, 3)), SiteSet(amb), 2),
                                                SiteSet(amb), amb, 2);
    for (int n = 2; n <= 4; ++n) CHECK(delta_layer(B, 2, n).matrix.norm() < 1e-12);
  }

  TEST_CASE("delta layers of even operators are even") {
    const Interval lam(0, 3);
    LocalOperator h = creation(lam, 0) * annihilation(lam, 2);
    h = h + h.adjoint();
    h = h + 0.3 * (creation(lam, 1) * creation(lam, 3));
    h = h + h.adjoint();
    for (int n = 0; n <= 2; ++n) CHECK(parity_grade(delta_layer(h, 1, n)) == ParityGrade::Even);
  }

  TEST_CASE("Jordan-Wigner images") {
    const Interval lam(0, 2);
    const LocalOperator n1 = creation(lam, 1) * annihilation(lam, 1);
    const LocalOperator local = LocalOperator::fermion(
        partial_trace(n1, SiteSet({1})).matrix * 1.0, SiteSet({1}), lam);
    const LocalOperator img = jordan_wigner(local);
    CHECK(img.support == SiteSet({1}));
    Matrix occ = Matrix::Zero(2, 2);
    occ(1, 1) = 1.0;
    CHECK((img.matrix - occ).norm() < 1e-14);
    // Full-volume image of n_1: (1 - Z_1)/2 on the middle site.
    const Matrix expect = embed_matrix((Matrix::Identity(2, 2) - pauli_z()) / 2.0, SiteSet({1}), SiteSet(lam), 2);
    CHECK((jordan_wigner(n1).matrix - expect).norm() < 1e-14);

    // Hopping on {0,1} is a two-site spin operator: (XX + YY)/2.
    const Interval pair(0, 1);
    LocalOperator hop = creation(pair, 0) * annihilation(pair, 1);
    hop = hop + hop.adjoint();
    const LocalOperator himg = jordan_wigner(hop);
    const Matrix xxyy = (kron(pauli_x(), pauli_x()) + kron(pauli_y(), pauli_y())) / 2.0;
    CHECK(himg.support == SiteSet(pair));
    CHECK((himg.matrix - xxyy).norm() < 1e-14);
  }

  TEST_CASE("Jordan-Wigner is a *-homomorphism on even operators") {
    const Interval lam(0, 3);
    std::mt19937_64 rng(4);
    std::normal_distribution<double> g;
    auto random_even = [&]() {
      LocalOperator acc = LocalOperator::fermion(Matrix::Zero(16, 16), SiteSet(lam), lam);
      for (int x = lam.a; x <= lam.b; ++x)
        for (int y = lam.a; y <= lam.b; ++y) {
          acc = acc + Complex(g(rng), g(rng)) * (creation(lam, x) * annihilation(lam, y));
          acc = acc + Complex(g(rng), g(rng)) * (creation(lam, x) * creation(lam, y));
        }
      return acc;
    };
    const LocalOperator A = random_even(), B = random_even();
    CHECK((jordan_wigner(A * B).matrix - jordan_wigner(A).matrix * jordan_wigner(B).matrix).norm() < 1e-11);
    CHECK((jordan_wigner(A.adjoint()).matrix - jordan_wigner(A).matrix.adjoint()).norm() < 1e-12);
    RealVector e1 = eigvalsh((A + A.adjoint()).matrix), e2 = eigvalsh(jordan_wigner(A + A.adjoint()).matrix);
    CHECK((e1 - e2).cwiseAbs().maxCoeff() < 1e-10);
  }

  TEST_CASE("Jordan-Wigner commutes with embedding for even operators") {
    const Interval sub(1, 2), amb(0, 3);
    LocalOperator h = creation(sub, 1) * annihilation(sub, 2);
    h = h + h.adjoint() + 0.5 * (creation(sub, 1) * creation(sub, 2));
    const LocalOperator placed = LocalOperator::fermion(h.matrix, SiteSet(sub), amb);
    const Matrix a = jordan_wigner(embed(placed, amb)).matrix;
    const LocalOperator img = jordan_wigner(placed);
    const Matrix b = embed_matrix(img.matrix, img.support, SiteSet(amb), 2);
    CHECK((a - b).norm() < 1e-12);
  }

  TEST_CASE("odd Jordan-Wigner images carry a string") {
    const Interval lam(0, 2);
    const LocalOperator a = LocalOperator::fermion(annihilation(Interval(2, 2), 2).matrix, SiteSet({2}), lam);
    const LocalOperator img = jordan_wigner(a);
    CHECK(img.support == SiteSet(lam));
    CHECK((img.matrix - fock_oracle(3, 2)).norm() < 1e-14);
  }

  TEST_CASE("spin matrices") {
    for (int d : {2, 3}) {
      const Matrix sz = spin_z(d), sp = spin_plus(d), sm = spin_minus(d);
      CHECK((sp * sm - sm * sp - 2.0 * sz).norm() < 1e-12);
      CHECK((sp.adjoint() - sm).norm() < 1e-14);
    }
    CHECK(std::abs(spin_z(3)(0, 0) - 1.0) < 1e-15);
  }
}
