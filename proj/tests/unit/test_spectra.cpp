#include <doctest.h>

#include <random>

#include "ffstab/errors.hpp"
#include "ffstab/models.hpp"
#include "ffstab/spectra.hpp"

using namespace ffstab;

namespace {

Interaction orbital_spin(const Interval& lam) {
  return fermion_to_spin(orbital_interaction(default_orbital_model(lam), lam));
}

Interaction identity_perturbation(const Interval& lam) {
  Interaction phi(InteractionKind::Spin, 2, lam);
  for (int x = lam.a; x <= lam.b; ++x)
    phi.add_ball(x, 0, LocalOperator::spin(Matrix::Identity(2, 2), SiteSet({x}), lam, 2));
  return phi;
}

}  // namespace

TEST_SUITE("spectra") {
  TEST_CASE("diagonalize small operators") {
    const Interval lam(0, 0);
    const EigenSystem id = diagonalize(LocalOperator::spin(Matrix::Identity(2, 2), SiteSet({0}), lam, 2));
    CHECK((id.values.array() - 1.0).abs().maxCoeff() < 1e-14);
    const RealVector sx = spectrum(LocalOperator::spin(pauli_x(), SiteSet({0}), lam, 2));
    CHECK(sx(0) == doctest::Approx(-1.0));
    CHECK(sx(1) == doctest::Approx(1.0));
    Matrix nh = Matrix::Zero(2, 2);
    nh(0, 1) = 1.0;
    CHECK_THROWS_AS(diagonalize(LocalOperator::spin(nh, SiteSet({0}), lam, 2)), DomainError);
  }

  TEST_CASE("eigen residuals on the orbital model") {
    const Interval lam(0, 7);
    const LocalOperator h = local_hamiltonian(orbital_spin(lam), lam);
    const EigenSystem es = diagonalize(h);
    const double hn = es.values.cwiseAbs().maxCoeff();
    CHECK((h.matrix * es.vectors - es.vectors * es.values.asDiagonal()).colwise().norm().maxCoeff() <= 1e-10 * hn);
    for (double v : es.values) CHECK(std::abs(v - std::round(v)) < 1e-10);
  }

  TEST_CASE("ground projector") {
    const Interval lam(0, 0);
    const LocalOperator zero = LocalOperator::spin(Matrix::Zero(2, 2), SiteSet({0}), lam, 2);
    CHECK((ground_projector(zero).matrix - Matrix::Identity(2, 2)).norm() < 1e-14);

    const Interval three(0, 1);
    Matrix d = Matrix::Zero(4, 4);
    d(2, 2) = 1.0;
    d(3, 3) = 2.0;
    Matrix expect = Matrix::Zero(4, 4);
    expect(0, 0) = expect(1, 1) = 1.0;
    CHECK((ground_projector(LocalOperator::spin(d, SiteSet(three), three, 2)).matrix - expect).norm() < 1e-14);

    Matrix pos = Matrix::Identity(2, 2);
    CHECK_THROWS_AS(ground_projector(LocalOperator::spin(pos, SiteSet({0}), lam, 2)), FrustrationError);

    const Interval eight(0, 7);
    const LocalOperator P = ground_projector(local_hamiltonian(orbital_spin(eight), eight));
    const Matrix Z = auxiliary_basis(default_orbital_model(eight), eight);
    CHECK(std::round(P.matrix.trace().real()) == std::pow(2.0, Z.cols()));
  }

  TEST_CASE("kernel count threshold") {
    RealVector v(4);
    v << 1e-12, 2e-10, 0.5, 1.0;
    CHECK(kernel_count(v) == 2);
  }

  TEST_CASE("gap curve at zero and under a uniform shift") {
    const Interval lam(1, 6);
    const Interaction eta = orbital_spin(lam);
    const std::vector<double> grid{0.0, 0.01, 0.02, 0.05};
    const auto curve = gap_curve(eta, identity_perturbation(lam), lam, grid);
    REQUIRE(curve.size() == grid.size());
    CHECK(curve[0].sp0.size() == static_cast<std::size_t>(kernel_count(eigvalsh(local_hamiltonian(eta, lam).matrix))));
    for (double v : curve[0].sp0) CHECK(std::abs(v) < 1e-10);
    for (const auto& s : curve) {
      CHECK(s.gamma == doctest::Approx(1.0));
      CHECK(s.sp0.size() == curve[0].sp0.size());
    }
  }

  TEST_CASE("gap curve under an even perturbation stays open with a finite slope") {
    const Interval lam(1, 8);
    PerturbationParams pp;
    const Interaction phi = fermion_to_spin(random_even_perturbation(lam, pp, 7));
    std::vector<double> grid;
    for (int i = 0; i <= 10; ++i) grid.push_back(0.005 * i);
    const auto curve = gap_curve(orbital_spin(lam), phi, lam, grid);
    const double norm = operator_norm(local_hamiltonian(phi, lam).matrix);
    for (std::size_t i = 1; i < curve.size(); ++i) {
      CHECK(curve[i].gamma > 0.0);
      // Weyl: each group edge moves by at most eps ||Phi||.
      CHECK(std::abs(curve[i].gamma - curve[0].gamma) <= 2.0 * grid[i] * norm + 1e-10);
    }
  }

  TEST_CASE("Weyl bound between consecutive grid points") {
    const Interval lam(1, 6);
    PerturbationParams pp;
    const Matrix h0 = local_hamiltonian(orbital_spin(lam), lam).matrix;
    const Matrix p = local_hamiltonian(fermion_to_spin(random_even_perturbation(lam, pp, 3)), lam).matrix;
    const double pn = operator_norm(p);
    const RealVector a = eigvalsh(h0 + 0.01 * p), b = eigvalsh(h0 + 0.03 * p);
    CHECK((a - b).cwiseAbs().maxCoeff() <= 0.02 * pn + 1e-12);
  }

  TEST_CASE("higher gap tracking") {
    const Interval lam(1, 6);
    const Matrix h0 = local_hamiltonian(orbital_spin(lam), lam).matrix;
    const Matrix id = local_hamiltonian(identity_perturbation(lam), lam).matrix;
    const std::vector<double> grid{0.0, 0.02, 0.04};
    for (const auto& g : higher_gap_track(h0, id, 1.0, 2.0, grid, family_sectors(h0, id, 2, 6)))
      CHECK(g.gamma == doctest::Approx(1.0));
    PerturbationParams pp;
    const Matrix p = local_hamiltonian(fermion_to_spin(random_even_perturbation(lam, pp, 11)), lam).matrix;
    const auto track = higher_gap_track(h0, p, 1.0, 2.0, grid, family_sectors(h0, p, 2, 6));
    CHECK(track[0].gamma >= 1.0 - 1e-10);
    for (const auto& g : track) CHECK(g.gamma > 0.0);

    // Endpoints on the integer spectrum are allowed up to rounding; an interior eigenvalue is not.
    CHECK_NOTHROW(higher_gap_track(h0, p, 1.0 + 1e-13, 2.0 - 1e-13, grid, family_sectors(h0, p, 2, 6)));
    CHECK_THROWS_AS(higher_gap_track(h0, p, 0.5, 1.5, grid, family_sectors(h0, p, 2, 6)), DomainError);
  }

  TEST_CASE("kernel projectors are nested on balls") {
    const Interval lam(1, 8);
    KernelCache cache(orbital_spin(lam), lam);
    for (int n = 1; n <= 3; ++n) {
      const Matrix& big = cache.ball_projector(4, n);
      const Matrix& small = cache.ball_projector(4, n - 1);
      CHECK((big * big - big).norm() < 1e-10);
      CHECK((big.adjoint() - big).norm() < 1e-12);
      CHECK((small * big - big).norm() < 1e-10);
    }
    const Matrix Pfull = ground_projector(local_hamiltonian(orbital_spin(lam), lam)).matrix;
    CHECK((cache.full_projector() - Pfull).norm() < 1e-10);
  }

  TEST_CASE("resolution of identity") {
    const Interval lam(1, 9);
    KernelCache cache(orbital_spin(lam), lam);
    const Matrix one = Matrix::Identity(cache.full_projector().rows(), cache.full_projector().cols());
    for (int x = 3; x <= 7; ++x) {
      const int r = boundary_distances(lam, x).r;
      const auto E = resolution_family(cache, x);
      REQUIRE(static_cast<int>(E.size()) == r + 2);
      Matrix acc = Matrix::Zero(one.rows(), one.cols());
      for (int k = 1; k <= r; ++k) {
        acc += E[k - 1];
        CHECK((acc - (one - cache.ball_projector(x, k))).norm() < 1e-10);
        CHECK((cache.ball_projector(x, k) * E[k - 1]).norm() < 1e-10);
      }
      acc += E[r] + E[r + 1];
      CHECK((acc - one).norm() < 1e-12);
    }
  }

  TEST_CASE("interior partitions and sigma projections") {
    const Interval lam(1, 10);
    const auto parts = interior_partition(lam, 1);
    std::size_t total = 0;
    for (const auto& p : parts) {
      total += p.size();
      for (std::size_t i = 1; i < p.size(); ++i) CHECK((p[i] - p[0]) % 3 == 0);
    }
    CHECK(total == 6);

    KernelCache cache(orbital_spin(lam), lam);
    const auto& part = parts.front();
    const Eigen::Index dim = cache.full_projector().rows();
    Matrix sum = Matrix::Zero(dim, dim);
    std::vector<Matrix> S;
    for (int mask = 0; mask < (1 << part.size()); ++mask) {
      std::vector<int> sigma(part.size());
      for (std::size_t j = 0; j < part.size(); ++j) sigma[j] = (mask >> j) & 1;
      S.push_back(sigma_projection(cache, part, 1, sigma));
      sum += S.back();
    }
    CHECK((sum - Matrix::Identity(dim, dim)).norm() < 1e-10);
    for (std::size_t a = 0; a < S.size(); ++a)
      for (std::size_t b = 0; b < S.size(); ++b)
        CHECK((S[a] * S[b] - (a == b ? S[a] : Matrix(Matrix::Zero(dim, dim)))).norm() < 1e-10);
    CHECK_THROWS_AS(sigma_projection(cache, {4, 5}, 1, {0, 0}), PartitionError);
  }

  TEST_CASE("sp0 diameter scan") {
    const Interval lam(1, 8);
    PerturbationParams pp;
    auto phi_for = [&](const Interval& v) { return fermion_to_spin(random_even_perturbation(v, pp, 7)); };
    const Interaction eta = orbital_spin(lam);
    const auto zero = sp0_diameter_scan(eta, phi_for, {{lam, 2}, {lam, 3}}, 0.0);
    for (const auto& r : zero) CHECK(r.diameter == 0.0);
    // Int_4 of a length-8 chain is empty, so the perturbation vanishes.
    const auto empty = sp0_diameter_scan(eta, phi_for, {{lam, 4}}, 0.02);
    CHECK(empty[0].diameter < 1e-12);
    const auto rows = sp0_diameter_scan(eta, phi_for, {{lam, 1}, {lam, 2}, {lam, 3}}, 0.02);
    for (const auto& r : rows) CHECK(r.diameter >= 0.0);
  }
}
