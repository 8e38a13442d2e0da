#include <doctest.h>

#include <random>

#include "ffstab/errors.hpp"
#include "ffstab/interaction.hpp"
#include "ffstab/models.hpp"

using namespace ffstab;

namespace {

Matrix random_hermitian(Eigen::Index n, std::mt19937_64& rng) {
  std::normal_distribution<double> g;
  Matrix m(n, n);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < n; ++j) m(i, j) = Complex(g(rng), g(rng));
  return (m + m.adjoint()).eval() / 2.0;
}

// Spin interaction with random terms on scattered supports.
Interaction scattered(const Interval& lam, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  Interaction psi(InteractionKind::Spin, 2, lam);
  for (int x = lam.a; x <= lam.b; ++x) {
    psi.add(SiteSet({x}), LocalOperator::spin(random_hermitian(2, rng), SiteSet({x}), lam, 2));
    if (x + 2 <= lam.b)
      psi.add(SiteSet({x, x + 2}), LocalOperator::spin(random_hermitian(4, rng), SiteSet({x, x + 2}), lam, 2));
    if (x + 3 <= lam.b)
      psi.add(SiteSet({x, x + 1, x + 3}),
              LocalOperator::spin(random_hermitian(8, rng), SiteSet({x, x + 1, x + 3}), lam, 2));
  }
  return psi;
}

// Direct sum over terms with keys inside lam.
Matrix direct_sum(const Interaction& psi, const Interval& lam) {
  const SiteSet whole(lam);
  Matrix h = Matrix::Zero(power(psi.d(), lam.size()), power(psi.d(), lam.size()));
  for (const auto& t : psi.terms())
    if (t.key.subset_of(lam)) h += embed_matrix(t.op.matrix, t.op.support, whole, psi.d());
  return h;
}

}  // namespace

TEST_SUITE("interaction") {
  TEST_CASE("local Hamiltonian basics") {
    const Interval lam(0, 3);
    Interaction zero(InteractionKind::Spin, 2, lam);
    CHECK(local_hamiltonian(zero, lam).matrix.norm() == 0.0);

    Interaction z(InteractionKind::Spin, 2, lam);
    z.add(SiteSet({1}), LocalOperator::spin(pauli_z(), SiteSet({1}), lam, 2));
    z.add(SiteSet({1, 2}), LocalOperator::spin(kron(pauli_x(), pauli_x()), SiteSet({1, 2}), lam, 2));
    CHECK((local_hamiltonian(z, lam).matrix - direct_sum(z, lam)).norm() < 1e-14);
    CHECK_THROWS_AS(local_hamiltonian(z, Interval(0, 1)), DomainError);
    CHECK(z.range() == 1);
    CHECK(z.uniform_bound() == doctest::Approx(1.0));
  }

  TEST_CASE("non-Hermitian and odd terms are rejected") {
    const Interval lam(0, 1);
    Interaction s(InteractionKind::Spin, 2, lam);
    Matrix m = Matrix::Zero(2, 2);
    m(0, 1) = 1.0;
    CHECK_THROWS(s.add(SiteSet({0}), LocalOperator::spin(m, SiteSet({0}), lam, 2)));
    Interaction f(InteractionKind::FermionEven, 2, lam);
    const LocalOperator a = annihilation(lam, 0);
    CHECK_THROWS_AS(f.add(SiteSet(lam), a + a.adjoint()), ParityError);
  }

  TEST_CASE("orbital Hamiltonian has integer spectrum and dominates subvolumes") {
    const Interval lam(0, 7);
    const Interaction eta = fermion_to_spin(orbital_interaction(default_orbital_model(lam), lam));
    const Matrix h = local_hamiltonian(eta, lam).matrix;
    for (double v : eigvalsh(h)) CHECK(std::abs(v - std::round(v)) < 1e-10);
    const Interval sub(2, 5);
    const Matrix hs = embed_matrix(local_hamiltonian(eta.restricted(sub), sub).matrix, SiteSet(sub), SiteSet(lam), 2);
    CHECK(eigvalsh(h - hs).minCoeff() >= -1e-10);
  }

  TEST_CASE("validate_unperturbed on the orbital and AKLT models") {
    const Interval dom(1, 8);
    const UnperturbedReport orb =
        validate_unperturbed(fermion_to_spin(orbital_interaction(default_orbital_model(dom), dom)), {4, 6, 8}, 1);
    CHECK(orb.frustration_free);
    REQUIRE(orb.gamma0.has_value());
    CHECK(*orb.gamma0 == doctest::Approx(1.0).epsilon(1e-9));

    const UnperturbedReport aklt = validate_unperturbed(aklt_interaction(Interval(1, 6)), {3, 4, 5, 6}, 1);
    CHECK(aklt.frustration_free);
    REQUIRE(aklt.gamma0.has_value());
    CHECK(*aklt.gamma0 > 0.0);
    for (const auto& v : aklt.volumes) CHECK(v.kernel_dim == 4);

    const UnperturbedReport neg = validate_unperturbed(aklt_interaction(Interval(1, 4)).scaled(-1.0), {3, 4}, 1);
    CHECK_FALSE(neg.frustration_free);
  }

  TEST_CASE("edge and bulk parts reconstruct the Hamiltonian") {
    const Interval lam(0, 10);
    PerturbationParams pp;
    pp.max_radius = 2;
    const Interaction phi = random_even_perturbation(lam, pp, 3, InteractionKind::Spin);
    const EdgeBulkSplit s = split_edge_bulk(phi, lam, 2);
    const Matrix h = local_hamiltonian(phi, lam).matrix;
    CHECK((local_hamiltonian(s.edge, lam).matrix + local_hamiltonian(s.bulk, lam).matrix - h).norm() < 1e-12);

    CHECK(split_edge_bulk(phi, lam, 0).edge.empty());
    CHECK(split_edge_bulk(phi, lam, 6).bulk.empty());
    CHECK_THROWS_AS(split_edge_bulk(scattered(lam, 1), lam, 2), DomainError);

    const FFunctionSpec F = *phi.decay;
    CHECK(f_norm(s.bulk, F) <= f_norm(phi, F) + 1e-12);
  }

  TEST_CASE("bulk terms beyond the near distance are bounded by the F-norm tail") {
    const Interval lam(0, 8);
    PerturbationParams pp;
    pp.max_radius = 5;
    const Interaction phi = random_even_perturbation(lam, pp, 9, InteractionKind::Spin);
    const FFunctionSpec F = *phi.decay;
    const int D = 2;
    const double norm = f_norm(phi, F);
    const EdgeBulkSplit split = split_edge_bulk(phi, lam, D);
    for (const auto& t : split.bulk.terms()) {
      const int r = boundary_distances(lam, t.anchor->center).r;
      if (t.anchor->radius >= r) CHECK(t.norm <= norm * F.value(D) + 1e-12);
    }
  }

  TEST_CASE("interval regrouping preserves every local Hamiltonian") {
    const Interval lam(0, 5);
    const Interaction psi = scattered(lam, 17);
    const Interaction phi = regroup_intervals(psi);
    for (const auto& t : phi.terms()) CHECK(t.key.is_interval());
    for (int a = lam.a; a <= lam.b; ++a)
      for (int b = a; b <= lam.b; ++b) {
        const Interval sub(a, b);
        CHECK((direct_sum(psi, sub) - local_hamiltonian(phi.restricted(sub), sub).matrix).norm() < 1e-12);
      }
  }

  TEST_CASE("regrouping fixes interval terms and absorbs gapped keys") {
    const Interval lam(0, 2);
    Interaction psi(InteractionKind::Spin, 2, lam);
    psi.add(SiteSet(Interval(0, 1)), LocalOperator::spin(kron(pauli_z(), pauli_z()), SiteSet(Interval(0, 1)), lam, 2));
    const Interaction same = regroup_intervals(psi);
    REQUIRE(same.terms().size() == 1);
    CHECK((same.terms()[0].op.matrix - psi.terms()[0].op.matrix).norm() == 0.0);

    psi.add(SiteSet({0, 2}), LocalOperator::spin(kron(pauli_x(), pauli_x()), SiteSet({0, 2}), lam, 2));
    const Interaction g = regroup_intervals(psi);
    bool found = false;
    for (const auto& t : g.terms()) found = found || t.key == SiteSet(Interval(0, 2));
    CHECK(found);
    CHECK((local_hamiltonian(g, lam).matrix - direct_sum(psi, lam)).norm() < 1e-14);
  }

  TEST_CASE("regrouped norm is bounded by the original F-norm") {
    const Interval lam(1, 7);
    PerturbationParams pp;
    Interaction psi = random_even_perturbation(lam, pp, 5);
    const Interaction phi = regroup_intervals(psi);
    REQUIRE(phi.derived_decay.has_value());
    CHECK(f_norm(phi, as_decay(*phi.derived_decay)) <= f_norm(psi, *psi.decay) + 1e-12);
  }

  TEST_CASE("regrouped orbital model keeps range and gap") {
    const Interval lam(1, 8);
    const Interaction eta = orbital_interaction(default_orbital_model(lam), lam);
    const Interaction g = regroup_intervals(eta);
    CHECK(g.range() == eta.range());
    CHECK(g.uniform_bound() <= std::pow(2.0, eta.range()) * eta.uniform_bound() + 1e-12);
    const UnperturbedReport rep = validate_unperturbed(fermion_to_spin(g), {6, 8}, 1);
    CHECK(*rep.gamma0 == doctest::Approx(1.0));
  }

  TEST_CASE("fermion to spin transform") {
    const Interval lam(1, 8);
    const Interaction eta = orbital_interaction(default_orbital_model(lam), lam);
    const Interaction s = fermion_to_spin(eta);
    CHECK(s.kind() == InteractionKind::Spin);
    for (int L : {4, 6, 8}) {
      const Interval sub(1, L);
      const RealVector a = eigvalsh(local_hamiltonian(eta.restricted(sub), sub).matrix);
      const RealVector b = eigvalsh(local_hamiltonian(s.restricted(sub), sub).matrix);
      CHECK((a - b).cwiseAbs().maxCoeff() < 1e-10);
    }
    const FFunctionSpec F{1.0, 1.0, 3.0, Weight::stretched_exp(0.5, 1.0)};
    CHECK(f_norm(s, F) == doctest::Approx(f_norm(eta, F)));
    CHECK(s.range() == eta.range());

    Interaction n(InteractionKind::FermionEven, 2, Interval(0, 2));
    n.add(SiteSet({1}), LocalOperator::fermion(number_operator(Interval(1, 1), SiteSet({1})).matrix, SiteSet({1}),
                                               Interval(0, 2)));
    const Interaction ns = fermion_to_spin(n);
    REQUIRE(ns.terms().size() == 1);
    CHECK(ns.terms()[0].op.support == SiteSet({1}));
    CHECK((ns.terms()[0].op.matrix - (Matrix::Identity(2, 2) - pauli_z()) / 2.0).norm() < 1e-14);
    CHECK_THROWS_AS(fermion_to_spin(s), DomainError);
  }

  TEST_CASE("ball re-keying keeps the Hamiltonian") {
    const Interval lam(0, 5);
    const Interaction psi = scattered(lam, 23);
    const Interaction balls = rekey_as_balls(psi, lam);
    CHECK(balls.ball_supported());
    CHECK((local_hamiltonian(balls, lam).matrix - direct_sum(psi, lam)).norm() < 1e-12);
  }
}
