#include <doctest.h>

#include <cmath>
#include <optional>

#include "ffstab/errors.hpp"
#include "ffstab/experiment.hpp"
#include "ffstab/models.hpp"
#include "ffstab/spectral_flow.hpp"

using namespace ffstab;

namespace {

// Centered cardinal B-spline of order k with unit knot spacing.
double bspline(double x, int k) {
  double s = 0.0, binom = 1.0, fact = 1.0;
  for (int i = 2; i < k; ++i) fact *= i;
  for (int j = 0; j <= k; ++j) {
    const double u = x + k / 2.0 - j;
    if (u > 0) s += (j % 2 ? -1.0 : 1.0) * binom * std::pow(u, k - 1);
    binom = binom * (k - j) / (j + 1);
  }
  return s / fact;
}

struct Fixture {
  Interval lam{1, 8};
  Interaction eta;
  Interaction bulk;
  FlowResult flow;
  std::vector<Phi1Decomposition> dec;

  Fixture() {
    PerturbationParams pp;
    eta = fermion_to_spin(orbital_interaction(default_orbital_model(lam), lam));
    bulk = split_edge_bulk(fermion_to_spin(random_even_perturbation(lam, pp, 7)), lam, 2).bulk;
    flow = flow_unitaries(eta, bulk, lam, {0.0, 0.01, 0.02}, 0.5);
    for (std::size_t i = 0; i < flow.eps_grid.size(); ++i) dec.push_back(decompose_phi1(flow, i, eta, bulk));
  }
};

Fixture& fixture() {
  static Fixture f;
  return f;
}

}  // namespace

TEST_SUITE("spectral_flow") {
  TEST_CASE("weight transform is the normalized B-spline") {
    const double gamma = 0.7;
    CHECK(weight_transform(0.0, gamma) == doctest::Approx(1.0));
    for (double w : {0.05, 0.2, 0.45, 0.69, -0.3})
      CHECK(weight_transform(w, gamma) == doctest::Approx(bspline(8.0 * w / (2 * gamma), 8) / bspline(0.0, 8)).epsilon(1e-10));
    CHECK(weight_transform(gamma, gamma) == doctest::Approx(0.0));
    CHECK(weight_transform(1.5 * gamma, gamma) == 0.0);
  }

  TEST_CASE("filter is -1/omega outside the band and odd") {
    const double gamma = 0.5;
    for (double w : {0.5, 0.8, 3.0}) {
      CHECK(flow_filter(w, gamma) == doctest::Approx(-1.0 / w));
      CHECK(flow_filter(-w, gamma) == doctest::Approx(1.0 / w));
    }
    CHECK(flow_filter(0.0, gamma) == 0.0);
    CHECK(flow_filter(0.2, gamma) == doctest::Approx(-flow_filter(-0.2, gamma)));
  }

  TEST_CASE("filter stays accurate for nearly degenerate levels") {
    const double gamma = 0.5;
    // W(omega) ~ hat w''(0) omega / 2, with M_8''(0) = 2 (M_6(1) - M_6(0)).
    const double scale = 8.0 / (2 * gamma);
    const double curv = 2.0 * (bspline(1.0, 6) - bspline(0.0, 6)) / bspline(0.0, 8) * scale * scale;
    for (double w : {1e-4, 1e-7, 1e-10, 1e-13, 1e-15}) {
      CHECK(flow_filter(w, gamma) / w == doctest::Approx(0.5 * curv).epsilon(1e-6));
      CHECK(flow_filter(-w, gamma) == -flow_filter(w, gamma));
    }
    const TimeQuadrature tq(gamma, 10.0);
    CHECK(-tq.one_minus_transform(1e-9) / 1e-9 == doctest::Approx(flow_filter(1e-9, gamma)).epsilon(1e-6));
    // Both sides of the switch between the series and the plain ratio.
    for (double w : {0.01, 0.062, 0.0625, 0.063})
      CHECK(-tq.one_minus_transform(w) / w == doctest::Approx(flow_filter(w, gamma)).epsilon(1e-8));
  }

  TEST_CASE("time quadrature reproduces the transform") {
    const double gamma = 0.5;
    const TimeQuadrature tq(gamma, 10.0);
    for (double w : {0.0, 0.1, 0.3, 0.5, 2.0, 9.0})
      CHECK(tq.one_minus_transform(w) == doctest::Approx(1.0 - weight_transform(w, gamma)).epsilon(1e-8));
  }

  TEST_CASE("two-level generator matches first-order perturbation theory") {
    const double E = 1.3;
    EigenSystem es;
    es.values = RealVector(2);
    es.values << 0.0, E;
    es.vectors = Matrix::Identity(2, 2);
    const Matrix D = flow_generator(es, pauli_x(), 0.5, 1);
    CHECK(std::abs(std::abs(D(0, 1)) - 1.0 / E) < 1e-14);
    CHECK((D - D.adjoint()).norm() < 1e-14);
    Matrix P = Matrix::Zero(2, 2);
    P(0, 0) = 1.0;
    Matrix dP = Matrix::Zero(2, 2);
    dP(0, 1) = dP(1, 0) = -1.0 / E;
    CHECK((kI * (D * P - P * D) - dP).norm() < 1e-14);
    CHECK_THROWS_AS(flow_generator(es, pauli_x(), 2.0, 1), GapClosedError);
  }

  TEST_CASE("generator differentiates the ground projector on a gapped chain") {
    const Interval lam(1, 6);
    PerturbationParams pp;
    const Matrix h0 = local_hamiltonian(fermion_to_spin(orbital_interaction(default_orbital_model(lam), lam)), lam).matrix;
    const Matrix psi = local_hamiltonian(fermion_to_spin(random_even_perturbation(lam, pp, 2)), lam).matrix;
    const double eps = 0.01, h = 1e-5;
    auto proj = [&](double e) {
      const EigenSystem es = eigh(h0 + e * psi);
      const int k = kernel_count(eigvalsh(h0));
      return Matrix(es.vectors.leftCols(k) * es.vectors.leftCols(k).adjoint());
    };
    const int k = kernel_count(eigvalsh(h0));
    const EigenSystem es = eigh(h0 + eps * psi);
    const Matrix P = proj(eps);
    const Matrix fd = (proj(eps + h) - proj(eps - h)) / (2 * h);
    for (GeneratorMethod m : {GeneratorMethod::EigenbasisFilter, GeneratorMethod::TimeQuadrature}) {
      const Matrix D = flow_generator(es, psi, 0.5, k, m);
      CHECK((kI * (D * P - P * D) - fd).norm() < 1e-6);
    }
  }

  TEST_CASE("trivial flows") {
    const Interval lam(1, 6);
    const Interaction eta = fermion_to_spin(orbital_interaction(default_orbital_model(lam), lam));
    Interaction none(InteractionKind::Spin, 2, lam);
    const FlowResult f = flow_unitaries(eta, none, lam, {0.0, 0.01}, 0.5);
    for (const auto& U : f.U) CHECK((U - Matrix::Identity(U.rows(), U.cols())).norm() < 1e-12);
  }

  TEST_CASE("flow on the orbital chain intertwines the projectors") {
    Fixture& fx = fixture();
    const Eigen::Index n = fx.flow.U[0].rows();
    CHECK((fx.flow.U[0] - Matrix::Identity(n, n)).norm() < 1e-14);
    for (std::size_t i = 0; i < fx.flow.eps_grid.size(); ++i) {
      CHECK(fx.flow.residual[i] <= 1e-6);
      CHECK(fx.flow.unitarity[i] <= 1e-9);
      const Matrix& U = fx.flow.aligned[i];
      const EigenSystem es = eigh_sectors(fx.flow.h(fx.flow.eps_grid[i]), fx.flow.sectors);
      const Matrix P = es.vectors.leftCols(fx.flow.kernel_dim) * es.vectors.leftCols(fx.flow.kernel_dim).adjoint();
      CHECK((P - U * fx.flow.P0 * U.adjoint()).norm() <= 1e-6);
    }
  }

  TEST_CASE("decomposition of the conjugated Hamiltonian") {
    Fixture& fx = fixture();
    for (const auto& t : fx.dec[0].terms) CHECK(t.second.norm() < 1e-12);
    for (std::size_t i = 0; i < fx.dec.size(); ++i) {
      const Phi1Decomposition& d = fx.dec[i];
      CHECK(d.reconstruction_error <= 1e-10);
      CHECK(d.max_commutator <= 1e-6);
      // Conjugation preserves the spectrum.
      const RealVector a = eigvalsh(d.V + fx.flow.h0), b = eigvalsh(fx.flow.h(fx.flow.eps_grid[i]));
      CHECK((a - b).cwiseAbs().maxCoeff() < 1e-10);
      // Terms built from even inputs are even.
      for (const auto& [key, m] : d.terms)
        CHECK(parity_grade(LocalOperator::fermion(m, SiteSet(fx.lam), fx.lam), 1e-10) == ParityGrade::Even);
    }
  }

  TEST_CASE("split identities") {
    Fixture& fx = fixture();
    for (const auto& d : fx.dec) {
      const Phi1Split s = split_phi1(d, fx.flow.P0);
      CHECK(s.reconstruction_error <= 1e-10);
      CHECK(s.centering_error <= 1e-10);
      CHECK(s.cross_error <= 1e-10);
      const Matrix& P = fx.flow.P0;
      CHECK((P * s.phi2 * P).norm() < 1e-12);
    }
  }

  TEST_CASE("theta assembly identities and the kappa bound") {
    Fixture& fx = fixture();
    KernelCache cache(fx.eta, fx.lam);
    const FFunctionSpec F = *fx.bulk.decay;
    const DerivedFSpec F0 = shifted_base(F, fx.eta.range());
    const double C = calibrate_C_from_flow(fx.flow, fx.eta, fx.bulk, F, 0.5);
    const double eta_norm = f_norm(fx.eta, F), phi_norm = f_norm(fx.bulk, F);
    const OmegaModel omega = OmegaModel::step(3);
    for (std::size_t i = 1; i < fx.dec.size(); ++i)
      for (int x = 3; x <= 6; ++x) {
        const ThetaAssembly th = theta_assembly(fx.dec[i], cache, x);
        CHECK(th.reconstruction_error <= 1e-10);
        CHECK(th.max_annihilation <= 1e-10);
        for (const auto& [n, beta] : th.beta) {
          CHECK((cache.ball_projector(x, n) * beta).norm() <= 1e-10);
          CHECK(operator_norm(beta) <= kappa_bound(n, fx.flow.eps_grid[i], omega, F0, C, eta_norm, phi_norm));
        }
      }
  }
}
