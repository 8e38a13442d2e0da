#include <doctest.h>

#include <cmath>
#include <numbers>
#include <vector>

#include "ffstab/errors.hpp"
#include "ffstab/ffunction.hpp"

using namespace ffstab;

namespace {

// Brute force sup over pairs of sum_{Z containing x,y} ||Phi(Z)|| / F(|x-y|).
double brute_f_norm(const std::vector<SupportNorm>& terms, const DecayFn& F, int a, int b) {
  double best = 0.0;
  for (int x = a; x <= b; ++x)
    for (int y = a; y <= b; ++y) {
      double s = 0.0;
      for (const auto& t : terms)
        if (t.support.contains(x) && t.support.contains(y)) s += t.norm;
      best = std::max(best, s / F(std::abs(x - y)));
    }
  return best;
}

}  // namespace

TEST_SUITE("ffunction") {
  TEST_CASE("validation") {
    CHECK_THROWS_AS((FFunctionSpec{1.0, 1.0, 2.0, {}}).validate(), DomainError);
    CHECK_THROWS_AS((FFunctionSpec{0.0, 1.0, 3.0, {}}).validate(), DomainError);
    CHECK_THROWS_AS(Weight::stretched_exp(1.0, 1.5).validate(), DomainError);
    CHECK_NOTHROW((FFunctionSpec{1.0, 1.0, 3.0, Weight::stretched_exp(0.5, 0.5)}).validate());
    CHECK_THROWS_AS(evaluate(FFunctionSpec{}, -1.0), DomainError);
  }

  TEST_CASE("base values") {
    const FFunctionSpec F{2.0, 0.5, 3.0, Weight::stretched_exp(0.3, 1.0)};
    CHECK(F.value(0.0) == doctest::Approx(2.0));
    CHECK(F.value(4.0) == doctest::Approx(2.0 * std::exp(-1.2) / 27.0));
    // Log-domain evaluation stays finite where direct evaluation underflows.
    CHECK(std::isfinite(F.log_value(1e6)));
  }

  TEST_CASE("summation norm for kappa = 4 without weight") {
    // sum over Z of (1+|x|)^-4 = 2 zeta(4) - 1
    const CertifiedSum s = summation_norm(FFunctionSpec{1.0, 1.0, 4.0, Weight::none()});
    const double exact = 2.0 * std::pow(std::numbers::pi, 4) / 90.0 - 1.0;
    CHECK(s.value <= exact + 1e-12);
    CHECK(s.upper() >= exact - 1e-12);
    CHECK(s.upper() - exact < 1e-6);
  }

  TEST_CASE("convolution constant dominates a direct evaluation") {
    const FFunctionSpec F{1.0, 1.0, 3.0, Weight::none()};
    const CertifiedSum C = convolution_constant(F, 60);
    for (int d : {0, 1, 5, 20}) {
      double s = 0.0;
      for (int z = -3000; z <= 3000; ++z) s += F.value(std::abs(z)) * F.value(std::abs(d - z));
      CHECK(s / F.value(d) <= C.upper() + 1e-9);
    }
  }

  TEST_CASE("mu plateau and growth") {
    const double k = 2.5;
    CHECK(mu(1.0, k) == doctest::Approx(std::pow(std::numbers::e / k, k)));
    CHECK(mu(std::exp(k), k) == doctest::Approx(std::pow(std::numbers::e / k, k)));
    const double r = 1e6;
    CHECK(mu(r, k) == doctest::Approx(r / std::pow(std::log(r), k)));
  }

  TEST_CASE("F_phi plateau and super-polynomial decay") {
    const FFunctionSpec F{1.0, 1.0, 3.0, Weight::stretched_exp(1.0, 1.0)};
    const DerivedFSpec Fp = transform_f_phi(F, 0.5, 2.0, 1.0, 1.0, 1);
    CHECK(Fp.plateau() == 45.0);
    CHECK(Fp.value(0.0) == doctest::Approx(Fp.value(45.0)));
    CHECK(Fp.value(46.0) < Fp.value(45.0));
    // Closed form past the plateau: u = r/18 - R - 3/2, arg = K gamma h(u) / (2 nu).
    for (double r : {100.0, 1e4, 1e6}) {
      const double u = r / 18.0 - 2.5;
      const double arg = 0.5 * u / 4.0;
      const double m = arg <= std::exp(3.0) ? std::pow(std::exp(1.0) / 3.0, 3.0) : arg / std::pow(std::log(arg), 3.0);
      CHECK(Fp.log_value(r) == doctest::Approx(-(2.0 / 7.0) * m - 3.0 * std::log1p(u)));
    }
    // The mu term only overtakes every power far out; at desk distances the polynomial base dominates.
    for (int p = 1; p <= 6; ++p) {
      double prev = INFINITY;
      for (int k = 10; k <= 16; ++k) {
        const double r = std::pow(10.0, k);
        const double v = Fp.log_value(r) + p * std::log(r);
        CHECK(v < prev);
        prev = v;
      }
      CHECK(Fp.log_value(1e10) + p * std::log(1e10) < 0.0);
    }
    CHECK_THROWS_AS(transform_f_phi(F, 0.5, 2.0, 1.0, 1.5, 1), DomainError);
  }

  TEST_CASE("F_phi closed form beyond the plateau") {
    const FFunctionSpec F{1.0, 1.0, 3.0, Weight::stretched_exp(0.8, 1.0)};
    const double gamma = 0.7, nu = 1.3, K = 0.8;
    const int R = 1;
    const DerivedFSpec Fp = transform_f_phi(F, gamma, nu, K, 1.0, R);
    const double r = 5000.0;
    const double u = r / 18.0 - R - 1.5;
    const double arg = K * gamma * (0.8 * u) / (2.0 * nu);
    const double m = arg <= std::exp(3.0) ? std::pow(std::numbers::e / 3.0, 3.0) : arg / std::pow(std::log(arg), 3.0);
    const double expected = -(std::min(K, 2.0 / 7.0) / K) * m - 3.0 * std::log1p(u);
    CHECK(Fp.log_value(r) == doctest::Approx(expected));
  }

  TEST_CASE("regroup constant for h(r) = r") {
    const FFunctionSpec F{1.0, 1.0, 3.0, Weight::stretched_exp(1.0, 1.0)};
    const double q = std::exp(-0.5);
    const double exact = q / ((1 - q) * (1 - q));
    const CertifiedSum C = regroup_constant(F);
    CHECK(C.value <= exact + 1e-12);
    CHECK(C.upper() >= exact - 1e-12);
    CHECK(regroup_constant(F.scaled(2.0)).upper() == doctest::Approx(2.0 * C.upper()));
    CHECK_THROWS_AS(regroup_decay(FFunctionSpec{1.0, 1.0, 3.0, Weight::none()}), DomainError);
  }

  TEST_CASE("regrouped decay ratio identity") {
    const FFunctionSpec F{1.5, 1.0, 3.0, Weight::stretched_exp(0.7, 0.5)};
    const DerivedFSpec G = regroup_decay(F);
    for (double r : {0.0, 1.0, 7.0, 30.0})
      CHECK(G.value(r) / F.value(r) == doctest::Approx(G.params.C_Phi / F.L * std::exp(0.7 * std::sqrt(r) / 2.0)));
  }

  TEST_CASE("f_norm cases") {
    const FFunctionSpec F{1.0, 1.0, 3.0, Weight::stretched_exp(0.5, 1.0)};
    const DecayFn f = as_decay(F);
    std::vector<SupportNorm> single;
    for (int x = 0; x < 10; ++x) single.push_back({SiteSet({x}), 1.0});
    CHECK(f_norm(single, f) == doctest::Approx(1.0 / F.value(0)));
    CHECK(f_norm(std::vector<SupportNorm>{}, f) == 0.0);

    std::vector<SupportNorm> nn;
    for (int x = 0; x < 9; ++x) nn.push_back({SiteSet(Interval(x, x + 1)), 1.0});
    CHECK(f_norm(nn, f) == doctest::Approx(brute_f_norm(nn, f, 0, 9)));

    std::vector<SupportNorm> mixed = nn;
    mixed.push_back({SiteSet({1, 5}), 0.3});
    mixed.push_back({SiteSet(Interval(2, 7)), 0.01});
    CHECK(f_norm(mixed, f) == doctest::Approx(brute_f_norm(mixed, f, 0, 9)));
  }

  TEST_CASE("nested chains are bounded by the F-norm") {
    const FFunctionSpec F{1.0, 1.0, 3.0, Weight::stretched_exp(0.5, 1.0)};
    const DecayFn f = as_decay(F);
    std::vector<SupportNorm> terms;
    for (int a = 0; a < 8; ++a)
      for (int b = a; b < 8; ++b) terms.push_back({SiteSet(Interval(a, b)), F.value(b - a) * (0.3 + 0.1 * ((a + b) % 3))});
    const double norm = f_norm(terms, f);
    // Z_k = [3 - k, 4 + k]
    double chain = 0.0;
    for (const auto& t : terms) {
      const Interval h = t.support.hull();
      if (h.b - 4 == 3 - h.a && h.a <= 3) chain += t.norm;
    }
    CHECK(chain <= norm * F.value(1) + 1e-12);
  }

  TEST_CASE("Lieb-Robinson velocity estimator") {
    CHECK(lieb_robinson_velocity(3.0, 0.5) == doctest::Approx(3.0));
  }
}
