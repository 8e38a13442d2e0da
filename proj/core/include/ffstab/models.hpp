#pragma once

#include <cstdint>
#include <vector>

#include "ffstab/ltqo.hpp"

namespace ffstab {

// Single-particle orbital: coefficients on consecutive sites starting at `first`.
struct Orbital {
  int center = 0;
  int first = 0;
  std::vector<Complex> coeffs;

  SiteSet support(double tol = 0.0) const;
  Complex coeff(int x) const;
};

struct OrbitalModel {
  std::vector<Orbital> f;  // eta = 1 - a*(f) a(f)
  std::vector<Orbital> g;  // eta = a*(g) a(g)
  int R = 1;
  int N0 = 2;

  int D() const { return std::max(N0, 3 * R); }
  // Orbitals whose support lies in lam.
  std::vector<const Orbital*> inside(const Interval& lam, bool f_family) const;
  // Checks orthonormality, localization, per-family disjointness and coverage on `window`.
  void validate(const Interval& window) const;
};

// R = 1, f = (e_2k + e_2k+1)/sqrt2 and g = (e_2k - e_2k+1)/sqrt2 for every pair inside `window`.
OrbitalModel default_orbital_model(const Interval& window);

// a(phi) = sum_x conj(phi_x) a(x) on the Fock space of lam.
Matrix orbital_annihilation(const Orbital& o, const Interval& lam);

// Terms keyed by the hull of each orbital support; each term is a projector.
Interaction orbital_interaction(const OrbitalModel& model, const Interval& window);

// Orthonormal completion of span(X_lam, Y_lam) in l2(lam), as columns.
Matrix auxiliary_basis(const OrbitalModel& model, const Interval& lam);

struct LTQOProbe {
  int x = 0;
  int n = 0;
  int k = 0;
};

LTQOProfile verify_orbital_ltqo(const OrbitalModel& model, const Interval& lam, const std::vector<LTQOProbe>& probes,
                                const WitnessOptions& opts = {});
// All admissible probes with k <= kmax.
std::vector<LTQOProbe> all_probes(const Interval& lam, int kmax);

// Projector onto total spin 2 of two spin-1 sites, from the highest-weight state.
Matrix aklt_pair_projector();
Interaction aklt_interaction(const Interval& lam);

struct PerturbationParams {
  double A = 1.0;
  double K = 1.0;
  double s = 1.0;
  double kappa = 3.0;
  int max_radius = 3;
  bool complex_terms = false;
};

// Envelope A exp(-K n^s) / (1 + n)^kappa of ||Phi(b(x,n))||.
double perturbation_envelope(const PerturbationParams& p, int n);

// Ball-keyed Hermitian parity-even terms, each a normalized combination of mutually
// anticommuting even Pauli strings scaled to the envelope.
Interaction random_even_perturbation(const Interval& lam, const PerturbationParams& params, std::uint64_t seed,
                                     InteractionKind kind = InteractionKind::FermionEven);

// Ball-keyed spin terms for any local dimension: random Hermitian matrices rescaled to the envelope.
Interaction random_spin_perturbation(const Interval& lam, int d, const PerturbationParams& params,
                                     std::uint64_t seed);

}  // namespace ffstab
