#include "ffstab/acceptance.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <functional>
#include <limits>
#include <optional>
#include <random>
#include <sstream>

#include "ffstab/errors.hpp"
#include "ffstab/experiment.hpp"
#include "ffstab/serialization.hpp"

namespace ffstab {

namespace {

std::string fmt(double v) { return format_double(v); }

// Shared state for the criteria that reuse one flow on the 8-site orbital chain.
struct FlowFixture {
  Interval lam{1, 8};
  int D = 2;
  double gamma = 0.5;
  std::vector<double> grid{0.0, 0.005, 0.01, 0.02};
  OrbitalModel model;
  Interaction eta;
  Interaction bulk;
  FFunctionSpec F;
  FlowResult flow;
  std::vector<Phi1Decomposition> dec;
  std::vector<Phi1Split> split;

  explicit FlowFixture(std::uint64_t seed) : model(default_orbital_model(lam)) {
    PerturbationParams pp;
    eta = fermion_to_spin(orbital_interaction(model, lam));
    const Interaction phi = fermion_to_spin(random_even_perturbation(lam, pp, seed));
    F = *phi.decay;
    bulk = split_edge_bulk(phi, lam, D).bulk;
    flow = flow_unitaries(eta, bulk, lam, grid, gamma);
    for (std::size_t i = 0; i < grid.size(); ++i) {
      dec.push_back(decompose_phi1(flow, i, eta, bulk));
      split.push_back(split_phi1(dec.back(), flow.P0));
    }
  }
};

struct Suite {
  AcceptanceOptions opts;
  std::optional<FlowFixture> fixture;
  std::optional<BoundConstants> constants;

  FlowFixture& flow() {
    if (!fixture) fixture.emplace(opts.seed);
    return *fixture;
  }

  // Constants for the orbital model with the envelope decay, C calibrated on the fixture flow.
  BoundConstants& bounds() {
    if (constants) return *constants;
    FlowFixture& fx = flow();
    const Interval dom(1, 12);
    const Interaction eta = fermion_to_spin(orbital_interaction(default_orbital_model(dom), dom));
    const UnperturbedReport rep = validate_unperturbed(eta, {8, 10, 12}, 1);
    if (!rep.gamma0) throw DomainError("no gamma0 candidate");
    PerturbationParams pp;
    const std::uint64_t seed = opts.seed;
    auto phi_for = [&](const Interval& v) { return fermion_to_spin(random_even_perturbation(v, pp, seed)); };
    const EdgeBulkStrengths st =
        edge_bulk_strengths(phi_for, {Interval(1, 8), Interval(1, 10), Interval(1, 12)}, fx.D, as_decay(fx.F));
    const double C = calibrate_C_from_flow(fx.flow, fx.eta, fx.bulk, fx.F, fx.gamma);
    constants = assemble_constants(*rep.gamma0, C, "calibrated on the 8-site flow", f_norm(eta, fx.F),
                                   OmegaModel::step(default_orbital_model(dom).D()), shifted_base(fx.F, eta.range()),
                                   st);
    return *constants;
  }
};

struct Outcome {
  bool pass;
  std::string detail;
};

Outcome orbital_structure(Suite&) {
  const Interval dom(1, 12);
  const OrbitalModel model = default_orbital_model(dom);
  const UnperturbedReport rep =
      validate_unperturbed(fermion_to_spin(orbital_interaction(model, dom)), {6, 8, 10, 12}, 1);
  bool ok = rep.volumes.size() == 4;
  std::ostringstream d;
  for (const auto& v : rep.volumes) {
    const Matrix Z = auxiliary_basis(model, v.lam);
    double inside = 0.0;
    if (auto in = interior(v.lam, 3 * model.R))
      for (int x = in->a; x <= in->b; ++x) inside = std::max(inside, Z.row(x - v.lam.a).cwiseAbs().maxCoeff());
    const bool cell = std::abs(v.ground_energy) <= 1e-10 && std::abs(v.min_nonzero - 1.0) <= 1e-9 &&
                      v.kernel_dim == (1 << Z.cols()) && Z.cols() <= 6 * model.R && inside <= 1e-12;
    ok = ok && cell;
    d << "L=" << v.lam.size() << " E0=" << fmt(v.ground_energy) << " gap=" << fmt(v.min_nonzero)
      << " ker=" << v.kernel_dim << " |Z|=" << Z.cols() << "; ";
  }
  return {ok, d.str()};
}

Outcome orbital_ltqo(Suite&) {
  const Interval lam(1, 10);
  const OrbitalModel model = default_orbital_model(lam);
  const LTQOProfile prof = verify_orbital_ltqo(model, lam, all_probes(lam, 2));
  int zeros = 0, bad = 0;
  double below = 0.0;
  for (const auto& s : prof.samples) {
    if (s.separation >= model.D()) {
      zeros += s.exact_zero;
      bad += !s.exact_zero;
    } else {
      below = std::max(below, s.lower_bound);
      bad += s.lower_bound > 2.0;
    }
  }
  return {bad == 0 && !prof.samples.empty(),
          std::to_string(prof.samples.size()) + " probes, " + std::to_string(zeros) +
              " certified zeros at separation >= D=" + std::to_string(model.D()) + ", max lower bound below D " +
              fmt(below) + ", violations " + std::to_string(bad)};
}

Outcome aklt_ltqo(Suite&) {
  const UnperturbedReport rep = validate_unperturbed(aklt_interaction(Interval(1, 8)), {6, 7, 8}, 1);
  bool ok = true;
  for (const auto& v : rep.volumes) ok = ok && v.ground_energy <= 1e-10 && v.kernel_dim == 4;
  int probes = 0, bad = 0;
  double worst = 0.0;  // max of lower_bound / (1.5 3^-sep)
  WitnessOptions o;
  o.restarts = 4;
  for (int L : {6, 7, 8}) {
    const Interval lam(1, L);
    KernelCache cache(aklt_interaction(lam), lam);
    for (const auto& p : all_probes(lam, 1)) {
      const int sep = cutoff(lam, p.x, p.n) - p.k;
      if (sep < 1) continue;
      const WitnessResult w = ltqo_witness(cache, p.x, p.n, p.k, false, o);
      const double env = 1.5 * std::pow(1.0 / 3.0, sep);
      worst = std::max(worst, w.lower_bound / env);
      bad += w.lower_bound > env;
      ++probes;
      ++o.seed;
    }
  }
  return {ok && bad == 0 && probes > 0,
          "kernel 4 with zero energy on L=6..8: " + std::string(ok ? "yes" : "no") + "; " + std::to_string(probes) +
              " probes, max lower_bound/(1.5*3^-sep) " + fmt(worst)};
}

Outcome jordan_wigner_check(Suite& s) {
  double worst = 0.0;
  bool even = true;
  for (int L : {4, 6, 8, 10}) {
    const Interval lam(1, L);
    const Interaction eta = orbital_interaction(default_orbital_model(lam), lam);
    PerturbationParams pp;
    const Interaction phi = random_even_perturbation(lam, pp, s.opts.seed + L);
    for (const auto* in : {&eta, &phi})
      for (const auto& t : in->terms()) even = even && parity_grade(t.op) == ParityGrade::Even;
    for (double eps : {0.0, 0.05}) {
      Matrix hf = local_hamiltonian(eta, lam).matrix;
      accumulate_hamiltonian(hf, phi, lam, eps);
      Matrix hs = local_hamiltonian(fermion_to_spin(eta), lam).matrix;
      accumulate_hamiltonian(hs, fermion_to_spin(phi), lam, eps);
      worst = std::max(worst, (eigvalsh(hf) - eigvalsh(hs)).cwiseAbs().maxCoeff());
    }
  }
  return {even && worst <= 1e-10, "max spectral difference " + fmt(worst) + ", all terms even: " + (even ? "yes" : "no")};
}

// Even interaction on lam with interval keys and extra two-site keys {x, x+2}.
Interaction random_with_gaps(const Interval& lam, std::uint64_t seed) {
  PerturbationParams pp;
  pp.max_radius = 2;
  Interaction psi = random_even_perturbation(lam, pp, seed);
  std::mt19937_64 rng(seed ^ 0x9e3779b97f4a7c15ULL);
  std::normal_distribution<double> g;
  for (int x = lam.a; x + 2 <= lam.b; ++x) {
    const Interval h(x, x + 2);
    const Matrix hop = (creation(h, x) * annihilation(h, x + 2)).matrix;
    const Matrix pair = (creation(h, x) * creation(h, x + 2)).matrix;
    const Complex a(g(rng), g(rng)), b(g(rng), g(rng));
    Matrix m = 0.1 * (a * hop + b * pair);
    m += m.adjoint().eval();
    psi.add(SiteSet(std::vector<int>{x, x + 2}), LocalOperator::fermion(m, SiteSet(h), lam));
  }
  return psi;
}

Outcome regrouping(Suite& s) {
  double worst = 0.0, ratio = 0.0;
  int trials = 0;
  for (int i = 0; i < 20; ++i) {
    const Interval lam(1, 6 + i % 3);
    const Interaction psi = random_with_gaps(lam, s.opts.seed * 1000 + i);
    const Interaction phi = regroup_intervals(psi);
    for (int a = lam.a; a <= lam.b; ++a)
      for (int b = a; b <= lam.b; ++b) {
        const Interval sub(a, b);
        const Matrix lhs = local_hamiltonian(psi.restricted(sub), sub).matrix;
        const Matrix rhs = local_hamiltonian(phi.restricted(sub), sub).matrix;
        worst = std::max(worst, operator_norm(lhs - rhs));
      }
    const double nF = f_norm(psi, *psi.decay);
    const double nG = f_norm(phi, as_decay(*phi.derived_decay));
    ratio = std::max(ratio, nG / nF);
    ++trials;
  }
  return {worst <= 1e-12 && ratio <= 1.0,
          std::to_string(trials) + " interactions, max subinterval difference " + fmt(worst) +
              ", max ||Phi||_G/||Psi||_F " + fmt(ratio)};
}

Outcome flow_check(Suite& s) {
  FlowFixture& fx = s.flow();
  double res = 0.0, comm = 0.0, agree = 0.0;
  for (std::size_t i = 0; i < fx.grid.size(); ++i) {
    res = std::max(res, fx.flow.residual[i]);
    comm = std::max(comm, fx.dec[i].max_commutator);
    const EigenSystem es = eigh_sectors(fx.flow.h(fx.grid[i]), fx.flow.sectors);
    const Matrix a = flow_generator(es, fx.flow.psi, fx.gamma, fx.flow.kernel_dim, GeneratorMethod::EigenbasisFilter);
    const Matrix b = flow_generator(es, fx.flow.psi, fx.gamma, fx.flow.kernel_dim, GeneratorMethod::TimeQuadrature);
    agree = std::max(agree, operator_norm(a - b));
  }
  return {res <= 1e-6 && comm <= 1e-6 && agree <= 1e-6,
          "||P(eps) - U P(0) U*|| " + fmt(res) + ", max ||[P(0), Phi1_x]|| " + fmt(comm) + ", generator difference " +
              fmt(agree)};
}

Outcome decomposition_check(Suite& s) {
  FlowFixture& fx = s.flow();
  KernelCache cache(fx.eta, fx.lam);
  const auto inner = interior(fx.lam, 2);
  double split = 0.0, theta = 0.0, ann = 0.0;
  int layers = 0;
  for (std::size_t i = 0; i < fx.grid.size(); ++i) {
    split = std::max(split, fx.split[i].reconstruction_error);
    for (int x = inner->a; x <= inner->b; ++x) {
      const ThetaAssembly th = theta_assembly(fx.dec[i], cache, x);
      theta = std::max(theta, th.reconstruction_error);
      for (const auto& [n, beta] : th.beta) {
        const Matrix& P = cache.ball_projector(x, n);
        ann = std::max(ann, operator_norm(P * beta));
        ++layers;
      }
    }
  }
  return {split <= 1e-10 && theta <= 1e-10 && ann <= 1e-10,
          "split reconstruction " + fmt(split) + ", theta reconstruction " + fmt(theta) + ", max ||P_b(n) Theta_beta|| " +
              fmt(ann) + " over " + std::to_string(layers) + " layers"};
}

// Enumerates every sigma on a part and applies fn(sigma, S(sigma)).
void for_each_sigma(KernelCache& cache, const std::vector<int>& part, int n,
                    const std::function<void(const std::vector<int>&, const Matrix&)>& fn) {
  const int m = static_cast<int>(part.size());
  for (int mask = 0; mask < (1 << m); ++mask) {
    std::vector<int> sigma(m);
    for (int j = 0; j < m; ++j) sigma[j] = (mask >> j) & 1;
    fn(sigma, sigma_projection(cache, part, n, sigma));
  }
}

// Frobenius norms bound the operator norm from above, so the tolerances below stay conservative.
Outcome resolution_check(Suite& s) {
  double sum_err = 0.0, partial_err = 0.0, annihil = 0.0, s_sum = 0.0, s_orth = 0.0, s_comm = 0.0;
  {
    const Interval lam(1, 10);
    KernelCache cache(fermion_to_spin(orbital_interaction(default_orbital_model(lam), lam)), lam);
    const Matrix& P = cache.full_projector();
    const Matrix one = Matrix::Identity(P.rows(), P.cols());
    const Interval anchors = *interior(lam, 2);
    for (int x = anchors.a; x <= anchors.b; ++x) {
      const int r = boundary_distances(lam, x).r;
      const std::vector<Matrix> E = resolution_family(cache, x);
      Matrix acc = Matrix::Zero(P.rows(), P.cols());
      for (int k = 1; k <= static_cast<int>(E.size()); ++k) {
        acc += E[k - 1];
        if (k <= r) {
          const Matrix& Pb = cache.ball_projector(x, k);
          partial_err = std::max(partial_err, (acc - (one - Pb)).norm());
          annihil = std::max(annihil, (Pb * E[k - 1]).norm());
        } else if (k == r + 1) {
          partial_err = std::max(partial_err, (acc - (one - P)).norm());
          annihil = std::max(annihil, (P * E[k - 1]).norm());
        }
      }
      sum_err = std::max(sum_err, (acc - one).norm());
    }
    for (int n = 1; n <= 3; ++n)
      for (const auto& part : interior_partition(lam, n)) {
        std::vector<Matrix> S;
        for_each_sigma(cache, part, n, [&](const std::vector<int>&, const Matrix& m) { S.push_back(m); });
        Matrix total = Matrix::Zero(P.rows(), P.cols());
        // Projectors summing to the identity are mutually orthogonal.
        for (const Matrix& m : S) {
          total += m;
          s_orth = std::max(s_orth, (m * m - m).norm() + (m - m.adjoint()).norm());
        }
        s_sum = std::max(s_sum, (total - one).norm());
      }
  }
  FlowFixture& fx = s.flow();
  KernelCache cache(fx.eta, fx.lam);
  const auto inner = interior(fx.lam, 2);
  int pairs = 0;
  for (int x = inner->a; x <= inner->b; ++x) {
    const ThetaAssembly th = theta_assembly(fx.dec.back(), cache, x);
    for (const auto& [n, beta] : th.beta)
      for (const auto& part : interior_partition(fx.lam, n)) {
        if (std::find(part.begin(), part.end(), x) == part.end()) continue;
        for_each_sigma(cache, part, n, [&](const std::vector<int>&, const Matrix& S) {
          s_comm = std::max(s_comm, (beta * S - S * beta).norm());
          ++pairs;
        });
      }
  }
  const bool ok = sum_err <= 1e-12 && partial_err <= 1e-10 && annihil <= 1e-10 && s_sum <= 1e-10 && s_orth <= 1e-10 &&
                  s_comm <= 1e-10 && pairs > 0;
  return {ok, "sum E_k " + fmt(sum_err) + ", partial sums " + fmt(partial_err) + ", P_b(k) E_k " + fmt(annihil) +
                  ", sum S " + fmt(s_sum) + ", orthogonality " + fmt(s_orth) + ", [Theta_beta, S] " + fmt(s_comm) +
                  " over " + std::to_string(pairs) + " pairs"};
}

Outcome form_bound_check(Suite& s) {
  FlowFixture& fx = s.flow();
  const BoundConstants& b = s.bounds();
  const double phi_norm = f_norm(fx.bulk, fx.F);
  const FormConstants fc = form_bound_constants(b.eta_norm, phi_norm, b.M_int, b.gamma0, b.C, b.J);
  int checked = 0, violations = 0;
  double slack = std::numeric_limits<double>::infinity();
  for (std::size_t i = 1; i < fx.grid.size(); ++i) {
    const FormBoundReport r =
        verify_form_bound(fx.flow.h0, fx.split[i].phi2, fc.delta, fc.beta, fx.grid[i], s.opts.form_trials, s.opts.seed + i);
    checked += r.checked;
    violations += r.violations;
    slack = std::min(slack, r.min_slack);
  }
  return {violations == 0 && checked > 0,
          std::to_string(checked) + " vectors, " + std::to_string(violations) + " violations, delta " + fmt(fc.delta) +
              ", beta " + fmt(fc.beta) + ", min slack " + fmt(slack)};
}

Outcome gap_check(Suite& s) {
  const BoundConstants& b = s.bounds();
  std::ostringstream d;
  bool ok = std::isfinite(b.J.J1.upper()) && std::isfinite(b.J.J2.upper()) && std::isfinite(b.J.J3.upper()) &&
            b.threshold.forms_agree && std::isfinite(b.form.p) && std::isfinite(b.form.q);
  d << "J1 " << fmt(b.J.J1.upper()) << ", J2 " << fmt(b.J.J2.upper()) << ", J3 " << fmt(b.J.J3.upper()) << ", m "
    << fmt(b.threshold.m) << " (forms agree: " << (b.threshold.forms_agree ? "yes" : "no") << "), eps* "
    << fmt(b.threshold.eps_star) << ", p " << fmt(b.form.p) << ", q " << fmt(b.form.q) << "; ";

  const double top = std::min(0.05, b.threshold.eps_star);
  std::vector<double> grid;
  for (int i = 0; i <= 4; ++i) grid.push_back(top * i / 4);
  const std::vector<double> desk{0.0, 0.0125, 0.025, 0.0375, 0.05};
  const Interval dom(1, 12);
  const OrbitalModel model = default_orbital_model(dom);
  PerturbationParams pp;
  double min_gap = std::numeric_limits<double>::infinity(), min_desk = min_gap, min_higher = min_gap;
  bool informative = false, dominated = true;
  for (int L : {8, 10, 12}) {
    const Interval lam(1, L);
    const Interaction eta = fermion_to_spin(orbital_interaction(model, dom)).restricted(lam);
    const Interaction phi = fermion_to_spin(random_even_perturbation(lam, pp, s.opts.seed));
    for (const auto& sp : gap_curve(eta, phi, lam, grid)) {
      min_gap = std::min(min_gap, sp.gamma);
      const double bound = ground_gap_bound(b, sp.eps);
      if (sp.eps > 0.0 && bound > 0.0) {
        informative = true;
        dominated = dominated && sp.gamma >= bound;
      }
    }
    for (const auto& sp : gap_curve(eta, phi, lam, desk)) min_desk = std::min(min_desk, sp.gamma);
    const Matrix h0 = local_hamiltonian(eta, lam).matrix;
    const Matrix p = local_hamiltonian(phi, lam).matrix;
    for (const auto& g : higher_gap_track(h0, p, 1.0, 2.0, desk, family_sectors(h0, p, 2, L)))
      min_higher = std::min(min_higher, g.gamma);
  }
  ok = ok && min_gap > 0.0 && dominated && min_higher > 0.0;
  d << "min gap on [0, " << fmt(top) << "] " << fmt(min_gap) << ", on [0, 0.05] " << fmt(min_desk)
    << ", higher gap min " << fmt(min_higher) << "; ";
  d << (informative ? "bound positive on part of the grid and dominated by the measured gap"
                    : "bound vacuous at desk scale");
  return {ok, d.str()};
}

Outcome sp0_check(Suite& s) {
  const Interval lam(1, 12);
  const Interaction eta = fermion_to_spin(orbital_interaction(default_orbital_model(lam), lam));
  PerturbationParams pp;
  const std::uint64_t seed = s.opts.seed;
  auto phi_for = [&](const Interval& v) { return fermion_to_spin(random_even_perturbation(v, pp, seed)); };
  std::vector<std::pair<Interval, int>> schedule;
  for (int D : {2, 3, 4, 5}) schedule.emplace_back(lam, D);
  const auto rows = sp0_diameter_scan(eta, phi_for, schedule, 0.02, 2);
  const auto zero = sp0_diameter_scan(eta, phi_for, schedule, 0.0, 1);
  bool mono = true, flat = true;
  std::ostringstream d;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (i > 0 && rows[i].diameter > rows[i - 1].diameter + 1e-8) mono = false;
    flat = flat && zero[i].diameter <= 1e-10;
    d << "D=" << rows[i].D << " diam " << fmt(rows[i].diameter) << "; ";
  }
  d << "eps=0 diameters zero: " << (flat ? "yes" : "no");
  return {mono && flat, d.str()};
}

struct Criterion {
  int id;
  const char* name;
  Outcome (*fn)(Suite&);
};

constexpr Criterion kCriteria[] = {
    {1, "orbital model structure", orbital_structure},
    {2, "orbital even-observable LTQO step", orbital_ltqo},
    {3, "AKLT LTQO decay", aklt_ltqo},
    {4, "Jordan-Wigner spectral equivalence", jordan_wigner_check},
    {5, "interval regrouping", regrouping},
    {6, "spectral flow intertwining", flow_check},
    {7, "decomposition identities", decomposition_check},
    {8, "resolution identities", resolution_check},
    {9, "form bound", form_bound_check},
    {10, "gap non-closing and constants", gap_check},
    {11, "sp0 diameter trend", sp0_check},
};

}  // namespace

std::string format_result(const AcceptanceResult& r) {
  std::ostringstream os;
  os << (r.pass ? "PASS" : "FAIL") << " [" << r.id << "] " << r.name << " (" << fmt(std::round(r.seconds * 10) / 10)
     << " s): " << r.detail;
  return os.str();
}

std::vector<AcceptanceResult> run_acceptance(const AcceptanceOptions& opts, std::ostream* progress) {
  Suite suite{opts, {}, {}};
  std::vector<AcceptanceResult> out;
  for (const auto& c : kCriteria) {
    if (!opts.only.empty() && std::find(opts.only.begin(), opts.only.end(), c.id) == opts.only.end()) continue;
    const auto t0 = std::chrono::steady_clock::now();
    AcceptanceResult r{c.id, c.name, false, "", 0.0};
    try {
      Outcome o = c.fn(suite);
      r.pass = o.pass;
      r.detail = std::move(o.detail);
    } catch (const std::exception& e) {
      r.detail = std::string("error: ") + e.what();
    }
    r.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    if (c.id == 1 && r.seconds > 60.0) {
      r.pass = false;
      r.detail += "; exceeded 60 s";
    }
    if (progress) *progress << format_result(r) << std::endl;
    out.push_back(std::move(r));
  }
  return out;
}

}  // namespace ffstab
