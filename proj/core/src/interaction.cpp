#include "ffstab/interaction.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <sstream>
#include <string>

#include "ffstab/errors.hpp"

namespace ffstab {

Interaction::Interaction(InteractionKind kind, int d, Interval domain) : kind_(kind), d_(d), domain_(domain) {
  if (kind == InteractionKind::FermionEven && d != 2) throw DomainError("fermion interactions have d = 2");
}

SiteSet term_op_support(const SiteSet& key, InteractionKind kind) {
  if (kind == InteractionKind::FermionEven && !key.empty()) return SiteSet(key.hull());
  return key;
}

void Interaction::add(const SiteSet& key, const LocalOperator& op, std::optional<BallAnchor> anchor) {
  if (key.empty()) throw DomainError("interaction key must be nonempty");
  if (!key.subset_of(domain_)) throw DomainError("interaction key outside the domain");
  if (op.d != d_ || op.kind != algebra()) throw DomainError("term algebra does not match interaction");
  if (!op.hermitian()) throw DomainError("interaction terms must be Hermitian");
  if (kind_ == InteractionKind::FermionEven && parity_grade(op) != ParityGrade::Even) {
    throw ParityError("fermion interaction term is not even");
  }
  SiteSet target = term_op_support(key, kind_);
  if (!op.support.subset_of(target)) throw DomainError("term acts outside its key");
  LocalOperator homed(op.matrix, op.support, domain_, op.kind, op.d);
  LocalOperator placed = homed.support == target ? homed : embed(homed, target);
  const double nrm = placed.norm();
  terms_.push_back({key, anchor, std::move(placed), nrm});
}

void Interaction::add_ball(int center, int radius, const LocalOperator& op) {
  add(SiteSet(ball(domain_, center, radius)), op, BallAnchor{center, radius});
}

bool Interaction::ball_supported() const {
  return std::all_of(terms_.begin(), terms_.end(), [&](const Term& t) {
    return t.anchor && SiteSet(ball(domain_, t.anchor->center, t.anchor->radius)) == t.key;
  });
}

int Interaction::range() const {
  int r = 0;
  for (const auto& t : terms_) r = std::max(r, t.key.diameter());
  return r;
}

std::vector<SupportNorm> Interaction::support_norms() const {
  std::map<SiteSet, Matrix> summed;
  for (const auto& t : terms_) {
    auto [it, fresh] = summed.try_emplace(t.key, t.op.matrix);
    if (!fresh) it->second += t.op.matrix;
  }
  std::vector<SupportNorm> out;
  out.reserve(summed.size());
  for (const auto& [key, m] : summed) out.push_back({key, operator_norm(m)});
  return out;
}

double Interaction::uniform_bound() const {
  double m = 0.0;
  for (const auto& sn : support_norms()) m = std::max(m, sn.norm);
  return m;
}

Interaction Interaction::restricted(const Interval& lam) const {
  if (!domain_.contains(lam)) throw DomainError("restricted: volume outside the interaction domain");
  Interaction out(kind_, d_, lam);
  out.decay = decay;
  out.derived_decay = derived_decay;
  for (const auto& t : terms_) {
    if (!t.key.subset_of(lam)) continue;
    Term copy = t;
    copy.op.ambient = lam;
    out.terms_.push_back(std::move(copy));
  }
  return out;
}

Interaction Interaction::scaled(double c) const {
  Interaction out = *this;
  for (auto& t : out.terms_) {
    t.op.matrix *= c;
    t.norm *= std::abs(c);
  }
  return out;
}

void accumulate_hamiltonian(Matrix& out, const Interaction& phi, const Interval& lam, Complex coeff) {
  const SiteSet whole(lam);
  const Eigen::Index n = power(phi.d(), lam.size());
  if (out.rows() != n || out.cols() != n) throw DomainError("accumulate_hamiltonian: size mismatch");
  for (const auto& t : phi.terms()) {
    if (!t.key.subset_of(lam)) {
      std::ostringstream msg;
      msg << "term on " << t.key << " escapes " << lam;
      throw DomainError(msg.str());
    }
    add_embedded(out, t.op.matrix, t.op.support, whole, phi.d(), coeff);
  }
}

LocalOperator local_hamiltonian(const Interaction& phi, const Interval& lam) {
  const Eigen::Index n = power(phi.d(), lam.size());
  Matrix h = Matrix::Zero(n, n);
  accumulate_hamiltonian(h, phi, lam);
  return {std::move(h), SiteSet(lam), lam, phi.algebra(), phi.d()};
}

double f_norm(const Interaction& phi, const DecayFn& F) {
  auto sn = phi.support_norms();
  return f_norm(std::span<const SupportNorm>(sn), F);
}

double f_norm(const Interaction& phi, const FFunctionSpec& F) { return f_norm(phi, as_decay(F)); }

UnperturbedReport validate_unperturbed(const Interaction& eta, const std::vector<int>& lengths,
                                       std::optional<int> start) {
  UnperturbedReport rep;
  rep.range = eta.range();
  rep.uniform_bound = eta.uniform_bound();
  rep.frustration_free = !lengths.empty();
  const int a = start.value_or(eta.domain().a);
  for (int len : lengths) {
    if (len < 1) throw DomainError("probe length must be positive");
    Interval lam(a, a + len - 1);
    Interaction local = eta.restricted(lam);
    Matrix h = local_hamiltonian(local, lam).matrix;
    RealVector ev = eigvalsh_sectors(h, detect_sectors(h, eta.d(), lam.size()));
    const double hn = std::max(std::abs(ev(0)), std::abs(ev(ev.size() - 1)));
    const double thresh = 1e-9 * std::max(1.0, hn);
    VolumeReport v{lam};
    v.min_eigenvalue = ev(0);
    v.ground_energy = ev(0);
    v.nonnegative = ev(0) >= -1e-10;
    for (Eigen::Index i = 0; i < ev.size(); ++i) {
      if (std::abs(ev(i)) <= thresh) {
        ++v.kernel_dim;
      } else if (ev(i) > thresh && (v.min_nonzero == 0.0 || ev(i) < v.min_nonzero)) {
        v.min_nonzero = ev(i);
      }
    }
    v.frustration_free = v.nonnegative && std::abs(v.ground_energy) <= 1e-10 && v.kernel_dim > 0;
    rep.frustration_free = rep.frustration_free && v.frustration_free;
    if (lam.diameter() >= rep.range && v.min_nonzero > 0.0) {
      rep.gamma0 = rep.gamma0 ? std::min(*rep.gamma0, v.min_nonzero) : v.min_nonzero;
    }
    rep.volumes.push_back(v);
  }
  return rep;
}

EdgeBulkSplit split_edge_bulk(const Interaction& phi, const Interval& lam, int D) {
  if (!phi.ball_supported()) throw DomainError("split_edge_bulk: interaction is not ball supported");
  if (D < 0) throw DomainError("split_edge_bulk: negative D");
  Interaction local = phi.domain() == lam ? phi : phi.restricted(lam);
  auto inner = interior(lam, D);
  EdgeBulkSplit out{Interaction(phi.kind(), phi.d(), lam), Interaction(phi.kind(), phi.d(), lam), D, lam};
  for (const auto& t : local.terms()) {
    const bool bulk = inner && inner->contains(t.anchor->center);
    (bulk ? out.bulk : out.edge).add(t.key, t.op, t.anchor);
  }
  out.edge.decay = out.bulk.decay = phi.decay;
  return out;
}

Interaction regroup_intervals(const Interaction& psi) {
  std::map<Interval, Matrix> grouped;
  const int d = psi.d();
  for (const auto& t : psi.terms()) {
    Interval hull = t.key.hull();
    Matrix placed = t.op.support == SiteSet(hull) ? t.op.matrix
                                                   : embed_matrix(t.op.matrix, t.op.support, SiteSet(hull), d);
    auto [it, fresh] = grouped.try_emplace(hull, placed);
    if (!fresh) it->second += placed;
  }
  Interaction out(psi.kind(), d, psi.domain());
  for (auto& [iv, m] : grouped) out.add(SiteSet(iv), LocalOperator(m, SiteSet(iv), psi.domain(), psi.algebra(), d));
  if (psi.decay) {
    out.decay = psi.decay;
    if (psi.decay->weight.kind != Weight::Kind::None) out.derived_decay = regroup_decay(*psi.decay);
  }
  return out;
}

Interaction rekey_as_balls(const Interaction& phi, const Interval& lam) {
  Interaction grouped = regroup_intervals(phi.domain() == lam ? phi : phi.restricted(lam));
  Interaction out(phi.kind(), phi.d(), lam);
  for (const auto& t : grouped.terms()) {
    const int p = t.key.min();
    const int q = t.key.max();
    const int center = (p + q + 1) / 2;
    const int radius = (q - p + 1) / 2;
    out.add_ball(center, radius, t.op);
  }
  out.decay = grouped.decay;
  out.derived_decay = grouped.derived_decay;
  return out;
}

Interaction fermion_to_spin(const Interaction& psi) {
  if (psi.kind() != InteractionKind::FermionEven) throw DomainError("fermion_to_spin: fermion interaction expected");
  Interaction out(InteractionKind::Spin, 2, psi.domain());
  for (const auto& t : psi.terms()) {
    if (!t.key.is_interval()) throw DomainError("fermion_to_spin: interval-supported input required");
    if (parity_grade(t.op) != ParityGrade::Even) throw ParityError("fermion_to_spin: odd term");
    out.add(t.key, jordan_wigner(t.op), t.anchor);
  }
  out.decay = psi.decay;
  out.derived_decay = psi.derived_decay;
  return out;
}

}  // namespace ffstab
