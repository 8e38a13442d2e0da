#pragma once

#include <optional>
#include <vector>

#include "ffstab/ffunction.hpp"
#include "ffstab/operator_algebra.hpp"

namespace ffstab {

enum class InteractionKind { Spin, FermionEven };

struct BallAnchor {
  int center = 0;
  int radius = 0;
};

// One entry Phi(key). Spin operators act on the key itself; fermion operators on its hull.
struct Term {
  SiteSet key;
  std::optional<BallAnchor> anchor;
  LocalOperator op;
  double norm = 0.0;
};

class Interaction {
 public:
  Interaction() = default;
  Interaction(InteractionKind kind, int d, Interval domain);

  InteractionKind kind() const { return kind_; }
  int d() const { return d_; }
  const Interval& domain() const { return domain_; }
  AlgebraKind algebra() const {
    return kind_ == InteractionKind::Spin ? AlgebraKind::Spin : AlgebraKind::Fermion;
  }
  const std::vector<Term>& terms() const { return terms_; }
  bool empty() const { return terms_.empty(); }

  // Hermitian term on `key`; an operator on a smaller support is embedded first.
  void add(const SiteSet& key, const LocalOperator& op, std::optional<BallAnchor> anchor = std::nullopt);
  void add_ball(int center, int radius, const LocalOperator& op);

  // Every key a metric ball of the domain.
  bool ball_supported() const;
  // Largest key diameter.
  int range() const;
  // Largest norm of an aggregated entry Phi(X).
  double uniform_bound() const;
  // Entries with equal keys summed, one norm per key.
  std::vector<SupportNorm> support_norms() const;

  // Terms whose key lies in lam, re-homed to lam as ambient.
  Interaction restricted(const Interval& lam) const;
  Interaction scaled(double c) const;

  std::optional<FFunctionSpec> decay;
  std::optional<DerivedFSpec> derived_decay;

 private:
  InteractionKind kind_ = InteractionKind::Spin;
  int d_ = 2;
  Interval domain_;
  std::vector<Term> terms_;
};

SiteSet term_op_support(const SiteSet& key, InteractionKind kind);

// H_lam = sum over X in lam of Phi(X); throws if a term escapes lam.
LocalOperator local_hamiltonian(const Interaction& phi, const Interval& lam);
// Same sum as a bare matrix, with an overall coefficient added into `out`.
void accumulate_hamiltonian(Matrix& out, const Interaction& phi, const Interval& lam, Complex coeff = 1.0);

double f_norm(const Interaction& phi, const DecayFn& F);
double f_norm(const Interaction& phi, const FFunctionSpec& F);

struct VolumeReport {
  Interval lam;
  double ground_energy = 0.0;
  double min_eigenvalue = 0.0;
  int kernel_dim = 0;
  double min_nonzero = 0.0;
  bool nonnegative = false;
  bool frustration_free = false;
};

struct UnperturbedReport {
  int range = 0;
  double uniform_bound = 0.0;
  std::vector<VolumeReport> volumes;
  bool frustration_free = false;
  std::optional<double> gamma0;  // min over probes with b - a >= R
  bool extrapolated = false;      // always false: larger volumes are not probed
};

UnperturbedReport validate_unperturbed(const Interaction& eta, const std::vector<int>& lengths,
                                       std::optional<int> start = std::nullopt);

struct EdgeBulkSplit {
  Interaction edge;
  Interaction bulk;
  int D = 0;
  Interval lam;
};

EdgeBulkSplit split_edge_bulk(const Interaction& phi, const Interval& lam, int D);
Interaction regroup_intervals(const Interaction& psi);
Interaction rekey_as_balls(const Interaction& phi, const Interval& lam);
Interaction fermion_to_spin(const Interaction& psi);

}  // namespace ffstab
