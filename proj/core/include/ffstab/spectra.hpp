#pragma once

#include <map>
#include <optional>
#include <vector>

#include "ffstab/interaction.hpp"

namespace ffstab {

struct SpectrumSplit {
  double eps = 0.0;
  std::vector<double> sp0;
  std::vector<double> sp1;
  double gamma = 0.0;  // min sp1 - max sp0

  double sp0_diameter() const { return sp0.empty() ? 0.0 : sp0.back() - sp0.front(); }
};

struct TrackingOptions {
  int max_depth = 10;  // bisection levels per grid step
  double kernel_rel_tol = 1e-9;
};

// Eigenvalue sectors shared by the whole family H0 + eps*Phi.
std::vector<int> family_sectors(const Matrix& h0, const Matrix& phi, int d, int n_sites);

EigenSystem diagonalize(const LocalOperator& h);
RealVector spectrum(const LocalOperator& h);

// Kernel size of a frustration-free spectrum under the relative threshold.
int kernel_count(const RealVector& sorted, double rel_tol = 1e-9);

// Follows the lowest `split` eigenvalues of H0 + eps*Phi along the grid. Each step is
// certified by Lipschitz continuity of sorted eigenvalues, refining by bisection when needed.
std::vector<SpectrumSplit> track_split(const Matrix& h0, const Matrix& phi, const std::vector<double>& eps_grid,
                                       int split, const std::vector<int>& sectors,
                                       const TrackingOptions& opts = {});

std::vector<SpectrumSplit> gap_curve(const Interaction& eta, const Interaction& phi, const Interval& lam,
                                     const std::vector<double>& eps_grid, const TrackingOptions& opts = {});

struct HigherGap {
  double eps = 0.0;
  double gamma = 0.0;  // min of the upper group - max of the lower group
};

std::vector<HigherGap> higher_gap_track(const Matrix& h0, const Matrix& phi, double nu, double mu,
                                        const std::vector<double>& eps_grid, const std::vector<int>& sectors,
                                        const TrackingOptions& opts = {});

LocalOperator ground_projector(const LocalOperator& h, double tol = 1e-9);

// Orthonormal basis of ker H_X (columns), built site by site as an intersection of term
// kernels. Requires positive semidefinite terms.
Matrix frustration_free_kernel(const Interaction& eta, const Interval& X);

// Cached kernel isometries and embedded projectors P_X inside a fixed volume.
class KernelCache {
 public:
  KernelCache(Interaction eta, Interval lam);

  const Interval& volume() const { return lam_; }
  const Interaction& eta() const { return eta_; }
  int d() const { return eta_.d(); }
  const Matrix& isometry(const Interval& X);
  // P_X tensor identity on the whole volume.
  const Matrix& projector(const Interval& X);
  const Matrix& full_projector() { return projector(lam_); }
  // P_{b_x(n)} for the ball of the volume.
  const Matrix& ball_projector(int x, int n) { return projector(ball(lam_, x, n)); }

 private:
  Interaction eta_;
  Interval lam_;
  std::map<Interval, Matrix> isometries_;
  std::map<Interval, Matrix> projectors_;
};

// E_1 = 1 - P_{b(1)}, E_n = P_{b(n-1)} - P_{b(n)} (n <= r_x), E_{r_x+1} = P_{b(r_x)} - P, E_{r_x+2} = P.
std::vector<Matrix> resolution_family(KernelCache& cache, int x);

// Parts of Int_2(lam) under x ~ y iff x - y in (2n+1)Z.
std::vector<std::vector<int>> interior_partition(const Interval& lam, int n);

// prod_x [sigma_x Q_{b_x(n)} + (1 - sigma_x) P_{b_x(n)}]
Matrix sigma_projection(KernelCache& cache, const std::vector<int>& part, int n, const std::vector<int>& sigma);

struct DiameterRow {
  int length = 0;
  int D = 0;
  double eps = 0.0;
  double diameter = 0.0;
  double gamma = 0.0;
};

// diam sp0 of H_lam + eps * (bulk part of phi on Int_D) for each (length, D) pair.
// `phi_for` supplies the perturbation on a given volume.
std::vector<DiameterRow> sp0_diameter_scan(const Interaction& eta,
                                           const std::function<Interaction(const Interval&)>& phi_for,
                                           const std::vector<std::pair<Interval, int>>& schedule, double eps,
                                           int steps = 4, const TrackingOptions& opts = {});

}  // namespace ffstab
