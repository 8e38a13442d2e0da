#pragma once

#include <cstddef>
#include <map>
#include <utility>
#include <vector>

#include "ffstab/interaction.hpp"
#include "ffstab/spectra.hpp"

namespace ffstab {

enum class GeneratorMethod { EigenbasisFilter, TimeQuadrature };

// The weight w(t) = c * sinc(gamma t / k)^k. Its Fourier transform is a centered
// cardinal B-spline of order k supported in [-gamma, gamma] with value 1 at 0.
double weight_transform(double omega, double gamma, int order = 8);
// W(omega) = -(1 - hat w(omega)) / omega, so W = -1/omega once |omega| >= gamma.
double flow_filter(double omega, double gamma, int order = 8);

// 1 - hat w(omega) from direct quadrature of w(t) on a truncated time window.
class TimeQuadrature {
 public:
  TimeQuadrature(double gamma, double omega_max, int order = 8, double tail_tol = 1e-10);
  double one_minus_transform(double omega) const;
  double horizon() const { return T_; }
  std::size_t nodes() const { return t_.size(); }

 private:
  double T_ = 0.0;
  std::vector<double> t_;
  std::vector<double> w_;  // quadrature weight times w(t), normalized to total mass 1/2
};

// D_ij = -i W(E_i - E_j) Psi_ij in the eigenbasis of H. The lowest `split` levels
// must be separated from the rest by at least gamma.
Matrix flow_generator(const EigenSystem& h_eig, const Matrix& psi, double gamma, int split,
                      GeneratorMethod method = GeneratorMethod::EigenbasisFilter);
LocalOperator flow_generator(const LocalOperator& h, const LocalOperator& psi, double gamma, int split,
                             GeneratorMethod method = GeneratorMethod::EigenbasisFilter);

struct FlowOptions {
  int substeps = 2;       // RK4 steps per grid interval at the coarsest level
  int max_refine = 6;     // step halvings before giving up
  double tol = 1e-8;      // intertwining residual target
  int order = 8;
};

struct FlowResult {
  Interval lam;
  int d = 2;
  std::vector<double> eps_grid;
  std::vector<Matrix> U;        // integrated path
  std::vector<Matrix> aligned;  // U corrected by the minimal rotation onto P(eps)
  std::vector<Matrix> D_gen;
  std::vector<double> residual;    // ||P(eps) - U P(0) U*||
  std::vector<double> unitarity;   // ||U*U - 1||
  std::vector<double> gap;         // cluster gap of H(eps)
  Matrix h0;
  Matrix psi;
  Matrix P0;
  int kernel_dim = 0;
  int substeps_used = 0;
  std::vector<int> sectors;

  Matrix h(double eps) const { return h0 + eps * psi; }
};

FlowResult flow_unitaries(const Interaction& eta, const Interaction& psi_bulk, const Interval& lam,
                          const std::vector<double>& eps_grid, double gamma, const FlowOptions& opts = {});

// Phi^1(b_x(n), eps) for every anchor x and 1 <= n <= R_x, as full-volume matrices.
struct Phi1Decomposition {
  Interval lam;
  int d = 2;
  double eps = 0.0;
  Matrix V;  // alpha_eps(H(eps)) - H
  std::map<std::pair<int, int>, Matrix> terms;
  std::map<int, Matrix> anchor_sums;
  double reconstruction_error = 0.0;  // ||sum of terms - V||
  double max_commutator = 0.0;        // max_x ||[P(0), Phi^1_x]||

  // Terms with their ball supports and operator norms, for F-norm evaluation.
  std::vector<SupportNorm> support_norms() const;
};

int anchor_site(const Term& t, const Interval& lam);

Phi1Decomposition decompose_phi1(const FlowResult& flow, std::size_t index, const Interaction& eta,
                                  const Interaction& psi_bulk);

struct Phi1Split {
  Matrix phi_tilde;
  Matrix phi2;
  Matrix phi3;
  double omega_scalar = 0.0;
  Matrix boundary_R;
  double reconstruction_error = 0.0;
  double centering_error = 0.0;  // |omega(phi2 + phi3)|
  double cross_error = 0.0;      // ||P phi2 P|| + ||Q phi3 Q||
};

double ground_expectation(const Matrix& P, const Matrix& A);

Phi1Split split_phi1(const Phi1Decomposition& dec, const Matrix& P);

struct ThetaAssembly {
  int x = 0;
  int r = 0;
  std::map<int, Matrix> beta;  // 3 <= n <= r_x
  Matrix alpha;
  double reconstruction_error = 0.0;  // ||Q Phi^1_{x,0} Q - sum beta - alpha||
  double max_annihilation = 0.0;      // max_n ||P_{b_x(n)} Theta_beta(n)|| + ||Theta_beta(n) P_{b_x(n)}||
};

ThetaAssembly theta_assembly(const Phi1Decomposition& dec, KernelCache& cache, int x);

}  // namespace ffstab
