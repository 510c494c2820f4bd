#pragma once

// Exact machinery for quadratic potentials (gamma = 2). The Gibbs weight is
// exp(-E) with E = (1/2) x^T A x per coordinate, so every matrix here is the
// precision of the per-coordinate Gaussian; covariances come from linear
// solves against A.
//
// Periodic operators are circulant. The free constant mode is regularized by
// adding epsilon * (1 1^T / N), which shifts only the k = 0 eigenvalue, so
// increment statistics are exactly independent of epsilon. dft_increment_
// variance never touches k = 0 and realizes the epsilon -> 0 limit.

#include <cstdint>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "selfint/model.hpp"

namespace selfint {

struct PrecisionMatrix {
  Eigen::MatrixXd m;  // per-coordinate precision
  Boundary boundary = Boundary::Pinned;
  std::int64_t grid_n = 0;  // N; matrix size is N for both boundaries

  std::int64_t size() const { return m.rows(); }

  // Reduce a grid functional (length N+1) to matrix coordinates:
  // pinned drops site 0 (pinned at the origin), periodic folds site N onto
  // site 0.
  Eigen::VectorXd reduce(const std::vector<double>& grid_weights) const;
};

struct CirculantOperator {
  std::vector<double> first_row;  // a_0 .. a_{N-1}, a_j = a_{N-j}
  double epsilon = 0.0;           // zero-mode regularization
  std::int64_t grid_n = 0;

  // lambda_k = sum_l a_l cos(2 pi l k / N) for k >= 1; lambda_0 = epsilon.
  std::vector<double> eigenvalues() const;
  // Dense materialization (adds epsilon/N to every entry).
  Eigen::MatrixXd dense() const;
};

struct CovarianceSummary {
  std::vector<std::string> labels;
  Eigen::MatrixXd cov;  // per-coordinate covariances v_i^T A^{-1} v_j

  double variance(std::size_t i) const { return cov(i, i); }
  double covariance(std::size_t i, std::size_t j) const { return cov(i, j); }
};

// Dense precision of a quadratic spec; x^T A x / 2 equals energy(x) exactly.
// Pinned: size N over sites 1..N. Periodic: the circulant with the zero-mode
// regularization `epsilon`. Dense assembly is capped at N <= 8192.
PrecisionMatrix assemble_precision(const ModelSpec& spec,
                                   double epsilon = 1e-8);

// First row of the periodic quadratic-form operator (gamma = 2):
//   a_0 = 2*Ntil + (2 alpha / Ntil^2) sum_l K_per[l]
//   a_j = -(2 alpha / Ntil^2) K_per[j] - Ntil * [j in {1, N-1}]
// with K_per the cyclically symmetrized kernel.
CirculantOperator circulant_coefficients(const ModelSpec& spec,
                                         double epsilon);

// Per-coordinate variance of x_m - x_n under the periodic Gaussian:
// (2/N) sum_{k>=1} (1 - cos(2 pi (m-n) k / N)) / lambda_k.
// m, n are grid indices (index N is folded onto 0). Throws if any
// lambda_k <= 0 for k >= 1.
double dft_increment_variance(const CirculantOperator& op, std::int64_t m,
                              std::int64_t n);

enum class HierBlocks { EndpointChain, AllBlocksUpTo };

// Pinned Brownian precision plus alpha * sum_l A_l^{-2} v_l v_l^T, where v_l
// computes the averaged increment sbar of each selected dyadic block.
// a_seq[l-1] = A_l for levels l = 1..t; +inf entries disable a level.
// EndpointChain: blocks [0, 2^l] for l = 1..t and [T-2^l, T] for l = 1..t-1.
// AllBlocksUpTo: all aligned blocks of levels 1..level_cap.
PrecisionMatrix hier_precision(const ModelSpec& spec,
                               const std::vector<double>& a_seq,
                               HierBlocks blocks, int level_cap = 0);

// v_i^T A^{-1} v_j for grid functionals (per coordinate), via Cholesky
// solves. Throws on non-positive-definite precision.
CovarianceSummary covariance_of_functionals(
    const PrecisionMatrix& prec,
    const std::vector<std::vector<double>>& grid_functionals,
    const std::vector<std::string>& labels = {});

// Full covariance A^{-1} (desk scale only).
Eigen::MatrixXd dense_covariance(const PrecisionMatrix& prec);

// Exact i.i.d. samples from the Gaussian exp(-x^T A x / 2) per coordinate,
// assembled into paths (pinned: site 0 fixed at the origin; periodic: the
// free constant mode is sampled at unit precision so increments are exact
// and values stay bounded). Deterministic for a given seed.
std::vector<Path> sample_gaussian(const PrecisionMatrix& prec,
                                  const ModelSpec& spec, std::uint64_t seed,
                                  int count);

// Smallest eigenvalue of covB - covA (the Loewner margin).
double loewner_margin(const Eigen::MatrixXd& cov_a,
                      const Eigen::MatrixXd& cov_b);

// true iff covA <= covB up to tol: lambda_min(covB - covA) >= -tol.
bool loewner_leq(const Eigen::MatrixXd& cov_a, const Eigen::MatrixXd& cov_b,
                 double tol);

struct MsdResult {
  double value = 0.0;
  double error = 0.0;
  bool converged = true;
};

struct QuadratureConfig {
  double rel_tol = 1e-7;
  double k_max = 64.0;  // analytic tail beyond max(k_max, 4*k0)
};

// Continuum mean-square displacement of the periodic Gaussian model,
//   msd(alpha, xi, s) = 4 int_0^inf (1 - cos(2 pi s k)) /
//                       (4 pi^2 k^2 + 2 alpha (rho_hat(0) - rho_hat(k))) dk,
// the exact large-N limit of dft_increment_variance (alpha = 0 gives |s|).
// Requires xi > 1; throws std::domain_error otherwise (non-integrable).
MsdResult continuum_msd(double alpha, double xi, double s,
                        const QuadratureConfig& cfg = {});

// Cosine transform pieces, exposed for tests: rho_hat(0) = 2 pi/(xi sin(pi/xi))
// and rho_hat(k) = 2 int_0^inf cos(2 pi k t)/(1 + t^xi) dt.
double rho_hat0(double xi);
double rho_hat(double k, double xi);

}  // namespace selfint
