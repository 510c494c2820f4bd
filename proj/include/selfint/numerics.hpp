#pragma once

// Shared numerical kernels: adaptive Gauss-Kronrod quadrature and circulant
// eigenvalue evaluation.

#include <functional>
#include <vector>

namespace selfint {

struct QuadResult {
  double value = 0.0;
  double error = 0.0;  // absolute error estimate
  bool converged = true;
};

// Adaptive Gauss-Kronrod 7-15 on [a, b]. Stops when the local Kronrod error
// estimate satisfies the tolerance; non-convergent regions are summed anyway
// and flagged.
QuadResult adaptive_gk(const std::function<double(double)>& f, double a,
                       double b, double rel_tol = 1e-10,
                       double abs_tol = 1e-14, int max_depth = 40);

// Single non-adaptive GK15 panel (value, error estimate).
QuadResult gk15_panel(const std::function<double(double)>& f, double a,
                      double b);

// Eigenvalues lambda_k = sum_l a_l cos(2*pi*l*k/N) of the symmetric circulant
// with first row a. Uses an FFT when available, direct cosine sums otherwise.
std::vector<double> circulant_eigenvalues(const std::vector<double>& first_row);

// Direct O(N^2) cosine-sum evaluation, kept as an independent cross-check of
// the FFT path.
std::vector<double> circulant_eigenvalues_direct(
    const std::vector<double>& first_row);

}  // namespace selfint
