#include "selfint/numerics.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <stdexcept>

#include <unsupported/Eigen/FFT>

namespace selfint {

namespace {

// Gauss-Kronrod 7-15 nodes/weights on [-1, 1].
constexpr double kKronrodNodes[8] = {
    0.991455371120812639206854697526329,
    0.949107912342758524526189684047851,
    0.864864423359769072789712788640926,
    0.741531185599394439863864773280788,
    0.586087235467691130294144838258730,
    0.405845151377397166906606412076961,
    0.207784955007898467600689403773245,
    0.000000000000000000000000000000000};
constexpr double kKronrodWeights[8] = {
    0.022935322010529224963732008058970,
    0.063092092629978553290700663189204,
    0.104790010322250183839876322541518,
    0.140653259715525918745189590510238,
    0.169004726639267902826583426598550,
    0.190350578064785409913256402421014,
    0.204432940075298892414161999234649,
    0.209482141084727828012999174891714};
constexpr double kGaussWeights[4] = {
    0.129484966168869693270611432679082,
    0.279705391489276667901467771423780,
    0.381830050505118944950369775488975,
    0.417959183673469387755102040816327};

QuadResult gk15(const std::function<double(double)>& f, double a, double b) {
  const double c = 0.5 * (a + b);
  const double h = 0.5 * (b - a);
  double fv[15];
  for (int i = 0; i < 7; ++i) {
    fv[i] = f(c - h * kKronrodNodes[i]);
    fv[14 - i] = f(c + h * kKronrodNodes[i]);
  }
  fv[7] = f(c);
  double kronrod = 0.0;
  for (int i = 0; i < 8; ++i) {
    kronrod += kKronrodWeights[i] * (i == 7 ? fv[7] : fv[i] + fv[14 - i]);
  }
  // Gauss nodes are the odd Kronrod nodes.
  double gauss = kGaussWeights[3] * fv[7];
  for (int i = 0; i < 3; ++i) {
    gauss += kGaussWeights[i] * (fv[2 * i + 1] + fv[13 - 2 * i]);
  }
  QuadResult r;
  r.value = kronrod * h;
  const double diff = std::abs(kronrod - gauss) * std::abs(h);
  r.error = std::pow(200.0 * diff, 1.5);
  if (r.error > diff) r.error = diff;
  r.error = std::max(r.error, std::abs(r.value) * 1e-15);
  return r;
}

void gk_recurse(const std::function<double(double)>& f, double a, double b,
                double tol, int depth, int max_depth, QuadResult& acc,
                int& budget) {
  QuadResult panel = gk15(f, a, b);
  if (panel.error <= tol || depth >= max_depth || budget <= 0) {
    acc.value += panel.value;
    acc.error += panel.error;
    if (panel.error > tol) acc.converged = false;
    return;
  }
  --budget;
  const double m = 0.5 * (a + b);
  gk_recurse(f, a, m, 0.5 * tol, depth + 1, max_depth, acc, budget);
  gk_recurse(f, m, b, 0.5 * tol, depth + 1, max_depth, acc, budget);
}

}  // namespace

QuadResult gk15_panel(const std::function<double(double)>& f, double a,
                      double b) {
  return gk15(f, a, b);
}

QuadResult adaptive_gk(const std::function<double(double)>& f, double a,
                       double b, double rel_tol, double abs_tol,
                       int max_depth) {
  QuadResult probe = gk15(f, a, b);
  double tol = std::max(abs_tol, rel_tol * std::abs(probe.value));
  QuadResult acc;
  int budget = 4000;
  gk_recurse(f, a, b, tol, 0, max_depth, acc, budget);
  // One refinement pass if the first scale estimate was poor.
  double tol2 = std::max(abs_tol, rel_tol * std::abs(acc.value));
  if (tol2 < 0.25 * tol) {
    QuadResult acc2;
    budget = 4000;
    gk_recurse(f, a, b, tol2, 0, max_depth, acc2, budget);
    return acc2;
  }
  return acc;
}

std::vector<double> circulant_eigenvalues_direct(
    const std::vector<double>& a) {
  const std::size_t n = a.size();
  std::vector<double> lam(n, 0.0);
  const double w = 2.0 * M_PI / static_cast<double>(n);
  for (std::size_t k = 0; k < n; ++k) {
    double s = 0.0;
    for (std::size_t l = 0; l < n; ++l) {
      s += a[l] * std::cos(w * static_cast<double>(l * k % n));
    }
    lam[k] = s;
  }
  return lam;
}

std::vector<double> circulant_eigenvalues(const std::vector<double>& a) {
  const std::size_t n = a.size();
  if (n == 0) return {};
  if (n < 64) return circulant_eigenvalues_direct(a);
  Eigen::FFT<double> fft;
  std::vector<std::complex<double>> spec;
  std::vector<double> in(a.begin(), a.end());
  fft.fwd(spec, in);
  std::vector<double> lam(n);
  for (std::size_t k = 0; k < n; ++k) lam[k] = spec[k].real();
  return lam;
}

}  // namespace selfint
