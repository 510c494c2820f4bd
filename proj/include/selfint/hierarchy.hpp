#pragma once

// Dyadic statistics, the telescoping decomposition of x_T, quadratic-form
// domination, the variance-decomposition bound, theorem-bound evaluators,
// and the A_n/r_n and S_j/V_j recursions.
//
// Logarithm conventions, used consistently everywhere: log(T) means the
// natural log; log_T(y) = ln(y)/ln(T). C(T) = sqrt(40 ln T),
// D(T) = log_T(ln T + (ln T)^2).

#include <cstdint>
#include <map>
#include <vector>

#include "selfint/dyadic.hpp"
#include "selfint/gaussian.hpp"
#include "selfint/model.hpp"

namespace selfint {

struct DyadicStatistics {
  int t = 0;                // T = 2^t
  int dim = 1;
  // sigma[i] = trapezoid integral of x over [i, i+1], length T, dim coords.
  std::vector<std::vector<double>> sigma;
  // sbar[(l, u)] = averaged increment of the block [u, u+2^l], levels 1..t,
  // aligned offsets u = m 2^l.
  std::map<std::pair<int, std::int64_t>, std::vector<double>> sbar;
  // block_fluct[(j, u)] = sup-increment R_{u,j} over block [u, u+2^j],
  // levels 0..t.
  std::map<std::pair<int, std::int64_t>, double> block_fluct;

  const std::vector<double>& sbar_at(int level, std::int64_t u) const;
  double r_at(int level, std::int64_t u) const;
  // R_j = max over aligned blocks at level j.
  double r_max(int level) const;

  // Event B_i: sup-increment over [0, 2^i] bounded by sqrt(2^i * 20 * i ln 2).
  bool b_event(int i) const;
  // Event C_n: every level-n averaged increment below sqrt(20 t) * a_n.
  bool c_event(int n, double a_n) const;
};

// All sigma, sbar, and block fluctuation values of a path (trapezoid sigma).
DyadicStatistics dyadic_stats(const Path& path, const ModelSpec& spec);

// Residual of the dyadic decomposition of x_T,
//   x_T = (x_T - sigma_{T-1}) + sum_{l=1}^{t-1} sbar_{T-2^l}^{2^l}
//       + sum_{j=1}^{t} sbar_0^{2^j} + sbar_0^{2^t} + sigma_0,
// which is algebraic in the sigma values (zero up to rounding). The top
// level enters twice: once from closing the backward chain at T/2 and once
// from unrolling sigma_0^T.
double telescoping_residual(const Path& path, const DyadicStatistics& stats);

struct QuadformReport {
  double q = 0.0;        // int_{I1} int_{I2} |x_t - x_s|^2
  double q_tilde = 0.0;  // |int_{I1} x - int_{I2} x|^2
  double gap = 0.0;      // q - q_tilde >= 0
  double correction = 0.0;  // L * (sum of within-block squared deviations)
};

// Equal-length grid-aligned intervals [a1, a1+len], [a2, a2+len] (time
// units); trapezoid quadrature throughout. gap == correction exactly (same
// weights on both blocks), which is the equal-length form of the domination
// identity.
QuadformReport quadform(const Path& path, const ModelSpec& spec,
                        std::int64_t a1, std::int64_t a2, std::int64_t len);

struct VarianceBound {
  double bound = 0.0;        // 2/alpha sum A_i^2 + 4/alpha A* t^2
  double proof_variant = 0.0;  // 2/alpha sum A_i^2 + 2/alpha (t + t^2) A*
  double a_star = 0.0;
};

VarianceBound variance_bound_lemma(double alpha,
                                   const std::vector<double>& a_seq, int t);

struct LemmaBoundReport {
  double exact = 0.0;  // Var(sigma_{T-1} - sigma_0) under the hier Gaussian
  double bound = 0.0;
  double proof_variant = 0.0;
  bool holds = false;
};

// Exact Gaussian check of the variance-decomposition bound for the endpoint
// chain with weights a_seq (per coordinate).
LemmaBoundReport check_lemma_bound(const ModelSpec& spec,
                                   const std::vector<double>& a_seq);

enum class TheoremBound { T1_1, T1_2, T1_3, T1_4 };

// Right-hand sides of the four variance theorems (natural logs; constants
// supplied by the caller).
double theorem_bound(TheoremBound which, double alpha, double big_t,
                     double gamma, double xi, double constant_c,
                     double zeta = 1.0);

struct RecursionState {
  std::vector<double> a_seq;  // A_n
  std::vector<double> r_seq;  // r_n
  std::vector<double> s_seq;  // S_j
  std::vector<double> v_seq;  // V_j
  std::vector<double> exponent_trace;  // log_T S_j
  double c_of_t = 0.0;
  double d_of_t = 0.0;
  double a_star = 0.0;
  double beta_const = 0.0;        // (256 sqrt(20) t)^{2-gamma}
  double fixed_point = 0.0;       // exact fixed point of the exponent map
  double limit_prediction = 0.0;  // (2/gamma)(xi - 2 + log_T C(T)) + D(T)
  double bound_cap = 0.0;         // closed-form cap on r_n (xi < 2)
  bool diverged = false;
};

double c_of_t(double big_t);  // sqrt(40 ln T)
double d_of_t(double big_t);  // log_T(ln T + ln^2 T)

// r_0 = sqrt(20); A_n = r_n^{1-gamma/2} 2^{n(xi-2)/2};
// r_{n+1} = 256 sum_{k<=n} A_k. Fills bound_cap with the closed-form cap
// (valid for xi < 2) and flags divergence past 1e12.
RecursionState a_r_recursion(double gamma, double xi, int n_max);

// S_0 = T; V_j = S_j^{1/2} C(T); S_{j+1} = V_j^{2-gamma} T^{xi-2+D(T)}.
// exponent_trace[j] = log_T S_j; fixed_point is the exact limit of the
// trace; limit_prediction is the leading-order closed form.
RecursionState s_v_recursion(double gamma, double xi, double big_t,
                             int j_max);

struct FixedPointResult {
  double iterate = 0.0;      // h^n(1)
  double fixed_point = 0.0;  // C/(1-d)
  double bound = 0.0;        // (C/(1-d)) e^{-n |ln d|}
  double exact_gap = 0.0;    // d^n |x* - 1|
};

// h(x) = C + d x iterated n times from x = 1; requires d < 1.
FixedPointResult fixed_point_iterate(double c, double d, int n);

// xi - 2 + beta - beta*gamma/2 and its fixed point 2(xi-2)/gamma.
double exponent_map(double beta, double gamma, double xi);
double exponent_map_fixed_point(double gamma, double xi);

}  // namespace selfint
