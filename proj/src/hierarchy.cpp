#include "selfint/hierarchy.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace selfint {

namespace {

double norm_of(const std::vector<double>& v) {
  double s = 0.0;
  for (double x : v) s += x * x;
  return std::sqrt(s);
}

}  // namespace

const std::vector<double>& DyadicStatistics::sbar_at(int level,
                                                     std::int64_t u) const {
  auto it = sbar.find({level, u});
  if (it == sbar.end())
    throw std::out_of_range("DyadicStatistics: no such sbar block");
  return it->second;
}

double DyadicStatistics::r_at(int level, std::int64_t u) const {
  auto it = block_fluct.find({level, u});
  if (it == block_fluct.end())
    throw std::out_of_range("DyadicStatistics: no such fluctuation block");
  return it->second;
}

double DyadicStatistics::r_max(int level) const {
  double best = 0.0;
  const std::int64_t len = std::int64_t(1) << level;
  const std::int64_t big_t = std::int64_t(1) << t;
  for (std::int64_t u = 0; u + len <= big_t; u += len)
    best = std::max(best, r_at(level, u));
  return best;
}

bool DyadicStatistics::b_event(int i) const {
  const double len = static_cast<double>(std::int64_t(1) << i);
  const double radius = std::sqrt(len * 20.0 * std::log(len));
  return r_at(i, 0) <= radius;
}

bool DyadicStatistics::c_event(int n, double a_n) const {
  const double radius = std::sqrt(20.0 * t) * a_n;
  const std::int64_t len = std::int64_t(1) << n;
  const std::int64_t big_t = std::int64_t(1) << t;
  if (n == 0) {
    // Level-0 "averaged increments" are the sigma_i themselves.
    for (const auto& s : sigma)
      if (norm_of(s) > radius) return false;
    return true;
  }
  for (std::int64_t u = 0; u + len <= big_t; u += len)
    if (norm_of(sbar_at(n, u)) > radius) return false;
  return true;
}

DyadicStatistics dyadic_stats(const Path& path, const ModelSpec& spec) {
  const std::int64_t big_t = spec.horizon();
  const std::int64_t ntil = spec.n_per_unit;
  const int d = spec.dim;
  DyadicStatistics st;
  st.t = spec.t;
  st.dim = d;

  // sigma_i by trapezoid over [i, i+1].
  st.sigma.assign(static_cast<std::size_t>(big_t), std::vector<double>(d, 0.0));
  const double h = 1.0 / static_cast<double>(ntil);
  for (std::int64_t i = 0; i < big_t; ++i) {
    auto& s = st.sigma[static_cast<std::size_t>(i)];
    for (std::int64_t g = i * ntil; g <= (i + 1) * ntil; ++g) {
      const double w = (g == i * ntil || g == (i + 1) * ntil) ? 0.5 : 1.0;
      for (int c = 0; c < d; ++c) s[c] += w * h * path.at(g, c);
    }
  }

  // Block sums of sigma give every s / sbar exactly.
  for (int l = 1; l <= spec.t; ++l) {
    const std::int64_t len = std::int64_t(1) << l;
    const std::int64_t half = len / 2;
    for (std::int64_t u = 0; u + len <= big_t; u += len) {
      std::vector<double> v(d, 0.0);
      for (std::int64_t i = u; i < u + half; ++i)
        for (int c = 0; c < d; ++c)
          v[c] -= st.sigma[static_cast<std::size_t>(i)][c];
      for (std::int64_t i = u + half; i < u + len; ++i)
        for (int c = 0; c < d; ++c)
          v[c] += st.sigma[static_cast<std::size_t>(i)][c];
      for (int c = 0; c < d; ++c) v[c] /= static_cast<double>(len);
      st.sbar[{l, u}] = std::move(v);
    }
  }
  // The right-edge chain blocks [T-2^l, T] are aligned (2^l divides T-2^l),
  // so the enumeration above already covers them.

  // Sup increments per aligned block.
  for (int j = 0; j <= spec.t; ++j) {
    const std::int64_t len = std::int64_t(1) << j;
    for (std::int64_t u = 0; u + len <= big_t; u += len) {
      const std::int64_t g0 = u * ntil, g1 = (u + len) * ntil;
      double r = 0.0;
      if (d == 1) {
        double lo = path.at(g0, 0), hi = lo;
        for (std::int64_t g = g0; g <= g1; ++g) {
          lo = std::min(lo, path.at(g, 0));
          hi = std::max(hi, path.at(g, 0));
        }
        r = hi - lo;
      } else {
        for (std::int64_t a = g0; a <= g1; ++a)
          for (std::int64_t b = a + 1; b <= g1; ++b)
            r = std::max(r, std::sqrt(sqdist(path, a, b)));
      }
      st.block_fluct[{j, u}] = r;
    }
  }
  return st;
}

double telescoping_residual(const Path& path, const DyadicStatistics& stats) {
  (void)path;
  const int d = stats.dim;
  const int t = stats.t;
  const std::int64_t big_t = std::int64_t(1) << t;
  double res2 = 0.0;
  for (int c = 0; c < d; ++c) {
    // sigma_{T-1} must equal the chain below; x_T - sigma_{T-1} + chain = x_T.
    double acc = stats.sigma[static_cast<std::size_t>(big_t - 1)][c];
    double rhs = stats.sigma[0][c];
    for (int l = 1; l <= t - 1; ++l)
      rhs += stats.sbar_at(l, big_t - (std::int64_t(1) << l))[c];
    for (int j = 1; j <= t; ++j) rhs += stats.sbar_at(j, 0)[c];
    rhs += stats.sbar_at(t, 0)[c];
    const double r = acc - rhs;
    res2 += r * r;
  }
  return std::sqrt(res2);
}

QuadformReport quadform(const Path& path, const ModelSpec& spec,
                        std::int64_t a1, std::int64_t a2, std::int64_t len) {
  if (len < 1) throw std::invalid_argument("quadform: empty interval");
  const std::int64_t big_t = spec.horizon();
  if (a1 < 0 || a2 < 0 || a1 + len > big_t || a2 + len > big_t)
    throw std::invalid_argument("quadform: interval outside [0, T]");
  const bool disjoint = (a1 + len <= a2) || (a2 + len <= a1);
  if (!disjoint) throw std::invalid_argument("quadform: intervals overlap");

  const std::int64_t ntil = spec.n_per_unit;
  const int d = spec.dim;
  const double h = 1.0 / static_cast<double>(ntil);
  const std::int64_t m = len * ntil;  // grid points per block minus one

  auto weight = [&](std::int64_t j) { return (j == 0 || j == m) ? 0.5 * h : h; };

  QuadformReport rep;
  const std::int64_t g1 = a1 * ntil, g2 = a2 * ntil;
  const double big_l = static_cast<double>(len);

  // Block integrals and within-block deviations.
  std::vector<double> mean1(d, 0.0), mean2(d, 0.0);
  for (std::int64_t j = 0; j <= m; ++j) {
    const double w = weight(j);
    for (int c = 0; c < d; ++c) {
      mean1[c] += w * path.at(g1 + j, c);
      mean2[c] += w * path.at(g2 + j, c);
    }
  }
  double qt = 0.0;
  for (int c = 0; c < d; ++c) {
    const double diff = mean1[c] - mean2[c];
    qt += diff * diff;
  }
  rep.q_tilde = qt;

  // Q via the moment identity: sum_{ij} w_i w_j |x_i - y_j|^2
  //   = L sum_j w_j |y_j|^2 + L sum_i w_i |x_i|^2 - 2 <int x, int y>.
  double sq1 = 0.0, sq2 = 0.0, dot12 = 0.0;
  for (std::int64_t j = 0; j <= m; ++j) {
    const double w = weight(j);
    for (int c = 0; c < d; ++c) {
      sq1 += w * path.at(g1 + j, c) * path.at(g1 + j, c);
      sq2 += w * path.at(g2 + j, c) * path.at(g2 + j, c);
    }
  }
  for (int c = 0; c < d; ++c) dot12 += mean1[c] * mean2[c];
  rep.q = big_l * (sq1 + sq2) - 2.0 * dot12;

  // Correction term: L * sum over both blocks of the weighted squared
  // deviation from the block average.
  double dev = 0.0;
  for (int c = 0; c < d; ++c) {
    const double avg1 = mean1[c] / big_l;
    const double avg2 = mean2[c] / big_l;
    double d1 = 0.0, d2 = 0.0;
    for (std::int64_t j = 0; j <= m; ++j) {
      const double w = weight(j);
      const double e1 = path.at(g1 + j, c) - avg1;
      const double e2 = path.at(g2 + j, c) - avg2;
      d1 += w * e1 * e1;
      d2 += w * e2 * e2;
    }
    dev += d1 + d2;
  }
  rep.correction = big_l * dev;
  rep.gap = rep.q - rep.q_tilde;
  return rep;
}

VarianceBound variance_bound_lemma(double alpha,
                                   const std::vector<double>& a_seq, int t) {
  if (static_cast<int>(a_seq.size()) < t)
    throw std::invalid_argument("variance_bound_lemma: need t weights");
  VarianceBound vb;
  double sum = 0.0, best = 0.0;
  for (int i = 0; i < t; ++i) {
    const double a2 = a_seq[static_cast<std::size_t>(i)] *
                      a_seq[static_cast<std::size_t>(i)];
    sum += a2;
    best = std::max(best, a2);
  }
  vb.a_star = best;
  const double td = static_cast<double>(t);
  vb.bound = (2.0 * sum + 4.0 * best * td * td) / alpha;
  vb.proof_variant = (2.0 * sum + 2.0 * (td + td * td) * best) / alpha;
  return vb;
}

LemmaBoundReport check_lemma_bound(const ModelSpec& spec,
                                   const std::vector<double>& a_seq) {
  if (!spec.quadratic())
    throw std::invalid_argument("check_lemma_bound: gamma = 2 required");
  PrecisionMatrix prec =
      hier_precision(spec, a_seq, HierBlocks::EndpointChain);
  // sigma_{T-1} - sigma_0 as one grid functional.
  std::vector<double> w(static_cast<std::size_t>(spec.grid_n()) + 1, 0.0);
  add_trapezoid(w, spec, spec.horizon() - 1, spec.horizon(), 1.0);
  add_trapezoid(w, spec, 0, 1, -1.0);
  CovarianceSummary cov =
      covariance_of_functionals(prec, {w}, {"sigma_diff"});
  LemmaBoundReport rep;
  rep.exact = cov.variance(0);
  VarianceBound vb = variance_bound_lemma(spec.alpha, a_seq, spec.t);
  rep.bound = vb.bound;
  rep.proof_variant = vb.proof_variant;
  rep.holds = rep.exact <= rep.bound * (1.0 + 1e-12);
  return rep;
}

double theorem_bound(TheoremBound which, double alpha, double big_t,
                     double gamma, double xi, double constant_c, double zeta) {
  const double lt = std::log(big_t);
  switch (which) {
    case TheoremBound::T1_1: {
      if (!(xi >= 0.0 && xi < 3.0))
        throw std::domain_error("theorem_bound: T1_1 requires 0 <= xi < 3");
      const double first = constant_c * std::min(1.0 / std::sqrt(alpha), 1.0);
      const double second =
          std::max(lt * lt * std::pow(big_t, xi - 2.0) / zeta, 1.0) / alpha;
      return 16.0 * (first + second);
    }
    case TheoremBound::T1_2: {
      if (!(gamma > 0.0 && gamma < 2.0))
        throw std::domain_error("theorem_bound: T1_2 requires gamma in (0,2)");
      if (!(xi > 1.0 + 0.5 * gamma && xi < 2.0 + 0.5 * gamma))
        throw std::domain_error(
            "theorem_bound: T1_2 requires xi in (1+gamma/2, 2+gamma/2)");
      return constant_c * std::pow(lt, 4.0) *
             std::pow(big_t, xi - 1.0 - 0.5 * gamma);
    }
    case TheoremBound::T1_3: {
      if (!(gamma > 0.0 && gamma < 2.0))
        throw std::domain_error("theorem_bound: T1_3 requires gamma in (0,2)");
      if (!(xi > 2.0))
        throw std::domain_error("theorem_bound: T1_3 requires xi > 2");
      return constant_c * std::pow(big_t, 2.0 * (xi - 2.0) / gamma) * lt * lt;
    }
    case TheoremBound::T1_4: {
      if (!(gamma > 0.0 && gamma < 2.0))
        throw std::domain_error("theorem_bound: T1_4 requires gamma in (0,2)");
      if (!(xi > 0.0 && xi < 2.0))
        throw std::domain_error("theorem_bound: T1_4 requires xi in (0,2)");
      return constant_c * std::pow(lt, 2.5);
    }
  }
  throw std::logic_error("theorem_bound: unknown selector");
}

double c_of_t(double big_t) { return std::sqrt(40.0 * std::log(big_t)); }

double d_of_t(double big_t) {
  const double lt = std::log(big_t);
  return std::log(lt + lt * lt) / lt;
}

RecursionState a_r_recursion(double gamma, double xi, int n_max) {
  if (!(gamma > 0.0 && gamma <= 2.0))
    throw std::invalid_argument("a_r_recursion: gamma in (0, 2]");
  RecursionState st;
  st.r_seq.reserve(static_cast<std::size_t>(n_max) + 1);
  st.a_seq.reserve(static_cast<std::size_t>(n_max) + 1);
  const double exp_r = 1.0 - 0.5 * gamma;
  const double decay = 0.5 * (xi - 2.0);
  double r = std::sqrt(20.0);
  double a_sum = 0.0;
  st.r_seq.push_back(r);
  for (int n = 0; n <= n_max; ++n) {
    const double a = std::pow(r, exp_r) * std::pow(2.0, decay * n);
    st.a_seq.push_back(a);
    st.a_star = std::max(st.a_star, a * a);
    if (n == n_max) break;
    a_sum += a;
    r = 256.0 * a_sum;
    st.r_seq.push_back(r);
    if (!(r < 1e12)) {
      st.diverged = true;
      break;
    }
  }
  if (xi < 2.0) {
    const double eps = 0.5 * gamma;
    const double c = 0.5 * (2.0 - xi);
    st.bound_cap = std::pow(std::pow(20.0, 0.5 * gamma) +
                                eps * 256.0 / (1.0 - std::pow(2.0, -c)),
                            2.0 / gamma);
  } else {
    st.bound_cap = std::numeric_limits<double>::infinity();
  }
  return st;
}

RecursionState s_v_recursion(double gamma, double xi, double big_t,
                             int j_max) {
  if (!(gamma > 0.0 && gamma < 2.0))
    throw std::invalid_argument("s_v_recursion: gamma in (0, 2)");
  RecursionState st;
  st.c_of_t = c_of_t(big_t);
  st.d_of_t = d_of_t(big_t);
  const double log_t = std::log(big_t);
  const double log_c = std::log(st.c_of_t) / log_t;

  double s = big_t;
  st.s_seq.push_back(s);
  st.exponent_trace.push_back(1.0);
  for (int j = 0; j < j_max; ++j) {
    const double v = std::sqrt(s) * st.c_of_t;
    st.v_seq.push_back(v);
    s = std::pow(v, 2.0 - gamma) *
        std::pow(big_t, xi - 2.0 + st.d_of_t);
    st.s_seq.push_back(s);
    st.exponent_trace.push_back(std::log(s) / log_t);
  }
  // Exponent map: beta -> (xi-2+D) + (2-gamma)(beta/2 + log_T C).
  const double map_c = xi - 2.0 + st.d_of_t + (2.0 - gamma) * log_c;
  const double map_d = 0.5 * (2.0 - gamma);
  st.fixed_point = map_c / (1.0 - map_d);
  st.limit_prediction = (2.0 / gamma) * (xi - 2.0 + log_c) + st.d_of_t;
  st.beta_const =
      std::pow(256.0 * std::sqrt(20.0) * std::log2(big_t), 2.0 - gamma);
  return st;
}

FixedPointResult fixed_point_iterate(double c, double d, int n) {
  if (!(d < 1.0))
    throw std::invalid_argument("fixed_point_iterate: requires d < 1");
  FixedPointResult fr;
  double x = 1.0;
  for (int i = 0; i < n; ++i) x = c + d * x;
  fr.iterate = x;
  fr.fixed_point = c / (1.0 - d);
  fr.bound = fr.fixed_point * std::exp(-n * std::abs(std::log(std::abs(d))));
  fr.exact_gap = std::pow(std::abs(d), n) * std::abs(fr.fixed_point - 1.0);
  return fr;
}

double exponent_map(double beta, double gamma, double xi) {
  return xi - 2.0 + beta - 0.5 * beta * gamma;
}

double exponent_map_fixed_point(double gamma, double xi) {
  if (gamma == 0.0)
    throw std::invalid_argument("exponent_map_fixed_point: gamma = 0");
  return 2.0 * (xi - 2.0) / gamma;
}

}  // namespace selfint
