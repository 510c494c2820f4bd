#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>

#include "selfint/hierarchy.hpp"
#include "selfint/rng.hpp"

using namespace selfint;

namespace {

ModelSpec plain_spec(int t, int ntil, int dim = 1) {
  ModelSpec s;
  s.t = t;
  s.n_per_unit = ntil;
  s.dim = dim;
  return s;
}

Path brownian_path(const ModelSpec& spec, Rng& rng, double scale = 1.0) {
  Path p = make_path(spec);
  for (std::int64_t i = 1; i < p.n_points; ++i)
    for (int c = 0; c < p.dim; ++c)
      p.at(i, c) = p.at(i - 1, c) + scale * rng.normal();
  return p;
}

}  // namespace

TEST_CASE("dyadic stats: constant and linear paths") {
  auto s = plain_spec(3, 4);
  Path p = make_path(s);
  for (std::int64_t i = 0; i < p.n_points; ++i) p.at(i, 0) = 2.5;
  DyadicStatistics st = dyadic_stats(p, s);
  for (const auto& sig : st.sigma) CHECK(sig[0] == doctest::Approx(2.5));
  for (const auto& [key, v] : st.sbar) CHECK(v[0] == doctest::Approx(0.0));
  for (const auto& [key, r] : st.block_fluct) CHECK(r == 0.0);

  // Linear path x_s = s: sigma_i = i + 1/2 (trapezoid exact on linear),
  // sbar_0^{2^l} = 2^{l-2}.
  Path lin = make_path(s);
  for (std::int64_t i = 0; i < lin.n_points; ++i)
    lin.at(i, 0) = double(i) / s.n_per_unit;
  DyadicStatistics lt = dyadic_stats(lin, s);
  for (std::size_t i = 0; i < lt.sigma.size(); ++i)
    CHECK(lt.sigma[i][0] == doctest::Approx(i + 0.5).epsilon(1e-13));
  for (int l = 1; l <= s.t; ++l)
    CHECK(lt.sbar_at(l, 0)[0] ==
          doctest::Approx(std::pow(2.0, l - 2)).epsilon(1e-13));
  // R_j is the block width for a monotone path, nondecreasing in j.
  for (int j = 0; j <= s.t; ++j)
    CHECK(lt.r_max(j) == doctest::Approx(double(std::int64_t(1) << j)));
}

TEST_CASE("dyadic stats: sbar against a direct quadrature oracle") {
  Rng rng = make_rng(17);
  auto s = plain_spec(4, 4, 2);
  for (int rep = 0; rep < 10; ++rep) {
    Path p = brownian_path(s, rng);
    DyadicStatistics st = dyadic_stats(p, s);
    // Direct trapezoid integrals of the halves.
    for (int l = 1; l <= s.t; ++l) {
      const std::int64_t len = std::int64_t(1) << l;
      for (std::int64_t u = 0; u + len <= s.horizon(); u += len) {
        for (int c = 0; c < s.dim; ++c) {
          auto trap = [&](std::int64_t a, std::int64_t b) {
            double acc = 0.0;
            for (std::int64_t g = a * s.n_per_unit; g <= b * s.n_per_unit; ++g) {
              const double w =
                  (g == a * s.n_per_unit || g == b * s.n_per_unit) ? 0.5 : 1.0;
              acc += w * p.at(g, c) / s.n_per_unit;
            }
            return acc;
          };
          const double direct =
              (trap(u + len / 2, u + len) - trap(u, u + len / 2)) / len;
          CHECK(st.sbar_at(l, u)[c] ==
                doctest::Approx(direct).epsilon(1e-12).scale(1.0));
        }
      }
    }
  }
}

TEST_CASE("telescoping identity is exact; the uncorrected form is not") {
  Rng rng = make_rng(23);
  for (int t = 1; t <= 12; ++t) {
    ModelSpec s = plain_spec(t, 1);
    for (int rep = 0; rep < 20; ++rep) {
      Path p = brownian_path(s, rng);
      DyadicStatistics st = dyadic_stats(p, s);
      const double res = telescoping_residual(p, st);
      const double xt = std::abs(p.at(p.n_points - 1, 0));
      CHECK(res < 1e-10 * (1.0 + xt));

      // Dropping the second copy of the top-level averaged increment (the
      // printed form of the decomposition) leaves a residual of exactly
      // |sbar_0^T|.
      const double top = std::abs(st.sbar_at(t, 0)[0]);
      double rhs = st.sigma[0][0];
      for (int l = 1; l <= t - 1; ++l)
        rhs += st.sbar_at(l, s.horizon() - (std::int64_t(1) << l))[0];
      for (int j = 1; j <= t; ++j) rhs += st.sbar_at(j, 0)[0];
      const double uncorrected =
          std::abs(st.sigma[std::size_t(s.horizon() - 1)][0] - rhs);
      CHECK(uncorrected == doctest::Approx(top).epsilon(1e-9).scale(1.0 + top));
    }
  }
}

TEST_CASE("telescoping conditioning: 1e6-scale entries") {
  Rng rng = make_rng(29);
  ModelSpec s = plain_spec(8, 1);
  for (int rep = 0; rep < 20; ++rep) {
    Path p = make_path(s);
    for (std::int64_t i = 1; i < p.n_points; ++i)
      p.at(i, 0) = 1e6 * rng.normal();
    DyadicStatistics st = dyadic_stats(p, s);
    CHECK(telescoping_residual(p, st) < 1e-6);
  }
}

TEST_CASE("quadform: worked example x_t = t") {
  ModelSpec s = plain_spec(1, 1024);
  Path p = make_path(s);
  for (std::int64_t i = 0; i < p.n_points; ++i)
    p.at(i, 0) = double(i) / s.n_per_unit;
  QuadformReport rep = quadform(p, s, 0, 1, 1);
  CHECK(rep.q == doctest::Approx(7.0 / 6.0).epsilon(1e-5));
  CHECK(rep.q_tilde == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(rep.gap == doctest::Approx(1.0 / 6.0).epsilon(1e-4));
  CHECK(rep.correction == doctest::Approx(rep.gap).epsilon(1e-10));
}

TEST_CASE("quadform: random paths, every dyadic level") {
  Rng rng = make_rng(37);
  ModelSpec s = plain_spec(5, 4, 2);
  for (int rep = 0; rep < 100; ++rep) {
    Path p = brownian_path(s, rng);
    for (int l = 0; l < s.t; ++l) {
      const std::int64_t len = std::int64_t(1) << l;
      for (std::int64_t u = 0; u + 2 * len <= s.horizon(); u += 2 * len) {
        QuadformReport rep2 = quadform(p, s, u, u + len, len);
        CHECK(rep2.gap >= -1e-10);
        CHECK(rep2.gap ==
              doctest::Approx(rep2.correction)
                  .epsilon(1e-8)
                  .scale(1.0 + rep2.correction));
      }
    }
  }
  // Constant path: everything zero.
  Path c = make_path(s);
  for (std::int64_t i = 0; i < c.n_points; ++i) c.at(i, 0) = 4.0;
  QuadformReport rc = quadform(c, s, 0, 8, 8);
  CHECK(rc.q == doctest::Approx(0.0).scale(1.0));
  CHECK(rc.q_tilde == doctest::Approx(0.0).scale(1.0));

  // Unequal lengths and overlap are rejected.
  CHECK_THROWS_AS(quadform(c, s, 0, 4, 8), std::invalid_argument);
  CHECK_THROWS_AS(quadform(c, s, 0, 40, 8), std::invalid_argument);
}

TEST_CASE("variance bound lemma arithmetic") {
  VarianceBound vb = variance_bound_lemma(1.0, {1.0, 1.0, 1.0, 1.0}, 4);
  CHECK(vb.bound == doctest::Approx(72.0));
  CHECK(vb.proof_variant == doctest::Approx(2.0 * 4 + 2.0 * (4 + 16)));
  CHECK(vb.a_star == 1.0);

  // Linear in 1/alpha.
  VarianceBound vb2 = variance_bound_lemma(2.0, {1.0, 1.0, 1.0, 1.0}, 4);
  CHECK(vb2.bound == doctest::Approx(36.0));

  // A_j^2 = 2^{(xi-2)j} at xi = 2: the log^2 regime 2t/alpha + 4t^2/alpha.
  std::vector<double> ones(6, 1.0);
  VarianceBound vb3 = variance_bound_lemma(1.0, ones, 6);
  CHECK(vb3.bound == doctest::Approx(2.0 * 6 + 4.0 * 36));
}

TEST_CASE("check_lemma_bound: exact Gaussian vs the bound") {
  ModelSpec s;
  s.t = 4;
  s.n_per_unit = 2;
  s.alpha = 1.0;
  s.xi = 2.0;
  std::vector<double> a_seq(4, 1.0);  // 2^{(xi-2)j/2} = 1 at xi = 2
  LemmaBoundReport rep = check_lemma_bound(s, a_seq);
  CHECK(rep.holds);
  CHECK(rep.exact > 0.0);
  CHECK(rep.exact <= rep.bound);

  // Both sides vanish as alpha -> infinity.
  ModelSpec big = s;
  big.alpha = 1e6;
  LemmaBoundReport rep2 = check_lemma_bound(big, a_seq);
  CHECK(rep2.holds);
  CHECK(rep2.exact < 1e-3);
  CHECK(rep2.bound < 1e-3);

  // xi = 1 localization: bounded across T.
  double prev = 0.0;
  for (int t = 3; t <= 10; ++t) {
    ModelSpec sloc;
    sloc.t = t;
    sloc.n_per_unit = 1;
    sloc.alpha = 1.0;
    sloc.xi = 1.0;
    std::vector<double> aa;
    for (int l = 1; l <= t; ++l) aa.push_back(std::pow(2.0, -0.5 * l));
    LemmaBoundReport r = check_lemma_bound(sloc, aa);
    CHECK(r.holds);
    CHECK(r.exact < 1.5);
    if (t > 3) CHECK(std::abs(r.exact - prev) < 0.01);
    prev = r.exact;
  }
}

TEST_CASE("theorem bounds") {
  // T1_3 worked example: gamma=1, xi=2.25, T=2^10, C=1.
  const double big_t = 1024.0;
  const double expect = std::pow(big_t, 0.5) * std::pow(std::log(big_t), 2.0);
  CHECK(theorem_bound(TheoremBound::T1_3, 1.0, big_t, 1.0, 2.25, 1.0) ==
        doctest::Approx(expect).epsilon(1e-14));

  // T1_1 with the max resolving to 1.
  const double t_big = std::pow(2.0, 20);
  for (double alpha : {1.0, 4.0, 9.0}) {
    const double got =
        theorem_bound(TheoremBound::T1_1, alpha, t_big, 2.0, 1.0, 1.0);
    CHECK(got == doctest::Approx(16.0 * (1.0 / std::sqrt(alpha) + 1.0 / alpha))
                     .epsilon(1e-12));
  }

  // T1_2 increasing in T for xi > 1 + gamma/2.
  double prev = 0.0;
  for (double t2 : {64.0, 256.0, 1024.0}) {
    const double b = theorem_bound(TheoremBound::T1_2, 1.0, t2, 1.0, 2.2, 1.0);
    CHECK(b > prev);
    prev = b;
  }

  // Range rejections name the offending theorem range.
  CHECK_THROWS_AS(theorem_bound(TheoremBound::T1_3, 1.0, 64.0, 1.0, 1.5, 1.0),
                  std::domain_error);
  CHECK_THROWS_AS(theorem_bound(TheoremBound::T1_1, 1.0, 64.0, 2.0, 3.5, 1.0),
                  std::domain_error);
  CHECK_THROWS_AS(theorem_bound(TheoremBound::T1_4, 1.0, 64.0, 1.0, 2.5, 1.0),
                  std::domain_error);
}

TEST_CASE("a_r recursion: base case, caps, divergence") {
  // gamma = 2: A_0 = 1, r_1 = 256.
  RecursionState st = a_r_recursion(2.0, 1.0, 10);
  CHECK(st.a_seq[0] == doctest::Approx(1.0));
  CHECK(st.r_seq[1] == doctest::Approx(256.0));

  // r nondecreasing; closed-form cap for xi < 2.
  for (double gamma : {0.5, 1.0, 1.5})
    for (double xi : {0.5, 1.0, 1.5}) {
      RecursionState rec = a_r_recursion(gamma, xi, 10000);
      CHECK_FALSE(rec.diverged);
      for (std::size_t i = 1; i < rec.r_seq.size(); ++i)
        CHECK(rec.r_seq[i] >= rec.r_seq[i - 1]);
      for (double r : rec.r_seq) CHECK(r <= rec.bound_cap);
    }

  // xi = 2, gamma = 2: linear growth past any bound.
  RecursionState lin = a_r_recursion(2.0, 2.0, 5000);
  CHECK(lin.r_seq.back() >= 256.0 * 4999.0);

  // xi > 2: explosive growth trips the divergence flag.
  RecursionState expl = a_r_recursion(1.0, 2.5, 10000);
  CHECK(expl.diverged);
}

TEST_CASE("s_v recursion: exact affine trace and geometric convergence") {
  const double gamma = 1.3, xi = 2.4, big_t = 4096.0;
  RecursionState sv = s_v_recursion(gamma, xi, big_t, 80);

  // Trace equals the affine recurrence applied to the direct S iteration.
  const double log_c = std::log(sv.c_of_t) / std::log(big_t);
  for (std::size_t j = 0; j + 1 < sv.exponent_trace.size(); ++j) {
    const double expect = xi - 2.0 + sv.d_of_t +
                          (2.0 - gamma) * (0.5 * sv.exponent_trace[j] + log_c);
    CHECK(sv.exponent_trace[j + 1] ==
          doctest::Approx(expect).epsilon(1e-12).scale(1.0));
  }

  // Geometric ratio (2-gamma)/2 toward the exact fixed point (down to the
  // rounding floor of the trace).
  const double d = 0.5 * (2.0 - gamma);
  for (std::size_t j = 0; j + 1 < sv.exponent_trace.size(); ++j) {
    const double g0 = sv.exponent_trace[j] - sv.fixed_point;
    const double g1 = sv.exponent_trace[j + 1] - sv.fixed_point;
    if (std::abs(g0) < 1e-12) break;
    CHECK(std::abs(g1 - d * g0) <= 1e-10 * (1.0 + std::abs(g0)));
  }
  CHECK(std::abs(sv.exponent_trace.back() - sv.fixed_point) < 1e-12);

  // The leading-order closed form is near, but not equal to, the exact
  // fixed point at finite T.
  CHECK(sv.limit_prediction ==
        doctest::Approx(sv.fixed_point).epsilon(0.75));

  // gamma -> 2^-: one step lands almost on T^{xi-2+D}.
  RecursionState fast = s_v_recursion(1.999, 2.4, 1024.0, 3);
  const double target = xi - 2.0 + fast.d_of_t;
  CHECK(std::abs(fast.exponent_trace[1] - target) < 0.01);
}

TEST_CASE("fixed point iterate") {
  FixedPointResult fr = fixed_point_iterate(1.0, 0.5, 20);
  CHECK(fr.fixed_point == doctest::Approx(2.0));
  CHECK(std::abs(fr.iterate - 2.0) <= 2.0 * std::pow(2.0, -20.0) * (1 + 1e-12));
  CHECK(fr.exact_gap == doctest::Approx(std::pow(2.0, -20.0)));

  FixedPointResult zero = fixed_point_iterate(0.0, 0.25, 8);
  CHECK(zero.fixed_point == 0.0);
  CHECK(zero.iterate == doctest::Approx(std::pow(0.25, 8)));

  CHECK_THROWS_AS(fixed_point_iterate(1.0, 1.0, 5), std::invalid_argument);

  // Certified bound over the restricted random family (x* >= 1/2); the
  // floor absorbs iteration roundoff once d^n is below machine precision.
  Rng rng = make_rng(41);
  for (int rep = 0; rep < 100; ++rep) {
    const double c = rng.uniform(0.5, 3.0);
    const double d = rng.uniform(0.02, 0.98);
    const int n = 1 + int(rng.below(40));
    FixedPointResult f = fixed_point_iterate(c, d, n);
    const double eps = 1e-13 * (1.0 + std::abs(f.fixed_point));
    const double gap = std::abs(f.fixed_point - f.iterate);
    CHECK(gap <= f.bound * (1.0 + 1e-12) + eps);
    CHECK(std::abs(gap - f.exact_gap) <= eps);
  }
}

TEST_CASE("exponent map and fixed point") {
  CHECK(exponent_map_fixed_point(1.0, 2.25) == doctest::Approx(0.5));
  const double fp = exponent_map_fixed_point(1.4, 2.6);
  CHECK(exponent_map(fp, 1.4, 2.6) == doctest::Approx(fp).epsilon(1e-14));
  CHECK(exponent_map_fixed_point(2.0, 2.7) ==
        doctest::Approx(0.7).epsilon(1e-14));
  CHECK_THROWS_AS(exponent_map_fixed_point(0.0, 2.5), std::invalid_argument);
}

TEST_CASE("event indicators") {
  Rng rng = make_rng(53);
  ModelSpec s = plain_spec(4, 2);
  Path p = brownian_path(s, rng, 0.1);  // small fluctuations
  DyadicStatistics st = dyadic_stats(p, s);
  // With tiny increments the confinement events hold at every level.
  for (int i = 1; i <= s.t; ++i) CHECK(st.b_event(i));
  for (int n = 0; n <= s.t; ++n) CHECK(st.c_event(n, 1.0));
  // A huge path violates them.
  Path q = brownian_path(s, rng, 1e4);
  DyadicStatistics stq = dyadic_stats(q, s);
  CHECK_FALSE(stq.c_event(1, 1e-6));
}
