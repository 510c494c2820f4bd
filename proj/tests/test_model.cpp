#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <vector>

#include "selfint/model.hpp"
#include "selfint/rng.hpp"

using namespace selfint;

namespace {

ModelSpec small_spec(int t, int ntil, double alpha, double gamma, double xi,
                     Boundary b = Boundary::Pinned, int dim = 1) {
  ModelSpec s;
  s.t = t;
  s.n_per_unit = ntil;
  s.dim = dim;
  s.alpha = alpha;
  s.gamma = gamma;
  s.xi = xi;
  s.boundary = b;
  return s;
}

Path random_path(const ModelSpec& spec, Rng& rng, double scale = 1.0) {
  Path p = make_path(spec);
  for (std::int64_t i = 1; i < p.n_points; ++i)
    for (int c = 0; c < p.dim; ++c) p.at(i, c) = scale * rng.normal();
  if (spec.boundary == Boundary::Periodic)
    for (int c = 0; c < p.dim; ++c) p.at(p.n_points - 1, c) = p.at(0, c);
  return p;
}

}  // namespace

TEST_CASE("kernel table values") {
  auto s = small_spec(3, 1, 1.0, 2.0, 2.0);
  auto k = build_kernel(s);
  CHECK(k.values[0] == 1.0);
  CHECK(k.values[1] == doctest::Approx(0.5).epsilon(1e-15));

  s.xi = 1.0;
  s.n_per_unit = 2;
  k = build_kernel(s);
  CHECK(k.values[1] == doctest::Approx(2.0 / 3.0).epsilon(1e-15));

  // xi = 0: constant 1/2 on l >= 1 (the value the energy example uses).
  s.xi = 0.0;
  k = build_kernel(s);
  CHECK(k.values[0] == 1.0);
  for (std::size_t l = 1; l < k.values.size(); ++l) CHECK(k.values[l] == 0.5);
}

TEST_CASE("kernel monotonicity and range") {
  auto s = small_spec(4, 3, 1.0, 2.0, 1.7);
  auto k = build_kernel(s);
  for (std::size_t l = 1; l < k.values.size(); ++l) {
    CHECK(k.values[l] > 0.0);
    CHECK(k.values[l] <= 1.0);
    CHECK(k.values[l] < k.values[l - 1]);
  }
}

TEST_CASE("energy: worked examples") {
  // Constant zero path has zero energy.
  auto s = small_spec(2, 2, 3.0, 2.0, 1.0);
  auto k = build_kernel(s);
  Path p = make_path(s);
  CHECK(energy(p, s, k) == 0.0);

  // Two-point kinetic-only path.
  ModelSpec s2 = small_spec(1, 1, 0.0, 2.0, 0.0);
  s2.t = 1;  // T = 2, N = 2 — use only the first increment
  auto k2 = build_kernel(s2);
  Path p2 = make_path(s2);
  p2.at(1, 0) = 1.0;
  p2.at(2, 0) = 1.0;  // second increment zero
  CHECK(energy(p2, s2, k2) == doctest::Approx(0.5).epsilon(1e-15));

  // Hand-evaluated three-point example: d=1, Ntil=1, N=2, x=(0,1,2),
  // alpha=1, gamma=2, xi=0 -> kinetic 1.0, interaction (1+4+1)/2 = 3.0.
  ModelSpec s3 = small_spec(1, 1, 1.0, 2.0, 0.0);
  auto k3 = build_kernel(s3);
  Path p3 = make_path(s3);
  p3.at(1, 0) = 1.0;
  p3.at(2, 0) = 2.0;
  CHECK(energy(p3, s3, k3) == doctest::Approx(4.0).epsilon(1e-14));
}

TEST_CASE("energy nonnegativity and translation covariance") {
  Rng rng = make_rng(11);
  auto sper = small_spec(3, 2, 1.3, 1.5, 1.1, Boundary::Periodic, 2);
  auto k = build_kernel(sper);
  for (int rep = 0; rep < 20; ++rep) {
    Path p = random_path(sper, rng);
    const double e0 = energy(p, sper, k);
    CHECK(e0 >= 0.0);
    Path q = p;
    for (std::int64_t i = 0; i < q.n_points; ++i)
      for (int c = 0; c < q.dim; ++c) q.at(i, c) += 3.25 - 0.5 * c;
    CHECK(energy(q, sper, k) == doctest::Approx(e0).epsilon(1e-10));
  }
}

TEST_CASE("energy_delta agrees with the full-energy oracle") {
  Rng rng = make_rng(7);
  const ModelSpec specs[] = {
      small_spec(3, 2, 1.0, 2.0, 2.0, Boundary::Pinned, 1),
      small_spec(3, 2, 0.7, 1.2, 0.8, Boundary::Pinned, 2),
      small_spec(3, 2, 1.4, 2.0, 1.5, Boundary::Periodic, 1),
      small_spec(2, 4, 2.0, 1.0, 0.0, Boundary::Periodic, 3),
  };
  for (const auto& s : specs) {
    auto k = build_kernel(s);
    const std::int64_t n = s.grid_n();
    for (int rep = 0; rep < 250; ++rep) {
      Path p = random_path(s, rng);
      const std::int64_t site = 1 + static_cast<std::int64_t>(rng.below(n));
      std::vector<double> prop(s.dim);
      for (int c = 0; c < s.dim; ++c)
        prop[c] = p.at(site, c) + 0.8 * rng.normal();
      const double delta = energy_delta(p, site, prop.data(), s, k);

      Path q = p;
      const std::int64_t m =
          (s.boundary == Boundary::Periodic && site == n) ? 0 : site;
      for (int c = 0; c < s.dim; ++c) q.at(m, c) = prop[c];
      if (s.boundary == Boundary::Periodic) {
        for (int c = 0; c < s.dim; ++c) q.at(n, c) = q.at(0, c);
      }
      const double oracle = energy(q, s, k) - energy(p, s, k);
      CHECK(delta ==
            doctest::Approx(oracle).epsilon(1e-10).scale(1.0 + std::abs(oracle)));
    }
  }
}

TEST_CASE("energy_delta trivial cases") {
  Rng rng = make_rng(3);
  auto s = small_spec(3, 1, 1.0, 2.0, 1.0);
  auto k = build_kernel(s);
  Path p = random_path(s, rng);
  // No-op proposal.
  CHECK(energy_delta(p, 2, p.point(2), s, k) == 0.0);
  // Out-of-range site.
  double prop[1] = {0.0};
  CHECK_THROWS_AS(energy_delta(p, 0, prop, s, k), std::out_of_range);
  CHECK_THROWS_AS(energy_delta(p, s.grid_n() + 1, prop, s, k),
                  std::out_of_range);

  // alpha = 0: delta equals the two adjacent kinetic terms.
  s.alpha = 0.0;
  const std::int64_t site = 3;
  prop[0] = p.at(site, 0) + 0.5;
  const double ntil = s.n_per_unit;
  double kin = 0.0;
  kin += (prop[0] - p.at(site - 1, 0)) * (prop[0] - p.at(site - 1, 0)) -
         (p.at(site, 0) - p.at(site - 1, 0)) * (p.at(site, 0) - p.at(site - 1, 0));
  kin += (prop[0] - p.at(site + 1, 0)) * (prop[0] - p.at(site + 1, 0)) -
         (p.at(site, 0) - p.at(site + 1, 0)) * (p.at(site, 0) - p.at(site + 1, 0));
  kin *= 0.5 * ntil;
  CHECK(energy_delta(p, site, prop, s, k) == doctest::Approx(kin).epsilon(1e-12));
}

TEST_CASE("regime classifier: paper points and partition") {
  CHECK(regime_classify(1.0, 0.3) == RegimeLabel::VarianceCollapse);
  CHECK(regime_classify(1.0, 1.0) == RegimeLabel::BoundedVariance);
  CHECK(regime_classify(1.5, 3.2) == RegimeLabel::Diffusive);
  // Left-closed edges.
  CHECK(regime_classify(1.0, 0.5) == RegimeLabel::BoundedVariance);
  CHECK(regime_classify(1.0, 1.5) == RegimeLabel::LogOrSubdiffusive);
  CHECK(regime_classify(1.0, 2.0) == RegimeLabel::Subdiffusive);
  CHECK(regime_classify(1.0, 2.5) == RegimeLabel::Diffusive);
  CHECK_THROWS_AS(regime_classify(2.0, 1.0), std::domain_error);
  CHECK_THROWS_AS(regime_classify(0.0, 1.0), std::domain_error);

  // Each interior point gets exactly one label; labels change only across
  // the four lines.
  Rng rng = make_rng(21);
  for (int rep = 0; rep < 2000; ++rep) {
    const double g = rng.uniform(1e-3, 2.0 - 1e-3);
    const double x = rng.uniform(0.0, 4.0);
    const RegimeLabel lab = regime_classify(g, x);
    RegimeLabel expect;
    if (x < g / 2) expect = RegimeLabel::VarianceCollapse;
    else if (x < 1 + g / 2) expect = RegimeLabel::BoundedVariance;
    else if (x < 2) expect = RegimeLabel::LogOrSubdiffusive;
    else if (x < 2 + g / 2) expect = RegimeLabel::Subdiffusive;
    else expect = RegimeLabel::Diffusive;
    CHECK(lab == expect);
  }
}

TEST_CASE("spec validation") {
  ModelSpec s;
  CHECK(s.valid());
  s.gamma = 2.5;
  CHECK_FALSE(s.valid());
  CHECK(s.validate().front().find("gamma") != std::string::npos);
  s.gamma = 2.0;
  s.t = 0;
  CHECK_FALSE(s.valid());
  s.t = 4;
  s.alpha = -1.0;
  CHECK_FALSE(s.valid());
}

TEST_CASE("user radial potential plugs into the same energy") {
  Rng rng = make_rng(9);
  auto s = small_spec(2, 2, 1.3, 2.0, 1.0);
  auto k = build_kernel(s);

  ModelSpec user = s;
  user.potential = PotentialKind::UserRadial;
  user.radial_f = [](double r) { return r * r; };  // same as the power law
  for (int rep = 0; rep < 10; ++rep) {
    Path p = random_path(s, rng);
    CHECK(energy(p, user, k) ==
          doctest::Approx(energy(p, s, k)).epsilon(1e-12));
  }

  // A bounded radial potential keeps the energy finite for wild paths.
  ModelSpec bounded = s;
  bounded.potential = PotentialKind::UserRadial;
  bounded.gamma = 1.0;
  bounded.zeta = 0.25;
  bounded.radial_f = [](double r) { return r / (1.0 + r); };
  Path wild = random_path(s, rng, 1e8);
  CHECK(std::isfinite(energy(wild, bounded, k)));

  ModelSpec missing = bounded;
  missing.radial_f = nullptr;
  CHECK_FALSE(missing.valid());
}

TEST_CASE("quadratic potential decouples across coordinates") {
  Rng rng = make_rng(15);
  auto s3 = small_spec(2, 2, 0.9, 2.0, 1.2, Boundary::Pinned, 3);
  auto k = build_kernel(s3);
  Path p = random_path(s3, rng);
  double per_coord = 0.0;
  auto s1 = small_spec(2, 2, 0.9, 2.0, 1.2, Boundary::Pinned, 1);
  for (int c = 0; c < 3; ++c) {
    Path q = make_path(s1);
    for (std::int64_t i = 0; i < q.n_points; ++i) q.at(i, 0) = p.at(i, c);
    per_coord += energy(q, s1, k);
  }
  CHECK(energy(p, s3, k) == doctest::Approx(per_coord).epsilon(1e-12));
}

TEST_CASE("pinned path starts at zero, periodic path mirrors the seam") {
  auto s = small_spec(2, 3, 1.0, 2.0, 1.0, Boundary::Periodic, 2);
  Rng rng = make_rng(5);
  Path p = random_path(s, rng);
  CHECK(p.n_points == s.grid_n() + 1);
  for (int c = 0; c < s.dim; ++c)
    CHECK(p.at(p.n_points - 1, c) == p.at(0, c));
}
