#include "selfint/model.hpp"

#include <cmath>
#include <stdexcept>

namespace selfint {

const char* to_string(RegimeLabel label) {
  switch (label) {
    case RegimeLabel::VarianceCollapse: return "VarianceCollapse";
    case RegimeLabel::BoundedVariance: return "BoundedVariance";
    case RegimeLabel::LogOrSubdiffusive: return "LogOrSubdiffusive";
    case RegimeLabel::Subdiffusive: return "Subdiffusive";
    case RegimeLabel::Diffusive: return "Diffusive";
  }
  return "?";
}

const char* to_string(Boundary b) {
  return b == Boundary::Pinned ? "pinned" : "periodic";
}

double ModelSpec::f_of_r2(double r2) const {
  if (potential == PotentialKind::PowerLaw) {
    if (gamma == 2.0) return r2;
    if (gamma == 1.0) return std::sqrt(r2);
    return std::pow(r2, 0.5 * gamma);
  }
  return radial_f(std::sqrt(r2));
}

std::vector<std::string> ModelSpec::validate() const {
  std::vector<std::string> errs;
  if (t < 1) errs.push_back("t: horizon exponent must satisfy t >= 1 (T = 2^t)");
  if (t > 30) errs.push_back("t: horizon exponent too large for a desk-scale grid");
  if (n_per_unit < 1) errs.push_back("n_per_unit: grid density must be >= 1");
  if (dim < 1) errs.push_back("dim: spatial dimension must be >= 1");
  if (!(alpha >= 0.0) || !std::isfinite(alpha))
    errs.push_back("alpha: coupling must be finite and >= 0");
  if (!(gamma > 0.0 && gamma <= 2.0))
    errs.push_back("gamma: spatial exponent must lie in (0, 2]");
  if (!(xi >= 0.0) || !std::isfinite(xi))
    errs.push_back("xi: temporal exponent must be finite and >= 0");
  if (!(zeta > 0.0))
    errs.push_back("zeta: quasi-convexity gap must be > 0");
  if (potential == PotentialKind::UserRadial && !radial_f)
    errs.push_back("potential: user radial potential selected but no f given");
  return errs;
}

Path make_path(const ModelSpec& spec) {
  Path p;
  p.n_points = spec.grid_n() + 1;
  p.dim = spec.dim;
  p.pts.assign(static_cast<std::size_t>(p.n_points) * spec.dim, 0.0);
  return p;
}

double sqdist(const Path& p, std::int64_t i, std::int64_t j) {
  const double* a = p.point(i);
  const double* b = p.point(j);
  double s = 0.0;
  for (int c = 0; c < p.dim; ++c) {
    const double d = a[c] - b[c];
    s += d * d;
  }
  return s;
}

KernelTable build_kernel(const ModelSpec& spec) {
  const std::int64_t n = spec.grid_n();
  KernelTable k;
  k.values.resize(static_cast<std::size_t>(n) + 1);
  k.values[0] = 1.0;
  const double ntil = static_cast<double>(spec.n_per_unit);
  for (std::int64_t l = 1; l <= n; ++l) {
    k.values[static_cast<std::size_t>(l)] =
        1.0 / (1.0 + std::pow(static_cast<double>(l) / ntil, spec.xi));
  }
  return k;
}

double pair_weight(const KernelTable& kernel, const ModelSpec& spec,
                   std::int64_t l) {
  if (spec.boundary == Boundary::Periodic) {
    const std::int64_t n = spec.grid_n();
    return kernel.values[static_cast<std::size_t>(l)] +
           kernel.values[static_cast<std::size_t>(n - l)];
  }
  return kernel.values[static_cast<std::size_t>(l)];
}

namespace {

// Number of distinct interacting sites and whether index N is a mirror of 0.
inline std::int64_t interaction_sites(const ModelSpec& spec) {
  return spec.boundary == Boundary::Periodic ? spec.grid_n()
                                             : spec.grid_n() + 1;
}

}  // namespace

double energy(const Path& path, const ModelSpec& spec,
              const KernelTable& kernel) {
  const std::int64_t n = spec.grid_n();
  const double ntil = static_cast<double>(spec.n_per_unit);

  double kinetic = 0.0;
  for (std::int64_t j = 1; j <= n; ++j) kinetic += sqdist(path, j, j - 1);
  kinetic *= 0.5 * ntil;

  double inter = 0.0;
  if (spec.alpha != 0.0) {
    const std::int64_t m = interaction_sites(spec);
    for (std::int64_t i = 0; i < m; ++i) {
      for (std::int64_t j = i + 1; j < m; ++j) {
        inter += pair_weight(kernel, spec, j - i) *
                 spec.f_of_r2(sqdist(path, i, j));
      }
    }
    inter *= spec.alpha / (ntil * ntil);
  }
  const double e = kinetic + inter;
  if (!std::isfinite(e)) throw std::overflow_error("energy: non-finite sum");
  return e;
}

double energy_delta(const Path& path, std::int64_t site,
                    const double* proposal, const ModelSpec& spec,
                    const KernelTable& kernel) {
  const std::int64_t n = spec.grid_n();
  if (site < 1 || site > n)
    throw std::out_of_range("energy_delta: site out of range");
  const bool periodic = spec.boundary == Boundary::Periodic;
  // Canonical distinct-site index of the mutated site.
  const std::int64_t m = (periodic && site == n) ? 0 : site;
  const double ntil = static_cast<double>(spec.n_per_unit);
  const int d = spec.dim;
  const double* old_pt = path.point(m);

  auto sq = [&](const double* a, const double* b) {
    double s = 0.0;
    for (int c = 0; c < d; ++c) {
      const double diff = a[c] - b[c];
      s += diff * diff;
    }
    return s;
  };

  // Kinetic: the increments adjacent to `m` (cyclic for periodic, free right
  // end for pinned).
  double dk = 0.0;
  const std::int64_t sites = interaction_sites(spec);
  auto kin_neighbor = [&](std::int64_t nb) {
    dk += sq(proposal, path.point(nb)) - sq(old_pt, path.point(nb));
  };
  if (periodic) {
    kin_neighbor((m + 1) % sites);
    kin_neighbor((m - 1 + sites) % sites);
  } else {
    kin_neighbor(m - 1);
    if (m + 1 <= n) kin_neighbor(m + 1);
  }
  dk *= 0.5 * ntil;

  double di = 0.0;
  if (spec.alpha != 0.0) {
    for (std::int64_t i = 0; i < sites; ++i) {
      if (i == m) continue;
      const std::int64_t l = i < m ? m - i : i - m;
      const double w = pair_weight(kernel, spec, l);
      di += w * (spec.f_of_r2(sq(proposal, path.point(i))) -
                 spec.f_of_r2(sq(old_pt, path.point(i))));
    }
    di *= spec.alpha / (ntil * ntil);
  }
  const double delta = dk + di;
  if (!std::isfinite(delta))
    throw std::overflow_error("energy_delta: non-finite sum");
  return delta;
}

RegimeLabel regime_classify(double gamma, double xi) {
  if (!(gamma > 0.0 && gamma < 2.0))
    throw std::domain_error("regime_classify: gamma must lie in (0, 2)");
  if (!(xi >= 0.0))
    throw std::domain_error("regime_classify: xi must be >= 0");
  const double half = 0.5 * gamma;
  if (xi < half) return RegimeLabel::VarianceCollapse;
  if (xi < 1.0 + half) return RegimeLabel::BoundedVariance;
  if (xi < 2.0) return RegimeLabel::LogOrSubdiffusive;
  if (xi < 2.0 + half) return RegimeLabel::Subdiffusive;
  return RegimeLabel::Diffusive;
}

}  // namespace selfint
