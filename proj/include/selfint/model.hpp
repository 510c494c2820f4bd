#pragma once

// Domain types for the discretized self-interacting path measures:
// Gibbs weight exp(-E) over paths on a uniform grid with Ntil points per
// unit time, horizon T = 2^t, spatial dimension d,
//
//   E(x) = (Ntil/2) * sum_j |x_j - x_{j-1}|^2
//        + (alpha/Ntil^2) * sum_{pairs} K[dist] * f(x_i - x_j),
//
// f radially symmetric (power law |z|^gamma by default), K the time-decay
// table g(l/Ntil) = 1/(1+(l/Ntil)^xi).
//
// Conventions (fixed once, used everywhere):
//  - pinned boundary: x_0 = 0; the pair sum runs over all grid sites
//    0 <= i < j <= N, so the pin participates in the interaction.
//  - periodic boundary: site N is site 0; the pair sum runs over distinct
//    cyclic sites 0 <= i < j <= N-1 and the pair weight is the cyclically
//    symmetrized kernel K[l] + K[N-l], which makes the energy a circulant
//    quadratic form for gamma = 2.

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

namespace selfint {

enum class Boundary { Pinned, Periodic };
enum class PotentialKind { PowerLaw, UserRadial };

enum class RegimeLabel {
  VarianceCollapse,
  BoundedVariance,
  LogOrSubdiffusive,
  Subdiffusive,
  Diffusive
};

const char* to_string(RegimeLabel label);
const char* to_string(Boundary b);

struct ModelSpec {
  int t = 8;                  // horizon exponent, T = 2^t
  int n_per_unit = 4;         // grid points per unit time (Ntil)
  int dim = 1;                // spatial dimension d
  double alpha = 1.0;         // coupling; alpha = 0 is the free case
  double gamma = 2.0;         // spatial exponent, (0, 2]
  double xi = 2.0;            // temporal exponent, >= 0
  double zeta = 1.0;          // quasi-convexity gap; 1 for the power law
  PotentialKind potential = PotentialKind::PowerLaw;
  Boundary boundary = Boundary::Pinned;
  // UserRadial only: f as a function of r = |z|, with (gamma, zeta) declared
  // by the caller.
  std::function<double(double)> radial_f;

  std::int64_t horizon() const { return std::int64_t(1) << t; }   // T
  std::int64_t grid_n() const { return horizon() * n_per_unit; }  // N
  bool quadratic() const { return potential == PotentialKind::PowerLaw && gamma == 2.0; }

  // f evaluated from the squared radius (cheap for gamma = 2).
  double f_of_r2(double r2) const;

  // Field-precise validation messages; empty means valid.
  std::vector<std::string> validate() const;
  bool valid() const { return validate().empty(); }
};

struct Path {
  // Flat row-major storage: (grid_n()+1) points of dim coordinates.
  std::vector<double> pts;
  std::int64_t n_points = 0;  // N + 1
  int dim = 1;

  double* point(std::int64_t i) { return pts.data() + i * dim; }
  const double* point(std::int64_t i) const { return pts.data() + i * dim; }
  double& at(std::int64_t i, int c) { return pts[i * dim + c]; }
  double at(std::int64_t i, int c) const { return pts[i * dim + c]; }
};

// Zero-initialized path consistent with the spec (periodic paths keep
// point N == point 0 as a stored mirror).
Path make_path(const ModelSpec& spec);

// Squared distance between grid points i and j of a path.
double sqdist(const Path& p, std::int64_t i, std::int64_t j);

struct KernelTable {
  std::vector<double> values;  // values[l] = g(l/Ntil), l = 0..N
};

KernelTable build_kernel(const ModelSpec& spec);

// Pair weight used by the energy: plain kernel for pinned specs, cyclically
// symmetrized for periodic ones (l is the linear index distance).
double pair_weight(const KernelTable& kernel, const ModelSpec& spec,
                   std::int64_t l);

// Total energy E(x). Throws std::overflow_error if a summand is non-finite.
double energy(const Path& path, const ModelSpec& spec,
              const KernelTable& kernel);

// E(path with points[site] := proposal) - E(path) in O(N).
// site in [1, N]; for pinned specs site 0 is immutable, for periodic specs
// site N means the shared site 0/N. `proposal` has spec.dim coordinates.
double energy_delta(const Path& path, std::int64_t site,
                    const double* proposal, const ModelSpec& spec,
                    const KernelTable& kernel);

// Figure-1 partition of (gamma, xi), left-closed at regime edges:
//   [0, g/2) collapse, [g/2, 1+g/2) bounded, [1+g/2, 2) log-or-subdiffusive,
//   [2, 2+g/2) subdiffusive, [2+g/2, inf) diffusive.
// Requires gamma in (0, 2), xi >= 0.
RegimeLabel regime_classify(double gamma, double xi);

}  // namespace selfint
