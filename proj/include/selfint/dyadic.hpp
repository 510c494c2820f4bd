#pragma once

// Grid-weight vectors for the dyadic path functionals:
//   sigma_i        = trapezoid integral of x over [i, i+1]
//   s_u^{2^l}      = integral over the second half of [u, u+2^l] minus the
//                    first half
//   sbar_u^{2^l}   = s_u^{2^l} / 2^l
// Weights are over grid points 0..N and are exact linear functionals of a
// Path; the trapezoid rule keeps every telescoping relation among the sigma
// values algebraic.

#include <cstdint>
#include <vector>

#include "selfint/model.hpp"

namespace selfint {

// Adds the trapezoid weights of int_a^b x dt (a, b in time units, grid
// aligned) scaled by `scale` into w (length N+1).
inline void add_trapezoid(std::vector<double>& w, const ModelSpec& spec,
                          std::int64_t a, std::int64_t b, double scale) {
  const std::int64_t ntil = spec.n_per_unit;
  const double h = 1.0 / static_cast<double>(ntil);
  const std::int64_t ia = a * ntil;
  const std::int64_t ib = b * ntil;
  for (std::int64_t i = ia; i <= ib; ++i) {
    const double boundary = (i == ia || i == ib) ? 0.5 : 1.0;
    w[static_cast<std::size_t>(i)] += scale * h * boundary;
  }
}

inline std::vector<double> sigma_weights(const ModelSpec& spec,
                                         std::int64_t i) {
  std::vector<double> w(static_cast<std::size_t>(spec.grid_n()) + 1, 0.0);
  add_trapezoid(w, spec, i, i + 1, 1.0);
  return w;
}

// s_u^{len} for even block length `len` starting at time u.
inline std::vector<double> s_weights(const ModelSpec& spec, std::int64_t u,
                                     std::int64_t len) {
  std::vector<double> w(static_cast<std::size_t>(spec.grid_n()) + 1, 0.0);
  const std::int64_t half = len / 2;
  add_trapezoid(w, spec, u + half, u + len, 1.0);
  add_trapezoid(w, spec, u, u + half, -1.0);
  return w;
}

inline std::vector<double> sbar_weights(const ModelSpec& spec, std::int64_t u,
                                        std::int64_t len) {
  std::vector<double> w = s_weights(spec, u, len);
  const double inv = 1.0 / static_cast<double>(len);
  for (double& v : w) v *= inv;
  return w;
}

// Endpoint indicator (the functional x -> x_T).
inline std::vector<double> endpoint_weights(const ModelSpec& spec) {
  std::vector<double> w(static_cast<std::size_t>(spec.grid_n()) + 1, 0.0);
  w.back() = 1.0;
  return w;
}

// x_m - x_n on grid indices.
inline std::vector<double> increment_weights(const ModelSpec& spec,
                                             std::int64_t m, std::int64_t n) {
  std::vector<double> w(static_cast<std::size_t>(spec.grid_n()) + 1, 0.0);
  w[static_cast<std::size_t>(m)] += 1.0;
  w[static_cast<std::size_t>(n)] -= 1.0;
  return w;
}

// Value of a grid functional on one coordinate of a path.
inline double apply_weights(const std::vector<double>& w, const Path& p,
                            int coord) {
  double s = 0.0;
  for (std::size_t i = 0; i < w.size(); ++i) {
    if (w[i] != 0.0) s += w[i] * p.at(static_cast<std::int64_t>(i), coord);
  }
  return s;
}

}  // namespace selfint
