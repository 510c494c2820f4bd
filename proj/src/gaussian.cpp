#include "selfint/gaussian.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>

#include "selfint/dyadic.hpp"
#include "selfint/numerics.hpp"
#include "selfint/rng.hpp"

namespace selfint {

namespace {

constexpr std::int64_t kDenseCap = 8192;

void require_quadratic(const ModelSpec& spec, const char* who) {
  if (!spec.quadratic())
    throw std::invalid_argument(std::string(who) +
                                ": requires the quadratic potential gamma = 2");
}

// Pinned Brownian precision: Ntil * tridiag(2,...,2,1; -1) over sites 1..N.
Eigen::MatrixXd brownian_pinned(const ModelSpec& spec) {
  const std::int64_t n = spec.grid_n();
  const double ntil = spec.n_per_unit;
  Eigen::MatrixXd m = Eigen::MatrixXd::Zero(n, n);
  for (std::int64_t i = 0; i < n; ++i) {
    m(i, i) = (i + 1 < n) ? 2.0 * ntil : ntil;
    if (i + 1 < n) {
      m(i, i + 1) = -ntil;
      m(i + 1, i) = -ntil;
    }
  }
  return m;
}

}  // namespace

Eigen::VectorXd PrecisionMatrix::reduce(
    const std::vector<double>& grid_weights) const {
  const std::int64_t n = grid_n;
  if (static_cast<std::int64_t>(grid_weights.size()) != n + 1)
    throw std::invalid_argument("reduce: functional must have N+1 weights");
  Eigen::VectorXd v(n);
  if (boundary == Boundary::Pinned) {
    for (std::int64_t i = 0; i < n; ++i) v(i) = grid_weights[i + 1];
  } else {
    for (std::int64_t i = 0; i < n; ++i) v(i) = grid_weights[i];
    v(0) += grid_weights[n];
  }
  return v;
}

CirculantOperator circulant_coefficients(const ModelSpec& spec,
                                         double epsilon) {
  require_quadratic(spec, "circulant_coefficients");
  if (spec.boundary != Boundary::Periodic)
    throw std::invalid_argument(
        "circulant_coefficients: requires periodic boundary");
  if (epsilon < 0.0)
    throw std::invalid_argument("circulant_coefficients: epsilon < 0");
  const std::int64_t n = spec.grid_n();
  const double ntil = spec.n_per_unit;
  KernelTable kernel = build_kernel(spec);

  CirculantOperator op;
  op.grid_n = n;
  op.epsilon = epsilon;
  op.first_row.assign(static_cast<std::size_t>(n), 0.0);
  const double w_int = 2.0 * spec.alpha / (ntil * ntil);
  double diag = 2.0 * ntil;
  for (std::int64_t l = 1; l < n; ++l) {
    const double kp = pair_weight(kernel, spec, l);
    op.first_row[static_cast<std::size_t>(l)] = -w_int * kp;
    diag += w_int * kp;
  }
  op.first_row[1] -= ntil;
  op.first_row[static_cast<std::size_t>(n - 1)] -= ntil;
  op.first_row[0] = diag;
  return op;
}

std::vector<double> CirculantOperator::eigenvalues() const {
  std::vector<double> lam = circulant_eigenvalues(first_row);
  lam[0] = epsilon;  // row sums cancel by construction
  return lam;
}

Eigen::MatrixXd CirculantOperator::dense() const {
  const std::int64_t n = grid_n;
  Eigen::MatrixXd m(n, n);
  const double shift = epsilon / static_cast<double>(n);
  for (std::int64_t i = 0; i < n; ++i)
    for (std::int64_t j = 0; j < n; ++j)
      m(i, j) = first_row[static_cast<std::size_t>((j - i + n) % n)] + shift;
  return m;
}

double dft_increment_variance(const CirculantOperator& op, std::int64_t m,
                              std::int64_t n) {
  const std::int64_t size = op.grid_n;
  m = ((m % size) + size) % size;
  n = ((n % size) + size) % size;
  const std::int64_t delta = m - n;
  if (delta == 0) return 0.0;
  const std::vector<double> lam = op.eigenvalues();
  const double w = 2.0 * M_PI / static_cast<double>(size);
  double sum = 0.0;
  for (std::int64_t k = 1; k < size; ++k) {
    if (!(lam[static_cast<std::size_t>(k)] > 0.0))
      throw std::runtime_error(
          "dft_increment_variance: nonpositive eigenvalue for k >= 1");
    const std::int64_t r = ((delta * k) % size + size) % size;
    const double num = 1.0 - std::cos(w * static_cast<double>(r));
    sum += num / lam[static_cast<std::size_t>(k)];
  }
  return 2.0 * sum / static_cast<double>(size);
}

PrecisionMatrix assemble_precision(const ModelSpec& spec, double epsilon) {
  require_quadratic(spec, "assemble_precision");
  const std::int64_t n = spec.grid_n();
  if (n > kDenseCap)
    throw std::invalid_argument("assemble_precision: N > 8192 (desk scale)");

  PrecisionMatrix prec;
  prec.boundary = spec.boundary;
  prec.grid_n = n;

  if (spec.boundary == Boundary::Periodic) {
    prec.m = circulant_coefficients(spec, epsilon).dense();
    return prec;
  }

  const double ntil = spec.n_per_unit;
  KernelTable kernel = build_kernel(spec);
  prec.m = brownian_pinned(spec);
  if (spec.alpha != 0.0) {
    const double w_int = 2.0 * spec.alpha / (ntil * ntil);
    // Sites 1..N interact with each other and with the pin at site 0.
    for (std::int64_t i = 0; i < n; ++i) {
      double diag = kernel.values[static_cast<std::size_t>(i + 1)];  // pin
      for (std::int64_t j = 0; j < n; ++j) {
        if (j == i) continue;
        const std::int64_t l = std::llabs(j - i);
        const double kv = kernel.values[static_cast<std::size_t>(l)];
        diag += kv;
        prec.m(i, j) -= w_int * kv;
      }
      prec.m(i, i) += w_int * diag;
    }
  }
  return prec;
}

PrecisionMatrix hier_precision(const ModelSpec& spec,
                               const std::vector<double>& a_seq,
                               HierBlocks blocks, int level_cap) {
  if (spec.boundary != Boundary::Pinned)
    throw std::invalid_argument("hier_precision: hierarchical measures are "
                                "built over pinned Brownian motion");
  const std::int64_t n = spec.grid_n();
  if (n > kDenseCap)
    throw std::invalid_argument("hier_precision: N > 8192 (desk scale)");
  const std::int64_t big_t = spec.horizon();

  PrecisionMatrix prec;
  prec.boundary = Boundary::Pinned;
  prec.grid_n = n;
  prec.m = brownian_pinned(spec);

  const int top = blocks == HierBlocks::EndpointChain ? spec.t : level_cap;
  if (top > spec.t)
    throw std::invalid_argument("hier_precision: level above t");
  auto add_penalty = [&](int level, std::int64_t offset) {
    const double a = a_seq.at(static_cast<std::size_t>(level - 1));
    if (!(a > 0.0))
      throw std::invalid_argument("hier_precision: A_l must be > 0");
    if (std::isinf(a)) return;
    const double coeff = spec.alpha / (a * a);
    if (coeff == 0.0) return;
    const std::int64_t len = std::int64_t(1) << level;
    const Eigen::VectorXd v = prec.reduce(sbar_weights(spec, offset, len));
    prec.m.noalias() += coeff * v * v.transpose();
  };

  if (blocks == HierBlocks::EndpointChain) {
    for (int l = 1; l <= spec.t; ++l) add_penalty(l, 0);
    for (int l = 1; l <= spec.t - 1; ++l)
      add_penalty(l, big_t - (std::int64_t(1) << l));
  } else {
    for (int l = 1; l <= top; ++l) {
      const std::int64_t len = std::int64_t(1) << l;
      for (std::int64_t u = 0; u + len <= big_t; u += len) add_penalty(l, u);
    }
  }
  return prec;
}

CovarianceSummary covariance_of_functionals(
    const PrecisionMatrix& prec,
    const std::vector<std::vector<double>>& grid_functionals,
    const std::vector<std::string>& labels) {
  Eigen::LLT<Eigen::MatrixXd> llt(prec.m);
  if (llt.info() != Eigen::Success)
    throw std::runtime_error(
        "covariance_of_functionals: precision not positive definite");
  const std::size_t k = grid_functionals.size();
  Eigen::MatrixXd v(prec.size(), k);
  for (std::size_t i = 0; i < k; ++i)
    v.col(i) = prec.reduce(grid_functionals[i]);
  Eigen::MatrixXd solved = llt.solve(v);
  // One step of iterative refinement keeps large ill-conditioned solves
  // accurate to near machine precision.
  solved += llt.solve(v - prec.m * solved);
  CovarianceSummary out;
  out.cov = v.transpose() * solved;
  out.cov = 0.5 * (out.cov + out.cov.transpose().eval());
  out.labels = labels;
  if (out.labels.size() != k) {
    out.labels.resize(k);
    for (std::size_t i = 0; i < k; ++i)
      if (out.labels[i].empty()) out.labels[i] = "f" + std::to_string(i);
  }
  return out;
}

Eigen::MatrixXd dense_covariance(const PrecisionMatrix& prec) {
  Eigen::LLT<Eigen::MatrixXd> llt(prec.m);
  if (llt.info() != Eigen::Success)
    throw std::runtime_error("dense_covariance: precision not positive definite");
  return llt.solve(Eigen::MatrixXd::Identity(prec.size(), prec.size()));
}

std::vector<Path> sample_gaussian(const PrecisionMatrix& prec,
                                  const ModelSpec& spec, std::uint64_t seed,
                                  int count) {
  const std::int64_t n = prec.size();
  Eigen::MatrixXd m = prec.m;
  if (prec.boundary == Boundary::Periodic) {
    // Zero-mode precision is epsilon-small; lift it to >= 1 for sampling.
    // Increment statistics do not see the constant mode.
    const double lam0 = m.sum() / static_cast<double>(n);
    if (lam0 < 1.0)
      m.array() += (1.0 - lam0) / static_cast<double>(n);
  }
  Eigen::LLT<Eigen::MatrixXd> llt(m);
  if (llt.info() != Eigen::Success)
    throw std::runtime_error("sample_gaussian: factorization failure");
  const Eigen::MatrixXd l = llt.matrixL();

  Rng rng = make_rng(seed);
  std::vector<Path> out;
  out.reserve(static_cast<std::size_t>(count));
  Eigen::VectorXd z(n);
  for (int s = 0; s < count; ++s) {
    Path p = make_path(spec);
    for (int c = 0; c < spec.dim; ++c) {
      for (std::int64_t i = 0; i < n; ++i) z(i) = rng.normal();
      const Eigen::VectorXd x =
          l.transpose().triangularView<Eigen::Upper>().solve(z);
      if (prec.boundary == Boundary::Pinned) {
        for (std::int64_t i = 0; i < n; ++i) p.at(i + 1, c) = x(i);
      } else {
        for (std::int64_t i = 0; i < n; ++i) p.at(i, c) = x(i);
        p.at(n, c) = x(0);
      }
    }
    out.push_back(std::move(p));
  }
  return out;
}

double loewner_margin(const Eigen::MatrixXd& cov_a,
                      const Eigen::MatrixXd& cov_b) {
  if (cov_a.rows() != cov_b.rows() || cov_a.cols() != cov_b.cols())
    throw std::invalid_argument("loewner: dimension mismatch");
  Eigen::MatrixXd diff = cov_b - cov_a;
  diff = 0.5 * (diff + diff.transpose().eval());
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(diff,
                                                    Eigen::EigenvaluesOnly);
  return es.eigenvalues().minCoeff();
}

bool loewner_leq(const Eigen::MatrixXd& cov_a, const Eigen::MatrixXd& cov_b,
                 double tol) {
  return loewner_margin(cov_a, cov_b) >= -tol;
}

}  // namespace selfint
