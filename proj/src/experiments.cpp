#include "selfint/experiments.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <stdexcept>

#include "json.hpp"

#include "selfint/dyadic.hpp"
#include "selfint/gaussian.hpp"
#include "selfint/hierarchy.hpp"

namespace selfint {

std::string fmt17(double x) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", x);
  return buf;
}

std::string fnv1a_hex(const std::string& data) {
  std::uint64_t h = 1469598103934665603ULL;
  for (unsigned char c : data) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  char buf[20];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

RunManifest make_manifest(const std::string& canonical_config,
                          std::uint64_t seed) {
  RunManifest m;
  m.spec_echo = canonical_config;
  m.seed = seed;
  m.config_digest = fnv1a_hex(canonical_config + "#seed=" +
                              std::to_string(seed));
  const auto now = std::chrono::system_clock::now();
  const std::time_t tt = std::chrono::system_clock::to_time_t(now);
  char buf[32];
  std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", std::gmtime(&tt));
  m.timestamp = buf;
  return m;
}

std::string RunManifest::to_json() const {
  nlohmann::json j;
  j["config_digest"] = config_digest;
  j["seed"] = seed;
  j["version"] = version;
  j["timestamp"] = timestamp;
  j["spec_echo"] = spec_echo;
  return j.dump(2);
}

ScalingFit fit_loglog(std::vector<ScalingPoint> points) {
  ScalingFit fit;
  fit.points = std::move(points);
  std::vector<double> x, y, w;
  for (const auto& p : fit.points) {
    if (p.excluded) continue;
    if (!(p.value > 0.0))
      throw std::domain_error("fit_loglog: nonpositive s_T");
    x.push_back(std::log(p.big_t));
    y.push_back(std::log(p.value));
    // Inverse-variance weights on log(value); SE propagates as se/value.
    const double se_log = p.se > 0.0 ? p.se / p.value : 0.0;
    w.push_back(se_log > 0.0 ? 1.0 / (se_log * se_log) : 1.0);
  }
  const std::size_t n = x.size();
  if (n < 4)
    throw std::invalid_argument("fit_loglog: need at least 4 points");
  double sw = 0, swx = 0, swy = 0, swxx = 0, swxy = 0;
  for (std::size_t i = 0; i < n; ++i) {
    sw += w[i];
    swx += w[i] * x[i];
    swy += w[i] * y[i];
    swxx += w[i] * x[i] * x[i];
    swxy += w[i] * x[i] * y[i];
  }
  const double det = sw * swxx - swx * swx;
  fit.slope = (sw * swxy - swx * swy) / det;
  fit.intercept = (swxx * swy - swx * swxy) / det;
  fit.slope_se = std::sqrt(sw / det);

  double ss_res = 0, ss_tot = 0;
  const double ybar = swy / sw;
  for (std::size_t i = 0; i < n; ++i) {
    const double fit_y = fit.intercept + fit.slope * x[i];
    ss_res += w[i] * (y[i] - fit_y) * (y[i] - fit_y);
    ss_tot += w[i] * (y[i] - ybar) * (y[i] - ybar);
  }
  fit.r_squared = ss_tot > 0 ? 1.0 - ss_res / ss_tot : 1.0;
  return fit;
}

namespace {

double exact_msd(const ModelSpec& spec) {
  const std::int64_t n = spec.grid_n();
  if (spec.boundary == Boundary::Periodic) {
    CirculantOperator op = circulant_coefficients(spec, 0.0);
    return spec.dim * dft_increment_variance(op, n / 2, 0);
  }
  PrecisionMatrix prec = assemble_precision(spec);
  CovarianceSummary cov =
      covariance_of_functionals(prec, {endpoint_weights(spec)});
  return spec.dim * cov.variance(0);
}

}  // namespace

ScalingFit scaling_study(const ModelSpec& base_spec,
                         const std::vector<int>& t_values,
                         ScalingMethod method, const McmcConfig& mcmc_cfg,
                         std::vector<std::string>* warnings) {
  if (t_values.size() < 4)
    throw std::invalid_argument("scaling_study: need at least 4 T values");
  if (method == ScalingMethod::Exact && !base_spec.quadratic())
    throw std::invalid_argument("scaling_study: exact method requires gamma = 2");

  std::vector<ScalingPoint> points;
  for (std::size_t i = 0; i < t_values.size(); ++i) {
    ModelSpec spec = base_spec;
    spec.t = t_values[i];
    ScalingPoint p;
    p.big_t = static_cast<double>(spec.horizon());
    if (method == ScalingMethod::Exact) {
      p.value = exact_msd(spec);
    } else {
      McmcConfig cfg = mcmc_cfg;
      cfg.seed = mcmc_cfg.seed + i;  // independent streams per T
      try {
        EstimateWithError est = estimate_msd(spec, cfg);
        p.value = est.mean;
        p.se = est.std_error;
      } catch (const std::exception& e) {
        p.excluded = true;
        if (warnings)
          warnings->push_back("T=" + std::to_string(spec.horizon()) +
                              " excluded: " + e.what());
      }
    }
    points.push_back(p);
  }
  return fit_loglog(std::move(points));
}

CrossvalReport crossval_mcmc_exact(const ModelSpec& spec,
                                   const McmcConfig& cfg) {
  if (!spec.quadratic())
    throw std::invalid_argument("crossval_mcmc_exact: gamma = 2 required");
  const std::int64_t n = spec.grid_n();
  const std::vector<std::pair<std::int64_t, std::int64_t>> incs = {
      {n / 4, 0}, {n / 2, 0}, {3 * n / 4, n / 4}};

  ObservableSet obs;
  obs.endpoint_chain = false;
  obs.increments = incs;
  ChainResult chain = run_chain(spec, cfg, obs);

  // Exact targets (per coordinate times dim).
  std::vector<double> exact;
  if (spec.boundary == Boundary::Periodic) {
    CirculantOperator op = circulant_coefficients(spec, 0.0);
    exact.push_back(spec.dim * dft_increment_variance(op, n, n / 2));
    for (auto [m, k] : incs)
      exact.push_back(spec.dim * dft_increment_variance(op, m, k));
  } else {
    PrecisionMatrix prec = assemble_precision(spec);
    std::vector<std::vector<double>> fns = {endpoint_weights(spec)};
    for (auto [m, k] : incs) fns.push_back(increment_weights(spec, m, k));
    CovarianceSummary cov = covariance_of_functionals(prec, fns);
    for (std::size_t i = 0; i < fns.size(); ++i)
      exact.push_back(spec.dim * cov.variance(i));
  }

  CrossvalReport rep;
  rep.diagnostics = chain.diagnostics;
  std::vector<std::string> names = {"msd"};
  for (auto [m, k] : incs)
    names.push_back("incr_" + std::to_string(m) + "_" + std::to_string(k));
  rep.pass = true;
  for (std::size_t i = 0; i < names.size(); ++i) {
    ObservableCheck chk;
    chk.name = names[i];
    chk.exact = exact[i];
    EstimateWithError est =
        estimate_series(chain.series.at(names[i]), cfg.batches);
    chk.mcmc = est.mean;
    chk.se = est.std_error;
    chk.n_effective = est.n_effective;
    chk.pass = std::abs(chk.mcmc - chk.exact) <= 3.0 * chk.se;
    rep.pass = rep.pass && chk.pass;
    rep.checks.push_back(chk);
  }
  return rep;
}

std::vector<double> lemma_domination_weights(int t, double xi,
                                             double inflation) {
  std::vector<double> a(static_cast<std::size_t>(t));
  for (int l = 1; l <= t; ++l)
    a[static_cast<std::size_t>(l - 1)] =
        std::sqrt(std::pow(2.0, (xi - 2.0) * l + xi - 1.0) / inflation);
  return a;
}

DominationReport domination_study(int t, double xi,
                                  const std::vector<double>& alpha_grid,
                                  int n_per_unit, double tol,
                                  double control_inflation) {
  if (t > 6)
    throw std::invalid_argument("domination_study: T capped at 64 (dense)");
  DominationReport rep;
  rep.tol = tol;
  rep.control_inflation = control_inflation;
  rep.pass = true;

  double max_alpha = 0.0;
  for (double alpha : alpha_grid) max_alpha = std::max(max_alpha, alpha);

  for (double alpha : alpha_grid) {
    ModelSpec spec;
    spec.t = t;
    spec.n_per_unit = n_per_unit;
    spec.alpha = alpha;
    spec.gamma = 2.0;
    spec.xi = xi;
    spec.boundary = Boundary::Pinned;
    Eigen::MatrixXd cov_full = dense_covariance(assemble_precision(spec));
    Eigen::MatrixXd cov_hier = dense_covariance(
        hier_precision(spec, lemma_domination_weights(t, xi),
                       HierBlocks::EndpointChain));
    DominationRow row;
    row.alpha = alpha;
    row.margin = loewner_margin(cov_full, cov_hier);
    row.pass = row.margin >= -tol;
    rep.pass = rep.pass && row.pass;
    rep.rows.push_back(row);

    if (alpha == max_alpha && alpha > 0.0) {
      Eigen::MatrixXd cov_inflated = dense_covariance(hier_precision(
          spec, lemma_domination_weights(t, xi, control_inflation),
          HierBlocks::EndpointChain));
      rep.control_margin = loewner_margin(cov_full, cov_inflated);
      rep.control_fails = rep.control_margin < -tol;
    }
  }
  rep.pass = rep.pass && rep.control_fails;
  return rep;
}

RegimeGrid regime_figure(int resolution) {
  if (resolution < 16)
    throw std::invalid_argument("regime_figure: resolution >= 16 required");
  RegimeGrid grid;
  grid.resolution = resolution;
  grid.cells.reserve(static_cast<std::size_t>(resolution) * resolution);
  for (int i = 0; i < resolution; ++i) {
    const double gamma = 2.0 * (i + 0.5) / resolution;
    for (int j = 0; j < resolution; ++j) {
      const double xi = 4.0 * (j + 0.5) / resolution;
      grid.cells.push_back({gamma, xi, regime_classify(gamma, xi)});
    }
  }
  return grid;
}

std::string write_csv(const std::string& path,
                      const std::vector<std::string>& header,
                      const std::vector<std::vector<std::string>>& rows) {
  std::string data;
  for (std::size_t i = 0; i < header.size(); ++i) {
    if (i) data += ',';
    data += header[i];
  }
  data += '\n';
  for (const auto& row : rows) {
    for (std::size_t i = 0; i < row.size(); ++i) {
      if (i) data += ',';
      data += row[i];
    }
    data += '\n';
  }
  if (!path.empty()) write_text(path, data);
  return data;
}

void write_text(const std::string& path, const std::string& data) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open " + path);
  out << data;
}

std::string scaling_csv(const ScalingFit& fit) {
  std::vector<std::vector<std::string>> rows;
  for (const auto& p : fit.points)
    rows.push_back({fmt17(p.big_t), fmt17(p.value), fmt17(p.se),
                    p.excluded ? "1" : "0"});
  return write_csv("", {"T", "estimate", "se", "excluded"}, rows);
}

std::string regime_csv(const RegimeGrid& grid) {
  std::vector<std::vector<std::string>> rows;
  for (const auto& c : grid.cells)
    rows.push_back({fmt17(c.gamma), fmt17(c.xi), to_string(c.label)});
  return write_csv("", {"gamma", "xi", "label"}, rows);
}

std::string scaling_summary_json(const ScalingFit& fit,
                                 const RunManifest& manifest) {
  nlohmann::json j;
  j["slope"] = fit.slope;
  j["slope_se"] = fit.slope_se;
  j["intercept"] = fit.intercept;
  j["r_squared"] = fit.r_squared;
  j["n_points"] = fit.points.size();
  int excluded = 0;
  for (const auto& p : fit.points) excluded += p.excluded;
  j["points_excluded"] = excluded;
  j["pass"]["all_points_included"] = excluded == 0;
  j["pass"]["subdiffusive"] = fit.slope < 0.95;
  j["version"] = manifest.version;
  j["config_digest"] = manifest.config_digest;
  return j.dump(2);
}

}  // namespace selfint
