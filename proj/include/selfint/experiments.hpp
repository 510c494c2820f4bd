#pragma once

// Orchestrated studies with persistence: scaling fits across T, MCMC vs
// exact cross-validation, Loewner domination sweeps, and the regime grid.
// Every study is deterministic given its manifest (config digest + seed);
// artifacts are CSV with a header row plus a JSON summary and a manifest
// sidecar, floats at 17 significant digits.

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "selfint/model.hpp"
#include "selfint/sampler.hpp"

namespace selfint {

inline constexpr const char* kVersion = "0.1.0";

std::string fmt17(double x);
std::string fnv1a_hex(const std::string& data);

struct RunManifest {
  std::string config_digest;
  std::uint64_t seed = 0;
  std::string version = kVersion;
  std::string timestamp;  // informational; not part of the digest
  std::string spec_echo;  // canonical config text the digest covers

  std::string to_json() const;
};

RunManifest make_manifest(const std::string& canonical_config,
                          std::uint64_t seed);

struct ScalingPoint {
  double big_t = 0.0;
  double value = 0.0;  // s_T
  double se = 0.0;     // 0 for the exact method
  bool excluded = false;
};

struct ScalingFit {
  std::vector<ScalingPoint> points;
  double slope = 0.0;
  double intercept = 0.0;
  double slope_se = 0.0;
  double r_squared = 0.0;
};

// Weighted least squares of log(value) on log(T); weights are inverse
// variances of log(value) (equal weights when every SE is zero).
ScalingFit fit_loglog(std::vector<ScalingPoint> points);

enum class ScalingMethod { Exact, Mcmc };

// s_T per T: pinned uses E|x_T|^2, periodic uses E|x_T - x_{T/2}|^2.
// Exact (gamma = 2): circulant for periodic specs, dense for pinned ones.
// MCMC: estimate_msd; runs failing the batch rule are excluded with a
// warning and fewer than 4 surviving points aborts.
ScalingFit scaling_study(const ModelSpec& base_spec,
                         const std::vector<int>& t_values,
                         ScalingMethod method, const McmcConfig& mcmc_cfg,
                         std::vector<std::string>* warnings = nullptr);

struct ObservableCheck {
  std::string name;
  double exact = 0.0;
  double mcmc = 0.0;
  double se = 0.0;
  double n_effective = 0.0;
  bool pass = false;  // |mcmc - exact| <= 3 se
};

struct CrossvalReport {
  std::vector<ObservableCheck> checks;
  McmcDiagnostics diagnostics;
  bool pass = false;
};

// E[|x_T|^2] (or its periodic analogue) plus three increment variances,
// MCMC against the exact Gaussian solver; passes iff every |delta| <= 3 SE.
CrossvalReport crossval_mcmc_exact(const ModelSpec& spec,
                                   const McmcConfig& cfg);

struct DominationRow {
  double alpha = 0.0;
  double margin = 0.0;  // smallest eigenvalue of Cov(hier) - Cov(full)
  bool pass = false;
};

struct DominationReport {
  std::vector<DominationRow> rows;
  double tol = 1e-8;
  double control_inflation = 64.0;
  double control_margin = 0.0;  // at the largest alpha
  bool control_fails = false;   // inflated coefficients must reverse the order
  bool pass = false;
};

// Cov(P_hat_{alpha,T,2,xi}) <= Cov(P_hier) with the same-block kernel-bound
// coefficients alpha 2^{-xi(l+1)} on |s_v^{2^l}|^2 over both endpoint
// chains. The negative control inflates the hier coefficients until the
// order reverses (x4 provably does not reverse it at desk scale; the default
// control uses x64).
DominationReport domination_study(int t, double xi,
                                  const std::vector<double>& alpha_grid,
                                  int n_per_unit = 4, double tol = 1e-8,
                                  double control_inflation = 64.0);

// The averaged-increment weights A_l equivalent to the Lemma coefficients
// alpha 2^{-xi(l+1)} on the unnormalized s: A_l^2 = 2^{(xi-2)l + xi - 1}.
std::vector<double> lemma_domination_weights(int t, double xi,
                                             double inflation = 1.0);

struct RegimeCell {
  double gamma = 0.0;
  double xi = 0.0;
  RegimeLabel label = RegimeLabel::Diffusive;
};

struct RegimeGrid {
  int resolution = 0;
  std::vector<RegimeCell> cells;  // row-major over (gamma, xi) cell centers
  double dotted_line_xi = 3.0;    // annotation metadata
};

RegimeGrid regime_figure(int resolution);

// Artifact writers. write_csv returns the file's bytes (for reproducibility
// checks); the JSON summary embeds the version string.
std::string write_csv(const std::string& path,
                      const std::vector<std::string>& header,
                      const std::vector<std::vector<std::string>>& rows);
void write_text(const std::string& path, const std::string& data);

std::string scaling_csv(const ScalingFit& fit);
std::string regime_csv(const RegimeGrid& grid);
std::string scaling_summary_json(const ScalingFit& fit,
                                 const RunManifest& manifest);

}  // namespace selfint
