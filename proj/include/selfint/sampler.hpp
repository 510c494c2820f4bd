#pragma once

// Metropolis sampling of the non-Gaussian measures: single-site Gaussian
// proposals plus collective tail/arc shifts (the slow modes of the
// long-range attraction). Proposal scales are auto-tuned during burn-in and
// frozen afterwards, so the post-burn-in chain satisfies detailed balance
// exactly.

#include <cmath>
#include <cstdint>
#include <functional>
#include <map>
#include <string>
#include <vector>

#include "selfint/model.hpp"
#include "selfint/rng.hpp"

namespace selfint {

struct McmcConfig {
  std::int64_t sweeps = 20000;
  std::int64_t burn_in = 4000;
  double proposal_scale = 0.5;
  int block_move_period = 1;  // collective shifts every k-th sweep
  int shift_moves = 8;        // shifts per shift round
  int chains = 1;
  std::uint64_t seed = 1;
  std::vector<double> tempering_ladder;  // optional alpha ladder
  int batches = 32;
  // Fault-injection hook used by the cross-validation negative control:
  // flips the sign of every energy delta, which targets the wrong measure.
  bool negate_energy_delta = false;

  std::vector<std::string> validate() const;
};

// Metropolis rule for symmetric proposals.
inline double accept_probability(double delta) {
  return delta <= 0.0 ? 1.0 : std::exp(-delta);
}

struct SweepStats {
  double site_accept = 0.0;
  double shift_accept = 0.0;
  std::int64_t site_proposals = 0;
  std::int64_t shift_proposals = 0;
};

struct McmcDiagnostics {
  double site_acceptance = 0.0;
  double shift_acceptance = 0.0;
  std::map<std::string, double> iat;
  std::map<std::string, double> effective_samples;
  std::int64_t retained = 0;
  int batch_count = 0;
  double tuned_site_scale = 0.0;
  double tuned_shift_scale = 0.0;
  double energy_drift = 0.0;  // max relative drift of the running energy
  bool degenerate = false;
};

struct EstimateWithError {
  double mean = 0.0;
  double std_error = 0.0;  // batch means
  double std_error_iat = 0.0;  // IAT-inflated cross-check
  double n_effective = 0.0;
};

struct ChainResult {
  // Per-sweep observable series, one entry per retained sweep.
  std::map<std::string, std::vector<double>> series;
  McmcDiagnostics diagnostics;
};

// Names used in ChainResult::series. "msd" is |x_T|^2 for pinned specs and
// |x_T - x_{T/2}|^2 for periodic ones; "incr_m_n" are squared increments;
// "sbar_l" the endpoint-chain averaged increments (first coordinate);
// "rfluct_j" the level-j block fluctuation maxima.
struct ObservableSet {
  bool endpoint_chain = true;
  bool block_fluct = false;
  std::vector<std::pair<std::int64_t, std::int64_t>> increments;
};

class MetropolisState {
 public:
  MetropolisState(const ModelSpec& spec, const McmcConfig& cfg);

  // One sweep: N single-site proposals (+ a shift round when due).
  SweepStats sweep(Rng& rng);
  void tune(double target_site = 0.44);
  void freeze() { tuning_ = false; }

  const Path& path() const { return path_; }
  // Replaces the state (replica exchange); rebuilds the running energy.
  void set_path(Path p);
  double running_energy() const { return energy_; }
  double recompute_energy();
  double site_scale() const { return site_scale_; }
  double shift_scale() const { return shift_scale_; }
  double max_energy_drift() const { return max_drift_; }

 private:
  double shift_delta(std::int64_t from, const std::vector<double>& delta) const;

  ModelSpec spec_;
  McmcConfig cfg_;
  KernelTable kernel_;
  Path path_;
  double energy_ = 0.0;
  double site_scale_ = 0.5;
  double shift_scale_ = 1.0;
  bool tuning_ = true;
  std::int64_t sweep_index_ = 0;
  double acc_site_window_ = 0.0, prop_site_window_ = 0.0;
  double acc_shift_window_ = 0.0, prop_shift_window_ = 0.0;
  double max_drift_ = 0.0;
};

// Full run: burn-in with tuning, then `sweeps - burn_in` retained sweeps of
// recorded observables. Multiple chains use split seed streams and are
// concatenated in chain order; diagnostics are pooled.
ChainResult run_chain(const ModelSpec& spec, const McmcConfig& cfg,
                      const ObservableSet& obs = {});

// Batch-means estimate of E[|x_T|^2] (d-dimensional squared displacement).
EstimateWithError estimate_msd(const ModelSpec& spec, const McmcConfig& cfg);

// Batch-means + IAT estimate for a named series of run_chain.
EstimateWithError estimate_series(const std::vector<double>& series,
                                  int batches);

// Windowed IAT estimate (self-consistent window, cutoff at the first window
// >= 5 * IAT), clamped to >= 0.5. Series of length < 100 is an error;
// a constant series returns 0.5 and sets *degenerate.
double integrated_autocorrelation(const std::vector<double>& series,
                                  bool* degenerate = nullptr);

}  // namespace selfint
