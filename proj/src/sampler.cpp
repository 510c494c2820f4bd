#include "selfint/sampler.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <thread>

#include "selfint/dyadic.hpp"
#include "selfint/hierarchy.hpp"

namespace selfint {

namespace {

constexpr std::int64_t kResyncPeriod = 10000;

// Interaction part of the energy at unit coupling (for replica swaps).
double interaction_sum(const Path& path, const ModelSpec& spec,
                       const KernelTable& kernel) {
  ModelSpec unit = spec;
  unit.alpha = 1.0;
  ModelSpec free = spec;
  free.alpha = 0.0;
  return energy(path, unit, kernel) - energy(path, free, kernel);
}

}  // namespace

std::vector<std::string> McmcConfig::validate() const {
  std::vector<std::string> errs;
  if (burn_in < 0) errs.push_back("burn_in: must be >= 0");
  if (sweeps <= burn_in) errs.push_back("sweeps: must exceed burn_in");
  if (!(proposal_scale > 0.0)) errs.push_back("proposal_scale: must be > 0");
  if (block_move_period < 1) errs.push_back("block_move_period: must be >= 1");
  if (chains < 1) errs.push_back("chains: must be >= 1");
  if (batches < 16) errs.push_back("batches: fewer than 16 batches makes the standard error unreliable");
  return errs;
}

MetropolisState::MetropolisState(const ModelSpec& spec, const McmcConfig& cfg)
    : spec_(spec),
      cfg_(cfg),
      kernel_(build_kernel(spec)),
      path_(make_path(spec)),
      site_scale_(cfg.proposal_scale),
      shift_scale_(2.0 * cfg.proposal_scale) {
  energy_ = energy(path_, spec_, kernel_);
}

double MetropolisState::recompute_energy() {
  const double full = energy(path_, spec_, kernel_);
  const double drift = std::abs(energy_ - full) / (1.0 + std::abs(full));
  max_drift_ = std::max(max_drift_, drift);
  energy_ = full;
  return full;
}

void MetropolisState::set_path(Path p) {
  path_ = std::move(p);
  energy_ = energy(path_, spec_, kernel_);
}

// Energy change of shifting all sites from `from` onward (pinned) or the arc
// starting at `from` of length cached in delta.size()... see callers.
double MetropolisState::shift_delta(std::int64_t from,
                                    const std::vector<double>& delta) const {
  // Pinned tail shift: sites from..N move rigidly by delta.
  const std::int64_t n = spec_.grid_n();
  const double ntil = spec_.n_per_unit;
  const int d = spec_.dim;
  double dk = 0.0;
  {  // only the increment (from-1, from) changes
    double before = 0.0, after = 0.0;
    for (int c = 0; c < d; ++c) {
      const double diff = path_.at(from, c) - path_.at(from - 1, c);
      before += diff * diff;
      const double diff2 = diff + delta[static_cast<std::size_t>(c)];
      after += diff2 * diff2;
    }
    dk = 0.5 * ntil * (after - before);
  }
  double di = 0.0;
  if (spec_.alpha != 0.0) {
    for (std::int64_t i = 0; i < from; ++i) {
      for (std::int64_t j = from; j <= n; ++j) {
        const double w = kernel_.values[static_cast<std::size_t>(j - i)];
        double r2_before = 0.0, r2_after = 0.0;
        for (int c = 0; c < d; ++c) {
          const double diff = path_.at(i, c) - path_.at(j, c);
          r2_before += diff * diff;
          const double diff2 = diff - delta[static_cast<std::size_t>(c)];
          r2_after += diff2 * diff2;
        }
        di += w * (spec_.f_of_r2(r2_after) - spec_.f_of_r2(r2_before));
      }
    }
    di *= spec_.alpha / (ntil * ntil);
  }
  return dk + di;
}

SweepStats MetropolisState::sweep(Rng& rng) {
  const std::int64_t n = spec_.grid_n();
  const int d = spec_.dim;
  const bool periodic = spec_.boundary == Boundary::Periodic;
  SweepStats stats;
  std::vector<double> prop(static_cast<std::size_t>(d));

  for (std::int64_t site = 1; site <= n; ++site) {
    for (int c = 0; c < d; ++c)
      prop[static_cast<std::size_t>(c)] = path_.at(
          (periodic && site == n) ? 0 : site, c) + site_scale_ * rng.normal();
    const double delta = energy_delta(path_, site, prop.data(), spec_, kernel_);
    const double acc_delta = cfg_.negate_energy_delta ? -delta : delta;
    ++stats.site_proposals;
    if (acc_delta <= 0.0 || rng.uniform() < accept_probability(acc_delta)) {
      const std::int64_t m = (periodic && site == n) ? 0 : site;
      for (int c = 0; c < d; ++c)
        path_.at(m, c) = prop[static_cast<std::size_t>(c)];
      if (periodic && m == 0)
        for (int c = 0; c < d; ++c) path_.at(n, c) = path_.at(0, c);
      if (periodic && m == n)
        for (int c = 0; c < d; ++c) path_.at(0, c) = path_.at(n, c);
      energy_ += delta;
      stats.site_accept += 1.0;
    }
  }

  if (cfg_.block_move_period > 0 &&
      (sweep_index_ % cfg_.block_move_period) == 0) {
    std::vector<double> delta(static_cast<std::size_t>(d));
    for (int mv = 0; mv < cfg_.shift_moves; ++mv) {
      for (int c = 0; c < d; ++c)
        delta[static_cast<std::size_t>(c)] = shift_scale_ * rng.normal();
      double de;
      if (!periodic) {
        const std::int64_t from = 1 + static_cast<std::int64_t>(rng.below(n));
        de = shift_delta(from, delta);
        const double acc_de = cfg_.negate_energy_delta ? -de : de;
        ++stats.shift_proposals;
        if (acc_de <= 0.0 || rng.uniform() < accept_probability(acc_de)) {
          for (std::int64_t j = from; j <= n; ++j)
            for (int c = 0; c < d; ++c)
              path_.at(j, c) += delta[static_cast<std::size_t>(c)];
          energy_ += de;
          stats.shift_accept += 1.0;
        }
      } else {
        // Arc shift: move sites k..k+len-1 (mod N) rigidly.
        const std::int64_t k = static_cast<std::int64_t>(rng.below(n));
        const std::int64_t len = 1 + static_cast<std::int64_t>(rng.below(n - 1));
        Path trial = path_;
        for (std::int64_t off = 0; off < len; ++off) {
          const std::int64_t j = (k + off) % n;
          for (int c = 0; c < d; ++c)
            trial.at(j, c) += delta[static_cast<std::size_t>(c)];
        }
        for (int c = 0; c < d; ++c) trial.at(n, c) = trial.at(0, c);
        const double e_new = energy(trial, spec_, kernel_);
        de = e_new - energy_;
        const double acc_de = cfg_.negate_energy_delta ? -de : de;
        ++stats.shift_proposals;
        if (acc_de <= 0.0 || rng.uniform() < accept_probability(acc_de)) {
          path_ = std::move(trial);
          energy_ = e_new;
          stats.shift_accept += 1.0;
        }
      }
    }
  }

  if (stats.site_proposals)
    stats.site_accept /= static_cast<double>(stats.site_proposals);
  if (stats.shift_proposals)
    stats.shift_accept /= static_cast<double>(stats.shift_proposals);
  acc_site_window_ += stats.site_accept;
  prop_site_window_ += 1.0;
  if (stats.shift_proposals) {
    acc_shift_window_ += stats.shift_accept;
    prop_shift_window_ += 1.0;
  }
  ++sweep_index_;
  if (sweep_index_ % kResyncPeriod == 0) recompute_energy();
  return stats;
}

void MetropolisState::tune(double target_site) {
  if (!tuning_ || prop_site_window_ == 0.0) return;
  const double acc = acc_site_window_ / prop_site_window_;
  site_scale_ *= std::exp(0.5 * (acc - target_site));
  site_scale_ = std::clamp(site_scale_, 1e-4, 1e3);
  if (prop_shift_window_ > 0.0) {
    const double acc_s = acc_shift_window_ / prop_shift_window_;
    shift_scale_ *= std::exp(0.5 * (acc_s - 0.30));
    shift_scale_ = std::clamp(shift_scale_, 1e-4, 1e3);
  }
  acc_site_window_ = prop_site_window_ = 0.0;
  acc_shift_window_ = prop_shift_window_ = 0.0;
}

namespace {

struct ChainAccum {
  std::map<std::string, std::vector<double>> series;
  double site_acc = 0.0, shift_acc = 0.0;
  double site_n = 0.0, shift_n = 0.0;
  double tuned_site = 0.0, tuned_shift = 0.0;
  double drift = 0.0;
};

void record_observables(const Path& path, const ModelSpec& spec,
                        const ObservableSet& obs, ChainAccum& acc) {
  const std::int64_t n = spec.grid_n();
  if (spec.boundary == Boundary::Pinned) {
    acc.series["msd"].push_back(sqdist(path, n, 0));
  } else {
    acc.series["msd"].push_back(sqdist(path, n, n / 2));
  }
  for (const auto& [m, k] : obs.increments) {
    acc.series["incr_" + std::to_string(m) + "_" + std::to_string(k)]
        .push_back(sqdist(path, m, k));
  }
  if (obs.endpoint_chain || obs.block_fluct) {
    DyadicStatistics st = dyadic_stats(path, spec);
    if (obs.endpoint_chain) {
      const std::int64_t big_t = spec.horizon();
      for (int l = 1; l <= spec.t; ++l)
        acc.series["sbar_l" + std::to_string(l)].push_back(
            st.sbar_at(l, 0)[0]);
      for (int l = 1; l <= spec.t - 1; ++l)
        acc.series["sbar_r" + std::to_string(l)].push_back(
            st.sbar_at(l, big_t - (std::int64_t(1) << l))[0]);
    }
    if (obs.block_fluct) {
      for (int j = 0; j <= spec.t; ++j)
        acc.series["rfluct_" + std::to_string(j)].push_back(st.r_max(j));
    }
  }
}

ChainAccum run_single_chain(const ModelSpec& spec, const McmcConfig& cfg,
                            const ObservableSet& obs, std::uint64_t seed,
                            int chain_index) {
  Rng rng = make_rng(seed).spawn(static_cast<std::uint64_t>(chain_index));
  ChainAccum acc;

  // Optional parallel tempering: replica 0 is the physical coupling.
  std::vector<double> ladder = {spec.alpha};
  for (double a : cfg.tempering_ladder)
    if (a != spec.alpha) ladder.push_back(a);
  const bool tempered = ladder.size() > 1;

  std::vector<MetropolisState> replicas;
  std::vector<ModelSpec> specs;
  for (double a : ladder) {
    ModelSpec s = spec;
    s.alpha = a;
    specs.push_back(s);
    replicas.emplace_back(s, cfg);
  }
  KernelTable kernel = build_kernel(spec);

  for (std::int64_t sw = 0; sw < cfg.sweeps; ++sw) {
    SweepStats stats{};
    for (std::size_t r = 0; r < replicas.size(); ++r) {
      SweepStats s = replicas[r].sweep(rng);
      if (r == 0) stats = s;
    }
    if (tempered && replicas.size() > 1) {
      const std::size_t i = rng.below(replicas.size() - 1);
      const double a_i = ladder[i], a_j = ladder[i + 1];
      const double int_i = interaction_sum(replicas[i].path(), specs[i], kernel);
      const double int_j =
          interaction_sum(replicas[i + 1].path(), specs[i + 1], kernel);
      const double log_ratio = (a_i - a_j) * (int_i - int_j);
      if (log_ratio >= 0.0 || rng.uniform() < std::exp(log_ratio)) {
        Path pi = replicas[i].path();
        replicas[i].set_path(replicas[i + 1].path());
        replicas[i + 1].set_path(std::move(pi));
      }
    }

    if (sw < cfg.burn_in) {
      if ((sw + 1) % 100 == 0)
        for (auto& r : replicas) r.tune();
      if (sw + 1 == cfg.burn_in)
        for (auto& r : replicas) {
          r.tune();
          r.freeze();
          r.recompute_energy();
        }
      continue;
    }
    acc.site_acc += stats.site_accept;
    acc.site_n += 1.0;
    if (stats.shift_proposals) {
      acc.shift_acc += stats.shift_accept;
      acc.shift_n += 1.0;
    }
    record_observables(replicas[0].path(), spec, obs, acc);
  }
  acc.tuned_site = replicas[0].site_scale();
  acc.tuned_shift = replicas[0].shift_scale();
  replicas[0].recompute_energy();
  acc.drift = replicas[0].max_energy_drift();
  return acc;
}

}  // namespace

double integrated_autocorrelation(const std::vector<double>& series,
                                  bool* degenerate) {
  const std::size_t n = series.size();
  if (degenerate) *degenerate = false;
  if (n < 100)
    throw std::invalid_argument(
        "integrated_autocorrelation: series shorter than 100");
  const double mean =
      std::accumulate(series.begin(), series.end(), 0.0) / double(n);
  double var = 0.0;
  for (double x : series) var += (x - mean) * (x - mean);
  var /= double(n);
  const double scale = std::max(1.0, mean * mean);
  if (var <= scale * 1e-24) {
    if (degenerate) *degenerate = true;
    return 0.5;
  }
  const std::size_t w_max = std::min<std::size_t>(n / 4, 20000);
  double tau = 0.5;
  for (std::size_t w = 1; w <= w_max; ++w) {
    double g = 0.0;
    for (std::size_t i = 0; i + w < n; ++i)
      g += (series[i] - mean) * (series[i + w] - mean);
    g /= double(n - w);
    tau += g / var;
    if (double(w) >= 5.0 * tau) break;
  }
  return std::max(tau, 0.5);
}

EstimateWithError estimate_series(const std::vector<double>& series,
                                  int batches) {
  if (batches < 16)
    throw std::invalid_argument(
        "estimate_series: fewer than 16 batches makes the SE unreliable");
  const std::size_t n = series.size();
  const std::size_t m = n / static_cast<std::size_t>(batches);
  if (m == 0)
    throw std::invalid_argument("estimate_series: series shorter than batches");
  const std::size_t used = m * static_cast<std::size_t>(batches);
  const std::size_t start = n - used;

  EstimateWithError est;
  std::vector<double> batch_means(static_cast<std::size_t>(batches), 0.0);
  double total = 0.0;
  for (std::size_t b = 0; b < batch_means.size(); ++b) {
    double s = 0.0;
    for (std::size_t i = 0; i < m; ++i) s += series[start + b * m + i];
    batch_means[b] = s / double(m);
    total += s;
  }
  est.mean = total / double(used);
  double bv = 0.0;
  for (double bm : batch_means) bv += (bm - est.mean) * (bm - est.mean);
  bv /= double(batches - 1);
  est.std_error = std::sqrt(bv / double(batches));

  bool degenerate = false;
  const double tau = n >= 100
                         ? integrated_autocorrelation(series, &degenerate)
                         : 0.5;
  double var = 0.0;
  for (std::size_t i = start; i < n; ++i)
    var += (series[i] - est.mean) * (series[i] - est.mean);
  var /= double(used);
  est.std_error_iat = std::sqrt(var * 2.0 * tau / double(used));
  est.n_effective = double(used) / (2.0 * tau);
  return est;
}

ChainResult run_chain(const ModelSpec& spec, const McmcConfig& cfg,
                      const ObservableSet& obs) {
  {
    auto errs = spec.validate();
    auto cerrs = cfg.validate();
    errs.insert(errs.end(), cerrs.begin(), cerrs.end());
    if (!errs.empty()) throw std::invalid_argument("run_chain: " + errs[0]);
  }

  std::vector<ChainAccum> accums(static_cast<std::size_t>(cfg.chains));
  if (cfg.chains == 1) {
    accums[0] = run_single_chain(spec, cfg, obs, cfg.seed, 0);
  } else {
    std::vector<std::thread> pool;
    for (int c = 0; c < cfg.chains; ++c)
      pool.emplace_back([&, c] {
        accums[static_cast<std::size_t>(c)] =
            run_single_chain(spec, cfg, obs, cfg.seed, c);
      });
    for (auto& th : pool) th.join();
  }

  ChainResult out;
  // Merge in chain order.
  for (const auto& acc : accums)
    for (const auto& [name, vec] : acc.series) {
      auto& dst = out.series[name];
      dst.insert(dst.end(), vec.begin(), vec.end());
    }

  McmcDiagnostics& diag = out.diagnostics;
  double sa = 0.0, sn = 0.0, ba = 0.0, bn = 0.0, drift = 0.0;
  for (const auto& acc : accums) {
    sa += acc.site_acc;
    sn += acc.site_n;
    ba += acc.shift_acc;
    bn += acc.shift_n;
    drift = std::max(drift, acc.drift);
  }
  diag.site_acceptance = sn > 0 ? sa / sn : 0.0;
  diag.shift_acceptance = bn > 0 ? ba / bn : 0.0;
  diag.tuned_site_scale = accums[0].tuned_site;
  diag.tuned_shift_scale = accums[0].tuned_shift;
  diag.energy_drift = drift;
  diag.retained =
      static_cast<std::int64_t>(out.series.begin()->second.size());
  diag.batch_count = cfg.batches;

  for (const auto& [name, vec] : out.series) {
    double tau_sum = 0.0;
    bool deg = false;
    for (const auto& acc : accums) {
      const auto& v = acc.series.at(name);
      bool d1 = false;
      const double tau = v.size() >= 100
                             ? integrated_autocorrelation(v, &d1)
                             : 0.5;
      tau_sum += tau;
      deg = deg || d1;
    }
    const double tau = tau_sum / double(accums.size());
    diag.iat[name] = tau;
    diag.effective_samples[name] = double(vec.size()) / (2.0 * tau);
    diag.degenerate = diag.degenerate || deg;
  }
  return out;
}

EstimateWithError estimate_msd(const ModelSpec& spec, const McmcConfig& cfg) {
  ObservableSet obs;
  obs.endpoint_chain = false;
  ChainResult res = run_chain(spec, cfg, obs);
  return estimate_series(res.series.at("msd"), cfg.batches);
}

}  // namespace selfint
