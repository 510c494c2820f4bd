#pragma once

// Command-line surface. Configs are flat key=value text ('#' comments);
// flags override file values; unknown keys are rejected. Exit codes:
// 0 ok, 1 check failure, 2 bad config, 3 numeric failure.

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "selfint/experiments.hpp"
#include "selfint/model.hpp"
#include "selfint/sampler.hpp"

namespace selfint {

enum class Subcommand { Exact, Sample, Scaling, Verify, Regimes, Fixpoint, Recursion };

struct CliConfig {
  Subcommand subcommand = Subcommand::Verify;
  ModelSpec spec;
  McmcConfig mcmc;
  std::string out_dir = ".";
  std::string format = "csv";  // csv | json
  int resolution = 64;
  std::vector<int> t_values = {6, 7, 8, 9, 10, 11, 12, 13};
  std::string method = "exact";  // exact | mcmc
  // fixpoint / recursion knobs
  double fp_c = 1.0;
  double fp_d = 0.5;
  int fp_n = 30;
  int recursion_steps = 10000;

  // Canonical key=value text; parse(serialize(x)) == x.
  std::string serialize() const;
};

struct CliError {
  int exit_code = 2;
  std::string message;
};

// Parses file key=values (if path nonempty) then applies overrides
// (key=value strings from flags). Strict: unknown keys or bad values throw
// CliError with exit code 2 and a field-precise message.
CliConfig parse_config(const std::string& subcommand,
                       const std::string& config_path,
                       const std::vector<std::string>& overrides);

// Parses flat key=value text into a map, preserving unknown keys for the
// strict check. Throws CliError on malformed lines.
std::map<std::string, std::string> parse_kv_text(const std::string& text);

// Runs the subcommand, writing artifacts under cfg.out_dir. Returns the
// process exit code; writes a one-line status per check to `log` when given.
int dispatch(const CliConfig& cfg, std::string* log = nullptr);

}  // namespace selfint
