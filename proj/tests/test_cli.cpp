#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "selfint/cli.hpp"

using namespace selfint;
namespace fs = std::filesystem;

namespace {

std::string write_tmp(const std::string& name, const std::string& text) {
  const std::string path = (fs::temp_directory_path() / name).string();
  std::ofstream out(path);
  out << text;
  return path;
}

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

TEST_CASE("minimal config file fills documented defaults") {
  const std::string path = write_tmp(
      "selfint_min.cfg", "t = 8\nalpha = 1\ngamma = 2\nxi = 2\n");
  CliConfig cfg = parse_config("exact", path, {});
  CHECK(cfg.spec.t == 8);
  CHECK(cfg.spec.n_per_unit == 4);
  CHECK(cfg.spec.dim == 1);
  CHECK(cfg.spec.boundary == Boundary::Pinned);
  CHECK(cfg.spec.alpha == 1.0);
}

TEST_CASE("range violations and unknown keys are rejected with exit code 2") {
  const std::string path =
      write_tmp("selfint_bad.cfg", "t = 8\ngamma = 2.5\n");
  try {
    parse_config("exact", path, {});
    FAIL("expected CliError");
  } catch (const CliError& e) {
    CHECK(e.exit_code == 2);
    CHECK(e.message.find("gamma") != std::string::npos);
  }

  const std::string unk = write_tmp("selfint_unk.cfg", "tt = 8\n");
  CHECK_THROWS_AS(parse_config("exact", unk, {}), CliError);

  const std::string mal = write_tmp("selfint_mal.cfg", "just a line\n");
  CHECK_THROWS_AS(parse_config("exact", mal, {}), CliError);

  CHECK_THROWS_AS(parse_config("frobnicate", "", {}), CliError);

  // Theorem-range style messages for the exact solver.
  const std::string g1 = write_tmp("selfint_g1.cfg", "gamma = 1.0\n");
  try {
    parse_config("exact", g1, {});
    FAIL("expected CliError");
  } catch (const CliError& e) {
    CHECK(e.message.find("gamma = 2") != std::string::npos);
  }
}

TEST_CASE("flags override file values") {
  const std::string path = write_tmp("selfint_ovr.cfg", "xi = 2\nt = 6\n");
  CliConfig cfg = parse_config("verify", path, {"xi=1.5"});
  CHECK(cfg.spec.xi == 1.5);
  CHECK(cfg.spec.t == 6);
}

TEST_CASE("config round-trips through serialize/parse") {
  CliConfig cfg = parse_config(
      "scaling", "",
      {"t=6", "alpha=0.5", "xi=2.5", "boundary=periodic", "seed=99",
       "t_values=6,7,8,9", "method=exact", "format=json"});
  const std::string canon = cfg.serialize();
  const std::string path = write_tmp("selfint_rt.cfg", canon);
  CliConfig back = parse_config("scaling", path, {});
  CHECK(back.serialize() == canon);
}

TEST_CASE("dispatch: regimes artifact with identical reruns") {
  CliConfig cfg = parse_config("regimes", "",
                               {"resolution=16", "out=/tmp/selfint_t1"});
  std::string log;
  CHECK(dispatch(cfg, &log) == 0);
  const std::string first = slurp("/tmp/selfint_t1/regimes.csv");
  CHECK(first.rfind("gamma,xi,label\n", 0) == 0);
  CHECK(dispatch(cfg, &log) == 0);
  CHECK(slurp("/tmp/selfint_t1/regimes.csv") == first);
  // 16x16 rows + header.
  CHECK(std::count(first.begin(), first.end(), '\n') == 16 * 16 + 1);
  // Metadata carries the dotted-line annotation.
  CHECK(slurp("/tmp/selfint_t1/regimes.meta.json").find("dotted_line_xi") !=
        std::string::npos);
}

TEST_CASE("dispatch: exact and fixpoint succeed, recursion flags divergence") {
  {
    CliConfig cfg = parse_config(
        "exact", "", {"t=4", "alpha=1", "xi=2", "boundary=periodic",
                      "out=/tmp/selfint_t2"});
    std::string log;
    CHECK(dispatch(cfg, &log) == 0);
    CHECK(slurp("/tmp/selfint_t2/exact.csv").find("msd") != std::string::npos);
  }
  {
    CliConfig cfg = parse_config("fixpoint", "",
                                 {"fp_c=1", "fp_d=0.5", "fp_n=20",
                                  "out=/tmp/selfint_t2"});
    std::string log;
    CHECK(dispatch(cfg, &log) == 0);
    CHECK(log.find("fixed_point = 2") != std::string::npos);
  }
  {
    CliConfig cfg = parse_config(
        "recursion", "", {"gamma=1", "xi=1.5", "out=/tmp/selfint_t2",
                          "recursion_steps=2000"});
    std::string log;
    CHECK(dispatch(cfg, &log) == 0);
  }
  {
    // xi > 2 diverges; that is expected behaviour, not a check failure.
    CliConfig cfg = parse_config(
        "recursion", "", {"gamma=1", "xi=2.5", "out=/tmp/selfint_t2",
                          "recursion_steps=2000"});
    std::string log;
    CHECK(dispatch(cfg, &log) == 0);
    CHECK(log.find("diverged = true") != std::string::npos);
  }
}

TEST_CASE("dispatch: sample run is seed-deterministic") {
  CliConfig cfg = parse_config(
      "sample", "",
      {"t=3", "n_per_unit=1", "alpha=0.5", "xi=1", "gamma=1", "sweeps=3000",
       "burn_in=500", "seed=5", "out=/tmp/selfint_t3"});
  std::string log;
  CHECK(dispatch(cfg, &log) == 0);
  const std::string first = slurp("/tmp/selfint_t3/sample.json");
  CHECK(dispatch(cfg, &log) == 0);
  CHECK(slurp("/tmp/selfint_t3/sample.json") == first);
  CHECK(first.find("n_effective") != std::string::npos);
}

TEST_CASE("dispatch: scaling artifacts and manifest digest stability") {
  CliConfig cfg = parse_config(
      "scaling", "",
      {"alpha=0", "n_per_unit=2", "t_values=3,4,5,6", "method=exact",
       "out=/tmp/selfint_t4", "seed=77"});
  std::string log;
  CHECK(dispatch(cfg, &log) == 0);
  CHECK(log.find("slope = 1") != std::string::npos);
  const std::string csv1 = slurp("/tmp/selfint_t4/scaling.csv");
  const std::string man1 = slurp("/tmp/selfint_t4/scaling.manifest.json");
  CHECK(dispatch(cfg, &log) == 0);
  CHECK(slurp("/tmp/selfint_t4/scaling.csv") == csv1);
  // Same digest on rerun (timestamps may differ).
  const std::string man2 = slurp("/tmp/selfint_t4/scaling.manifest.json");
  const auto digest_of = [](const std::string& s) {
    const auto p = s.find("config_digest");
    return s.substr(p, 40);
  };
  CHECK(digest_of(man1) == digest_of(man2));
}

TEST_CASE("dispatch: numeric errors exit with code 3") {
  // t=12 at 4 points per unit exceeds the dense assembler's cap; the solver
  // throws and the dispatcher classifies it as a numeric failure.
  CliConfig cfg = parse_config(
      "exact", "", {"t=12", "alpha=1", "xi=2", "out=/tmp/selfint_t6"});
  std::string log;
  CHECK(dispatch(cfg, &log) == 3);
  CHECK(log.find("numeric error") != std::string::npos);
}

TEST_CASE("dispatch: pinned exact scaling beyond the dense cap is rejected") {
  CliConfig cfg = parse_config(
      "scaling", "",
      {"alpha=0", "n_per_unit=4", "t_values=10,11,12,13", "method=exact",
       "out=/tmp/selfint_t5"});
  std::string log;
  CHECK(dispatch(cfg, &log) == 2);
  CHECK(log.find("dense") != std::string::npos);
}
