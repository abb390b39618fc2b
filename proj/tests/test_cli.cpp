#include <cstdint>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "doctest.h"
#include "eqpert/config.hpp"
#include "eqpert/experiments.hpp"
#include "json.hpp"

using namespace eqpert;

namespace {

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  REQUIRE(in.good());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

bool has_substr(const std::vector<std::string>& lines, const std::string& needle) {
  for (const auto& l : lines)
    if (l.find(needle) != std::string::npos) return true;
  return false;
}

std::map<std::string, std::string> gep_example() {
  return parse_key_values(
      "experiment = gep-perturbation\n"
      "output = scratch\n"
      "seed = 1\n"
      "alpha = 0.25\n"
      "kappa = 0.2\n"
      "n = 512 1024\n"
      "replicas = 4\n"
      "t = 0.1\n"
      "dimension = 1\n"
      "k_max = 1\n"
      "rates = 1 0\n"
      "rho_star = 0.5\n"
      "profile = sin\n"
      "amplitude = 0.25\n"
      "phi = one cos sin\n"
      "bins = 64\n");
}

}  // namespace

TEST_CASE("key-value parser: comments, arrays, and malformed lines") {
  auto kv = parse_key_values(
      "# leading comment\n"
      "a = 1\n"
      "\n"
      "list = 2 4 8   # trailing comment\n"
      "name = two words\n");
  CHECK(kv.size() == 3);
  CHECK(kv.at("a") == "1");
  CHECK(kv.at("list") == "2 4 8");
  CHECK(kv.at("name") == "two words");

  CHECK_THROWS_WITH_AS(parse_key_values("a = 1\na = 2\n"),
                       doctest::Contains("duplicate key"), std::invalid_argument);
  CHECK_THROWS_WITH_AS(parse_key_values("just words\n"), doctest::Contains("line 1"),
                       std::invalid_argument);
  CHECK_THROWS_AS(parse_key_values("= 3\n"), std::invalid_argument);
  CHECK_THROWS_AS(parse_key_values("a =\n"), std::invalid_argument);
}

TEST_CASE("default seeds hash the experiment id") {
  // pinned FNV-1a (64-bit) values, computed independently
  CHECK(seed_from_id("gep-perturbation") == 2155230709871120739ULL);
  CHECK(seed_from_id("oracle-validation") == 13450282706586503149ULL);
  CHECK(seed_from_id("flow-audit") == 2678315104861423879ULL);

  auto kv = gep_example();
  kv.erase("seed");
  ConfigIssues is;
  auto cfg = normalize(kv, is);
  CHECK(is.errors.empty());
  CHECK(cfg.seed_defaulted);
  CHECK(cfg.seed == seed_from_id("gep-perturbation"));
}

TEST_CASE("normalize accepts the exclusion example without complaint") {
  ConfigIssues is;
  auto cfg = normalize(gep_example(), is);
  CHECK(is.errors.empty());
  CHECK(is.warnings.empty());
  CHECK(cfg.experiment == "gep-perturbation");
  CHECK(cfg.seed == 1);
  CHECK_FALSE(cfg.seed_defaulted);
  CHECK(cfg.alpha == 0.25);
  CHECK(cfg.kappa == 0.2);
  CHECK(cfg.n_list == std::vector<int>{512, 1024});
  CHECK(cfg.phis == std::vector<std::string>{"one", "cos", "sin"});
}

TEST_CASE("normalize rejects hard invariant violations") {
  SUBCASE("kappa above alpha") {
    auto kv = gep_example();
    kv["kappa"] = "0.3";
    ConfigIssues is;
    normalize(kv, is);
    REQUIRE_FALSE(is.errors.empty());
    CHECK(has_substr(is.errors, "kappa = 0.3 exceeds alpha = 0.25"));
  }
  SUBCASE("unknown key") {
    auto kv = gep_example();
    kv["bogus"] = "1";
    ConfigIssues is;
    normalize(kv, is);
    CHECK(has_substr(is.errors, "unknown key for gep-perturbation: bogus"));
  }
  SUBCASE("unknown experiment") {
    ConfigIssues is;
    normalize(parse_key_values("experiment = nope\noutput = scratch\n"), is);
    CHECK(has_substr(is.errors, "'nope' is not one of"));
  }
  SUBCASE("times must increase") {
    auto kv = gep_example();
    kv["t"] = "0.2 0.1";
    ConfigIssues is;
    normalize(kv, is);
    CHECK(has_substr(is.errors, "strictly increasing"));
  }
  SUBCASE("bins beyond the coarsest lattice") {
    auto kv = gep_example();
    kv["n"] = "32 64";
    ConfigIssues is;
    normalize(kv, is);
    CHECK(has_substr(is.errors, "bins must not exceed the coarsest lattice side"));
  }
  SUBCASE("amplitude pushes the density out of range") {
    auto kv = gep_example();
    kv["amplitude"] = "2";
    kv["n"] = "64 128";
    kv["bins"] = "16";
    ConfigIssues is;
    normalize(kv, is);
    CHECK(has_substr(is.errors, "the perturbed density leaves (0, k_max)"));
  }
}

TEST_CASE("hypothesis windows warn instead of failing") {
  SUBCASE("exclusion window in dimension 1") {
    auto kv = gep_example();
    kv["alpha"] = "0.4";
    kv["kappa"] = "0.3";  // kappa <= alpha but kappa >= 1 - 2*alpha
    ConfigIssues is;
    auto cfg = normalize(kv, is);
    CHECK(is.errors.empty());
    CHECK(has_substr(is.warnings, "proven window"));
    CHECK(cfg.kappa == 0.3);
  }
  SUBCASE("chain gamma exponent default and window") {
    auto kv = parse_key_values(
        "experiment = chain-perturbation\n"
        "output = scratch\n"
        "seed = 7\n"
        "alpha = 0.3\n"
        "kappa = 0.1\n"
        "n = 64 128\n"
        "replicas = 4\n"
        "t = 0.001\n"
        "potential = fpu-quartic\n"
        "beta = 1\n"
        "r_star = 0.5\n"
        "minus_profile = sin\n"
        "minus_amplitude = 2\n"
        "plus_profile = cos\n"
        "plus_amplitude = 2\n"
        "bins = 16\n");
    ConfigIssues is;
    auto cfg = normalize(kv, is);
    CHECK(is.errors.empty());
    CHECK(is.warnings.empty());
    CHECK(cfg.gamma_defaulted);
    CHECK(cfg.gamma_exponent == doctest::Approx(0.8));

    kv["gamma_exponent"] = "0.95";  // above 1 - kappa = 0.9
    ConfigIssues is2;
    auto cfg2 = normalize(kv, is2);
    CHECK(is2.errors.empty());
    CHECK_FALSE(cfg2.gamma_defaulted);
    CHECK(has_substr(is2.warnings, "coupling window"));
  }
}

TEST_CASE("per-experiment schemas check their own shapes") {
  SUBCASE("oracle-validation initial occupancy length") {
    ConfigIssues is;
    normalize(parse_key_values("experiment = oracle-validation\n"
                               "output = scratch\n"
                               "n = 4\n"
                               "k_max = 1\n"
                               "rates = 1.5 0.5\n"
                               "initial = 1 1 0\n"
                               "t = 0.5\n"
                               "replicas = 100\n"),
              is);
    CHECK(has_substr(is.errors, "initial"));
  }
  SUBCASE("solver comparison refuses post-caustic times") {
    ConfigIssues is;
    normalize(parse_key_values("experiment = pde-convergence\n"
                               "output = scratch\n"
                               "profile = sin\n"
                               "amplitude = 0.25\n"
                               "wave_coefficient = -1\n"
                               "t = 5\n"
                               "cells = 256 512\n"),
              is);
    CHECK(has_substr(is.errors, "caustic"));
  }
  SUBCASE("concentration draw floor") {
    ConfigIssues is;
    normalize(parse_key_values("experiment = concentration-audit\n"
                               "output = scratch\n"
                               "draws = 10\n"),
              is);
    CHECK(has_substr(is.errors, "draws"));
  }
}

TEST_CASE("effective config echo round-trips through the parser") {
  ConfigIssues is;
  auto cfg = normalize(gep_example(), is);
  REQUIRE(is.errors.empty());
  std::string echo = render_effective(cfg);
  CHECK(echo.find("\r") == std::string::npos);

  ConfigIssues is2;
  auto cfg2 = normalize(parse_key_values(echo), is2);
  CHECK(is2.errors.empty());
  CHECK(render_effective(cfg2) == echo);
}

TEST_CASE("shortest round-trip double formatting") {
  for (double v : {0.1, 1.0 / 3.0, 0.25, 1e-300, 12345678.9, -2.5e17,
                   0.30000000000000004, 1.0, 0.0}) {
    std::string s = format_double(v);
    CHECK(std::stod(s) == v);
  }
  CHECK(format_double(0.25) == "0.25");
  CHECK(format_double(1.0) == "1");
}

TEST_CASE("field csv writes a bare header when empty") {
  namespace fs = std::filesystem;
  fs::create_directories("cli_scratch");
  FieldSeries f;
  write_field_csv(f, "cli_scratch/empty.csv");
  CHECK(slurp("cli_scratch/empty.csv") == "u,empirical,macroscopic,stderr\n");
  fs::remove_all("cli_scratch");
}

TEST_CASE("worker count honors the environment override") {
  ::setenv("EQPERT_WORKERS", "3", 1);
  CHECK(worker_count() == 3);
  ::setenv("EQPERT_WORKERS", "not a number", 1);
  CHECK(worker_count() >= 1);
  ::unsetenv("EQPERT_WORKERS");
  CHECK(worker_count() >= 1);
}

TEST_CASE("experiment runs are byte-identical under a fixed seed") {
  namespace fs = std::filesystem;
  fs::path dir = fs::path("cli_scratch") / "det";
  fs::remove_all("cli_scratch");

  auto kv = parse_key_values("experiment = oracle-validation\n"
                             "output = " + (dir.string()) + "\n"
                             "seed = 11\n"
                             "n = 4\n"
                             "k_max = 1\n"
                             "rates = 1.5 0.5\n"
                             "initial = 1 1 0 0\n"
                             "t = 0.5\n"
                             "replicas = 2000\n"
                             "speed = 1\n"
                             "tv_threshold = 0.05\n");
  ConfigIssues is;
  auto cfg = normalize(kv, is);
  REQUIRE(is.errors.empty());

  auto rep1 = run_experiment(cfg, is.warnings);
  REQUIRE(rep1.ok());
  REQUIRE_FALSE(rep1.artifacts.empty());
  std::map<std::string, std::string> first;
  for (const auto& rel : rep1.artifacts) first[rel] = slurp(dir / rel);

  auto rep2 = run_experiment(cfg, is.warnings);
  REQUIRE(rep2.ok());
  CHECK(rep2.artifacts == rep1.artifacts);
  for (const auto& rel : rep2.artifacts) CHECK(slurp(dir / rel) == first.at(rel));

  fs::remove_all("cli_scratch");
}

TEST_CASE("paired observation rows carry the full identification schema") {
  namespace fs = std::filesystem;
  fs::path dir = fs::path("cli_scratch") / "rows";
  fs::remove_all("cli_scratch");

  auto kv = gep_example();
  kv["output"] = dir.string();
  kv["n"] = "16 32";
  kv["bins"] = "8";
  kv["replicas"] = "3";
  kv["t"] = "0.05";
  ConfigIssues is;
  auto cfg = normalize(kv, is);
  REQUIRE(is.errors.empty());
  auto rep = run_experiment(cfg, is.warnings);
  REQUIRE(rep.ok());

  std::istringstream nd(slurp(dir / "pairings.ndjson"));
  const std::vector<std::string> want = {"t",  "N",      "alpha", "kappa",
                                         "k",  "phi_id", "value", "stderr"};
  std::string line;
  int rows = 0;
  while (std::getline(nd, line)) {
    auto row = nlohmann::ordered_json::parse(line);
    std::vector<std::string> keys;
    for (auto it = row.begin(); it != row.end(); ++it) keys.push_back(it.key());
    CHECK(keys == want);
    CHECK(row["k"] == 0);
    ++rows;
  }
  CHECK(rows == 2 * 3);  // two lattice sizes, three test functions, one time

  CHECK(fs::exists(dir / "summary.csv"));
  CHECK(fs::exists(dir / "manifest.json"));
  auto manifest = nlohmann::json::parse(slurp(dir / "manifest.json"));
  CHECK(manifest["seed"] == 1);
  CHECK(manifest["experiment"] == "gep-perturbation");
  CHECK(manifest.contains("rng_scheme"));

  fs::remove_all("cli_scratch");
}
