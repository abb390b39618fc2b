#include "eqpert/config.hpp"

#include <algorithm>
#include <climits>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <set>
#include <sstream>
#include <stdexcept>

#include "eqpert/burgers.hpp"
#include "eqpert/potential.hpp"
#include "eqpert/profiles.hpp"

namespace eqpert {

namespace {

std::string trim(const std::string& s) {
  std::size_t a = s.find_first_not_of(" \t\r");
  if (a == std::string::npos) return "";
  std::size_t b = s.find_last_not_of(" \t\r");
  return s.substr(a, b - a + 1);
}

std::vector<std::string> tokens(const std::string& s) {
  std::vector<std::string> out;
  std::istringstream in(s);
  std::string t;
  while (in >> t) out.push_back(t);
  return out;
}

bool parse_double(const std::string& s, double& out) {
  if (s.empty()) return false;
  char* end = nullptr;
  out = std::strtod(s.c_str(), &end);
  return end == s.c_str() + s.size() && std::isfinite(out);
}

bool parse_int(const std::string& s, long long& out) {
  if (s.empty()) return false;
  char* end = nullptr;
  out = std::strtoll(s.c_str(), &end, 10);
  return end == s.c_str() + s.size();
}

std::string shortest(double v) { return format_double(v); }

// Typed access over the raw map; every read marks the key as belonging to the
// experiment's schema, so leftovers are reported as unknown keys.
struct Reader {
  const std::map<std::string, std::string>& kv;
  ConfigIssues& issues;
  std::set<std::string> used;

  bool has(const std::string& k) const { return kv.count(k) != 0; }

  std::string str(const std::string& k, const std::string& def) {
    used.insert(k);
    auto it = kv.find(k);
    return it == kv.end() ? def : it->second;
  }

  std::string require_str(const std::string& k) {
    used.insert(k);
    auto it = kv.find(k);
    if (it == kv.end()) {
      issues.errors.push_back("missing required key: " + k);
      return "";
    }
    return it->second;
  }

  double num(const std::string& k, double def, bool required = false) {
    used.insert(k);
    auto it = kv.find(k);
    if (it == kv.end()) {
      if (required) issues.errors.push_back("missing required key: " + k);
      return def;
    }
    double v = 0.0;
    if (!parse_double(it->second, v)) {
      issues.errors.push_back("key " + k + ": '" + it->second + "' is not a number");
      return def;
    }
    return v;
  }

  long long integer(const std::string& k, long long def, bool required = false) {
    used.insert(k);
    auto it = kv.find(k);
    if (it == kv.end()) {
      if (required) issues.errors.push_back("missing required key: " + k);
      return def;
    }
    long long v = 0;
    if (!parse_int(it->second, v)) {
      issues.errors.push_back("key " + k + ": '" + it->second + "' is not an integer");
      return def;
    }
    return v;
  }

  std::vector<double> num_list(const std::string& k, std::vector<double> def,
                               bool required = false) {
    used.insert(k);
    auto it = kv.find(k);
    if (it == kv.end()) {
      if (required) issues.errors.push_back("missing required key: " + k);
      return def;
    }
    std::vector<double> out;
    for (const std::string& t : tokens(it->second)) {
      double v = 0.0;
      if (!parse_double(t, v)) {
        issues.errors.push_back("key " + k + ": '" + t + "' is not a number");
        return def;
      }
      out.push_back(v);
    }
    if (out.empty()) issues.errors.push_back("key " + k + ": empty list");
    return out;
  }

  std::vector<int> int_list(const std::string& k, std::vector<int> def,
                            bool required = false) {
    used.insert(k);
    auto it = kv.find(k);
    if (it == kv.end()) {
      if (required) issues.errors.push_back("missing required key: " + k);
      return def;
    }
    std::vector<int> out;
    for (const std::string& t : tokens(it->second)) {
      long long v = 0;
      if (!parse_int(t, v) || v < INT_MIN || v > INT_MAX) {
        issues.errors.push_back("key " + k + ": '" + t + "' is not an integer");
        return def;
      }
      out.push_back(static_cast<int>(v));
    }
    if (out.empty()) issues.errors.push_back("key " + k + ": empty list");
    return out;
  }

  std::vector<std::string> str_list(const std::string& k, std::vector<std::string> def) {
    used.insert(k);
    auto it = kv.find(k);
    if (it == kv.end()) return def;
    auto out = tokens(it->second);
    if (out.empty()) issues.errors.push_back("key " + k + ": empty list");
    return out;
  }
};

void check_profile(const std::string& key, const std::string& name, double amplitude,
                   double center, double width, ConfigIssues& issues) {
  try {
    Profile::named(name, amplitude, center, width, name == "bump");
  } catch (const std::exception& e) {
    issues.errors.push_back("key " + key + ": " + e.what());
  }
}

void check_phis(const std::vector<std::string>& phis, ConfigIssues& issues) {
  for (const auto& p : phis)
    if (p != "one" && p != "cos" && p != "sin")
      issues.errors.push_back("test function '" + p + "' is not one of: one, cos, sin");
}

void check_times(const std::vector<double>& t, ConfigIssues& issues) {
  for (std::size_t i = 0; i < t.size(); ++i) {
    if (!(t[i] > 0.0)) {
      issues.errors.push_back("observation times must be positive");
      return;
    }
    if (i > 0 && t[i] <= t[i - 1]) {
      issues.errors.push_back("observation times must be strictly increasing");
      return;
    }
  }
}

void check_lattice_sizes(const std::vector<int>& n, int dim, ConfigIssues& issues) {
  for (int v : n) {
    if (v < 2) {
      issues.errors.push_back("lattice side must be at least 2");
      return;
    }
    double sites = std::pow(static_cast<double>(v), dim);
    if (sites > double(1 << 24)) {
      issues.errors.push_back("lattice of " + shortest(sites) +
                              " sites exceeds the in-memory budget (2^24)");
      return;
    }
  }
}

void check_rates(const std::vector<double>& p, int dim, ConfigIssues& issues) {
  if (static_cast<int>(p.size()) != 2 * dim) {
    issues.errors.push_back("rates must list 2*dimension entries (+e_i then -e_i)");
    return;
  }
  double total = 0.0;
  for (double v : p) {
    if (v < 0.0) {
      issues.errors.push_back("rates must be nonnegative");
      return;
    }
    total += v;
  }
  if (!(total > 0.0)) issues.errors.push_back("rates must not all vanish");
}

}  // namespace

std::string format_double(double v) {
  char buf[64];
  for (int prec = 1; prec <= 17; ++prec) {
    std::snprintf(buf, sizeof buf, "%.*g", prec, v);
    if (std::strtod(buf, nullptr) == v) return buf;
  }
  return buf;
}

std::map<std::string, std::string> parse_key_values(const std::string& text) {
  std::map<std::string, std::string> kv;
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    std::size_t hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    std::size_t eq = line.find('=');
    if (eq == std::string::npos)
      throw std::invalid_argument("config line " + std::to_string(lineno) +
                                  ": expected 'key = value'");
    std::string key = trim(line.substr(0, eq));
    std::string value = trim(line.substr(eq + 1));
    if (key.empty())
      throw std::invalid_argument("config line " + std::to_string(lineno) + ": empty key");
    if (value.empty())
      throw std::invalid_argument("config line " + std::to_string(lineno) +
                                  ": empty value for key '" + key + "'");
    if (!kv.emplace(key, value).second)
      throw std::invalid_argument("config line " + std::to_string(lineno) +
                                  ": duplicate key '" + key + "'");
  }
  return kv;
}

std::map<std::string, std::string> load_key_values(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot read config file: " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_key_values(buf.str());
}

const std::vector<std::pair<std::string, std::string>>& experiment_catalog() {
  static const std::vector<std::pair<std::string, std::string>> catalog = {
      {"gep-perturbation",
       "exclusion process started from a slowly varying profile; pairings against "
       "test functions in the drift frame, compared with the wave prediction"},
      {"chain-perturbation",
       "noisy anharmonic chain started from perturbed local Gibbs data; the two "
       "sound-mode projections compared with their wave predictions"},
      {"two-class",
       "exclusion with one second-class particle at the origin; displacement mean "
       "and variance against the characteristic speed"},
      {"oracle-validation",
       "small-lattice exclusion law versus the exact master equation, reported as "
       "total-variation distances"},
      {"pde-convergence",
       "finite-volume conservation-law solver versus exact characteristics; L1 "
       "error table and observed orders"},
      {"flow-audit",
       "discrete flows interpolating a point mass to a smoothed kernel; exact "
       "divergence check and cost-rate ratios"},
      {"concentration-audit",
       "bounded-increment and quadratic-pinch concentration checks with closed-form "
       "Gaussian references"},
  };
  return catalog;
}

std::uint64_t seed_from_id(const std::string& id) {
  std::uint64_t h = 14695981039346656037ULL;
  for (unsigned char c : id) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  return h;
}

ExperimentConfig normalize(const std::map<std::string, std::string>& kv,
                           ConfigIssues& issues) {
  ExperimentConfig cfg;
  Reader rd{kv, issues, {}};

  cfg.experiment = rd.require_str("experiment");
  bool known = false;
  for (const auto& [id, desc] : experiment_catalog()) known = known || id == cfg.experiment;
  if (!cfg.experiment.empty() && !known) {
    std::string ids;
    for (const auto& [id, desc] : experiment_catalog()) ids += (ids.empty() ? "" : ", ") + id;
    issues.errors.push_back("experiment '" + cfg.experiment + "' is not one of: " + ids);
  }
  if (!known) return cfg;

  cfg.output = rd.str("output", "out/" + cfg.experiment);
  if (rd.has("seed")) {
    cfg.seed = static_cast<std::uint64_t>(rd.integer("seed", 0));
  } else {
    rd.used.insert("seed");
    cfg.seed = seed_from_id(cfg.experiment);
    cfg.seed_defaulted = true;
  }

  const std::string& ex = cfg.experiment;

  if (ex == "gep-perturbation" || ex == "chain-perturbation" || ex == "two-class") {
    bool perturb = ex != "two-class";
    cfg.alpha = rd.num("alpha", 0.0, perturb);
    cfg.kappa = rd.num("kappa", 0.0, perturb);
    cfg.n_list = rd.int_list("n", {}, true);
    cfg.replicas = static_cast<int>(rd.integer("replicas", 1, true));
    cfg.times = rd.num_list("t", {}, true);
    check_times(cfg.times, issues);
    if (cfg.replicas < 1) issues.errors.push_back("replicas must be at least 1");
    if (perturb && !(cfg.alpha > 0.0))
      issues.errors.push_back("alpha must be positive: the perturbation scale is N^-alpha");
    if (cfg.kappa < 0.0) issues.errors.push_back("kappa must be nonnegative");
    if (cfg.kappa > cfg.alpha)
      issues.errors.push_back(
          "kappa = " + shortest(cfg.kappa) + " exceeds alpha = " + shortest(cfg.alpha) +
          ": the observation frame requires kappa <= alpha, otherwise the wave "
          "amplitude outruns the perturbation scale");
  }

  if (ex == "gep-perturbation") {
    cfg.dimension = static_cast<int>(rd.integer("dimension", 1));
    cfg.k_max = static_cast<int>(rd.integer("k_max", 1));
    std::vector<double> def_rates(static_cast<std::size_t>(2 * std::max(cfg.dimension, 1)), 0.0);
    for (int i = 0; i < cfg.dimension; ++i) def_rates[static_cast<std::size_t>(i)] = 1.0;
    cfg.rates = rd.num_list("rates", def_rates);
    cfg.rho_star = rd.num("rho_star", 0.5);
    cfg.profile = rd.str("profile", "sin");
    cfg.amplitude = rd.num("amplitude", 0.25);
    cfg.center = rd.num("center", 0.5);
    cfg.width = rd.num("width", 0.5);
    cfg.phis = rd.str_list("phi", {"one", "cos", "sin"});
    cfg.bins = static_cast<int>(rd.integer("bins", 64));

    if (cfg.dimension < 1 || cfg.dimension > 3)
      issues.errors.push_back("dimension must be 1, 2, or 3");
    if (cfg.k_max < 1) issues.errors.push_back("k_max must be at least 1");
    if (cfg.dimension >= 1 && cfg.dimension <= 3) {
      check_lattice_sizes(cfg.n_list, cfg.dimension, issues);
      check_rates(cfg.rates, cfg.dimension, issues);
    }
    if (!(cfg.rho_star > 0.0) || !(cfg.rho_star < cfg.k_max))
      issues.errors.push_back("rho_star must lie strictly between 0 and k_max");
    check_profile("profile", cfg.profile, cfg.amplitude, cfg.center, cfg.width, issues);
    check_phis(cfg.phis, issues);
    if (cfg.bins < 2) issues.errors.push_back("bins must be at least 2");
    if (!cfg.n_list.empty() && issues.errors.empty()) {
      int n_min = *std::min_element(cfg.n_list.begin(), cfg.n_list.end());
      if (cfg.bins > n_min)
        issues.errors.push_back("bins must not exceed the coarsest lattice side");
      Profile rho0 =
          Profile::named(cfg.profile, cfg.amplitude, cfg.center, cfg.width, cfg.profile == "bump");
      double reach = std::max(std::abs(rho0.min_value()), std::abs(rho0.max_value())) *
                     std::pow(static_cast<double>(n_min), -cfg.alpha);
      if (cfg.rho_star - reach <= 0.0 || cfg.rho_star + reach >= cfg.k_max)
        issues.errors.push_back(
            "the perturbed density leaves (0, k_max) at the coarsest lattice; shrink "
            "the amplitude or increase n");
      if (cfg.dimension == 1 &&
          !(cfg.kappa > 0.0 && cfg.kappa <= cfg.alpha && cfg.kappa < 1.0 - 2.0 * cfg.alpha))
        issues.warnings.push_back(
            "alpha = " + shortest(cfg.alpha) + ", kappa = " + shortest(cfg.kappa) +
            " fall outside the proven window 0 < kappa <= alpha, kappa < 1 - 2*alpha "
            "(dimension 1); treating the run as exploratory");
    }
  } else if (ex == "chain-perturbation") {
    cfg.potential = rd.str("potential", "fpu-quartic");
    cfg.beta = rd.num("beta", 1.0);
    cfg.r_star = rd.num("r_star", 0.0);
    cfg.p_star = rd.num("p_star", 0.0);
    cfg.minus_profile = rd.str("minus_profile", "sin");
    cfg.minus_amplitude = rd.num("minus_amplitude", 0.0, true);
    cfg.plus_profile = rd.str("plus_profile", "cos");
    cfg.plus_amplitude = rd.num("plus_amplitude", 0.0, true);
    cfg.center = rd.num("center", 0.5);
    cfg.width = rd.num("width", 0.5);
    cfg.phis = rd.str_list("phi", {"one", "cos", "sin"});
    cfg.bins = static_cast<int>(rd.integer("bins", 64));
    if (rd.has("gamma_exponent")) {
      cfg.gamma_exponent = rd.num("gamma_exponent", 0.0);
      cfg.gamma_defaulted = false;
    } else {
      rd.used.insert("gamma_exponent");
      cfg.gamma_exponent = 2.0 * (cfg.kappa + cfg.alpha);
      cfg.gamma_defaulted = true;
    }

    try {
      Potential::named(cfg.potential);
    } catch (const std::exception& e) {
      issues.errors.push_back(e.what());
    }
    if (!(cfg.beta > 0.0)) issues.errors.push_back("beta must be positive");
    check_lattice_sizes(cfg.n_list, 1, issues);
    check_profile("minus_profile", cfg.minus_profile, cfg.minus_amplitude, cfg.center,
                  cfg.width, issues);
    check_profile("plus_profile", cfg.plus_profile, cfg.plus_amplitude, cfg.center,
                  cfg.width, issues);
    check_phis(cfg.phis, issues);
    if (cfg.bins < 2) issues.errors.push_back("bins must be at least 2");
    if (!cfg.n_list.empty() && issues.errors.empty() &&
        cfg.bins > *std::min_element(cfg.n_list.begin(), cfg.n_list.end()))
      issues.errors.push_back("bins must not exceed the coarsest lattice side");
    if (issues.errors.empty()) {
      bool equal_case = cfg.kappa == cfg.alpha && cfg.alpha < 0.2;
      bool below_case = cfg.alpha < 0.5 && cfg.kappa > 0.0 &&
                        cfg.kappa < std::min(cfg.alpha, (1.0 - 2.0 * cfg.alpha) / 3.0);
      if (!equal_case && !below_case)
        issues.warnings.push_back(
            "alpha = " + shortest(cfg.alpha) + ", kappa = " + shortest(cfg.kappa) +
            " fall outside the proven windows (kappa = alpha with alpha < 1/5, or "
            "0 < kappa < min(alpha, (1 - 2*alpha)/3) with alpha < 1/2); treating the "
            "run as exploratory");
      double lo = 5.0 * cfg.kappa + 4.0 * cfg.alpha - 1.0;
      double hi = 1.0 - cfg.kappa;
      if (!(cfg.gamma_exponent > lo && cfg.gamma_exponent < hi))
        issues.warnings.push_back(
            "gamma exponent g = " + shortest(cfg.gamma_exponent) +
            " lies outside the coupling window 5*kappa + 4*alpha - 1 < g < 1 - kappa; "
            "treating the run as exploratory");
    }
  } else if (ex == "two-class") {
    cfg.dimension = static_cast<int>(rd.integer("dimension", 1));
    cfg.k_max = 1;
    std::vector<double> def_rates(static_cast<std::size_t>(2 * std::max(cfg.dimension, 1)), 0.0);
    for (int i = 0; i < cfg.dimension; ++i) def_rates[static_cast<std::size_t>(i)] = 1.0;
    cfg.rates = rd.num_list("rates", def_rates);
    cfg.rho_star = rd.num("rho_star", 0.5);
    if (cfg.dimension < 1 || cfg.dimension > 3)
      issues.errors.push_back("dimension must be 1, 2, or 3");
    else {
      check_lattice_sizes(cfg.n_list, cfg.dimension, issues);
      check_rates(cfg.rates, cfg.dimension, issues);
    }
    if (!(cfg.rho_star > 0.0) || !(cfg.rho_star < 1.0))
      issues.errors.push_back("rho_star must lie strictly between 0 and 1 (k_max is 1 "
                              "for the two-class dynamics)");
  } else if (ex == "oracle-validation") {
    cfg.dimension = static_cast<int>(rd.integer("dimension", 1));
    cfg.k_max = static_cast<int>(rd.integer("k_max", 1));
    cfg.rates = rd.num_list("rates", {}, true);
    cfg.initial = rd.int_list("initial", {}, true);
    cfg.n_list = rd.int_list("n", {}, true);
    cfg.times = rd.num_list("t", {}, true);
    cfg.replicas = static_cast<int>(rd.integer("replicas", 1, true));
    cfg.speed = rd.num("speed", 1.0);
    cfg.tv_threshold = rd.num("tv_threshold", 0.01);

    check_times(cfg.times, issues);
    if (cfg.replicas < 1) issues.errors.push_back("replicas must be at least 1");
    if (cfg.dimension < 1 || cfg.dimension > 3)
      issues.errors.push_back("dimension must be 1, 2, or 3");
    if (cfg.k_max < 1) issues.errors.push_back("k_max must be at least 1");
    if (cfg.n_list.size() != 1)
      issues.errors.push_back("the master-equation comparison needs a single n");
    if (!(cfg.speed > 0.0)) issues.errors.push_back("speed must be positive");
    if (!(cfg.tv_threshold > 0.0))
      issues.errors.push_back("tv_threshold must be positive");
    if (cfg.dimension >= 1 && cfg.dimension <= 3 && !cfg.rates.empty())
      check_rates(cfg.rates, cfg.dimension, issues);
    if (cfg.n_list.size() == 1 && cfg.k_max >= 1 && cfg.dimension >= 1 &&
        cfg.dimension <= 3) {
      int n = cfg.n_list[0];
      if (n < 2) issues.errors.push_back("lattice side must be at least 2");
      double sites = std::pow(static_cast<double>(n), cfg.dimension);
      double states = std::pow(cfg.k_max + 1.0, sites);
      if (!(states <= double(1 << 24)))
        issues.errors.push_back("state space (k_max+1)^sites exceeds 2^24; the exact "
                                "law is out of reach at this size");
      if (static_cast<double>(cfg.initial.size()) != sites)
        issues.errors.push_back("initial must list one occupation per site");
      for (int v : cfg.initial)
        if (v < 0 || v > cfg.k_max) {
          issues.errors.push_back("initial occupations must lie in [0, k_max]");
          break;
        }
    }
  } else if (ex == "pde-convergence") {
    cfg.profile = rd.str("profile", "sin");
    cfg.amplitude = rd.num("amplitude", 0.25);
    cfg.center = rd.num("center", 0.5);
    cfg.width = rd.num("width", 0.5);
    cfg.wave_coefficient = rd.num("wave_coefficient", -1.0);
    cfg.times = rd.num_list("t", {}, true);
    cfg.cells = rd.int_list("cells", {512, 1024, 2048, 4096});
    cfg.l1_threshold = rd.num("l1_threshold", 1e-3);
    cfg.order_threshold = rd.num("order_threshold", 0.9);

    check_profile("profile", cfg.profile, cfg.amplitude, cfg.center, cfg.width, issues);
    if (cfg.times.size() != 1 || !(cfg.times[0] > 0.0))
      issues.errors.push_back("the convergence table needs a single positive t");
    for (std::size_t i = 0; i < cfg.cells.size(); ++i) {
      if (cfg.cells[i] < 8) {
        issues.errors.push_back("cells must be at least 8");
        break;
      }
      if (i > 0 && cfg.cells[i] <= cfg.cells[i - 1]) {
        issues.errors.push_back("cells must be strictly increasing");
        break;
      }
    }
    if (!(cfg.l1_threshold > 0.0)) issues.errors.push_back("l1_threshold must be positive");
    if (!(cfg.order_threshold > 0.0))
      issues.errors.push_back("order_threshold must be positive");
    if (issues.errors.empty()) {
      Profile rho0 =
          Profile::named(cfg.profile, cfg.amplitude, cfg.center, cfg.width, cfg.profile == "bump");
      ShockTime shock = shock_time(rho0, cfg.wave_coefficient);
      if (shock.finite && cfg.times[0] >= shock.t)
        issues.errors.push_back(
            "t = " + shortest(cfg.times[0]) + " is at or past the first caustic time " +
            shortest(shock.t) + "; the characteristic reference is undefined there");
    }
  } else if (ex == "flow-audit") {
    cfg.dims = rd.int_list("dimension", {1, 2, 3});
    cfg.ells = rd.int_list("ell", {2, 4, 8, 16, 32, 64});
    for (int d : cfg.dims)
      if (d < 1 || d > 3) {
        issues.errors.push_back("dimension entries must be 1, 2, or 3");
        break;
      }
    for (int l : cfg.ells)
      if (l < 1) {
        issues.errors.push_back("ell entries must be at least 1");
        break;
      }
    if (issues.errors.empty())
      for (int d : cfg.dims)
        for (int l : cfg.ells) {
          double box = std::pow(2.0 * l - 1.0, d) * (d + 1);
          if (!(box <= double(1 << 26))) {
            issues.errors.push_back("flow support (2*ell-1)^d exceeds the in-memory "
                                    "budget at ell = " + std::to_string(l) +
                                    ", d = " + std::to_string(d));
            break;
          }
        }
  } else if (ex == "concentration-audit") {
    cfg.draws = static_cast<int>(rd.integer("draws", 100000));
    if (cfg.draws < 1000)
      issues.errors.push_back("draws must be at least 1000 for the sampler mode");
  }

  for (const auto& [k, v] : kv)
    if (!rd.used.count(k))
      issues.errors.push_back("unknown key for " + cfg.experiment + ": " + k);

  return cfg;
}

std::string render_effective(const ExperimentConfig& cfg) {
  std::ostringstream out;
  auto put = [&](const std::string& k, const std::string& v) { out << k << " = " << v << "\n"; };
  auto put_num = [&](const std::string& k, double v) { put(k, shortest(v)); };
  auto put_int = [&](const std::string& k, long long v) { put(k, std::to_string(v)); };
  auto put_ints = [&](const std::string& k, const std::vector<int>& v) {
    std::string s;
    for (int x : v) s += (s.empty() ? "" : " ") + std::to_string(x);
    put(k, s);
  };
  auto put_nums = [&](const std::string& k, const std::vector<double>& v) {
    std::string s;
    for (double x : v) s += (s.empty() ? "" : " ") + shortest(x);
    put(k, s);
  };
  auto put_strs = [&](const std::string& k, const std::vector<std::string>& v) {
    std::string s;
    for (const auto& x : v) s += (s.empty() ? "" : " ") + x;
    put(k, s);
  };

  put("experiment", cfg.experiment);
  put("output", cfg.output);
  put_int("seed", static_cast<long long>(cfg.seed));
  const std::string& ex = cfg.experiment;
  if (ex == "gep-perturbation" || ex == "chain-perturbation" || ex == "two-class") {
    put_num("alpha", cfg.alpha);
    put_num("kappa", cfg.kappa);
    put_ints("n", cfg.n_list);
    put_int("replicas", cfg.replicas);
    put_nums("t", cfg.times);
  }
  if (ex == "gep-perturbation" || ex == "two-class") {
    put_int("dimension", cfg.dimension);
    put_int("k_max", cfg.k_max);
    put_nums("rates", cfg.rates);
    put_num("rho_star", cfg.rho_star);
  }
  if (ex == "gep-perturbation") {
    put("profile", cfg.profile);
    put_num("amplitude", cfg.amplitude);
    put_num("center", cfg.center);
    put_num("width", cfg.width);
    put_strs("phi", cfg.phis);
    put_int("bins", cfg.bins);
  }
  if (ex == "chain-perturbation") {
    put("potential", cfg.potential);
    put_num("beta", cfg.beta);
    put_num("r_star", cfg.r_star);
    put_num("p_star", cfg.p_star);
    put("minus_profile", cfg.minus_profile);
    put_num("minus_amplitude", cfg.minus_amplitude);
    put("plus_profile", cfg.plus_profile);
    put_num("plus_amplitude", cfg.plus_amplitude);
    put_num("center", cfg.center);
    put_num("width", cfg.width);
    put_strs("phi", cfg.phis);
    put_int("bins", cfg.bins);
    put_num("gamma_exponent", cfg.gamma_exponent);
  }
  if (ex == "oracle-validation") {
    put_ints("n", cfg.n_list);
    put_int("dimension", cfg.dimension);
    put_int("k_max", cfg.k_max);
    put_nums("rates", cfg.rates);
    put_ints("initial", cfg.initial);
    put_nums("t", cfg.times);
    put_int("replicas", cfg.replicas);
    put_num("speed", cfg.speed);
    put_num("tv_threshold", cfg.tv_threshold);
  }
  if (ex == "pde-convergence") {
    put("profile", cfg.profile);
    put_num("amplitude", cfg.amplitude);
    put_num("center", cfg.center);
    put_num("width", cfg.width);
    put_num("wave_coefficient", cfg.wave_coefficient);
    put_nums("t", cfg.times);
    put_ints("cells", cfg.cells);
    put_num("l1_threshold", cfg.l1_threshold);
    put_num("order_threshold", cfg.order_threshold);
  }
  if (ex == "flow-audit") {
    put_ints("dimension", cfg.dims);
    put_ints("ell", cfg.ells);
  }
  if (ex == "concentration-audit") put_int("draws", cfg.draws);
  return out.str();
}

}  // namespace eqpert
