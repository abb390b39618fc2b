#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

namespace eqpert {

// Flat key = value text: '#' starts a comment, blank lines are skipped, arrays
// are whitespace-separated tokens after the '='. Keys must be unique.
std::map<std::string, std::string> parse_key_values(const std::string& text);
std::map<std::string, std::string> load_key_values(const std::string& path);

struct ConfigIssues {
  std::vector<std::string> errors;
  std::vector<std::string> warnings;
};

// Normalized experiment description; the superset of per-experiment fields,
// with only the keys in the experiment's schema accepted from the file.
struct ExperimentConfig {
  std::string experiment;
  std::string output;
  std::uint64_t seed = 0;
  bool seed_defaulted = false;

  double alpha = 0.0;
  double kappa = 0.0;
  std::vector<int> n_list;
  int replicas = 1;
  std::vector<double> times;
  int bins = 64;

  // exclusion family
  int dimension = 1;
  int k_max = 1;
  std::vector<double> rates;
  double rho_star = 0.5;
  std::string profile = "sin";
  double amplitude = 0.25;
  double center = 0.5;
  double width = 0.5;
  std::vector<std::string> phis;
  std::vector<int> initial;
  double speed = 1.0;
  double tv_threshold = 0.01;

  // chain family
  std::string potential = "fpu-quartic";
  double beta = 1.0;
  double p_star = 0.0;
  double r_star = 0.0;
  std::string minus_profile = "sin";
  double minus_amplitude = 0.0;
  std::string plus_profile = "cos";
  double plus_amplitude = 0.0;
  double gamma_exponent = 0.0;
  bool gamma_defaulted = true;  // default is the coupling-window midpoint

  // conservation-law solver comparison
  std::vector<int> cells;
  double wave_coefficient = -1.0;
  double l1_threshold = 1e-3;
  double order_threshold = 0.9;

  // flow audit
  std::vector<int> dims;
  std::vector<int> ells;

  // concentration audit
  int draws = 100000;
};

// Known experiment ids with one-line descriptions, in listing order.
const std::vector<std::pair<std::string, std::string>>& experiment_catalog();

// deterministic default seed when the config omits one (FNV-1a of the id)
std::uint64_t seed_from_id(const std::string& id);

// Fills defaults and checks every cross-field constraint. Violations of hard
// invariants go to issues.errors (the config is unusable); parameters outside
// the proven hypothesis windows go to issues.warnings (exploratory runs are
// deliberate). Unknown keys are errors.
ExperimentConfig normalize(const std::map<std::string, std::string>& kv,
                           ConfigIssues& issues);

// canonical echo of the effective config, stable field order, LF endings
std::string render_effective(const ExperimentConfig& cfg);

// shortest decimal that parses back to the same double; artifact-wide format
std::string format_double(double v);

}  // namespace eqpert
