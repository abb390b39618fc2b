#pragma once

#include <string>
#include <vector>

#include "eqpert/config.hpp"

namespace eqpert {

// One comparison curve on the unit interval: bin centers, the replica-averaged
// empirical field, the wave prediction, and the standard error of the mean.
struct FieldSeries {
  std::vector<double> u;
  std::vector<double> empirical;
  std::vector<double> macroscopic;
  std::vector<double> stderr_mean;
};

// header u,empirical,macroscopic,stderr; LF endings; an empty series writes
// the header only
void write_field_csv(const FieldSeries& s, const std::string& path);

struct RunReport {
  std::vector<std::string> notes;      // summary lines (slopes, ratios, maxima)
  std::vector<std::string> failures;   // in-run assertion failures
  std::vector<std::string> artifacts;  // files written, relative to the output dir
  bool ok() const { return failures.empty(); }
};

// EQPERT_WORKERS when set to a positive integer, otherwise the hardware
// concurrency; replica fan-out is deterministic regardless of the pool size
int worker_count();

// Runs the experiment into cfg.output: effective.cfg, the experiment's
// artifacts, and manifest.json recording config, seed, warnings, notes, and
// failures. Throws only on unusable configs or I/O; statistical assertion
// misses are reported in failures.
RunReport run_experiment(const ExperimentConfig& cfg,
                         const std::vector<std::string>& warnings);

}  // namespace eqpert
