#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>

#include "CLI11.hpp"
#include "eqpert/config.hpp"
#include "eqpert/experiments.hpp"

namespace {

constexpr int kOk = 0;
constexpr int kAssertion = 1;
constexpr int kConfigError = 2;

// parse + normalize; prints warnings and errors; nonzero means unusable config
int validate_file(const std::string& path, eqpert::ExperimentConfig& cfg,
                  eqpert::ConfigIssues& issues) {
  try {
    auto kv = eqpert::load_key_values(path);
    cfg = eqpert::normalize(kv, issues);
  } catch (const std::exception& e) {
    issues.errors.push_back(e.what());
  }
  for (const auto& w : issues.warnings) std::cerr << "warning: " << w << '\n';
  if (!issues.errors.empty()) {
    for (const auto& e : issues.errors) std::cerr << "error: " << e << '\n';
    return kConfigError;
  }
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"equilibrium-perturbation experiment runner"};
  app.require_subcommand(1);

  std::string run_path, validate_path;
  auto* run_cmd =
      app.add_subcommand("run", "validate a config, run it, and write artifacts");
  run_cmd->add_option("config", run_path, "experiment config file")->required();
  auto* val_cmd =
      app.add_subcommand("validate", "check a config and echo the effective form");
  val_cmd->add_option("config", validate_path, "experiment config file")->required();
  auto* list_cmd = app.add_subcommand("list-experiments", "print the known experiment ids");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? kOk : kConfigError;
  }

  try {
    if (list_cmd->parsed()) {
      for (const auto& [id, desc] : eqpert::experiment_catalog())
        std::cout << id << "\n    " << desc << '\n';
      return kOk;
    }

    if (val_cmd->parsed()) {
      eqpert::ExperimentConfig cfg;
      eqpert::ConfigIssues issues;
      int rc = validate_file(validate_path, cfg, issues);
      if (rc != kOk) return rc;
      std::string echo = eqpert::render_effective(cfg);
      std::filesystem::create_directories(cfg.output);
      std::ofstream f(std::filesystem::path(cfg.output) / "effective.cfg",
                      std::ios::binary | std::ios::trunc);
      if (!f) {
        std::cerr << "error: cannot write to " << cfg.output << '\n';
        return kConfigError;
      }
      f << echo;
      std::cout << echo;
      return kOk;
    }

    eqpert::ExperimentConfig cfg;
    eqpert::ConfigIssues issues;
    int rc = validate_file(run_path, cfg, issues);
    if (rc != kOk) return rc;
    eqpert::RunReport rep = eqpert::run_experiment(cfg, issues.warnings);
    for (const auto& n : rep.notes) std::cout << "note: " << n << '\n';
    for (const auto& fl : rep.failures) std::cerr << "failure: " << fl << '\n';
    std::cout << (rep.ok() ? "ok: " : "failed: ") << rep.artifacts.size()
              << " artifacts in " << cfg.output << '\n';
    return rep.ok() ? kOk : kAssertion;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kAssertion;
  }
}
