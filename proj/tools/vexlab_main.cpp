// vexlab command line: run or validate an experiment config.
//
// Exit codes: 0 ok, 1 config or input error, 2 solver non-convergence.

#include <cstdlib>
#include <iostream>
#include <string>

#include "CLI11.hpp"
#include "vexlab/experiment.hpp"

namespace {

constexpr const char* kThreadsEnv = "VEXLAB_THREADS";

int report_config_error(const vexlab::Error& e) {
  if (const auto* ce = dynamic_cast<const vexlab::ConfigError*>(&e)) {
    std::cerr << vexlab::to_string(ce->kind()) << ":\n";
    for (const auto& m : ce->messages()) std::cerr << "  " << m << "\n";
  } else {
    std::cerr << e.what() << "\n";
  }
  return 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Variable-exponent Sobolev constant experiments"};
  app.set_version_flag("--version", std::string(vexlab::kToolVersion));
  app.require_subcommand(1);

  std::string run_path;
  std::string output_dir;
  std::uint64_t seed = 0;
  int threads = 0;
  auto* run_cmd = app.add_subcommand("run", "Run an experiment and write its artifacts");
  run_cmd->add_option("config", run_path, "Experiment config file")->required();
  auto* out_opt = run_cmd->add_option("--output-dir", output_dir, "Override experiment.output_dir");
  auto* seed_opt = run_cmd->add_option("--seed", seed, "Override experiment.seed");
  auto* threads_opt =
      run_cmd->add_option("--threads", threads, "Worker threads (overrides VEXLAB_THREADS)")->check(CLI::PositiveNumber);

  std::string validate_path;
  auto* validate_cmd = app.add_subcommand("validate", "Parse and validate a config without running it");
  validate_cmd->add_option("config", validate_path, "Experiment config file")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  if (*validate_cmd) {
    try {
      const vexlab::ExperimentConfig cfg = vexlab::load_config(validate_path);
      std::cout << "ok: mode " << vexlab::to_string(cfg.mode) << ", config hash " << vexlab::config_hash(cfg) << "\n";
      return 0;
    } catch (const vexlab::Error& e) {
      return report_config_error(e);
    }
  }

  vexlab::ExperimentConfig cfg;
  try {
    cfg = vexlab::load_config(run_path);
  } catch (const vexlab::Error& e) {
    return report_config_error(e);
  }
  if (*out_opt) cfg.output_dir = output_dir;
  if (*seed_opt) {
    cfg.seed = seed;
    cfg.solver.seed = seed;
  }
  if (*threads_opt) {
    cfg.solver.threads = threads;
  } else if (const char* env = std::getenv(kThreadsEnv)) {
    char* end = nullptr;
    const long t = std::strtol(env, &end, 10);
    if (*env == '\0' || *end != '\0' || t < 1) {
      std::cerr << kThreadsEnv << " must be a positive integer\n";
      return 1;
    }
    cfg.solver.threads = static_cast<int>(t);
  }

  const vexlab::RunSummary summary = vexlab::run(cfg);
  std::cout << summary.to_text();
  if (summary.exit_code != 0) std::cerr << summary.error << "\n";
  return summary.exit_code;
}
