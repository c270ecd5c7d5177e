#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "vexlab/concentration.hpp"
#include "vexlab/exponent.hpp"
#include "vexlab/extremal.hpp"

namespace vexlab {

inline constexpr const char* kToolVersion = "0.1.0";

enum class Mode { NormCheck, InequalityFuzz, Solve, Sweep, Localized, BubbleDemo, SufficientCondition };
const char* to_string(Mode mode);
std::optional<Mode> parse_mode(const std::string& text);

enum class ProfileChoice { Smooth, Tent, Extremal };

struct ElementaryCase {
  double p_lo = 0.0;
  double p_hi = 0.0;
  double theta = 0.0;
};

struct ExperimentConfig {
  // [domain]
  int dim = 1;
  Point lo{0.0, 0.0};
  Point hi{1.0, 1.0};
  std::array<int, 2> cells{64, 64};

  // [exponents]
  FieldSpec p{ConstantSpec{2.0}};
  FieldSpec q{ConstantSpec{2.0}};
  double critical_tol = 1e-6;

  // [experiment]
  Mode mode = Mode::Solve;
  double eps = 0.0;
  std::vector<double> eps_schedule;
  std::string output_dir = "vexlab-out";
  std::uint64_t seed = 0;

  // [solver]; solver.seed mirrors `seed`
  SolverOptions solver;

  // [function]
  std::optional<FieldSpec> u;

  // [fuzz]
  int hoelder_trials = 1000;
  long elementary_samples = 100000;
  std::vector<ElementaryCase> elementary_cases{{1.5, 1.5, 0.75}, {2.0, 2.0, 1.0}, {1.2, 4.0, 0.5}};

  // [localized]
  Point center{0.5, 0.5};
  std::vector<double> radii;
  int samples = 4;
  double margin = 0.02;
  double inclusion_slack = 5e-3;

  // [bubble]
  std::vector<double> bubble_eps;
  double target_mass = 1.0;
  ProfileChoice profile = ProfileChoice::Smooth;
  std::vector<Atom> atoms;

  // [dichotomy]
  double dichotomy_radius = 0.0;
  DichotomyThresholds thresholds;
  double atom_radius = 0.0;  // 0: half the dichotomy radius
  double atom_threshold = 0.25;

  Grid grid() const;
  /// Every key with its effective value, in a fixed order; parses back to
  /// an equal config.
  std::string to_text() const;
};

/// ParseError or ValidationError carrying every message found.
class ConfigError : public Error {
 public:
  ConfigError(ErrorKind kind, std::vector<std::string> messages);
  const std::vector<std::string>& messages() const { return messages_; }

 private:
  std::vector<std::string> messages_;
};

/// Parses `[section]` headers and `key = value` lines (`#` starts a
/// comment, lists are comma separated) and validates the result.
ExperimentConfig parse_config(const std::string& text);
ExperimentConfig load_config(const std::filesystem::path& path);

/// All violations of the mode-specific rules; empty when valid.
std::vector<std::string> validate(const ExperimentConfig& config);

/// FNV-1a of the effective config text, as 16 hex digits. Settings that
/// cannot change results (output_dir, threads) are left out.
std::string config_hash(const ExperimentConfig& config);

struct RunSummary {
  std::string tool_version = kToolVersion;
  std::string config_hash;
  Mode mode = Mode::Solve;
  std::string status = "ok";  // ok | nonconvergence | error
  int exit_code = 0;
  double wall_time = 0.0;
  std::vector<std::pair<std::string, std::string>> headline;
  std::vector<std::string> artifacts;  // relative to the output directory
  std::string error;

  std::string to_text() const;
  /// Value of a headline key, if present.
  std::optional<std::string> get(const std::string& key) const;
};

/// Executes the configured mode, writing CSV artifacts, the effective config
/// and summary.txt into config.output_dir. Errors are reported through the
/// summary's exit code (1 config / input errors, 2 non-convergence).
RunSummary run(const ExperimentConfig& config);

}  // namespace vexlab
