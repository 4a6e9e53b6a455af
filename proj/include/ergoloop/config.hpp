#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "ergoloop/phase.hpp"

namespace ergoloop {

enum class Command { kDemo, kShorten, kAverage, kCover, kConstruct, kDiagnose };

std::string command_name(Command c);

struct ExperimentConfig {
  Command command = Command::kDemo;
  std::string system = "furstenberg";  ///< demo: furstenberg | identity

  int res_t = 64;
  int res_y1 = 64;
  int res_y2 = 64;

  std::string alpha_name = "golden";
  std::string beta_name = "sqrt2m1";
  double alpha = 0.0;
  double beta = 0.0;

  int N = 1000;
  std::vector<int> Ns{10, 100, 1000};
  double eps = 0.1;
  double target = 0.05;
  int max_iter = 100000;
  std::int64_t budget = 1000000;
  int fields = 1;
  int a_size = 8;
  int charts = 1;
  Rational r{1, 3};
  std::uint64_t seed = 1;

  bool verify_only = false;
  std::string family_path;
  std::string emit_family_path;
  std::string report_path;
  std::string csv_path;
};

/// Named constant (golden, sqrt2m1), rational p/q or decimal.
double parse_constant(const std::string& text);

struct ParseOutcome {
  std::optional<ExperimentConfig> config;
  int exit_code = 0;    ///< meaningful when config is empty (help: 0, error: 1)
  std::string message;  ///< help or usage text
};

/// Flags override `--config FILE` values (flat key = value, keys are the long
/// flag names); unknown keys and flags are usage errors.
ParseOutcome parse_config(int argc, const char* const* argv);
ParseOutcome parse_config(const std::vector<std::string>& args);

}  // namespace ergoloop
