#pragma once

#include <json.hpp>

#include <random>

#include "ergoloop/config.hpp"
#include "ergoloop/covering.hpp"

namespace ergoloop {

struct RunReport {
  nlohmann::ordered_json json;
  int exit_code = 0;  ///< 0 every verdict passed, 2 otherwise
};

/// Executes the configured pipeline, writes the report and CSV files, and
/// returns the report. Usage and runtime errors propagate as exceptions.
RunReport run(const ExperimentConfig& config);

/// Zero-mean field with sup norm 1 on an n1 x n2 fiber grid: a sum of six
/// random trigonometric monomials sampled at the nodes.
Eigen::ArrayXd random_zero_mean_field(int n1, int n2, std::mt19937_64& rng);

/// Family fixture in JSON: cells, A, c1, c2, members (image sets), weights.
nlohmann::ordered_json family_to_json(const CoveringFamily& family, double c1, double c2);
CoveringFamily family_from_json(const nlohmann::json& j, std::vector<int>& A, double& c1, double& c2);

/// nu(y) counted directly from the image sets of a JSON fixture.
std::vector<std::int64_t> recount_from_json(const nlohmann::json& j);

}  // namespace ergoloop
