#pragma once

#include <optional>
#include <vector>

#include "ergoloop/hofer.hpp"

namespace ergoloop {

struct ShorteningTrace {
  std::vector<int> Ns;
  std::vector<double> lengths;  ///< (1/N) length(F_N)
  std::optional<std::vector<double>> oracle_bounds;
};

/// F_N = sum_{k<N} H o T^k, evaluated by running the orbit.
NormalizedHamiltonian birkhoff_hamiltonian(const NormalizedHamiltonian& H, const SkewProduct& T, int N);

/// Exact (1/N) length(F_N) for a trig monomial H and a translation loop:
/// amplitude |sin(pi N theta)| / (N |sin(pi theta)|) with theta the phase
/// advance per step. Empty when no closed form applies.
std::optional<double> geometric_sum_oracle(const NormalizedHamiltonian& H, const SkewProduct& T, int N);

ShorteningTrace normalized_length_sequence(const NormalizedHamiltonian& H, const SkewProduct& T,
                                           const std::vector<int>& Ns, const TorusGrid& grid);

/// sum_{i<N} H o T^(i). Needs N - 1 steps of the sequence.
NormalizedHamiltonian sequential_birkhoff_hamiltonian(const NormalizedHamiltonian& H, const SequentialSystem& S, int N);

struct GeodesicBreak {
  /// g_1 .. g_N; g_1 is the identity and g_{i+1} conjugates the i-th step.
  std::vector<CellMap> conjugators;
  std::vector<Eigen::Vector2d> shifts;  ///< translation vector of each g_i
  SequentialSystem system;
  double a0 = 0.0;
  double b0 = 0.0;
  std::vector<double> a;  ///< max_y |F_N(t, y)| on the time nodes
  std::vector<double> b;  ///< N max_y |H(t, y)| on the time nodes
  double a_integral = 0.0;
  double b_integral = 0.0;
};

/// Greedy choice of translations g_i (alpha_i = 0) so that the copies of
/// H(0, .) cancel: a(0) < b(0). The base loop is the inverse of the flow of H.
GeodesicBreak break_minimal_geodesic(const NormalizedHamiltonian& H, int N, std::int64_t search_budget,
                                     const TorusGrid& grid, int step_count = 256);

}  // namespace ergoloop
