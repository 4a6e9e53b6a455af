#pragma once

#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "ergoloop/phase.hpp"

namespace ergoloop {

struct NormalizedHamiltonian;

inline constexpr std::int64_t kDefaultOrbitCap = 1'000'000;

inline const double kGolden = (std::sqrt(5.0) - 1.0) / 2.0;
inline const double kSqrt2m1 = std::sqrt(2.0) - 1.0;

struct PhasePoint {
  double t = 0.0;
  Eigen::Vector2d y = Eigen::Vector2d::Zero();
};

using PointAction = std::function<Eigen::Vector2d(double t, const Eigen::Vector2d& y)>;

/// h(t)y = (y1 + drift*t, y2 + shift)
struct TranslationDrift {
  double drift = 0.0;
  double shift = 0.0;
};

/// A loop t -> h(t) of maps of the torus, given by its point action.
struct HamiltonianLoop {
  PointAction forward;
  PointAction inverse;
  std::string homotopy_tag = "contractible";
  std::optional<Rational> period_divisor;
  std::shared_ptr<const NormalizedHamiltonian> generator;
  std::optional<TranslationDrift> translation;

  Eigen::Vector2d apply(double t, const Eigen::Vector2d& y) const {
    return wrap(forward(CircleCoord::wrap(t), y));
  }
  Eigen::Vector2d apply_inverse(double t, const Eigen::Vector2d& y) const {
    return wrap(inverse(CircleCoord::wrap(t), y));
  }
  CellMap map_at(double t) const;

  static HamiltonianLoop identity();
};

/// Loop of torus translations (y1, y2) -> (y1 + t, y2 + beta).
HamiltonianLoop furstenberg_loop(double beta);

/// h(t) as a cell permutation when it is a translation by whole cells.
std::optional<CellPermutation> exact_cell_map(const HamiltonianLoop& loop, double t, const TorusGrid& grid);

/// T(t, y) = (t + alpha, h(t) y)
struct SkewProduct {
  double alpha = 0.0;
  HamiltonianLoop loop = HamiltonianLoop::identity();

  PhasePoint apply(const PhasePoint& p) const {
    return {CircleCoord::wrap(p.t + alpha), loop.apply(p.t, p.y)};
  }
  PhasePoint apply_inverse(const PhasePoint& p) const {
    const double s = CircleCoord::wrap(p.t - alpha);
    return {s, loop.apply_inverse(s, p.y)};
  }
};

inline PhasePoint skew_apply(const SkewProduct& T, const PhasePoint& p) { return T.apply(p); }

SkewProduct furstenberg_system(double alpha, double beta);
SkewProduct identity_system(double alpha = 0.0);

std::vector<PhasePoint> orbit(const SkewProduct& T, const PhasePoint& p, std::int64_t N,
                              std::int64_t cap = kDefaultOrbitCap);

/// (t, y) -> (1/N) sum_{i<N} F(T^i (t, y))
FieldFunction birkhoff_average(const SkewProduct& T, const FieldFunction& F, int N);

/// Max over grid points of the time average of a sampled zero-mean field;
/// orbit points off the grid are interpolated.
double birkhoff_uniform_deviation(const SkewProduct& T, const ScalarField& F, int N);

/// Same for a closed-form F, with the y-sup refined on every time node.
double birkhoff_uniform_deviation(const SkewProduct& T, const FieldFunction& F, int N, const TorusGrid& grid);

// --------------------------------------------------------------------------
// Cell-level dynamics on the product grid. Cell (k, c) has index
// k * fiber_size + c.

using CellDynamics = std::function<void(std::int64_t cell, std::vector<std::int64_t>& out)>;

/// Images of cells as the covered-cell hull of their mapped corners (pulled a
/// hair inside the cell so that exact lattice maps stay exact).
CellDynamics hull_dynamics(const SkewProduct& T, const TorusGrid& grid);

struct CoverageVerdict {
  bool covered = false;
  int step = -1;  ///< first n with union_{i<=n} T^i U = X, when covered
  std::int64_t reached = 0;
};

CoverageVerdict minimality_diagnostic(const CellDynamics& T, std::int64_t cell_count,
                                      const std::vector<std::int64_t>& U, int max_iter);
CoverageVerdict minimality_diagnostic(const SkewProduct& T, const TorusGrid& grid,
                                      const std::vector<std::int64_t>& U, int max_iter);

struct ErgodicityVerdict {
  bool member = false;
  int N = 0;
  double deviation = 0.0;
};

/// Smallest N <= N_max with D_N < eps. Candidates are found with running grid
/// sums and confirmed with the refined deviation.
ErgodicityVerdict unique_ergodicity_diagnostic(const SkewProduct& T, const FieldFunction& F, double eps, int N_max,
                                               const TorusGrid& grid);

// --------------------------------------------------------------------------

/// T_i(t, y) = (t + alpha_i, g_i h(t) y), i = 1, 2, ...
struct SequentialSystem {
  std::vector<double> alphas;
  std::vector<CellMap> conjugators;
  HamiltonianLoop base = HamiltonianLoop::identity();

  int length() const { return static_cast<int>(alphas.size()); }
  PhasePoint step(int i, const PhasePoint& p) const;
};

/// T^(n) p = T_n o ... o T_1 p; T^(0) is the identity.
PhasePoint sequential_apply(const SequentialSystem& S, const PhasePoint& p, int n);

}  // namespace ergoloop
