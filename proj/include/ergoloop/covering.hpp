#pragma once

#include <cstdint>
#include <vector>

#include "ergoloop/averaging.hpp"

namespace ergoloop {

/// Square lattice of unit cubes (cells) i in [0, n1), j in [0, n2); cell
/// (i, j) has index i * n2 + j. Periodic lattices wrap in both directions.
struct Lattice {
  int n1 = 0;
  int n2 = 0;
  bool periodic = false;

  int size() const { return n1 * n2; }
  int index(int i, int j) const { return i * n2 + j; }
  int row(int c) const { return c / n2; }
  int col(int c) const { return c % n2; }
  /// Sup-norm offset between cell centers, in pitches (shortest on a torus).
  int chebyshev(int a, int b) const;
  /// Cells whose centers lie within `radius` pitches of cell c.
  std::vector<int> ball(int c, int radius) const;
  /// s x s refinement; cell c becomes the s^2 subcells of its square.
  Lattice refined(int s) const { return {n1 * s, n2 * s, periodic}; }
  std::vector<int> refine_cells(const std::vector<int>& cells, int s) const;
};

inline constexpr int kNiceModulus = 17;

/// Closed dilates cQ1, cQ2 of two unit cubes with centers d pitches apart
/// (sup norm) intersect iff d <= c.
inline bool dilates_intersect(int d, double c) { return d <= c; }

/// Q1 inside Interior(4 Q2) iff d + 1/2 < 2.
inline bool inside_interior_4(int d) { return 2 * d + 1 < 4; }

/// Residue classes (i mod m, j mod m) of the region's cells: m^2 classes,
/// possibly empty. For m = 17 each class is a nice subpartition.
std::vector<std::vector<int>> decompose_nice_subpartitions(const Lattice& lattice, const std::vector<int>& region,
                                                           int modulus = kNiceModulus);

/// Pairwise check that cubes are distinct and their 16-dilates are disjoint.
bool is_nice_subpartition(const Lattice& lattice, const std::vector<int>& cubes);

// --------------------------------------------------------------------------

/// All sub-polyhedra of X' with exactly k - 1 cubes. Enumerated when their
/// number is at most the cap, otherwise implicit with the exact ratio.
struct Family42B {
  std::vector<int> cubes;  ///< X'
  int subset_size = 0;     ///< k - 1
  long double member_count = 0;
  bool enumerated = false;
  std::vector<std::vector<int>> members;
  double ratio = 0.0;           ///< nu(x)/N = (k-1)/M for x in X'
  double bound = 0.0;           ///< a / (2 mu(X))
  double spot_check_error = 0;  ///< largest sampled frequency error (implicit families)

  /// nu(x) for every cube of X', enumerated families only.
  std::vector<std::int64_t> counting(int cells) const;
};

/// X' given as cubes of volume a / k. Needs k >= 4, a in (0, mu(X)] and
/// mu(X') < 1.5 mu(X).
Family42B family_4_2_B(const std::vector<int>& x_prime, double mu_x, double a, int k,
                       std::int64_t enumeration_cap = 100000, std::uint64_t seed = 1);

// --------------------------------------------------------------------------

struct CubeMove {
  int from = 0;
  int to = 0;
  bool near = false;      ///< 4-dilates of the pair meet; routed inside 16Q n 16Q'
  std::vector<int> path;  ///< from ... to; the move cycles cells along it
};

struct TransportPlan {
  int residue_class = 0;
  std::vector<CubeMove> moves;
  CellPermutation map;         ///< h_1 o ... o h_m
  std::vector<int> support;    ///< cells the map may move
  std::vector<int> blocked;    ///< union of 4-dilates of all cubes of the plan
};

/// Maps g_1..g_C (C = modulus^2 at most) with B inside the union of g_i(A).
/// U restricts where corridors may run (empty: whole lattice).
std::vector<TransportPlan> transport_4_2_C(const Lattice& lattice, const std::vector<int>& A,
                                           const std::vector<int>& B, const std::vector<int>& U = {},
                                           int modulus = kNiceModulus);

/// Every cell of B lies in some g_i(A), recomputed from the plan maps.
bool plans_cover(const std::vector<TransportPlan>& plans, const std::vector<int>& A, const std::vector<int>& B);

// --------------------------------------------------------------------------

/// theta = {g_1(A), ..., g_N(A)} with weights, plus fixture-only image sets.
struct CoveringFamily {
  int cells = 0;
  std::vector<int> source;  ///< A
  PermutationFamily maps{0};
  std::vector<std::vector<int>> images;  ///< extra members given only as sets
  std::vector<std::int64_t> image_weights;

  std::int64_t size() const;
  /// nu_theta(y) for every cell.
  std::vector<std::int64_t> counting() const;
};

struct LocalCovering {
  CoveringFamily family;
  double C1 = 0.0;
  double C2 = 2.0;
  std::int64_t N = 0;        ///< |sigma|
  std::int64_t N_prime = 0;  ///< min nu_sigma on X
  std::int64_t M = 0;        ///< N + C N'
  std::vector<int> defect;   ///< B = union of f_i(A) sym-diff A_i
  std::vector<TransportPlan> plans;
};

/// Local covering of the region X by images of A (cells of X). With
/// approximation_defect = d > 0 the first f_i misplaces d cells, and the
/// resulting set B is repaired by transport.
LocalCovering covering_4_2_A(const Lattice& lattice, const std::vector<int>& X, const std::vector<int>& A,
                             int approximation_defect = 0, int modulus = kNiceModulus);

struct GlobalCovering {
  CoveringFamily family;
  double c1 = 0.0;
  double c2 = 0.0;
  int r = 1;
  int refinement = 1;          ///< lattice refined s x s when |A| < r
  Lattice lattice;             ///< lattice the family lives on
  CellPermutation spreading;   ///< f
  std::vector<std::vector<int>> parts;  ///< f(A) n X_i
};

/// r equal vertical strips of the lattice.
std::vector<std::vector<int>> strip_charts(const Lattice& lattice, int r);

/// Global covering for A over charts of equal size, with constants
/// c1 = r C1 and c2 = 2 r C2.
GlobalCovering covering_global(const Lattice& lattice, const std::vector<std::vector<int>>& charts,
                               const std::vector<int>& A, int modulus = kNiceModulus);

struct CoveringVerdict {
  bool pass = false;
  int worst_cell = -1;
  std::int64_t worst_count = 0;
  std::int64_t N = 0;
  double worst_ratio = 0.0;
  double bound = 0.0;  ///< (c1 + c2 mu(Y)/mu(A))^{-1}
  std::vector<std::int64_t> counts;
};

/// Exact check of nu(y) (c1 |A| + c2 |region|) >= N |A| on every cell of the
/// region (empty region: every cell).
CoveringVerdict verify_covering(const CoveringFamily& theta, std::int64_t A_size, double c1, double c2,
                                const std::vector<int>& region = {});

/// Averaging oracle backed by covering_global on a torus lattice with r strips.
CoveringOracle torus_covering_oracle(int n1, int n2, int r = 1);

}  // namespace ergoloop
