#pragma once

#include <functional>
#include <string>
#include <vector>

#include "ergoloop/averaging.hpp"
#include "ergoloop/covering.hpp"
#include "ergoloop/dynamics.hpp"

namespace ergoloop {

/// S = S_k o ... o S_1 with ||S(H_i)|| < eps for every target. Targets that
/// are already below eps after the earlier stages add no stage.
AveragingOperator multi_target_average(const std::vector<Eigen::ArrayXd>& Hs, double eps, const CoveringOracle& oracle,
                                       int max_iter = kDefaultMaxIter);
AveragingOperator multi_target_average(const std::vector<ScalarField>& Hs, double eps);

/// F(t, y) - mean_y F(t, .), fiber by fiber.
ScalarField fiberwise_center(const ScalarField& F);

/// Builds an operator with ||S(H)|| < eps for all targets (zero-mean fiber
/// arrays).
using Averager = std::function<AveragingOperator(const std::vector<Eigen::ArrayXd>& targets, double eps)>;

/// multi_target_average over the torus covering oracle.
Averager covering_averager(int n1, int n2);
/// One stage holding all n1 n2 cell translations (y2 the slow digit).
Averager translation_averager(int n1, int n2);

/// Piecewise constant loop s -> h(s) = g^(k)_{j_k} o ... o g^(1)_{j_1}. The
/// digits j_i are read from s in mixed radix, stage 1 slowest, each member
/// taking a share of its stage proportional to its weight. The average of
/// F o h(s)^{-1} over s is exactly S(F).
class StagedLoop {
 public:
  explicit StagedLoop(AveragingOperator op);

  const AveragingOperator& op() const { return op_; }
  /// Number of constant pieces (product of stage sizes).
  long double piece_count() const { return op_.size(); }

  CellPermutation at(double s) const;
  /// h(a / den), digits extracted in exact integer arithmetic.
  CellPermutation at_exact(std::int64_t a, std::int64_t den) const;
  /// Member index chosen in every stage at s = a / den.
  std::vector<std::int64_t> digits_exact(std::int64_t a, std::int64_t den) const;
  std::vector<std::int64_t> digits(double s) const;
  CellPermutation compose(const std::vector<std::int64_t>& digits) const;

 private:
  std::int64_t member_at(std::size_t stage, std::int64_t position) const;

  AveragingOperator op_;
  std::vector<std::vector<std::int64_t>> cumulative_;  // per stage, member start positions
};

/// g(t) = h(M t); with M a multiple of den(r), g(t + r) = g(t).
struct PeriodicLoop {
  StagedLoop h;
  std::int64_t M = 1;
  Rational r;

  CellPermutation at(double t) const;
  /// g(a / res) for integer a.
  CellPermutation at_exact(std::int64_t a, std::int64_t res) const;
};

struct Property21AReport {
  int N = 1;                    ///< continuity grid p_i = i/N
  double lipschitz = 0.0;       ///< t-Lipschitz constant of the interpolated F
  std::int64_t M = 1;
  std::int64_t res_t = 1;       ///< lcm(M, den r, base resolution)
  std::int64_t sampled_t = 0;   ///< time samples used for the period check
  double eps = 0.0;
  std::vector<double> p_norms;  ///< ||S F(p_i, .)||, each < eps/9
  std::vector<double> J_abs;    ///< sup_y |J_i|, each < eps/(3M)
  double J_bound = 0.0;         ///< eps / (3M)
  double J_sum = 0.0;
  double quadrature_max = 0.0;  ///< sup_y |Q(y)|, frozen-midpoint quadrature
  double error_bar = 0.0;       ///< L / (4M)
  double recheck_max = 0.0;     ///< sup_y |I(y)| from the independent evaluation
  std::string recheck_method;
  bool period_exact = false;
  int stage_count = 0;
  Eigen::ArrayXd integral;      ///< I(y) from the independent evaluation
};

struct Property21A {
  PeriodicLoop loop;
  Property21AReport report;
};

/// Loop g with |int F(t, g(t)^{-1} y) dt| < eps at every grid y and
/// g(t + r) = g(t). F is a product field, fiberwise centered.
Property21A loop_for_property_21A(const ScalarField& F, double eps, const Rational& r, const Averager& averager,
                                  int N_cap = 1 << 16, int period_subsamples = 8);
Property21A loop_for_property_21A(const ScalarField& F, double eps, const Rational& r);

/// I(y) by integrating over every constant piece of the loop, exact for F
/// linear in t between its time nodes. Needs piece count <= cap.
Eigen::ArrayXd piecewise_integral(const ScalarField& F, const PeriodicLoop& g, long double piece_cap = 2e6);

// --------------------------------------------------------------------------

/// phi^{-1} S_alpha phi with phi(t, y) = (t, g(t) y).
struct ConjugatedShift {
  TorusGrid grid;
  std::function<CellPermutation(double t)> g;
  double alpha = 0.0;
  Rational r;
};

struct MinimalityConjugator {
  ConjugatedShift shift;
  std::vector<CellPermutation> g_cells;    ///< g on every t-cell of shift.grid
  std::vector<Eigen::Vector2i> translations;
  std::vector<int> delta;                  ///< t-cells of U on shift.grid
  std::vector<int> V;
  int lift = 1;                            ///< t refinement needed for the period
  bool meets_every_circle = false;
  bool commutes = false;
};

/// U = Delta x V given by t-cells of grid and fiber cells. g sweeps translates
/// of V over Y while t runs through Delta, periodic with period r.
MinimalityConjugator conjugator_for_minimality(const TorusGrid& grid, const std::vector<int>& delta,
                                               const std::vector<int>& V, const Rational& r);

/// Cell dynamics of phi^{-1} S_alpha phi: exact fiber maps, and the two
/// t-cells met by a shifted t-cell.
CellDynamics conjugated_cell_dynamics(const MinimalityConjugator& c, double alpha);

struct MinimalityCertificate {
  CoverageVerdict coverage;
  bool conjugation_identity = false;  ///< (phi^-1 S phi)^i U = phi^-1 S^i phi U, i <= checked
  int checked_steps = 0;
};

MinimalityCertificate minimality_certificate(const MinimalityConjugator& c, double alpha, int max_iter,
                                             int identity_steps = 16);

struct UniqueErgodicityConjugator {
  ConjugatedShift shift;
  Property21A loop;
  double integral_max = 0.0;  ///< sup_y |I(y)|, independent evaluation
};

/// g from the loop construction with target eps/2 on the centered F.
UniqueErgodicityConjugator conjugator_for_unique_ergodicity(const ScalarField& F, double eps, const Rational& r,
                                                            const Averager& averager);

struct ErgodicSumCertificate {
  bool reached = false;
  int N = 0;
  double sup = 0.0;  ///< ||G_N|| on the grid at the reported N (or at N_max)
};

/// Smallest N <= N_max with ||G_N|| < eps, G_N = (1/N) sum (F o phi^{-1}) o S_alpha^j,
/// evaluated on the time nodes and cells of F's grid by running sums.
ErgodicSumCertificate ergodic_sum_certificate(const UniqueErgodicityConjugator& c, const ScalarField& F,
                                              double alpha, double eps, int N_max);

}  // namespace ergoloop
