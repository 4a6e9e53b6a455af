#pragma once

#include <memory>
#include <optional>
#include <variant>
#include <vector>

#include "ergoloop/phase.hpp"

namespace ergoloop {

/// Compact family of exchange maps: member j first applies `pre` (when set),
/// then moves source[k] onto ring[(j + k) mod |ring|] for every k, sending the
/// displaced ring cells back into the vacated source cells.
struct WindowRing {
  std::vector<int> source;
  std::vector<int> ring;
  std::optional<CellPermutation> pre;

  std::vector<int> window(std::int64_t j) const;
};

/// Finite weighted family of cell permutations g_1..g_N; weights count
/// repeated members.
class PermutationFamily {
 public:
  explicit PermutationFamily(int cells) : cells_(cells) {}

  void add(CellPermutation g, std::int64_t weight = 1);
  void add_ring(WindowRing ring, std::int64_t weight = 1);
  void append(const PermutationFamily& other, std::int64_t weight = 1);

  int cells() const { return cells_; }
  /// N: the total weight.
  std::int64_t size() const;
  std::int64_t member_count() const;
  CellPermutation member(std::int64_t j) const;
  std::int64_t weight(std::int64_t j) const;
  /// g_j(A) for the family's source set; ring members skip materializing the map.
  std::vector<int> member_image(std::int64_t j, const std::vector<int>& A) const;

  /// (1/N) sum_j w_j H o g_j^{-1}
  Eigen::ArrayXd average(const Eigen::ArrayXd& H) const;

 private:
  struct Block {
    std::variant<CellPermutation, WindowRing> members;
    std::int64_t weight;
  };
  std::pair<const Block*, std::int64_t> locate(std::int64_t j) const;
  static std::int64_t block_members(const Block& b);

  int cells_;
  std::vector<Block> blocks_;
};

/// S = S_k o ... o S_1 with S_i = S^{family_i}. Stages stay unflattened.
class AveragingOperator {
 public:
  explicit AveragingOperator(int cells) : cells_(cells) {}
  explicit AveragingOperator(std::shared_ptr<const PermutationFamily> stage);
  static AveragingOperator from_maps(const std::vector<CellPermutation>& maps);

  int cells() const { return cells_; }
  int stage_count() const { return static_cast<int>(stages_.size()); }
  const std::vector<std::shared_ptr<const PermutationFamily>>& stages() const { return stages_; }
  /// Product of the stage sizes (number of composite maps counted with weight).
  long double size() const;

  Eigen::ArrayXd apply(const Eigen::ArrayXd& H) const;
  ScalarField apply(const ScalarField& H) const;

  /// Explicit composite maps g^{(k)} o ... o g^{(1)} with weights; throws
  /// BudgetError when more than `cap` would be produced.
  std::vector<std::pair<CellPermutation, std::int64_t>> flatten(std::int64_t cap = 100000) const;

  /// Operator S2 o S1 (apply S1 first).
  friend AveragingOperator compose_averaging(const AveragingOperator& S2, const AveragingOperator& S1);

 private:
  int cells_;
  std::vector<std::shared_ptr<const PermutationFamily>> stages_;
};

AveragingOperator compose_averaging(const AveragingOperator& S2, const AveragingOperator& S1);

inline Eigen::ArrayXd apply_averaging(const AveragingOperator& S, const Eigen::ArrayXd& H) { return S.apply(H); }
inline ScalarField apply_averaging(const AveragingOperator& S, const ScalarField& H) { return S.apply(H); }

// --------------------------------------------------------------------------

/// What a covering oracle returns for a set A: a family with
/// (1/N) sum chi_{g_j(A)} >= (c1 + c2 mu(Y)/mu(A))^{-1} everywhere.
struct CoveringResponse {
  std::shared_ptr<const PermutationFamily> family;
  double c1 = 0.0;
  double c2 = 0.0;
};

using CoveringOracle = std::function<CoveringResponse(const std::vector<int>& A, int cells)>;

/// c = 2 (3 c2 + c1)
inline double contraction_constant(double c1, double c2) { return 2.0 * (3.0 * c2 + c1); }

struct Section32Report {
  bool skipped = false;   ///< m = 0
  double m = 0.0;
  double mu_A = 0.0;
  double mu_A_bound = 0.0;       ///< m / (m + 2)
  double min_ratio = 0.0;        ///< min_y N'(y) / N
  double ratio_bound = 0.0;      ///< m / (3 c2 + c1)
  bool ok = true;
};

/// The set {H < m/2}, strict, with m = max H.
std::vector<int> sublevel_set(const Eigen::ArrayXd& H);

/// Checks mu(A) >= m/(m+2) and N'/N >= m/(3c2+c1) for one recursion step.
/// Throws CertificateError naming the failed inequality.
Section32Report section32_bounds_check(const Eigen::ArrayXd& H, const std::vector<int>& A,
                                       const CoveringResponse& response);

struct FlattenTrace {
  std::vector<double> m;            ///< m_i = max H^(i)
  std::vector<double> bound;        ///< m_i (1 - m_i / c), one per step
  std::vector<Section32Report> reports;
  double c1 = 0.0;
  double c2 = 0.0;
  double c = 0.0;
};

class FlattenBudgetError : public BudgetError {
 public:
  FlattenBudgetError(const std::string& what, FlattenTrace trace) : BudgetError(what), trace(std::move(trace)) {}
  FlattenTrace trace;
};

struct FlattenResult {
  AveragingOperator op;
  FlattenTrace trace;
};

inline constexpr double kDefaultTarget = 1e-2;
inline constexpr int kDefaultMaxIter = 100000;

/// H^(i+1) = S_i(H^(i)) with S_i built from the oracle's family for
/// A = {H^(i) < max/2}, until max H^(i) < target.
FlattenResult flatten_max(const Eigen::ArrayXd& H, const CoveringOracle& oracle, double target = kDefaultTarget,
                          int max_iter = kDefaultMaxIter);

/// S_- o S_+ with ||S(H)|| < eps.
AveragingOperator flatten_sup(const Eigen::ArrayXd& H, const CoveringOracle& oracle, double eps,
                              int max_iter = kDefaultMaxIter);

}  // namespace ergoloop
