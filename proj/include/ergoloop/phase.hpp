#pragma once

#include <Eigen/Core>

#include <cmath>
#include <cstdint>
#include <functional>
#include <numbers>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "ergoloop/error.hpp"

namespace ergoloop {

inline constexpr double kTwoPi = 2.0 * std::numbers::pi;

/// Point of the circle R/Z. The stored value is always in [0, 1).
class CircleCoord {
 public:
  CircleCoord() = default;
  explicit CircleCoord(double v) : value_(wrap(v)) {}

  /// Canonical representative in [0, 1). A value that rounds up to 1 at the
  /// seam is sent to 0.
  static double wrap(double v) {
    double w = v - std::floor(v);
    return w >= 1.0 ? 0.0 : w;
  }

  double value() const { return value_; }
  CircleCoord operator+(CircleCoord o) const { return CircleCoord(value_ + o.value_); }
  CircleCoord operator-(CircleCoord o) const { return CircleCoord(value_ - o.value_); }
  bool operator==(const CircleCoord&) const = default;

 private:
  double value_ = 0.0;
};

/// Signed distance from a to b on the circle, in (-1/2, 1/2].
inline double circle_delta(double a, double b) {
  double d = CircleCoord::wrap(b - a);
  return d > 0.5 ? d - 1.0 : d;
}

/// Exact rational p/q with q > 0, reduced.
struct Rational {
  std::int64_t num = 0;
  std::int64_t den = 1;

  Rational() = default;
  Rational(std::int64_t p, std::int64_t q);
  static Rational parse(const std::string& text);
  double value() const { return static_cast<double>(num) / static_cast<double>(den); }
  std::string str() const { return std::to_string(num) + "/" + std::to_string(den); }
  bool operator==(const Rational&) const = default;
};

/// Sampling grid on S^1 x T^2. Nodes sit at (k/res_t, i/res_y1, j/res_y2);
/// node (i, j) stands for the cell [i/res_y1, (i+1)/res_y1) x [j/res_y2, ...).
/// The fiber measure is normalized so mu(T^2) = 1.
class TorusGrid {
 public:
  TorusGrid(int res_t, int res_y1, int res_y2);

  int res_t() const { return res_t_; }
  int res_y1() const { return res_y1_; }
  int res_y2() const { return res_y2_; }
  int fiber_size() const { return res_y1_ * res_y2_; }
  std::int64_t size() const { return static_cast<std::int64_t>(res_t_) * fiber_size(); }
  double cell_measure() const { return 1.0 / fiber_size(); }

  int cell_index(int i1, int i2) const { return i1 * res_y2_ + i2; }
  Eigen::Vector2d node(int cell) const {
    return {static_cast<double>(cell / res_y2_) / res_y1_,
            static_cast<double>(cell % res_y2_) / res_y2_};
  }
  double time(int k) const { return static_cast<double>(k) / res_t_; }
  /// Cell whose half-open box contains y (y taken mod 1).
  int locate(const Eigen::Vector2d& y) const;

  bool operator==(const TorusGrid&) const = default;

 private:
  int res_t_;
  int res_y1_;
  int res_y2_;
};

enum class Domain { kFiber, kProduct };

/// Samples of a real function on Y (one fiber) or on S^1 x Y (res_t fibers
/// stored consecutively). Templated on the scalar so the reductions below can
/// also run in long double when an accumulation check needs the headroom.
template <typename Scalar>
class BasicScalarField {
 public:
  using Samples = Eigen::Array<Scalar, Eigen::Dynamic, 1>;

  BasicScalarField(TorusGrid grid, Domain domain)
      : grid_(grid), domain_(domain), samples_(Samples::Zero(expected_size(grid, domain))) {}

  BasicScalarField(TorusGrid grid, Domain domain, Samples samples)
      : grid_(grid), domain_(domain), samples_(std::move(samples)) {
    if (samples_.size() != expected_size(grid_, domain_))
      throw PreconditionError("sample count does not match grid");
  }

  const TorusGrid& grid() const { return grid_; }
  Domain domain() const { return domain_; }
  const Samples& samples() const { return samples_; }
  Samples& samples() { return samples_; }
  int fiber_count() const { return domain_ == Domain::kFiber ? 1 : grid_.res_t(); }

  auto fiber(int k) const { return samples_.segment(static_cast<Eigen::Index>(k) * grid_.fiber_size(), grid_.fiber_size()); }
  auto fiber(int k) { return samples_.segment(static_cast<Eigen::Index>(k) * grid_.fiber_size(), grid_.fiber_size()); }

  static Eigen::Index expected_size(const TorusGrid& g, Domain d) {
    return d == Domain::kFiber ? g.fiber_size() : static_cast<Eigen::Index>(g.size());
  }

 private:
  TorusGrid grid_;
  Domain domain_;
  Samples samples_;
};

using ScalarField = BasicScalarField<double>;

template <typename Scalar>
Scalar field_mean(const BasicScalarField<Scalar>& f) {
  if (f.samples().size() == 0) throw PreconditionError("empty field");
  return f.samples().mean();
}

template <typename Scalar>
BasicScalarField<Scalar> normalize_zero_mean(const BasicScalarField<Scalar>& f) {
  BasicScalarField<Scalar> out = f;
  out.samples() -= field_mean(f);
  return out;
}

template <typename Scalar>
Scalar sup_norm(const BasicScalarField<Scalar>& f) {
  return f.samples().size() == 0 ? Scalar(0) : f.samples().abs().maxCoeff();
}

/// True when |mean| <= 1e-12 * sup_norm (or 1e-15 absolute on the zero field).
template <typename Scalar>
bool is_zero_mean(const BasicScalarField<Scalar>& f) {
  const Scalar s = sup_norm(f);
  const Scalar m = std::abs(field_mean(f));
  return s == Scalar(0) ? m <= Scalar(1e-15) : m <= Scalar(1e-12) * s;
}

/// Rectangle rule for the integral over t of max_y |f(t, y)|.
template <typename Scalar>
Scalar time_sup_integral(const BasicScalarField<Scalar>& f) {
  if (f.domain() != Domain::kProduct) throw PreconditionError("time_sup_integral needs a field on S1 x Y");
  Scalar total = 0;
  for (int k = 0; k < f.fiber_count(); ++k) total += f.fiber(k).abs().maxCoeff();
  return total / Scalar(f.grid().res_t());
}

/// Per-fiber means of a product field, one entry per time node.
template <typename Scalar>
Eigen::Array<Scalar, Eigen::Dynamic, 1> fiber_means(const BasicScalarField<Scalar>& f) {
  Eigen::Array<Scalar, Eigen::Dynamic, 1> m(f.fiber_count());
  for (int k = 0; k < f.fiber_count(); ++k) m(k) = f.fiber(k).mean();
  return m;
}

// --------------------------------------------------------------------------
// Closed-form functions on S^1 x T^2.

using FieldFunction = std::function<double(double t, const Eigen::Vector2d& y)>;

/// amplitude * cos(2 pi (kt t + k1 y1 + k2 y2) + phase)
struct TrigMonomial {
  double amplitude = 1.0;
  int kt = 0;
  int k1 = 0;
  int k2 = 0;
  double phase = 0.0;

  double operator()(double t, const Eigen::Vector2d& y) const {
    return amplitude * std::cos(kTwoPi * (kt * t + k1 * y(0) + k2 * y(1)) + phase);
  }
  Eigen::Vector2d gradient(double t, const Eigen::Vector2d& y) const {
    const double s = -amplitude * kTwoPi * std::sin(kTwoPi * (kt * t + k1 * y(0) + k2 * y(1)) + phase);
    return {s * k1, s * k2};
  }
  bool fiber_zero_mean() const { return k1 != 0 || k2 != 0 || amplitude == 0.0; }
};

ScalarField sample(const FieldFunction& f, const TorusGrid& grid, Domain domain);

/// Periodic trilinear (bilinear on a fiber field) interpolant of samples.
FieldFunction interpolant(const ScalarField& field);

/// sup over y of |f(t, y)|: grid maximum followed by golden-section
/// coordinate refinement around the best grid local maxima. The refinement
/// only ever raises the grid value.
double refined_fiber_sup(const FieldFunction& f, const TorusGrid& grid, double t);

/// Rectangle rule over the time grid of the refined fiber sup.
double time_sup_integral(const FieldFunction& f, const TorusGrid& grid);

// --------------------------------------------------------------------------
// Maps of the fiber.

/// Bijection of cell indices. image(c) is where cell c goes.
class CellPermutation {
 public:
  CellPermutation() = default;
  explicit CellPermutation(Eigen::VectorXi image);

  static CellPermutation identity(int n);
  /// Translation of an n1 x n2 torus grid by (a, b) cells.
  static CellPermutation translation(int n1, int n2, int a, int b);
  /// Permutation moving every cell of `from` onto `to` (equal sizes) in index
  /// order and the displaced cells of `to` back into the vacated slots.
  static CellPermutation exchange(int n, const std::vector<int>& from, const std::vector<int>& to);

  int size() const { return static_cast<int>(image_.size()); }
  int operator()(int c) const { return image_(c); }
  int inverse_of(int c) const { return preimage_(c); }
  const Eigen::VectorXi& image() const { return image_; }
  const Eigen::VectorXi& preimage() const { return preimage_; }

  CellPermutation inverse() const;
  /// (this o first)(c) = this(first(c)).
  CellPermutation after(const CellPermutation& first) const;
  bool is_identity() const;
  bool operator==(const CellPermutation& o) const { return image_ == o.image_; }

  /// f o g^{-1}: out(c) = f(preimage(c)).
  template <typename Derived>
  Eigen::ArrayXd pullback(const Eigen::ArrayBase<Derived>& f) const {
    return f.derived()(preimage_.array());
  }

 private:
  Eigen::VectorXi image_;
  Eigen::VectorXi preimage_;
};

/// Smooth map of T^2 given by coordinate functions and their inverse.
struct SmoothMap {
  std::function<Eigen::Vector2d(const Eigen::Vector2d&)> forward;
  std::function<Eigen::Vector2d(const Eigen::Vector2d&)> inverse;
};

/// An element of G at grid level: either a cell permutation (acting on points
/// by translating each cell rigidly onto its image cell) or a smooth map.
class CellMap {
 public:
  CellMap(CellPermutation p, TorusGrid grid);
  explicit CellMap(SmoothMap m);
  static CellMap identity();

  bool is_permutation() const { return std::holds_alternative<CellPermutation>(rep_); }
  const CellPermutation& permutation() const { return std::get<CellPermutation>(rep_); }

  Eigen::Vector2d apply(const Eigen::Vector2d& y) const;
  Eigen::Vector2d apply_inverse(const Eigen::Vector2d& y) const;
  CellMap inverse() const;
  /// (this o first)
  CellMap after(const CellMap& first) const;

  /// Fiber field f o g^{-1} sampled on `grid`; off-grid points interpolated.
  ScalarField pullback(const ScalarField& f) const;

  /// Largest |det Dg - 1| over grid nodes (central differences); zero for
  /// permutations.
  double jacobian_defect(const TorusGrid& grid, double h = 1e-6) const;

 private:
  std::variant<CellPermutation, SmoothMap> rep_;
  std::optional<TorusGrid> grid_;
};

/// Wraps both coordinates into [0, 1).
inline Eigen::Vector2d wrap(const Eigen::Vector2d& y) {
  return {CircleCoord::wrap(y(0)), CircleCoord::wrap(y(1))};
}

/// Sup-norm distance on T^2.
inline double torus_distance(const Eigen::Vector2d& a, const Eigen::Vector2d& b) {
  return std::max(std::abs(circle_delta(a(0), b(0))), std::abs(circle_delta(a(1), b(1))));
}

}  // namespace ergoloop
