#include "ergoloop/phase.hpp"

#include <Eigen/LU>

#include <algorithm>
#include <numeric>

namespace ergoloop {

Rational::Rational(std::int64_t p, std::int64_t q) {
  if (q == 0) throw PreconditionError("rational with zero denominator");
  if (q < 0) {
    p = -p;
    q = -q;
  }
  const std::int64_t g = std::gcd(p < 0 ? -p : p, q);
  num = g ? p / g : 0;
  den = g ? q / g : 1;
}

Rational Rational::parse(const std::string& text) {
  const auto slash = text.find('/');
  try {
    std::size_t used = 0;
    if (slash == std::string::npos) {
      const long long p = std::stoll(text, &used);
      if (used != text.size()) throw PreconditionError("bad rational: " + text);
      return Rational(p, 1);
    }
    const std::string a = text.substr(0, slash), b = text.substr(slash + 1);
    const long long p = std::stoll(a, &used);
    if (used != a.size()) throw PreconditionError("bad rational: " + text);
    const long long q = std::stoll(b, &used);
    if (used != b.size()) throw PreconditionError("bad rational: " + text);
    return Rational(p, q);
  } catch (const std::logic_error&) {
    throw PreconditionError("bad rational: " + text);
  }
}

TorusGrid::TorusGrid(int res_t, int res_y1, int res_y2) : res_t_(res_t), res_y1_(res_y1), res_y2_(res_y2) {
  if (res_t < 2 || res_y1 < 2 || res_y2 < 2) throw PreconditionError("grid resolutions must be >= 2");
}

int TorusGrid::locate(const Eigen::Vector2d& y) const {
  int i1 = static_cast<int>(std::floor(CircleCoord::wrap(y(0)) * res_y1_));
  int i2 = static_cast<int>(std::floor(CircleCoord::wrap(y(1)) * res_y2_));
  i1 = std::clamp(i1, 0, res_y1_ - 1);
  i2 = std::clamp(i2, 0, res_y2_ - 1);
  return cell_index(i1, i2);
}

ScalarField sample(const FieldFunction& f, const TorusGrid& grid, Domain domain) {
  ScalarField out(grid, domain);
  const int fibers = out.fiber_count();
  for (int k = 0; k < fibers; ++k) {
    const double t = grid.time(k);
    auto fib = out.fiber(k);
    for (int c = 0; c < grid.fiber_size(); ++c) fib(c) = f(t, grid.node(c));
  }
  return out;
}

namespace {

// Periodic bilinear interpolation inside one fiber.
double bilinear(const TorusGrid& g, const double* fib, const Eigen::Vector2d& y) {
  const double u = CircleCoord::wrap(y(0)) * g.res_y1();
  const double v = CircleCoord::wrap(y(1)) * g.res_y2();
  const int i0 = static_cast<int>(std::floor(u)) % g.res_y1();
  const int j0 = static_cast<int>(std::floor(v)) % g.res_y2();
  const int i1 = (i0 + 1) % g.res_y1();
  const int j1 = (j0 + 1) % g.res_y2();
  const double a = u - std::floor(u), b = v - std::floor(v);
  return (1 - a) * (1 - b) * fib[g.cell_index(i0, j0)] + a * (1 - b) * fib[g.cell_index(i1, j0)] +
         (1 - a) * b * fib[g.cell_index(i0, j1)] + a * b * fib[g.cell_index(i1, j1)];
}

template <typename F>
double golden_max(F&& g, double lo, double hi, double& best_x) {
  constexpr double kInvPhi = 0.6180339887498949;
  double a = lo, b = hi;
  double x1 = b - kInvPhi * (b - a), x2 = a + kInvPhi * (b - a);
  double f1 = g(x1), f2 = g(x2);
  for (int it = 0; it < 48 && (b - a) > 1e-13; ++it) {
    if (f1 < f2) {
      a = x1;
      x1 = x2;
      f1 = f2;
      x2 = a + kInvPhi * (b - a);
      f2 = g(x2);
    } else {
      b = x2;
      x2 = x1;
      f2 = f1;
      x1 = b - kInvPhi * (b - a);
      f1 = g(x1);
    }
  }
  if (f1 >= f2) {
    best_x = x1;
    return f1;
  }
  best_x = x2;
  return f2;
}

}  // namespace

FieldFunction interpolant(const ScalarField& field) {
  const TorusGrid g = field.grid();
  const Eigen::ArrayXd samples = field.samples();
  if (field.domain() == Domain::kFiber) {
    return [g, samples](double, const Eigen::Vector2d& y) { return bilinear(g, samples.data(), y); };
  }
  return [g, samples](double t, const Eigen::Vector2d& y) {
    const double s = CircleCoord::wrap(t) * g.res_t();
    const int k0 = static_cast<int>(std::floor(s)) % g.res_t();
    const int k1 = (k0 + 1) % g.res_t();
    const double w = s - std::floor(s);
    const double* base = samples.data();
    return (1 - w) * bilinear(g, base + static_cast<std::ptrdiff_t>(k0) * g.fiber_size(), y) +
           w * bilinear(g, base + static_cast<std::ptrdiff_t>(k1) * g.fiber_size(), y);
  };
}

double refined_fiber_sup(const FieldFunction& f, const TorusGrid& grid, double t) {
  const int n = grid.fiber_size();
  Eigen::ArrayXd vals(n);
  for (int c = 0; c < n; ++c) vals(c) = std::abs(f(t, grid.node(c)));

  // Local maxima on the 8-neighbourhood, best first.
  std::vector<int> peaks;
  const int n1 = grid.res_y1(), n2 = grid.res_y2();
  for (int i = 0; i < n1; ++i) {
    for (int j = 0; j < n2; ++j) {
      const int c = grid.cell_index(i, j);
      bool peak = true;
      for (int di = -1; di <= 1 && peak; ++di)
        for (int dj = -1; dj <= 1 && peak; ++dj)
          if ((di || dj) && vals(grid.cell_index((i + di + n1) % n1, (j + dj + n2) % n2)) > vals(c)) peak = false;
      if (peak) peaks.push_back(c);
    }
  }
  if (peaks.empty()) {
    Eigen::Index arg;
    vals.maxCoeff(&arg);
    peaks.push_back(static_cast<int>(arg));
  }
  std::stable_sort(peaks.begin(), peaks.end(), [&](int a, int b) { return vals(a) > vals(b); });
  if (peaks.size() > 2) peaks.resize(2);

  double best = vals.maxCoeff();
  if (best == 0.0) return 0.0;
  const double h1 = 1.0 / n1, h2 = 1.0 / n2;
  for (int c : peaks) {
    Eigen::Vector2d y = grid.node(c);
    double cur = vals(c);
    for (int sweep = 0; sweep < 6; ++sweep) {
      const double before = cur;
      double x;
      double v = golden_max([&](double s) { return std::abs(f(t, Eigen::Vector2d(s, y(1)))); }, y(0) - h1, y(0) + h1, x);
      if (v > cur) {
        cur = v;
        y(0) = x;
      }
      v = golden_max([&](double s) { return std::abs(f(t, Eigen::Vector2d(y(0), s))); }, y(1) - h2, y(1) + h2, x);
      if (v > cur) {
        cur = v;
        y(1) = x;
      }
      if (cur - before <= 1e-16 * cur) break;
    }
    best = std::max(best, cur);
  }
  return best;
}

double time_sup_integral(const FieldFunction& f, const TorusGrid& grid) {
  double total = 0.0;
  for (int k = 0; k < grid.res_t(); ++k) total += refined_fiber_sup(f, grid, grid.time(k));
  return total / grid.res_t();
}

// --------------------------------------------------------------------------

CellPermutation::CellPermutation(Eigen::VectorXi image) : image_(std::move(image)) {
  const int n = static_cast<int>(image_.size());
  preimage_ = Eigen::VectorXi::Constant(n, -1);
  for (int c = 0; c < n; ++c) {
    const int d = image_(c);
    if (d < 0 || d >= n || preimage_(d) != -1) throw PreconditionError("cell map is not a bijection");
    preimage_(d) = c;
  }
}

CellPermutation CellPermutation::identity(int n) {
  return CellPermutation(Eigen::VectorXi::LinSpaced(n, 0, n - 1));
}

CellPermutation CellPermutation::translation(int n1, int n2, int a, int b) {
  Eigen::VectorXi img(n1 * n2);
  for (int i = 0; i < n1; ++i)
    for (int j = 0; j < n2; ++j) img(i * n2 + j) = ((i + a) % n1 + n1) % n1 * n2 + ((j + b) % n2 + n2) % n2;
  return CellPermutation(std::move(img));
}

CellPermutation CellPermutation::exchange(int n, const std::vector<int>& from, const std::vector<int>& to) {
  if (from.size() != to.size()) throw PreconditionError("exchange needs equal-size cell lists");
  std::vector<char> in_from(n, 0), in_to(n, 0);
  for (int c : from) in_from[c] = 1;
  for (int c : to) in_to[c] = 1;
  Eigen::VectorXi img = Eigen::VectorXi::LinSpaced(n, 0, n - 1);
  for (std::size_t k = 0; k < from.size(); ++k) img(from[k]) = to[k];
  std::vector<int> vacated, displaced;
  for (int c = 0; c < n; ++c) {
    if (in_from[c] && !in_to[c]) vacated.push_back(c);
    if (in_to[c] && !in_from[c]) displaced.push_back(c);
  }
  for (std::size_t k = 0; k < displaced.size(); ++k) img(displaced[k]) = vacated[k];
  return CellPermutation(std::move(img));
}

CellPermutation CellPermutation::inverse() const { return CellPermutation(preimage_); }

CellPermutation CellPermutation::after(const CellPermutation& first) const {
  if (first.size() != size()) throw PreconditionError("composing permutations of different sizes");
  Eigen::VectorXi img(size());
  for (int c = 0; c < size(); ++c) img(c) = image_(first(c));
  return CellPermutation(std::move(img));
}

bool CellPermutation::is_identity() const {
  for (int c = 0; c < size(); ++c)
    if (image_(c) != c) return false;
  return true;
}

// --------------------------------------------------------------------------

CellMap::CellMap(CellPermutation p, TorusGrid grid) : rep_(std::move(p)), grid_(grid) {
  if (permutation().size() != grid.fiber_size()) throw PreconditionError("permutation size does not match grid");
}

CellMap::CellMap(SmoothMap m) : rep_(std::move(m)) {}

CellMap CellMap::identity() {
  auto id = [](const Eigen::Vector2d& y) { return wrap(y); };
  return CellMap(SmoothMap{id, id});
}

Eigen::Vector2d CellMap::apply(const Eigen::Vector2d& y) const {
  if (const auto* m = std::get_if<SmoothMap>(&rep_)) return wrap(m->forward(y));
  const auto& p = std::get<CellPermutation>(rep_);
  const Eigen::Vector2d w = wrap(y);
  const int c = grid_->locate(w);
  return wrap(grid_->node(p(c)) + (w - grid_->node(c)));
}

Eigen::Vector2d CellMap::apply_inverse(const Eigen::Vector2d& y) const {
  if (const auto* m = std::get_if<SmoothMap>(&rep_)) return wrap(m->inverse(y));
  const auto& p = std::get<CellPermutation>(rep_);
  const Eigen::Vector2d w = wrap(y);
  const int c = grid_->locate(w);
  return wrap(grid_->node(p.inverse_of(c)) + (w - grid_->node(c)));
}

CellMap CellMap::inverse() const {
  if (const auto* m = std::get_if<SmoothMap>(&rep_)) return CellMap(SmoothMap{m->inverse, m->forward});
  return CellMap(std::get<CellPermutation>(rep_).inverse(), *grid_);
}

CellMap CellMap::after(const CellMap& first) const {
  if (is_permutation() && first.is_permutation() && grid_ == first.grid_)
    return CellMap(permutation().after(first.permutation()), *grid_);
  const CellMap a = *this, b = first;
  return CellMap(SmoothMap{[a, b](const Eigen::Vector2d& y) { return a.apply(b.apply(y)); },
                           [a, b](const Eigen::Vector2d& y) { return b.apply_inverse(a.apply_inverse(y)); }});
}

ScalarField CellMap::pullback(const ScalarField& f) const {
  if (f.domain() != Domain::kFiber) throw PreconditionError("pullback acts on fiber fields");
  if (is_permutation() && grid_ == f.grid())
    return ScalarField(f.grid(), Domain::kFiber, permutation().pullback(f.samples()));
  const FieldFunction interp = interpolant(f);
  ScalarField out(f.grid(), Domain::kFiber);
  for (int c = 0; c < f.grid().fiber_size(); ++c) out.samples()(c) = interp(0.0, apply_inverse(f.grid().node(c)));
  return out;
}

double CellMap::jacobian_defect(const TorusGrid& grid, double h) const {
  if (is_permutation()) return 0.0;
  double worst = 0.0;
  for (int c = 0; c < grid.fiber_size(); ++c) {
    const Eigen::Vector2d y = grid.node(c);
    Eigen::Matrix2d J;
    for (int k = 0; k < 2; ++k) {
      Eigen::Vector2d e = Eigen::Vector2d::Zero();
      e(k) = h;
      const Eigen::Vector2d p = apply(y + e), m = apply(y - e);
      J(0, k) = circle_delta(m(0), p(0)) / (2 * h);
      J(1, k) = circle_delta(m(1), p(1)) / (2 * h);
    }
    worst = std::max(worst, std::abs(J.determinant() - 1.0));
  }
  return worst;
}

}  // namespace ergoloop
