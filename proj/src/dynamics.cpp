#include "ergoloop/dynamics.hpp"

#include <algorithm>

#include "ergoloop/parallel.hpp"

namespace ergoloop {

CellMap HamiltonianLoop::map_at(double t) const {
  const double s = CircleCoord::wrap(t);
  PointAction f = forward, g = inverse;
  return CellMap(SmoothMap{[f, s](const Eigen::Vector2d& y) { return f(s, y); },
                           [g, s](const Eigen::Vector2d& y) { return g(s, y); }});
}

HamiltonianLoop HamiltonianLoop::identity() {
  HamiltonianLoop h;
  h.forward = [](double, const Eigen::Vector2d& y) { return y; };
  h.inverse = h.forward;
  h.homotopy_tag = "constant";
  h.translation = TranslationDrift{0.0, 0.0};
  return h;
}

HamiltonianLoop furstenberg_loop(double beta) {
  HamiltonianLoop h;
  h.forward = [beta](double t, const Eigen::Vector2d& y) { return Eigen::Vector2d(y(0) + t, y(1) + beta); };
  h.inverse = [beta](double t, const Eigen::Vector2d& y) { return Eigen::Vector2d(y(0) - t, y(1) - beta); };
  h.homotopy_tag = "torus-translation (non-contractible)";
  h.translation = TranslationDrift{1.0, beta};
  return h;
}

std::optional<CellPermutation> exact_cell_map(const HamiltonianLoop& loop, double t, const TorusGrid& grid) {
  if (!loop.translation) return std::nullopt;
  const double a = CircleCoord::wrap(loop.translation->drift * CircleCoord::wrap(t)) * grid.res_y1();
  const double b = CircleCoord::wrap(loop.translation->shift) * grid.res_y2();
  const double ra = std::round(a), rb = std::round(b);
  if (std::abs(a - ra) > 1e-9 || std::abs(b - rb) > 1e-9) return std::nullopt;
  return CellPermutation::translation(grid.res_y1(), grid.res_y2(), static_cast<int>(ra), static_cast<int>(rb));
}

SkewProduct furstenberg_system(double alpha, double beta) { return SkewProduct{alpha, furstenberg_loop(beta)}; }

SkewProduct identity_system(double alpha) { return SkewProduct{alpha, HamiltonianLoop::identity()}; }

std::vector<PhasePoint> orbit(const SkewProduct& T, const PhasePoint& p, std::int64_t N, std::int64_t cap) {
  if (N < 1) throw PreconditionError("orbit length must be >= 1");
  if (N > cap) throw BudgetError("orbit too long");
  std::vector<PhasePoint> out;
  out.reserve(static_cast<std::size_t>(N));
  PhasePoint x{CircleCoord::wrap(p.t), wrap(p.y)};
  for (std::int64_t i = 0; i < N; ++i) {
    out.push_back(x);
    x = T.apply(x);
  }
  return out;
}

FieldFunction birkhoff_average(const SkewProduct& T, const FieldFunction& F, int N) {
  if (N < 1) throw PreconditionError("N must be >= 1");
  return [T, F, N](double t, const Eigen::Vector2d& y) {
    PhasePoint x{t, y};
    double s = 0.0;
    for (int i = 0; i < N; ++i) {
      s += F(x.t, x.y);
      x = T.apply(x);
    }
    return s / N;
  };
}

double birkhoff_uniform_deviation(const SkewProduct& T, const ScalarField& F, int N) {
  if (F.domain() != Domain::kProduct) throw PreconditionError("deviation needs a field on S1 x Y");
  if (!is_zero_mean(F)) throw PreconditionError("field is not zero-mean");
  const TorusGrid& g = F.grid();
  const FieldFunction avg = birkhoff_average(T, interpolant(F), N);
  Eigen::ArrayXd fiber_max(g.res_t());
  parallel_for(g.res_t(), [&](std::int64_t k) {
    double m = 0.0;
    for (int c = 0; c < g.fiber_size(); ++c) m = std::max(m, std::abs(avg(g.time(static_cast<int>(k)), g.node(c))));
    fiber_max(k) = m;
  });
  return fiber_max.maxCoeff();
}

double birkhoff_uniform_deviation(const SkewProduct& T, const FieldFunction& F, int N, const TorusGrid& grid) {
  const FieldFunction avg = birkhoff_average(T, F, N);
  Eigen::ArrayXd fiber_max(grid.res_t());
  parallel_for(grid.res_t(),
               [&](std::int64_t k) { fiber_max(k) = refined_fiber_sup(avg, grid, grid.time(static_cast<int>(k))); });
  return fiber_max.maxCoeff();
}

// --------------------------------------------------------------------------

CellDynamics hull_dynamics(const SkewProduct& T, const TorusGrid& grid) {
  return [T, grid](std::int64_t cell, std::vector<std::int64_t>& out) {
    const int nt = grid.res_t(), n1 = grid.res_y1(), n2 = grid.res_y2();
    const int k = static_cast<int>(cell / grid.fiber_size());
    const int c = static_cast<int>(cell % grid.fiber_size());
    const double ht = 1.0 / nt, h1 = 1.0 / n1, h2 = 1.0 / n2;
    const double shrink = 1e-9;
    const Eigen::Vector2d y0 = grid.node(c);
    const PhasePoint centre = T.apply({grid.time(k) + ht / 2, y0 + Eigen::Vector2d(h1 / 2, h2 / 2)});

    Eigen::Vector3d lo = Eigen::Vector3d::Constant(1e300), hi = Eigen::Vector3d::Constant(-1e300);
    for (int corner = 0; corner < 8; ++corner) {
      const double t = grid.time(k) + ((corner & 1) ? ht * (1 - shrink) : ht * shrink);
      const Eigen::Vector2d y = y0 + Eigen::Vector2d((corner & 2) ? h1 * (1 - shrink) : h1 * shrink,
                                                     (corner & 4) ? h2 * (1 - shrink) : h2 * shrink);
      const PhasePoint im = T.apply({t, y});
      const Eigen::Vector3d d(circle_delta(centre.t, im.t), circle_delta(centre.y(0), im.y(0)),
                              circle_delta(centre.y(1), im.y(1)));
      lo = lo.cwiseMin(d);
      hi = hi.cwiseMax(d);
    }
    const Eigen::Vector3d base(centre.t, centre.y(0), centre.y(1));
    const Eigen::Vector3i res(nt, n1, n2);
    Eigen::Vector3i first, last;
    for (int a = 0; a < 3; ++a) {
      first(a) = static_cast<int>(std::floor((base(a) + lo(a)) * res(a)));
      last(a) = static_cast<int>(std::floor((base(a) + hi(a)) * res(a)));
      if (last(a) - first(a) >= res(a)) last(a) = first(a) + res(a) - 1;
    }
    auto mod = [](int v, int n) { return ((v % n) + n) % n; };
    for (int a = first(0); a <= last(0); ++a)
      for (int b = first(1); b <= last(1); ++b)
        for (int d = first(2); d <= last(2); ++d)
          out.push_back(static_cast<std::int64_t>(mod(a, nt)) * grid.fiber_size() +
                        grid.cell_index(mod(b, n1), mod(d, n2)));
  };
}

CoverageVerdict minimality_diagnostic(const CellDynamics& T, std::int64_t cell_count,
                                      const std::vector<std::int64_t>& U, int max_iter) {
  if (U.empty()) throw PreconditionError("U must be non-empty");
  std::vector<char> seen(static_cast<std::size_t>(cell_count), 0);
  std::vector<std::int64_t> frontier;
  std::int64_t reached = 0;
  for (std::int64_t c : U) {
    if (c < 0 || c >= cell_count) throw PreconditionError("cell outside grid");
    if (!seen[c]) {
      seen[c] = 1;
      ++reached;
      frontier.push_back(c);
    }
  }
  if (reached == cell_count) return {true, 0, reached};
  std::vector<std::int64_t> next, images;
  for (int step = 1; step <= max_iter && !frontier.empty(); ++step) {
    next.clear();
    for (std::int64_t c : frontier) {
      images.clear();
      T(c, images);
      for (std::int64_t d : images) {
        if (!seen[d]) {
          seen[d] = 1;
          ++reached;
          next.push_back(d);
        }
      }
    }
    if (reached == cell_count) return {true, step, reached};
    frontier.swap(next);
  }
  return {false, -1, reached};
}

CoverageVerdict minimality_diagnostic(const SkewProduct& T, const TorusGrid& grid,
                                      const std::vector<std::int64_t>& U, int max_iter) {
  return minimality_diagnostic(hull_dynamics(T, grid), grid.size(), U, max_iter);
}

ErgodicityVerdict unique_ergodicity_diagnostic(const SkewProduct& T, const FieldFunction& F, double eps, int N_max,
                                               const TorusGrid& grid) {
  if (!(eps > 0)) throw PreconditionError("eps must be positive");
  const std::int64_t n = grid.size();
  std::vector<PhasePoint> pos(static_cast<std::size_t>(n));
  for (std::int64_t i = 0; i < n; ++i)
    pos[i] = {grid.time(static_cast<int>(i / grid.fiber_size())), grid.node(static_cast<int>(i % grid.fiber_size()))};
  Eigen::ArrayXd sums = Eigen::ArrayXd::Zero(n);
  double last = 0.0;
  for (int N = 1; N <= N_max; ++N) {
    parallel_for(n, [&](std::int64_t i) {
      sums(i) += F(pos[i].t, pos[i].y);
      pos[i] = T.apply(pos[i]);
    });
    last = sums.abs().maxCoeff() / N;
    if (last < eps) {
      const double refined = birkhoff_uniform_deviation(T, F, N, grid);
      if (refined < eps) return {true, N, refined};
    }
  }
  return {false, N_max, last};
}

// --------------------------------------------------------------------------

PhasePoint SequentialSystem::step(int i, const PhasePoint& p) const {
  if (i < 1 || i > length()) throw PreconditionError("underdetermined sequence");
  const double a = alphas[static_cast<std::size_t>(i - 1)];
  Eigen::Vector2d y = base.apply(p.t, p.y);
  if (static_cast<std::size_t>(i - 1) < conjugators.size()) y = conjugators[static_cast<std::size_t>(i - 1)].apply(y);
  return {CircleCoord::wrap(p.t + a), y};
}

PhasePoint sequential_apply(const SequentialSystem& S, const PhasePoint& p, int n) {
  if (n < 0) throw PreconditionError("n must be >= 0");
  if (n > S.length()) throw PreconditionError("underdetermined sequence");
  PhasePoint x{CircleCoord::wrap(p.t), wrap(p.y)};
  for (int i = 1; i <= n; ++i) x = S.step(i, x);
  return x;
}

}  // namespace ergoloop
