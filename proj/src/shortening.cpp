#include "ergoloop/shortening.hpp"

#include <complex>
#include <limits>

#include "ergoloop/parallel.hpp"

namespace ergoloop {

NormalizedHamiltonian birkhoff_hamiltonian(const NormalizedHamiltonian& H, const SkewProduct& T, int N) {
  if (N < 1) throw PreconditionError("N must be >= 1");
  if (N == 1) return H;
  NormalizedHamiltonian F;
  if (H.monomial && T.loop.translation) {
    // Same orbit, stepped inline.
    const TrigMonomial m = *H.monomial;
    const TranslationDrift d = *T.loop.translation;
    const double alpha = T.alpha;
    // With a constant phase advance per step the cosine is stepped by a
    // rotation, resynchronized with the exact phase every 256 steps.
    const bool linear_phase = m.k1 == 0 || d.drift == 0.0;
    const double advance = kTwoPi * (m.kt * alpha + m.k2 * d.shift);
    const std::complex<double> w = std::polar(1.0, advance);
    F.value = [m, d, alpha, N, linear_phase, w](double t, const Eigen::Vector2d& y) {
      double s = 0.0, tk = CircleCoord::wrap(t), y1 = y(0), y2 = y(1);
      std::complex<double> z;
      for (int k = 0; k < N; ++k) {
        if (!linear_phase || k % 256 == 0)
          z = std::polar(1.0, kTwoPi * (m.kt * tk + m.k1 * y1 + m.k2 * y2) + m.phase);
        else
          z *= w;
        s += m.amplitude * z.real();
        y1 = CircleCoord::wrap(y1 + d.drift * tk);
        y2 = CircleCoord::wrap(y2 + d.shift);
        tk = CircleCoord::wrap(tk + alpha);
      }
      return s;
    };
    F.label = "F_" + std::to_string(N) + "(" + H.label + ")";
    return F;
  }
  F.value = [H, T, N](double t, const Eigen::Vector2d& y) {
    PhasePoint x{t, y};
    double s = 0.0;
    for (int k = 0; k < N; ++k) {
      s += H.value(x.t, x.y);
      x = T.apply(x);
    }
    return s;
  };
  F.label = "F_" + std::to_string(N) + "(" + H.label + ")";
  return F;
}

std::optional<double> geometric_sum_oracle(const NormalizedHamiltonian& H, const SkewProduct& T, int N) {
  if (!H.monomial || !T.loop.translation || N < 1) return std::nullopt;
  const TrigMonomial& m = *H.monomial;
  if (m.amplitude == 0.0) return 0.0;
  if (m.k1 == 0 && m.k2 == 0) return std::nullopt;
  if (m.k1 != 0 && T.loop.translation->drift != 0.0) return std::nullopt;
  const double theta = CircleCoord::wrap(m.kt * T.alpha + m.k2 * T.loop.translation->shift);
  const double den = std::abs(std::sin(std::numbers::pi * theta));
  if (den < 1e-15) return std::abs(m.amplitude);
  return std::abs(m.amplitude) * std::abs(std::sin(std::numbers::pi * N * theta)) / (N * den);
}

ShorteningTrace normalized_length_sequence(const NormalizedHamiltonian& H, const SkewProduct& T,
                                           const std::vector<int>& Ns, const TorusGrid& grid) {
  ShorteningTrace trace;
  std::vector<double> bounds;
  bool have_bounds = true;
  for (std::size_t i = 0; i < Ns.size(); ++i) {
    if (Ns[i] < 1 || (i > 0 && Ns[i] <= Ns[i - 1])) throw PreconditionError("Ns must be positive and increasing");
    trace.Ns.push_back(Ns[i]);
    trace.lengths.push_back(loop_length(birkhoff_hamiltonian(H, T, Ns[i]), grid) / Ns[i]);
    const auto b = geometric_sum_oracle(H, T, Ns[i]);
    if (b)
      bounds.push_back(*b);
    else
      have_bounds = false;
  }
  if (have_bounds) trace.oracle_bounds = std::move(bounds);
  return trace;
}

NormalizedHamiltonian sequential_birkhoff_hamiltonian(const NormalizedHamiltonian& H, const SequentialSystem& S,
                                                      int N) {
  if (N < 1) throw PreconditionError("N must be >= 1");
  if (S.length() < N - 1) throw PreconditionError("underdetermined sequence");
  if (N == 1) return H;
  NormalizedHamiltonian F;
  F.value = [H, S, N](double t, const Eigen::Vector2d& y) {
    PhasePoint x{t, y};
    double s = H.value(x.t, x.y);
    for (int i = 1; i < N; ++i) {
      x = S.step(i, x);
      s += H.value(x.t, x.y);
    }
    return s;
  };
  F.label = "sequential F_" + std::to_string(N) + "(" + H.label + ")";
  return F;
}

GeodesicBreak break_minimal_geodesic(const NormalizedHamiltonian& H, int N, std::int64_t search_budget,
                                     const TorusGrid& grid, int step_count) {
  if (N < 2) throw PreconditionError("N must be >= 2");
  const int n = grid.fiber_size(), n1 = grid.res_y1(), n2 = grid.res_y2();
  Eigen::ArrayXd h0(n);
  for (int c = 0; c < n; ++c) h0(c) = H(0.0, grid.node(c));
  if (h0.maxCoeff() - h0.minCoeff() <= 1e-12 * std::max(1.0, h0.abs().maxCoeff()))
    throw PreconditionError("H(0, .) is constant");

  // Greedy placement: copy i of H(0, .) is shifted by a whole number of cells
  // so that the running sum keeps the smallest sup.
  GeodesicBreak out;
  Eigen::ArrayXd running = h0;
  std::vector<Eigen::Vector2i> cumulative{Eigen::Vector2i::Zero()};
  std::int64_t spent = 0;
  for (int i = 1; i < N; ++i) {
    double best = std::numeric_limits<double>::infinity();
    Eigen::Vector2i best_shift = Eigen::Vector2i::Zero();
    for (int a = 0; a < n1; ++a) {
      for (int b = 0; b < n2; ++b) {
        if (++spent > search_budget) throw BudgetError("no shortening found");
        double m = 0.0;
        for (int p = 0; p < n1 && m < best; ++p)
          for (int q = 0; q < n2; ++q)
            m = std::max(m, std::abs(running(grid.cell_index(p, q)) + h0(grid.cell_index((p + a) % n1, (q + b) % n2))));
        if (m < best) {
          best = m;
          best_shift = {a, b};
        }
      }
    }
    for (int p = 0; p < n1; ++p)
      for (int q = 0; q < n2; ++q)
        running(grid.cell_index(p, q)) += h0(grid.cell_index((p + best_shift(0)) % n1, (q + best_shift(1)) % n2));
    cumulative.push_back(best_shift);
  }

  // T^(i) y at t = 0 is y + s_i, so g_{i+1} is the translation by s_i - s_{i-1}.
  out.conjugators.push_back(CellMap(CellPermutation::identity(n), grid));
  out.shifts.push_back(Eigen::Vector2d::Zero());
  SequentialSystem S;
  const LoopMaps flow = loop_maps(H, step_count);
  S.base.forward = flow.inverse;
  S.base.inverse = flow.forward;
  S.base.homotopy_tag = "inverse flow of H";
  for (int i = 1; i < N; ++i) {
    const Eigen::Vector2i d = cumulative[i] - cumulative[i - 1];
    const CellPermutation p = CellPermutation::translation(n1, n2, d(0), d(1));
    out.conjugators.push_back(CellMap(p, grid));
    out.shifts.push_back(Eigen::Vector2d(static_cast<double>(d(0)) / n1, static_cast<double>(d(1)) / n2));
    S.alphas.push_back(0.0);
    S.conjugators.push_back(out.conjugators.back());
  }
  out.system = S;

  const NormalizedHamiltonian F = sequential_birkhoff_hamiltonian(H, S, N);
  out.a.resize(grid.res_t());
  out.b.resize(grid.res_t());
  parallel_for(grid.res_t(), [&](std::int64_t k) {
    const double t = grid.time(static_cast<int>(k));
    out.a[k] = refined_fiber_sup(F.value, grid, t);
    out.b[k] = N * refined_fiber_sup(H.value, grid, t);
  });
  out.a0 = out.a[0];
  out.b0 = out.b[0];
  for (int k = 0; k < grid.res_t(); ++k) {
    out.a_integral += out.a[k] / grid.res_t();
    out.b_integral += out.b[k] / grid.res_t();
  }
  if (!(out.a0 < out.b0)) throw BudgetError("no shortening found");
  return out;
}

}  // namespace ergoloop
