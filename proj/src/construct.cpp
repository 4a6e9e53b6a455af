#include "ergoloop/construct.hpp"

#include <algorithm>
#include <map>
#include <numeric>

#include "ergoloop/parallel.hpp"

namespace ergoloop {

namespace {

/// F(t, .) for t = a / den, linear between the time nodes of F.
Eigen::ArrayXd fiber_at_exact(const ScalarField& F, std::int64_t a, std::int64_t den) {
  const std::int64_t R = F.grid().res_t();
  a = ((a % den) + den) % den;
  const __int128 x = static_cast<__int128>(a) * R;
  const std::int64_t k = static_cast<std::int64_t>(x / den);
  const double lam = static_cast<double>(static_cast<std::int64_t>(x % den)) / static_cast<double>(den);
  if (lam == 0.0) return F.fiber(static_cast<int>(k));
  return (1.0 - lam) * F.fiber(static_cast<int>(k)) + lam * F.fiber(static_cast<int>((k + 1) % R));
}

Eigen::ArrayXd fiber_at(const ScalarField& F, double t) {
  const int R = F.grid().res_t();
  const double x = CircleCoord::wrap(t) * R;
  int k = static_cast<int>(std::floor(x));
  double lam = x - k;
  if (k >= R) {
    k = R - 1;
    lam = 1.0;
  }
  return (1.0 - lam) * F.fiber(k) + lam * F.fiber((k + 1) % R);
}

double t_lipschitz(const ScalarField& F) {
  const int R = F.grid().res_t();
  double L = 0.0;
  for (int k = 0; k < R; ++k) L = std::max(L, (F.fiber((k + 1) % R) - F.fiber(k)).abs().maxCoeff() * R);
  return L;
}

std::int64_t lcm64(std::int64_t a, std::int64_t b) { return std::lcm(a, b); }

}  // namespace

AveragingOperator multi_target_average(const std::vector<Eigen::ArrayXd>& Hs, double eps, const CoveringOracle& oracle,
                                       int max_iter) {
  if (Hs.empty()) throw PreconditionError("no targets");
  if (!(eps > 0)) throw PreconditionError("eps must be positive");
  const int n = static_cast<int>(Hs.front().size());
  AveragingOperator S(n);
  for (const Eigen::ArrayXd& H : Hs) {
    if (H.size() != n) throw PreconditionError("targets live on different grids");
    Eigen::ArrayXd Hc = S.apply(H);
    Hc -= Hc.mean();
    const double sup = Hc.abs().maxCoeff();
    if (sup < eps) continue;
    const double scale = std::max(1.0, sup);
    S = compose_averaging(flatten_sup(Hc / scale, oracle, eps / scale, max_iter), S);
  }
  for (const Eigen::ArrayXd& H : Hs)
    if (!(S.apply(H).abs().maxCoeff() < eps)) throw CertificateError("a target stayed above eps");
  return S;
}

AveragingOperator multi_target_average(const std::vector<ScalarField>& Hs, double eps) {
  if (Hs.empty()) throw PreconditionError("no targets");
  const TorusGrid& g = Hs.front().grid();
  std::vector<Eigen::ArrayXd> arrays;
  for (const auto& H : Hs) {
    if (H.domain() != Domain::kFiber || !(H.grid() == g)) throw PreconditionError("targets must be fiber fields on one grid");
    if (sup_norm(H) > 1.0 + 1e-12) throw PreconditionError("targets need ||H|| <= 1");
    arrays.push_back(H.samples());
  }
  return multi_target_average(arrays, eps, torus_covering_oracle(g.res_y1(), g.res_y2()));
}

ScalarField fiberwise_center(const ScalarField& F) {
  ScalarField out = F;
  for (int k = 0; k < out.fiber_count(); ++k) {
    auto f = out.fiber(k);
    f -= f.mean();
  }
  return out;
}

Averager covering_averager(int n1, int n2) {
  const CoveringOracle oracle = torus_covering_oracle(n1, n2);
  return [oracle](const std::vector<Eigen::ArrayXd>& targets, double eps) {
    return multi_target_average(targets, eps, oracle);
  };
}

Averager translation_averager(int n1, int n2) {
  auto fam = std::make_shared<PermutationFamily>(n1 * n2);
  for (int b = 0; b < n2; ++b)
    for (int a = 0; a < n1; ++a) fam->add(CellPermutation::translation(n1, n2, a, b));
  std::shared_ptr<const PermutationFamily> stage = fam;
  return [stage](const std::vector<Eigen::ArrayXd>& targets, double eps) {
    AveragingOperator S(stage);
    for (const auto& H : targets)
      if (!(S.apply(H).abs().maxCoeff() < eps)) throw CertificateError("a target stayed above eps");
    return S;
  };
}

// --------------------------------------------------------------------------

StagedLoop::StagedLoop(AveragingOperator op) : op_(std::move(op)) {
  for (const auto& s : op_.stages()) {
    std::vector<std::int64_t> cum{0};
    for (std::int64_t j = 0; j < s->member_count(); ++j) cum.push_back(cum.back() + s->weight(j));
    cumulative_.push_back(std::move(cum));
  }
}

std::int64_t StagedLoop::member_at(std::size_t stage, std::int64_t position) const {
  const auto& cum = cumulative_[stage];
  position = std::clamp<std::int64_t>(position, 0, cum.back() - 1);
  return static_cast<std::int64_t>(std::upper_bound(cum.begin(), cum.end(), position) - cum.begin()) - 1;
}

std::vector<std::int64_t> StagedLoop::digits_exact(std::int64_t a, std::int64_t den) const {
  if (den < 1) throw PreconditionError("denominator must be positive");
  __int128 num = ((a % den) + den) % den, d = den;
  std::vector<std::int64_t> out;
  for (std::size_t i = 0; i < cumulative_.size(); ++i) {
    const std::int64_t Ni = cumulative_[i].back();
    const __int128 v = num * Ni;
    const std::int64_t j = member_at(i, static_cast<std::int64_t>(v / d));
    const std::int64_t w = cumulative_[i][j + 1] - cumulative_[i][j];
    out.push_back(j);
    num = v - static_cast<__int128>(cumulative_[i][j]) * d;
    d *= w;
    if (d > (static_cast<__int128>(1) << 100)) throw BudgetError("exact digit extraction overflows");
  }
  return out;
}

std::vector<std::int64_t> StagedLoop::digits(double s) const {
  long double x = CircleCoord::wrap(s);
  std::vector<std::int64_t> out;
  for (std::size_t i = 0; i < cumulative_.size(); ++i) {
    const long double pos = x * static_cast<long double>(cumulative_[i].back());
    const std::int64_t j = member_at(i, static_cast<std::int64_t>(std::floor(pos)));
    const long double w = static_cast<long double>(cumulative_[i][j + 1] - cumulative_[i][j]);
    x = std::clamp((pos - cumulative_[i][j]) / w, 0.0L, std::nextafter(1.0L, 0.0L));
    out.push_back(j);
  }
  return out;
}

CellPermutation StagedLoop::compose(const std::vector<std::int64_t>& digits) const {
  CellPermutation G = CellPermutation::identity(op_.cells());
  for (std::size_t i = 0; i < digits.size(); ++i) G = op_.stages()[i]->member(digits[i]).after(G);
  return G;
}

CellPermutation StagedLoop::at(double s) const { return compose(digits(s)); }

CellPermutation StagedLoop::at_exact(std::int64_t a, std::int64_t den) const { return compose(digits_exact(a, den)); }

CellPermutation PeriodicLoop::at(double t) const {
  const long double x = static_cast<long double>(CircleCoord::wrap(t)) * M;
  return h.at(static_cast<double>(x - std::floor(x)));
}

CellPermutation PeriodicLoop::at_exact(std::int64_t a, std::int64_t res) const {
  a = ((a % res) + res) % res;
  return h.at_exact(static_cast<std::int64_t>((static_cast<__int128>(a) * M) % res), res);
}

// --------------------------------------------------------------------------

Eigen::ArrayXd piecewise_integral(const ScalarField& F, const PeriodicLoop& g, long double piece_cap) {
  const std::int64_t M = g.M;
  if (g.h.piece_count() * M > piece_cap) throw BudgetError("too many loop pieces for piecewise integration");
  const int R = F.grid().res_t();
  const int n = F.grid().fiber_size();
  const auto& stages = g.h.op().stages();
  Eigen::ArrayXd acc = Eigen::ArrayXd::Zero(n);

  // Exact integral of the t-linear interpolant over [t0, t1], 0 <= t0 < t1 <= 1.
  auto integrate = [&](double t0, double t1) {
    Eigen::ArrayXd out = Eigen::ArrayXd::Zero(n);
    double a = t0;
    while (a < t1) {
      const double next_node = (std::floor(a * R + 1e-12) + 1) / R;
      const double b = std::min(t1, next_node);
      if (b > a) out += 0.5 * (b - a) * (fiber_at(F, a) + fiber_at(F, b));
      a = b;
    }
    return out;
  };

  std::function<void(std::size_t, long double, long double, const CellPermutation&)> walk =
      [&](std::size_t stage, long double s0, long double len, const CellPermutation& G) {
        if (stage == stages.size()) {
          for (std::int64_t i = 0; i < M; ++i) {
            const double t0 = static_cast<double>((i + s0) / M), t1 = static_cast<double>((i + s0 + len) / M);
            acc += G.pullback(integrate(t0, t1));
          }
          return;
        }
        const auto& fam = *stages[stage];
        const long double N = static_cast<long double>(fam.size());
        long double cum = 0;
        for (std::int64_t j = 0; j < fam.member_count(); ++j) {
          const long double w = static_cast<long double>(fam.weight(j));
          walk(stage + 1, s0 + len * cum / N, len * w / N, fam.member(j).after(G));
          cum += w;
        }
      };
  walk(0, 0.0L, 1.0L, CellPermutation::identity(n));
  return acc;
}

Property21A loop_for_property_21A(const ScalarField& F, double eps, const Rational& r, const Averager& averager,
                                  int N_cap, int period_subsamples) {
  if (F.domain() != Domain::kProduct) throw PreconditionError("F must be a field on S1 x Y");
  if (!(eps > 0)) throw PreconditionError("eps must be positive");
  if (period_subsamples < 1) throw PreconditionError("period subsamples must be positive");
  for (const double m : fiber_means(F))
    if (std::abs(m) > 1e-9 * std::max(1.0, sup_norm(F))) throw PreconditionError("F must be fiberwise centered");
  const int R = F.grid().res_t();
  const int n = F.grid().fiber_size();

  Property21AReport rep;
  rep.eps = eps;
  rep.lipschitz = t_lipschitz(F);
  // |F(t') - F(t'')| <= L/N < eps/9 whenever |t' - t''| < 1/N; 10% margin.
  const double need = 1.1 * 9.0 * rep.lipschitz / eps;
  if (need >= N_cap) throw Error("grid too coarse for ε");
  rep.N = static_cast<int>(std::floor(need)) + 1;

  std::vector<Eigen::ArrayXd> targets;
  for (int i = 0; i < rep.N; ++i) {
    Eigen::ArrayXd f = fiber_at_exact(F, i, rep.N);
    f -= f.mean();
    targets.push_back(std::move(f));
  }
  const AveragingOperator S = averager(targets, eps / 9);
  rep.stage_count = S.stage_count();
  for (const auto& f : targets) {
    rep.p_norms.push_back(S.apply(f).abs().maxCoeff());
    if (!(rep.p_norms.back() < eps / 9)) throw CertificateError("target p_i not averaged below eps/9");
  }

  const std::int64_t base = lcm64(r.den, R);
  rep.M = (rep.N / base + 1) * base;
  rep.res_t = lcm64(lcm64(rep.M, r.den), R);
  const std::int64_t M = rep.M;
  PeriodicLoop loop{StagedLoop(S), M, r};

  // J_i = (1/M) S(F(q_i, .)); F(q_i) is a blend of two time nodes, so S is
  // applied per node.
  std::vector<Eigen::ArrayXd> SF(static_cast<std::size_t>(R));
  parallel_for(R, [&](std::int64_t k) { SF[k] = S.apply(Eigen::ArrayXd(F.fiber(static_cast<int>(k)))); });
  rep.J_bound = eps / (3.0 * M);
  for (std::int64_t i = 0; i < M; ++i) {
    const __int128 x = static_cast<__int128>(i) * R;
    const std::int64_t k = static_cast<std::int64_t>(x / M);
    const double lam = static_cast<double>(static_cast<std::int64_t>(x % M)) / M;
    const double J = ((1 - lam) * SF[k] + lam * SF[(k + 1) % R]).abs().maxCoeff() / M;
    rep.J_abs.push_back(J);
    rep.J_sum += J;
    if (!(J < rep.J_bound)) throw CertificateError("|J_i| < eps/(3M) fails");
  }

  // Frozen-midpoint quadrature: on [q_i, q_i+1], F(t, .) is replaced by its
  // value at the midpoint, an error of at most L/(4M) in total.
  Eigen::ArrayXd mid = Eigen::ArrayXd::Zero(n);
  for (std::int64_t i = 0; i < M; ++i) mid += fiber_at_exact(F, 2 * i + 1, 2 * M);
  const Eigen::ArrayXd Q = S.apply(Eigen::ArrayXd(mid / static_cast<double>(M)));
  rep.quadrature_max = Q.abs().maxCoeff();
  rep.error_bar = rep.lipschitz / (4.0 * M);
  if (!(rep.quadrature_max + rep.error_bar < eps)) throw CertificateError("quadrature bound for the loop integral fails");

  // Independent evaluation of I(y): every constant piece when there are few,
  // otherwise the node form, exact for F linear in t because the q_i contain
  // all time nodes of F and the linear parts cancel over a period.
  if (loop.h.piece_count() * M <= 2e6L) {
    rep.integral = piecewise_integral(F, loop);
    rep.recheck_method = "piecewise-exact";
  } else {
    Eigen::ArrayXd nodes = Eigen::ArrayXd::Zero(n);
    for (std::int64_t i = 0; i < M; ++i) nodes += fiber_at_exact(F, i, M);
    rep.integral = S.apply(Eigen::ArrayXd(nodes / static_cast<double>(M)));
    rep.recheck_method = "node-linear-exact";
  }
  rep.recheck_max = rep.integral.abs().maxCoeff();
  if (!(rep.recheck_max < eps)) throw CertificateError("independent loop integral exceeds eps");

  // g(t + r) = g(t) on a sampling grid that resolves every h-digit period.
  const std::int64_t res = rep.res_t * period_subsamples;
  const std::int64_t shift = static_cast<std::int64_t>((static_cast<__int128>(r.num) * res / r.den) % res);
  std::map<std::int64_t, CellPermutation> cache;
  auto g_at = [&](std::int64_t a) -> const CellPermutation& {
    const std::int64_t key = static_cast<std::int64_t>((static_cast<__int128>(((a % res) + res) % res) * M) % res);
    auto it = cache.find(key);
    if (it == cache.end()) it = cache.emplace(key, loop.h.at_exact(key, res)).first;
    return it->second;
  };
  rep.period_exact = true;
  for (std::int64_t a = 0; a < res && rep.period_exact; ++a)
    if (!(g_at(a) == g_at(a + shift))) rep.period_exact = false;
  rep.sampled_t = res;
  if (!rep.period_exact) throw CertificateError("g(t + r) = g(t) fails");
  return {std::move(loop), std::move(rep)};
}

Property21A loop_for_property_21A(const ScalarField& F, double eps, const Rational& r) {
  return loop_for_property_21A(F, eps, r, covering_averager(F.grid().res_y1(), F.grid().res_y2()));
}

// --------------------------------------------------------------------------

MinimalityConjugator conjugator_for_minimality(const TorusGrid& grid_in, const std::vector<int>& delta_in,
                                               const std::vector<int>& V_in, const Rational& r) {
  const int n1 = grid_in.res_y1(), n2 = grid_in.res_y2(), n = grid_in.fiber_size();
  std::vector<int> V = V_in;
  std::sort(V.begin(), V.end());
  V.erase(std::unique(V.begin(), V.end()), V.end());
  if (V.empty() || delta_in.empty()) throw PreconditionError("U = Delta x V must be non-empty");
  for (int c : V)
    if (c < 0 || c >= n) throw PreconditionError("V cell outside the fiber grid");
  for (int k : delta_in)
    if (k < 0 || k >= grid_in.res_t()) throw PreconditionError("Delta cell outside the time grid");

  MinimalityConjugator out{ConjugatedShift{grid_in, {}, 0.0, r}, {}, {}, {}, V, 1, false, false};
  const std::int64_t R0 = grid_in.res_t();
  out.lift = static_cast<int>(lcm64(R0, r.den) / R0);
  const int R = static_cast<int>(R0 * out.lift);
  out.shift.grid = TorusGrid(R, n1, n2);
  for (int k : delta_in)
    for (int s = 0; s < out.lift; ++s) out.delta.push_back(k * out.lift + s);
  std::sort(out.delta.begin(), out.delta.end());
  out.delta.erase(std::unique(out.delta.begin(), out.delta.end()), out.delta.end());

  // Greedy cover of Y by cell translates of V.
  std::vector<char> covered(static_cast<std::size_t>(n), 0);
  int remaining = n;
  while (remaining > 0) {
    int best = -1;
    Eigen::Vector2i best_t = Eigen::Vector2i::Zero();
    for (int a = 0; a < n1; ++a) {
      for (int b = 0; b < n2; ++b) {
        int gain = 0;
        for (int c : V) gain += !covered[grid_in.cell_index((c / n2 + a) % n1, (c % n2 + b) % n2)];
        if (gain > best) {
          best = gain;
          best_t = {a, b};
        }
      }
    }
    for (int c : V) {
      const int d = grid_in.cell_index((c / n2 + best_t(0)) % n1, (c % n2 + best_t(1)) % n2);
      if (!covered[d]) {
        covered[d] = 1;
        --remaining;
      }
    }
    out.translations.push_back(best_t);
  }

  // One translate per residue of Delta's t-cells modulo the period 1/den(r).
  const int P = static_cast<int>(R / r.den);
  std::vector<int> residues;
  std::vector<int> slot(static_cast<std::size_t>(P), -1);
  for (int k : out.delta) {
    const int rho = k % P;
    if (slot[rho] == -1 && residues.size() < out.translations.size()) {
      slot[rho] = static_cast<int>(residues.size());
      residues.push_back(rho);
    }
  }
  if (residues.size() < out.translations.size()) throw Error("sweep failed");
  for (int k = 0; k < R; ++k) {
    const int s = slot[k % P];
    out.g_cells.push_back(s < 0 ? CellPermutation::identity(n)
                                : CellPermutation::translation(n1, n2, out.translations[s](0), out.translations[s](1)));
  }

  std::vector<char> hit(static_cast<std::size_t>(n), 0);
  for (int k : out.delta)
    for (int c : V) hit[out.g_cells[k](c)] = 1;
  out.meets_every_circle = std::all_of(hit.begin(), hit.end(), [](char h) { return h != 0; });
  const int rs = static_cast<int>((static_cast<std::int64_t>(r.num) * R / r.den) % R);
  out.commutes = true;
  for (int k = 0; k < R; ++k)
    if (!(out.g_cells[k] == out.g_cells[((k + rs) % R + R) % R])) out.commutes = false;
  if (!out.meets_every_circle) throw CertificateError("phi(U) misses a circle");

  auto cells = std::make_shared<const std::vector<CellPermutation>>(out.g_cells);
  out.shift.g = [cells, R](double t) { return (*cells)[std::min(R - 1, static_cast<int>(CircleCoord::wrap(t) * R))]; };
  return out;
}

namespace {

/// t-cells met by [k, k + 1) + alpha R.
std::pair<int, int> shifted_range(int k, double alpha, int R) {
  const double lo = k + CircleCoord::wrap(alpha) * R;
  const int first = static_cast<int>(std::floor(lo + 1e-9));
  const int last = static_cast<int>(std::ceil(lo + 1 - 1e-9)) - 1;
  return {first, last};
}

}  // namespace

CellDynamics conjugated_cell_dynamics(const MinimalityConjugator& c, double alpha) {
  const int R = c.shift.grid.res_t(), n = c.shift.grid.fiber_size();
  auto g = std::make_shared<const std::vector<CellPermutation>>(c.g_cells);
  return [g, R, n, alpha](std::int64_t cell, std::vector<std::int64_t>& out) {
    const int k = static_cast<int>(cell / n), y = static_cast<int>(cell % n);
    const int gy = (*g)[k](y);
    const auto [first, last] = shifted_range(k, alpha, R);
    for (int kk = first; kk <= last; ++kk) {
      const int k2 = kk % R;
      out.push_back(static_cast<std::int64_t>(k2) * n + (*g)[k2].inverse_of(gy));
    }
  };
}

MinimalityCertificate minimality_certificate(const MinimalityConjugator& c, double alpha, int max_iter,
                                             int identity_steps) {
  const int R = c.shift.grid.res_t(), n = c.shift.grid.fiber_size();
  const std::int64_t total = static_cast<std::int64_t>(R) * n;
  std::vector<std::int64_t> U;
  for (int k : c.delta)
    for (int y : c.V) U.push_back(static_cast<std::int64_t>(k) * n + y);
  const CellDynamics dyn = conjugated_cell_dynamics(c, alpha);

  MinimalityCertificate cert;
  cert.coverage = minimality_diagnostic(dyn, total, U, max_iter);

  // (phi^-1 S phi)^i U against phi^-1 (S^i (phi U)), set by set.
  std::vector<char> L(static_cast<std::size_t>(total), 0), W(static_cast<std::size_t>(total), 0);
  for (std::int64_t u : U) {
    L[u] = 1;
    const int k = static_cast<int>(u / n);
    W[static_cast<std::int64_t>(k) * n + c.g_cells[k](static_cast<int>(u % n))] = 1;
  }
  std::vector<std::int64_t> buf;
  cert.conjugation_identity = true;
  for (int i = 1; i <= identity_steps; ++i) {
    std::vector<char> L2(L.size(), 0), W2(W.size(), 0);
    for (std::int64_t x = 0; x < total; ++x) {
      if (L[x]) {
        buf.clear();
        dyn(x, buf);
        for (std::int64_t z : buf) L2[z] = 1;
      }
      if (W[x]) {
        const auto [first, last] = shifted_range(static_cast<int>(x / n), alpha, R);
        for (int kk = first; kk <= last; ++kk) W2[static_cast<std::int64_t>(kk % R) * n + x % n] = 1;
      }
    }
    L.swap(L2);
    W.swap(W2);
    for (std::int64_t x = 0; x < total && cert.conjugation_identity; ++x) {
      const int k = static_cast<int>(x / n);
      const bool in_pullback = W[static_cast<std::int64_t>(k) * n + c.g_cells[k](static_cast<int>(x % n))];
      if (static_cast<bool>(L[x]) != in_pullback) cert.conjugation_identity = false;
    }
    cert.checked_steps = i;
    if (!cert.conjugation_identity) break;
  }
  return cert;
}

UniqueErgodicityConjugator conjugator_for_unique_ergodicity(const ScalarField& F, double eps, const Rational& r,
                                                            const Averager& averager) {
  if (F.domain() != Domain::kProduct) throw PreconditionError("F must be a field on S1 x Y");
  if (!is_zero_mean(F)) throw PreconditionError("F must have zero mean");
  Property21A loop = loop_for_property_21A(fiberwise_center(F), eps / 2, r, averager);
  UniqueErgodicityConjugator out{ConjugatedShift{F.grid(), {}, 0.0, r}, loop, loop.report.recheck_max};
  if (!(out.integral_max < eps / 2)) throw CertificateError("|I(y)| < eps/2 fails");
  auto g = std::make_shared<const PeriodicLoop>(loop.loop);
  out.shift.g = [g](double t) { return g->at(t); };
  return out;
}

ErgodicSumCertificate ergodic_sum_certificate(const UniqueErgodicityConjugator& c, const ScalarField& F, double alpha,
                                              double eps, int N_max) {
  if (F.domain() != Domain::kProduct) throw PreconditionError("F must be a field on S1 x Y");
  if (N_max < 1) throw PreconditionError("N_max must be positive");
  const int R = F.grid().res_t(), n = F.grid().fiber_size();
  const PeriodicLoop& g = c.loop.loop;
  std::map<std::vector<std::int64_t>, CellPermutation> cache;
  auto g_at = [&](double t) -> const CellPermutation& {
    const long double x = static_cast<long double>(t) * g.M;
    auto d = g.h.digits(static_cast<double>(x - std::floor(x)));
    auto it = cache.find(d);
    if (it == cache.end()) it = cache.emplace(d, g.h.compose(d)).first;
    return it->second;
  };

  Eigen::ArrayXXd sums = Eigen::ArrayXXd::Zero(n, R);
  ErgodicSumCertificate cert;
  for (int N = 1; N <= N_max; ++N) {
    const long double shift = static_cast<long double>(N - 1) * alpha;
    for (int k = 0; k < R; ++k) {
      long double t = static_cast<long double>(k) / R + shift;
      t -= std::floor(t);
      const double td = static_cast<double>(t);
      sums.col(k) += g_at(td).pullback(fiber_at(F, td));
    }
    const double sup = sums.abs().maxCoeff() / N;
    cert.N = N;
    cert.sup = sup;
    if (sup < eps) {
      cert.reached = true;
      break;
    }
  }
  return cert;
}

}  // namespace ergoloop
