// One PASS/FAIL line per acceptance criterion. Exit status is nonzero when a
// criterion fails that is not listed as known-infeasible in the README.
#include <chrono>
#include <functional>
#include <iostream>
#include <numeric>
#include <random>
#include <set>
#include <sstream>

#include "ergoloop/construct.hpp"
#include "ergoloop/hofer.hpp"
#include "ergoloop/run.hpp"
#include "ergoloop/shortening.hpp"

using namespace ergoloop;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

struct Outcome {
  bool pass = false;
  bool known_gap = false;  // failure documented as out of reach
  std::string detail;
};

NormalizedHamiltonian cos_y2() { return NormalizedHamiltonian::from_monomial(TrigMonomial{1.0, 0, 0, 1, 0.0}); }

std::vector<int> random_subset(int n, int k, std::mt19937_64& rng) {
  std::vector<int> all(static_cast<std::size_t>(n));
  std::iota(all.begin(), all.end(), 0);
  std::shuffle(all.begin(), all.end(), rng);
  all.resize(static_cast<std::size_t>(k));
  std::sort(all.begin(), all.end());
  return all;
}

Outcome shortening_decay() {
  const auto t0 = Clock::now();
  const TorusGrid g(64, 64, 64);
  const SkewProduct T = furstenberg_system(kGolden, kSqrt2m1);
  const std::vector<int> Ns{10, 100, 1000};
  const ShorteningTrace tr = normalized_length_sequence(cos_y2(), T, Ns, g);
  const double secs = seconds_since(t0);
  double worst = 0;
  for (std::size_t i = 0; i < Ns.size(); ++i) {
    const double N = Ns[i];
    const double oracle = std::abs(std::sin(std::numbers::pi * N * kSqrt2m1)) / (N * std::sin(std::numbers::pi * kSqrt2m1));
    worst = std::max(worst, std::abs(tr.lengths[i] - oracle));
  }
  std::ostringstream d;
  d << "max |ell_N - oracle| = " << worst << ", ell_1000 = " << tr.lengths[2] << ", " << secs << " s";
  return {worst <= 1e-9 && tr.lengths[2] <= 1.1e-3 && secs < 10, false, d.str()};
}

Outcome negative_control() {
  const TorusGrid g(64, 64, 64);
  const double len = loop_length(cos_y2(), g);
  const ShorteningTrace tr = normalized_length_sequence(cos_y2(), identity_system(kGolden), {1, 10, 100, 1000}, g);
  double worst = 0;
  for (double l : tr.lengths) worst = std::max(worst, std::abs(l - len));
  std::ostringstream d;
  d << "length(H) = " << len << ", max |ell_N - length(H)| = " << worst << " (float rounding only)";
  return {worst <= 1e-12, false, d.str()};
}

Outcome contraction() {
  const auto t0 = Clock::now();
  std::mt19937_64 rng(2024);
  const std::vector<int> sizes{8, 16, 32, 64};
  bool ok = true;
  int fields = 0;
  std::size_t steps = 0;
  double worst_sup = 0;
  std::string why;
  for (int f = 0; f < 52; ++f) {
    const int n = sizes[f % sizes.size()];
    const CoveringOracle oracle = torus_covering_oracle(n, n);
    const Eigen::ArrayXd H = random_zero_mean_field(n, n, rng);
    const double c = contraction_constant(oracle({0}, n * n).c1, oracle({0}, n * n).c2);
    const int budget = static_cast<int>(std::ceil(3 * c / 0.05));
    try {
      const FlattenResult res = flatten_max(H, oracle, 0.05, budget);
      const FlattenTrace& tr = res.trace;
      for (std::size_t i = 0; i + 1 < tr.m.size(); ++i) {
        ok = ok && tr.m[i + 1] <= tr.m[i] * (1 - tr.m[i] / tr.c) + 1e-10;
        ok = ok && tr.reports[i].mu_A >= tr.reports[i].mu_A_bound;
        ok = ok && tr.reports[i].min_ratio >= tr.reports[i].ratio_bound;
      }
      ok = ok && std::abs(tr.c - 2 * (3 * tr.c2 + tr.c1)) < 1e-9 * tr.c;
      steps += tr.m.size() - 1;
      const AveragingOperator S = flatten_sup(H, oracle, 0.05, budget);
      const double sup = S.apply(H).abs().maxCoeff();
      worst_sup = std::max(worst_sup, sup);
      ok = ok && sup < 0.05;
    } catch (const Error& e) {
      ok = false;
      why = std::string(", error: ") + e.what();
    }
    ++fields;
  }
  const double secs = seconds_since(t0);
  std::ostringstream d;
  d << fields << " fields on 8..64 grids, " << steps << " max-steps, worst final sup " << worst_sup << ", " << secs << " s"
    << why;
  return {ok && secs < 60, false, d.str()};
}

// Smallest translate of A on the n x n torus, as a sorted list.
std::vector<int> canonical(const std::vector<int>& A, int n) {
  std::vector<int> best;
  for (int a = 0; a < n; ++a)
    for (int b = 0; b < n; ++b) {
      std::vector<int> t;
      for (int c : A) t.push_back(((c / n + a) % n) * n + (c % n + b) % n);
      std::sort(t.begin(), t.end());
      if (best.empty() || t < best) best = t;
    }
  return best;
}

bool covering_holds(const Lattice& L, const std::vector<int>& A, int r) {
  const GlobalCovering g = covering_global(L, strip_charts(L, r), A);
  const std::int64_t a = static_cast<std::int64_t>(g.family.source.size());
  const CoveringVerdict v = verify_covering(g.family, a, g.c1, g.c2);
  // Integer recount from fully materialized members.
  std::vector<std::int64_t> nu(static_cast<std::size_t>(g.family.cells), 0);
  for (std::int64_t j = 0; j < g.family.maps.member_count(); ++j) {
    const CellPermutation m = g.family.maps.member(j);
    for (int s : g.family.source) nu[m(s)] += g.family.maps.weight(j);
  }
  return v.pass && nu == v.counts && g.c1 == 289.0 * r && g.c2 == 4.0 * r;
}

Outcome covering_inequality() {
  const auto t0 = Clock::now();
  const int n = 8;
  const Lattice L{n, n, true};
  bool ok = true;
  // Exhaustive over translation classes for |A| <= 5: every class has a
  // member containing cell 0.
  std::set<std::vector<int>> classes;
  std::vector<int> A{0};
  std::function<void(int)> extend = [&](int next) {
    classes.insert(canonical(A, n));
    if (A.size() == 5) return;
    for (int c = next; c < 64; ++c) {
      A.push_back(c);
      extend(c + 1);
      A.pop_back();
    }
  };
  extend(1);
  for (const auto& C : classes) ok = ok && covering_holds(L, C, 1);
  // Random sets for 6 <= |A| <= 16 and more charts.
  std::mt19937_64 rng(44);
  int sampled = 0;
  for (int k = 6; k <= 16; ++k)
    for (int s = 0; s < 40; ++s, ++sampled) ok = ok && covering_holds(L, random_subset(64, k, rng), 1 << (s % 3));
  const double secs = seconds_since(t0);
  // sum_{k<=16} C(64, k) / 64 translation classes.
  long double total = 0, binom = 1;
  for (int k = 1; k <= 16; ++k) {
    binom = binom * (64 - k + 1) / k;
    total += binom;
  }
  std::ostringstream d;
  d << (ok ? "all checked sets pass" : "a checked set FAILS") << " (" << classes.size() << " classes with |A| <= 5 exhaustive, "
    << sampled << " random sets with |A| 6..16, " << secs << " s); exhaustive enumeration up to |A| = 16 needs about "
    << static_cast<double>(total / 64) << " classes and is not run";
  return {false, ok, d.str()};
}

Outcome transport() {
  std::mt19937_64 rng(55);
  const Lattice L{32, 32, false};
  std::vector<int> cells(static_cast<std::size_t>(L.size()));
  std::iota(cells.begin(), cells.end(), 0);
  bool ok = true;
  int passed = 0;
  for (int trial = 0; trial < 100; ++trial) {
    const std::vector<int> A = random_subset(L.size(), 579 + static_cast<int>(rng() % 400), rng);
    std::vector<int> outside;
    std::set_difference(cells.begin(), cells.end(), A.begin(), A.end(), std::back_inserter(outside));
    const std::vector<int> B{outside[rng() % outside.size()]};
    const auto plans = transport_4_2_C(L, A, B);
    bool good = plans_cover(plans, A, B);
    std::set<int> hit;
    for (const auto& p : plans) {
      std::vector<char> in(static_cast<std::size_t>(L.size()), 0);
      for (int c : p.support) in[c] = 1;
      for (int c = 0; c < L.size(); ++c)
        if (!in[c] && p.map(c) != c) good = false;
      for (int a : A) hit.insert(p.map(a));
    }
    for (int b : B) good = good && hit.count(b);
    passed += good;
    ok = ok && good;
  }
  int rejected = 0;
  for (int trial = 0; trial < 20; ++trial) {
    const std::vector<int> A = random_subset(L.size(), 1 + static_cast<int>(rng() % 578), rng);
    std::vector<int> outside;
    std::set_difference(cells.begin(), cells.end(), A.begin(), A.end(), std::back_inserter(outside));
    try {
      transport_4_2_C(L, A, {outside.front()});
    } catch (const PreconditionError& e) {
      rejected += std::string(e.what()) == "hypothesis mu(A) > 2C mu(B) fails";
    }
  }
  std::ostringstream d;
  d << passed << "/100 fixtures covered with fixed complements, " << rejected << "/20 violating fixtures rejected by name";
  return {ok && rejected == 20, false, d.str()};
}

Outcome construction() {
  const TorusGrid g(16, 16, 16);
  const ScalarField F = fiberwise_center(
      sample([](double t, const Eigen::Vector2d& y) { return std::cos(kTwoPi * (t + y(1))); }, g, Domain::kProduct));
  try {
    const Property21A res = loop_for_property_21A(F, 0.1, Rational(1, 3));
    const Property21AReport& rep = res.report;
    bool J_ok = true;
    for (double J : rep.J_abs) J_ok = J_ok && J < rep.J_bound;
    std::ostringstream d;
    d << "16x16x16, M = " << rep.M << ", period exact at " << rep.sampled_t << " t, quadrature " << rep.quadrature_max
      << " + " << rep.error_bar << ", recheck " << rep.recheck_max << " (" << rep.recheck_method << "), " << rep.J_abs.size()
      << " J_i below " << rep.J_bound;
    return {rep.period_exact && rep.quadrature_max + rep.error_bar < 0.1 && rep.recheck_max < 0.1 && J_ok, false, d.str()};
  } catch (const Error& e) {
    return {false, false, e.what()};
  }
}

// int F(t, g(t)^{-1} y) dt by the midpoint of every constant piece; exact for
// F linear in t on each piece.
double midpoint_integral_max(const ScalarField& F, const PeriodicLoop& loop) {
  const int R = F.grid().res_t();
  std::int64_t pieces = 1;
  for (const auto& s : loop.h.op().stages()) pieces *= s->size();
  const std::int64_t cells = pieces * loop.M;
  Eigen::ArrayXd acc = Eigen::ArrayXd::Zero(F.grid().fiber_size());
  for (std::int64_t i = 0; i < cells; ++i) {
    const double t = (i + 0.5) / static_cast<double>(cells);
    const double x = t * R;
    const int k = static_cast<int>(x);
    const double lam = x - k;
    acc += loop.at(t).pullback(Eigen::ArrayXd((1 - lam) * F.fiber(k) + lam * F.fiber((k + 1) % R)));
  }
  return (acc / static_cast<double>(cells)).abs().maxCoeff();
}

Outcome conjugators() {
  const auto t0 = Clock::now();
  const TorusGrid g(32, 32, 32);
  const Rational r(1, 4);
  std::ostringstream d;
  bool ok = true;
  // Case 1: U = (first quarter of t) x (lower-left quarter of Y), and
  // U = (first half of t) x (left half of Y).
  for (int variant = 0; variant < 2; ++variant) {
    std::vector<int> delta, V;
    for (int k = 0; k < (variant == 0 ? 8 : 16); ++k) delta.push_back(k);
    for (int i = 0; i < 16; ++i)
      for (int j = 0; j < (variant == 0 ? 16 : 32); ++j) V.push_back(g.cell_index(i, j));
    const MinimalityConjugator mc = conjugator_for_minimality(g, delta, V, r);
    const MinimalityCertificate cert = minimality_certificate(mc, kGolden, 100000);
    ok = ok && cert.coverage.covered && cert.conjugation_identity && mc.commutes;
    d << "case 1 mu(U) = " << (variant == 0 ? "1/16" : "1/4") << " covered at step " << cert.coverage.step << "; ";
  }
  // Case 2.
  const std::vector<std::pair<std::string, FieldFunction>> fields{
      {"cos(2 pi y2)", [](double, const Eigen::Vector2d& y) { return std::cos(kTwoPi * y(1)); }},
      {"cos(2 pi (t + y2))", [](double t, const Eigen::Vector2d& y) { return std::cos(kTwoPi * (t + y(1))); }}};
  const double eps = 0.1;
  for (const auto& [name, f] : fields) {
    const ScalarField F = sample(f, g, Domain::kProduct);
    const UniqueErgodicityConjugator uc = conjugator_for_unique_ergodicity(F, eps, r, translation_averager(32, 32));
    const ErgodicSumCertificate es = ergodic_sum_certificate(uc, F, kGolden, eps, 100000);
    const double I = midpoint_integral_max(F, uc.loop.loop);
    ok = ok && es.reached && uc.integral_max < eps / 2 && I < eps / 2;
    d << "case 2 " << name << ": ||G_N|| = " << es.sup << " at N = " << es.N << ", sup|I| = " << uc.integral_max
      << " (recheck " << I << "); ";
  }
  d << seconds_since(t0) << " s";
  return {ok, false, d.str()};
}

double composition_deviation(const NormalizedHamiltonian& H2, const NormalizedHamiltonian& H1, int steps) {
  NormalizedHamiltonian K = compose_loops(H2, H1, steps);
  K.flow.reset();
  const TorusGrid g(2, 16, 16);
  double worst = 0;
  for (int c = 0; c < g.fiber_size(); ++c) {
    const Eigen::Vector2d y = g.node(c);
    const Eigen::Vector2d product = wrap(H2.flow->forward(1.0, H1.flow->forward(1.0, y)));
    worst = std::max(worst, torus_distance(integrate_flow(K, y, 0.0, 1.0, steps), product));
  }
  return worst;
}

double rk4_error(int steps) {
  const NormalizedHamiltonian H = reparametrized_shear();
  const TorusGrid g(2, 8, 8);
  double worst = 0;
  for (int c = 0; c < g.fiber_size(); ++c) {
    const Eigen::Vector2d y = g.node(c) + Eigen::Vector2d(0.03, 0.01);
    worst = std::max(worst, torus_distance(integrate_flow(H, y, 0.0, 0.25, steps), wrap(H.flow->forward(0.25, y))));
  }
  return worst;
}

Outcome hofer() {
  const NormalizedHamiltonian H2 = cross_shear_hamiltonian(), H1 = shear_hamiltonian();
  const double d2048 = composition_deviation(H2, H1, 2048), d4096 = composition_deviation(H2, H1, 4096);
  const TorusGrid g(64, 32, 32);
  const double len = loop_length(reparametrized_shear(), g);
  const double e1 = rk4_error(16), e2 = rk4_error(32), e3 = rk4_error(64);
  const bool comp = d2048 <= 1e-6;
  const bool length_ok = std::abs(len - 2.0) <= 2.0 / g.res_t();
  const bool ratio_ok = e1 / e2 >= 12 && e1 / e2 <= 20 && e2 / e3 >= 12 && e2 / e3 <= 20;
  std::ostringstream d;
  d << "composition deviation " << d2048 << " at 2048 steps (" << d4096 << " at 4096, ratio " << d2048 / d4096
    << "); length " << len << " vs 2; step-halving ratios " << e1 / e2 << ", " << e2 / e3;
  // The composition part is a known gap; the other parts must hold.
  return {comp && length_ok && ratio_ok, !comp && length_ok && ratio_ok && d2048 / d4096 >= 12, d.str()};
}

Outcome geodesic_break() {
  const TorusGrid g(16, 16, 16);
  const NormalizedHamiltonian H = shear_hamiltonian();
  const GeodesicBreak br = break_minimal_geodesic(H, 2, 1000000, g);
  // Independent quadrature on a denser lattice.
  const NormalizedHamiltonian F = sequential_birkhoff_hamiltonian(H, br.system, 2);
  auto quad = [](const FieldFunction& f, double scale) {
    const int nt = 64, ny = 64;
    double total = 0;
    for (int k = 0; k < nt; ++k) {
      double m = 0;
      for (int i = 0; i < ny; ++i)
        for (int j = 0; j < ny; ++j)
          m = std::max(m, std::abs(f((k + 0.5) / nt, {static_cast<double>(i) / ny, static_cast<double>(j) / ny})));
      total += m;
    }
    return scale * total / nt;
  };
  const double a = quad(F.value, 1.0), b = quad(H.value, 2.0);
  std::ostringstream d;
  d << "a(0) = " << br.a0 << ", b(0) = " << br.b0 << ", int a = " << a << " < int b = " << b;
  return {std::abs(br.a0) < 1e-12 && std::abs(br.b0 - 2.0) < 1e-12 && a < b, false, d.str()};
}

}  // namespace

int main() {
  const std::vector<std::pair<int, Outcome (*)()>> criteria{{1, shortening_decay}, {2, negative_control}, {3, contraction},
                                                            {4, covering_inequality}, {5, transport}, {6, construction},
                                                            {7, conjugators}, {8, hofer}, {9, geodesic_break}};
  int unexpected = 0;
  for (const auto& [id, fn] : criteria) {
    Outcome o;
    try {
      o = fn();
    } catch (const std::exception& e) {
      o = {false, false, std::string("error: ") + e.what()};
    }
    std::cout << "criterion " << id << ": " << (o.pass ? "PASS" : "FAIL") << (o.pass || !o.known_gap ? "" : " (known gap)")
              << "  " << o.detail << std::endl;
    if (!o.pass && !o.known_gap) ++unexpected;
  }
  return unexpected == 0 ? 0 : 1;
}
