#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <numeric>
#include <random>
#include <set>

#include "ergoloop/covering.hpp"

using namespace ergoloop;

namespace {

std::vector<int> random_subset(int n, int k, std::mt19937_64& rng) {
  std::vector<int> all(static_cast<std::size_t>(n));
  std::iota(all.begin(), all.end(), 0);
  std::shuffle(all.begin(), all.end(), rng);
  all.resize(static_cast<std::size_t>(k));
  std::sort(all.begin(), all.end());
  return all;
}

// nu(y) from fully materialized member maps.
std::vector<std::int64_t> recount(const CoveringFamily& fam) {
  std::vector<std::int64_t> nu(static_cast<std::size_t>(fam.cells), 0);
  for (std::int64_t j = 0; j < fam.maps.member_count(); ++j) {
    const CellPermutation g = fam.maps.member(j);
    for (int a : fam.source) nu[g(a)] += fam.maps.weight(j);
  }
  return nu;
}

// nu(y) (c1 |A| + c2 |region|) >= N |A| in plain integer arithmetic.
bool inequality_holds(const std::vector<std::int64_t>& nu, std::int64_t N, std::int64_t A, std::int64_t c1, std::int64_t c2,
                      const std::vector<int>& region) {
  const std::int64_t Y = static_cast<std::int64_t>(region.size());
  for (int y : region)
    if (nu[y] * (c1 * A + c2 * Y) < N * A) return false;
  return true;
}

std::vector<int> all_cells(int n) {
  std::vector<int> v(static_cast<std::size_t>(n));
  std::iota(v.begin(), v.end(), 0);
  return v;
}

}  // namespace

TEST_CASE("lattice geometry") {
  const Lattice open{10, 10, false}, torus{10, 10, true};
  CHECK(open.chebyshev(open.index(0, 0), open.index(9, 3)) == 9);
  CHECK(torus.chebyshev(torus.index(0, 0), torus.index(9, 3)) == 3);
  CHECK(open.ball(open.index(5, 5), 2).size() == 25);
  CHECK(open.ball(open.index(0, 0), 2).size() == 9);
  CHECK(torus.ball(torus.index(0, 0), 2).size() == 25);
  const auto fine = open.refine_cells({open.index(1, 2)}, 3);
  CHECK(fine.size() == 9);
  const Lattice r = open.refined(3);
  for (int c : fine) {
    CHECK(r.row(c) / 3 == 1);
    CHECK(r.col(c) / 3 == 2);
  }
  CHECK(dilates_intersect(4, 4.0));
  CHECK_FALSE(dilates_intersect(5, 4.0));
  CHECK(inside_interior_4(1));
  CHECK_FALSE(inside_interior_4(2));
}

TEST_CASE("residue classes mod 17 are nice subpartitions") {
  for (const Lattice L : {Lattice{40, 40, false}, Lattice{34, 34, true}}) {
    const auto classes = decompose_nice_subpartitions(L, all_cells(L.size()));
    CHECK(classes.size() == 289);
    std::vector<int> seen(static_cast<std::size_t>(L.size()), 0);
    for (const auto& cls : classes) {
      REQUIRE(is_nice_subpartition(L, cls));
      for (int c : cls) ++seen[c];
    }
    CHECK(std::all_of(seen.begin(), seen.end(), [](int v) { return v == 1; }));
  }
  const Lattice L{40, 40, false};
  CHECK_FALSE(is_nice_subpartition(L, {L.index(0, 0), L.index(0, 16)}));
  CHECK(is_nice_subpartition(L, {L.index(0, 0), L.index(0, 17)}));
  CHECK_FALSE(is_nice_subpartition(L, {3, 3}));
}

TEST_CASE("family of sub-polyhedra covers X' evenly") {
  std::vector<int> xp(12);
  std::iota(xp.begin(), xp.end(), 0);
  // a = 1, k = 5: cubes of volume 1/5, mu(X') = 12/5 < 1.5 mu(X) with mu(X) = 2.
  const Family42B f = family_4_2_B(xp, 2.0, 1.0, 5);
  REQUIRE(f.enumerated);
  CHECK(f.members.size() == 495);  // C(12, 4)
  CHECK(static_cast<double>(f.member_count) == 495.0);
  const auto nu = f.counting(12);
  for (int c = 0; c < 12; ++c) CHECK(nu[c] == 165);  // C(11, 3)
  CHECK(f.ratio == doctest::Approx(4.0 / 12));
  CHECK(f.ratio >= f.bound);

  const Family42B big = family_4_2_B(all_cells(60), 10.0, 1.0, 20, 1000);
  CHECK_FALSE(big.enumerated);
  CHECK(big.spot_check_error < 0.06);
  CHECK(big.ratio >= big.bound);
  CHECK_THROWS_AS(big.counting(60), PreconditionError);

  CHECK_THROWS_WITH_AS(family_4_2_B(xp, 2.0, 1.0, 3), "k below threshold", PreconditionError);
  CHECK_THROWS_AS(family_4_2_B(xp, 2.0, 3.0, 5), PreconditionError);
  CHECK_THROWS_AS(family_4_2_B(xp, 1.0, 1.0, 5), PreconditionError);
}

TEST_CASE("transport plans cover B and stay inside their supports") {
  std::mt19937_64 rng(4);
  const Lattice L{32, 32, false};
  for (int trial = 0; trial < 10; ++trial) {
    const std::vector<int> A = random_subset(L.size(), 579 + static_cast<int>(rng() % 300), rng);
    const std::vector<int> cells = all_cells(L.size());
    std::vector<int> outside;
    std::set_difference(cells.begin(), cells.end(), A.begin(), A.end(), std::back_inserter(outside));
    const std::vector<int> B{outside[rng() % outside.size()]};
    const auto plans = transport_4_2_C(L, A, B);
    REQUIRE(plans.size() <= 289);
    std::set<int> covered;
    for (const auto& p : plans) {
      std::vector<char> in_support(static_cast<std::size_t>(L.size()), 0);
      for (int c : p.support) in_support[c] = 1;
      for (int c = 0; c < L.size(); ++c)
        if (!in_support[c]) REQUIRE(p.map(c) == c);
      for (int a : A) covered.insert(p.map(a));
      for (const auto& mv : p.moves) {
        REQUIRE(mv.path.front() == mv.from);
        REQUIRE(mv.path.back() == mv.to);
        REQUIRE(p.map(mv.from) == mv.to);
      }
    }
    for (int b : B) CHECK(covered.count(b) == 1);
    CHECK(plans_cover(plans, A, B));
  }
}

TEST_CASE("transport rejects the wrong measure ratio and passes through B inside A") {
  std::mt19937_64 rng(5);
  const Lattice L{32, 32, false};
  const std::vector<int> A = random_subset(L.size(), 578, rng);
  CHECK_THROWS_WITH_AS(transport_4_2_C(L, A, {A.empty() ? 0 : 1023}), "hypothesis mu(A) > 2C mu(B) fails",
                       PreconditionError);
  const std::vector<int> A2 = random_subset(L.size(), 700, rng);
  const auto id = transport_4_2_C(L, A2, {A2[3]});
  REQUIRE(id.size() == 1);
  CHECK(id[0].map.is_identity());
  // With a small modulus the hypothesis is easy to meet on a small lattice.
  const Lattice S{12, 12, false};
  const std::vector<int> A3 = random_subset(S.size(), 100, rng);
  std::vector<int> B3;
  for (int c = 0; c < S.size() && B3.size() < 2; ++c)
    if (!std::binary_search(A3.begin(), A3.end(), c)) B3.push_back(c);
  const auto plans = transport_4_2_C(S, A3, B3, {}, 3);
  CHECK(plans_cover(plans, A3, B3));
}

TEST_CASE("local covering by cyclic windows") {
  const Lattice L{8, 8, true};
  std::mt19937_64 rng(6);
  for (int trial = 0; trial < 20; ++trial) {
    const std::vector<int> X = random_subset(64, 10 + static_cast<int>(rng() % 40), rng);
    std::vector<int> A = X;
    std::shuffle(A.begin(), A.end(), rng);
    A.resize(1 + rng() % X.size());
    std::sort(A.begin(), A.end());
    const LocalCovering lc = covering_4_2_A(L, X, A);
    const auto nu = recount(lc.family);
    CHECK(nu == lc.family.counting());
    CHECK(inequality_holds(nu, lc.family.size(), static_cast<std::int64_t>(A.size()), 289, 2, X));
    if (A.size() < X.size()) {
      // Every cell of X is covered exactly |A| times by the |X| windows.
      for (int x : X) CHECK(nu[x] == static_cast<std::int64_t>(A.size()));
    }
  }
  CHECK_THROWS_AS(covering_4_2_A(L, {1, 2, 3}, {5}), PreconditionError);
  CHECK_THROWS_AS(covering_4_2_A(L, {1, 2, 3}, {}), PreconditionError);
}

TEST_CASE("local covering repairs an approximation defect by transport") {
  const Lattice L{40, 40, false};
  std::mt19937_64 rng(7);
  const std::vector<int> X = all_cells(L.size());
  const std::vector<int> A = random_subset(L.size(), 1200, rng);
  const LocalCovering lc = covering_4_2_A(L, X, A, 1);
  CHECK(lc.defect.size() == 2);
  CHECK_FALSE(lc.plans.empty());
  CHECK(lc.M == lc.N + static_cast<std::int64_t>(lc.plans.size()) * lc.N_prime);
  const auto nu = recount(lc.family);
  CHECK(inequality_holds(nu, lc.family.size(), 1200, 289, 2, X));
  CHECK_THROWS_AS(covering_4_2_A(L, X, A, 1000), PreconditionError);
}

TEST_CASE("global covering over strip charts") {
  const Lattice L{8, 8, true};
  std::mt19937_64 rng(8);
  for (int r : {1, 2, 4}) {
    const auto charts = strip_charts(L, r);
    CHECK(charts.size() == static_cast<std::size_t>(r));
    for (int trial = 0; trial < 15; ++trial) {
      const std::vector<int> A = random_subset(64, 1 + static_cast<int>(rng() % 40), rng);
      const GlobalCovering g = covering_global(L, charts, A);
      CHECK(g.c1 == 289.0 * r);
      CHECK(g.c2 == 4.0 * r);
      const auto nu = recount(g.family);
      CHECK(nu == g.family.counting());
      CHECK(inequality_holds(nu, g.family.size(), static_cast<std::int64_t>(g.family.source.size()),
                             static_cast<std::int64_t>(g.c1), static_cast<std::int64_t>(g.c2), all_cells(g.lattice.size())));
      const CoveringVerdict v = verify_covering(g.family, static_cast<std::int64_t>(g.family.source.size()), g.c1, g.c2);
      CHECK(v.pass);
      CHECK(v.counts == nu);
      if (A.size() < static_cast<std::size_t>(r)) CHECK(g.refinement > 1);
    }
  }
  CHECK_THROWS_AS(strip_charts(L, 3), PreconditionError);
  CHECK_THROWS_AS(covering_global(L, {{0, 1}, {2}}, {0}), PreconditionError);
}

TEST_CASE("verification catches a corrupted family") {
  const Lattice L{8, 8, true};
  const GlobalCovering g = covering_global(L, strip_charts(L, 1), {3, 17, 40});
  CoveringFamily bad;
  bad.cells = 64;
  bad.source = g.family.source;
  bad.maps = PermutationFamily(64);
  bad.maps.add(CellPermutation::identity(64), 100);
  const CoveringVerdict v = verify_covering(bad, 3, g.c1, g.c2);
  CHECK_FALSE(v.pass);
  CHECK(v.worst_count == 0);
  CHECK_THROWS_AS(verify_covering(bad, 0, 1, 1), PreconditionError);
}

TEST_CASE("torus covering oracle") {
  const CoveringOracle oracle = torus_covering_oracle(8, 8, 2);
  const CoveringResponse resp = oracle({1, 2, 3}, 64);
  CHECK(resp.family->cells() == 64);
  CHECK(resp.c1 == 578.0);
  CHECK_THROWS_AS(oracle({1}, 64), PreconditionError);
  CHECK_THROWS_AS(oracle({1, 2}, 16), PreconditionError);
}
