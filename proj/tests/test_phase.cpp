#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <random>

#include "ergoloop/phase.hpp"

using namespace ergoloop;

TEST_CASE("circle coordinates stay in [0, 1)") {
  CHECK(CircleCoord::wrap(1.25) == doctest::Approx(0.25));
  CHECK(CircleCoord::wrap(-0.25) == doctest::Approx(0.75));
  // A value that rounds up to 1 at the seam goes to 0.
  CHECK(CircleCoord::wrap(-1e-17) == 0.0);
  CHECK((CircleCoord(0.75) + CircleCoord(0.5)).value() == doctest::Approx(0.25));

  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> u(-50.0, 50.0);
  for (int i = 0; i < 10000; ++i) {
    const double v = u(rng), w = CircleCoord::wrap(v);
    REQUIRE(w >= 0.0);
    REQUIRE(w < 1.0);
    const double d = circle_delta(v, u(rng));
    REQUIRE(d > -0.5);
    REQUIRE(d <= 0.5);
  }
}

TEST_CASE("rationals reduce and parse") {
  CHECK(Rational(2, 6) == Rational(1, 3));
  CHECK(Rational(3, -9) == Rational(-1, 3));
  CHECK(Rational::parse("4/8") == Rational(1, 2));
  CHECK(Rational::parse("5") == Rational(5, 1));
  CHECK(Rational(1, 3).str() == "1/3");
  CHECK_THROWS_AS(Rational(1, 0), PreconditionError);
  CHECK_THROWS_AS(Rational::parse("1/x"), PreconditionError);
  CHECK_THROWS_AS(Rational::parse("abc"), PreconditionError);
}

TEST_CASE("grid nodes locate back to their cell") {
  const TorusGrid g(4, 6, 10);
  CHECK(g.fiber_size() == 60);
  CHECK(g.size() == 240);
  CHECK(g.cell_measure() == doctest::Approx(1.0 / 60));
  for (int c = 0; c < g.fiber_size(); ++c) {
    REQUIRE(g.locate(g.node(c)) == c);
    REQUIRE(g.locate(g.node(c) + Eigen::Vector2d(0.5 / 6, 0.5 / 10)) == c);
    REQUIRE(g.locate(g.node(c) + Eigen::Vector2d(3.0 + 0.5 / 6, -2.0 + 0.5 / 10)) == c);
  }
  CHECK_THROWS_AS(TorusGrid(1, 4, 4), PreconditionError);
}

TEST_CASE("field reductions") {
  const TorusGrid g(8, 8, 8);
  const ScalarField F =
      sample([](double t, const Eigen::Vector2d& y) { return std::cos(kTwoPi * (t + y(1))); }, g, Domain::kProduct);
  CHECK(F.samples().size() == 512);
  CHECK(is_zero_mean(F));
  CHECK(sup_norm(F) == doctest::Approx(1.0));
  // Every fiber hits a node where t + y2 is an integer.
  CHECK(time_sup_integral(F) == doctest::Approx(1.0));
  CHECK((fiber_means(F).abs() < 1e-15).all());

  ScalarField shifted = F;
  shifted.samples() += 0.3;
  CHECK_FALSE(is_zero_mean(shifted));
  CHECK(field_mean(normalize_zero_mean(shifted)) == doctest::Approx(0.0).epsilon(1e-14));
  CHECK_THROWS_AS(ScalarField(g, Domain::kFiber, Eigen::ArrayXd::Zero(3)), PreconditionError);
  CHECK_THROWS_AS(time_sup_integral(ScalarField(g, Domain::kFiber)), PreconditionError);
}

TEST_CASE("long double fields share the same reductions") {
  const TorusGrid g(2, 4, 4);
  BasicScalarField<long double> f(g, Domain::kProduct);
  f.samples().setConstant(2.0L);
  CHECK(field_mean(f) == 2.0L);
  CHECK(sup_norm(normalize_zero_mean(f)) == 0.0L);
}

TEST_CASE("interpolant reproduces samples and the refined sup only raises") {
  const TorusGrid g(4, 16, 16);
  const FieldFunction f = [](double, const Eigen::Vector2d& y) { return std::cos(kTwoPi * (y(0) + 0.3 / 16)); };
  const ScalarField s = sample(f, g, Domain::kFiber);
  const FieldFunction I = interpolant(s);
  for (int c = 0; c < g.fiber_size(); ++c) REQUIRE(I(0.0, g.node(c)) == doctest::Approx(s.samples()(c)));

  const double grid_max = s.samples().abs().maxCoeff();
  const double refined = refined_fiber_sup(f, g, 0.0);
  CHECK(refined >= grid_max);
  CHECK(refined <= 1.0 + 1e-12);
  CHECK(refined > 1.0 - 1e-8);
  CHECK(grid_max < 1.0 - 1e-3);
}

TEST_CASE("cell permutations form a group") {
  const int n1 = 5, n2 = 7;
  const CellPermutation a = CellPermutation::translation(n1, n2, 2, 3);
  const CellPermutation b = CellPermutation::translation(n1, n2, 4, 6);
  CHECK(a.after(b) == CellPermutation::translation(n1, n2, 1, 2));
  CHECK(a.after(a.inverse()).is_identity());
  CHECK(a.inverse()(a(11)) == 11);
  CHECK(a.inverse_of(a(11)) == 11);
  CHECK_FALSE(a.is_identity());

  std::mt19937_64 rng(3);
  for (int trial = 0; trial < 50; ++trial) {
    Eigen::VectorXi img = Eigen::VectorXi::LinSpaced(35, 0, 34);
    std::shuffle(img.data(), img.data() + img.size(), rng);
    const CellPermutation p(img);
    Eigen::ArrayXd f = Eigen::ArrayXd::Random(35);
    const Eigen::ArrayXd pf = p.pullback(f);
    // (f o p^{-1})(p(c)) = f(c)
    for (int c = 0; c < 35; ++c) REQUIRE(pf(p(c)) == f(c));
    REQUIRE(p.after(p.inverse()).is_identity());
  }
  CHECK_THROWS_AS(CellPermutation(Eigen::VectorXi::Zero(3)), PreconditionError);
}

TEST_CASE("exchange moves one block onto another") {
  const CellPermutation e = CellPermutation::exchange(10, {0, 1, 2}, {5, 6, 7});
  CHECK(e(0) == 5);
  CHECK(e(1) == 6);
  CHECK(e(2) == 7);
  std::vector<int> back{e(5), e(6), e(7)};
  std::sort(back.begin(), back.end());
  CHECK(back == std::vector<int>{0, 1, 2});
  for (int c = 3; c < 5; ++c) CHECK(e(c) == c);
  CHECK(e(9) == 9);
}

TEST_CASE("cell maps apply, invert and pull back") {
  const TorusGrid g(2, 4, 4);
  const CellMap m(CellPermutation::translation(4, 4, 1, 2), g);
  const Eigen::Vector2d y(0.1, 0.2);
  const Eigen::Vector2d z = m.apply(y);
  CHECK(z(0) == doctest::Approx(0.35));
  CHECK(z(1) == doctest::Approx(0.7));
  CHECK(torus_distance(m.apply_inverse(z), y) < 1e-12);
  CHECK(m.jacobian_defect(g) == 0.0);

  const CellMap s(SmoothMap{[](const Eigen::Vector2d& v) { return wrap(Eigen::Vector2d(v(0), v(1) + std::sin(kTwoPi * v(0)) / 7)); },
                            [](const Eigen::Vector2d& v) { return wrap(Eigen::Vector2d(v(0), v(1) - std::sin(kTwoPi * v(0)) / 7)); }});
  CHECK(s.jacobian_defect(g) < 1e-6);
  CHECK(torus_distance(s.after(s.inverse()).apply(y), y) < 1e-12);

  ScalarField f(g, Domain::kFiber);
  for (int c = 0; c < 16; ++c) f.samples()(c) = c;
  const ScalarField pf = m.pullback(f);
  for (int c = 0; c < 16; ++c) REQUIRE(pf.samples()(m.permutation()(c)) == f.samples()(c));
}
