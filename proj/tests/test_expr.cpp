#include <doctest.h>

#include <cmath>

#include "mpradon/expr.hpp"

using namespace mpradon;
using namespace mpradon::vfields;

TEST_CASE("parser handles the documented grammar") {
  auto e = parse_expr("x1^2 + 3/2*x2 - exp(x1*x2)");
  double v = e.eval({2.0, 0.5});
  CHECK(v == doctest::Approx(4.0 + 0.75 - std::exp(1.0)).epsilon(1e-15));

  auto f = parse_expr("flat(x1)");
  CHECK(f.eval({0.0}) == 0.0);
  CHECK(f.eval({1.0}) == doctest::Approx(std::exp(-1.0)).epsilon(1e-15));

  CHECK_THROWS(parse_expr("x0"));     // indices are 1-based
  CHECK_THROWS(parse_expr("x1 +"));   // dangling operator
  CHECK_THROWS(parse_expr("foo(1)"));
}

TEST_CASE("decimal and rational literals parse exactly") {
  CHECK(parse_expr("0.25").eval({}) == 0.25);
  CHECK(parse_expr("7/4").eval({}) == 1.75);
  CHECK(parse_expr("-3").eval({}) == -3.0);
}

TEST_CASE("differentiation: product, power, exp") {
  auto e = parse_expr("x1^3*x2");
  auto d = e.derivative(0);
  CHECK(d.eval({2.0, 5.0}) == doctest::Approx(3.0 * 4.0 * 5.0).epsilon(1e-15));

  auto g = parse_expr("exp(x1^2)");
  CHECK(g.derivative(0).eval({0.7}) ==
        doctest::Approx(2.0 * 0.7 * std::exp(0.49)).epsilon(1e-14));
}

TEST_CASE("flat carries exact derivatives and vanishes to all orders at 0") {
  auto f = Expr::flat_of(Expr::var(0));
  auto d1 = f.derivative(0);
  // d/dx e^{-1/x^2} = 2 x^{-3} e^{-1/x^2}
  CHECK(d1.eval({0.5}) == doctest::Approx(2.0 * 8.0 * std::exp(-4.0)).epsilon(1e-13));
  CHECK(d1.eval({0.0}) == 0.0);
  auto d3 = d1.derivative(0).derivative(0);
  CHECK(d3.eval({0.0}) == 0.0);
  CHECK(std::isfinite(d3.eval({0.3})));
}

TEST_CASE("bare negative powers at zero are guard violations") {
  auto e = Expr::pow(Expr::var(0), -2);
  CHECK_THROWS(e.eval({0.0}));
  // ... but a flat factor of the same variable dominates.
  auto guarded = Expr::flat_of(Expr::var(0)) * e;
  CHECK(guarded.eval({0.0}) == 0.0);
}

TEST_CASE("normal forms: polynomials and flat monomials") {
  auto e = parse_expr("x1^2*x2 - x2*x1^2 + x1");
  auto nf = normalize(e, 2);
  REQUIRE(nf.has_value());
  CHECK(nf->terms.size() == 1);  // the quadratic terms cancel exactly

  auto f = parse_expr("flat(x1)*x1^-3");
  auto nff = normalize(f, 1);
  REQUIRE(nff.has_value());
  CHECK(nff->terms.size() == 1);
  CHECK(nff->terms.begin()->first.xpow[0] == -3);
  CHECK(nff->terms.begin()->first.flatpow[0] == 1);

  CHECK(!normalize(parse_expr("exp(x1)"), 1).has_value());
  CHECK(!normalize(parse_expr("flat(x1+x2)"), 2).has_value());
}

TEST_CASE("derivatives of flat monomials stay in the normal-form ring") {
  auto f = Expr::flat_of(Expr::var(0));
  Expr d = f;
  for (int k = 0; k < 4; ++k) d = d.derivative(0);
  auto nf = normalize(d, 1);
  REQUIRE(nf.has_value());
  // every term is x^{-m} flat(x)
  for (const auto& [mono, c] : nf->terms) {
    CHECK(mono.flatpow[0] == 1);
    CHECK(mono.xpow[0] < 0);
  }
}

TEST_CASE("zero and proportionality detection") {
  Rng rng(3);
  auto z = parse_expr("x1*x2 - x2*x1");
  auto [is_zero, exact] = expr_is_zero(z, 2, rng);
  CHECK(is_zero);
  CHECK(exact);

  auto a = std::vector<Expr>{parse_expr("2*x1^2"), parse_expr("-4*x2")};
  auto b = std::vector<Expr>{parse_expr("x1^2"), parse_expr("-2*x2")};
  auto pr = exprs_proportional(a, b, 2, rng);
  CHECK(pr.proportional);
  CHECK(pr.exact);
  CHECK(pr.ratio == doctest::Approx(2.0));

  auto c = std::vector<Expr>{parse_expr("x1"), parse_expr("x2")};
  CHECK(!exprs_proportional(a, c, 2, rng).proportional);

  // sampled path through exp()
  auto e1 = std::vector<Expr>{parse_expr("3*exp(x1)")};
  auto e2 = std::vector<Expr>{parse_expr("exp(x1)")};
  auto pr2 = exprs_proportional(e1, e2, 1, rng);
  CHECK(pr2.proportional);
  CHECK(!pr2.exact);
  CHECK(pr2.ratio == doctest::Approx(3.0).epsilon(1e-6));
}
