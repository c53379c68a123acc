#include <doctest.h>

#include <cmath>
#include <map>

#include "mpradon/kernels.hpp"
#include "mpradon/quadrature.hpp"
#include "mpradon/rng.hpp"

using namespace mpradon;
using namespace mpradon::kernels;
using namespace mpradon::dilations;

namespace {

BumpSpec odd_pair(double a) {
  return BumpSpec::separable({BumpAtom1D::mollifier_deriv(a, 1), BumpAtom1D::mollifier_deriv(a, 1)});
}

DyadicKernel constant_family(const DilationScheme& scheme, const ParamLattice& lat,
                             const BumpSpec& bump) {
  DyadicKernel k;
  k.scheme = scheme;
  k.lattice = lat;
  k.family = [bump](const LatticePoint&) { return bump; };
  return k;
}

}  // namespace

TEST_CASE("dilation preserves the integral") {
  auto scheme = DilationScheme::zygmund3();
  Rng rng(100);
  for (int trial = 0; trial < 8; ++trial) {
    BumpSpec b = BumpSpec::separable({BumpAtom1D::mollifier(0.25, rng.uniform(0.5, 2.0)),
                                      BumpAtom1D::mollifier_deriv(0.25, 1, rng.uniform(0.5, 2.0)),
                                      BumpAtom1D::poly_mollifier(0.25, {Rational(1), Rational(2)})});
    LatticePoint j = {static_cast<int>(rng.next_u64() % 4), static_cast<int>(rng.next_u64() % 4)};
    auto d = dilate_bump(b, scheme, j);
    double r0 = b.support_radius / d.axis_scale[0];
    double r1 = b.support_radius / d.axis_scale[1];
    double r2 = b.support_radius / d.axis_scale[2];
    const auto& rule = gauss_legendre(40);
    double sum = 0.0;
    for (std::size_t i = 0; i < rule.nodes.size(); ++i)
      for (std::size_t jj = 0; jj < rule.nodes.size(); ++jj)
        for (std::size_t kk = 0; kk < rule.nodes.size(); ++kk) {
          std::vector<double> t = {r0 * rule.nodes[i], r1 * rule.nodes[jj], r2 * rule.nodes[kk]};
          sum += rule.weights[i] * rule.weights[jj] * rule.weights[kk] * r0 * r1 * r2 * d.eval(t);
        }
    CHECK(sum == doctest::Approx(b.integral()).epsilon(1e-10));
  }
}

TEST_CASE("dilation at the origin scale is the identity") {
  BumpSpec b = BumpSpec::normalized_mollifier(2, 0.25);
  auto scheme = DilationScheme::product_standard(2);
  auto d = dilate_bump(b, scheme, {0, 0});
  Rng rng(4);
  for (int s = 0; s < 50; ++s) {
    std::vector<double> t = {rng.uniform(-0.3, 0.3), rng.uniform(-0.3, 0.3)};
    CHECK(d.eval(t) == doctest::Approx(b.eval(t)).epsilon(1e-15));
  }
}

TEST_CASE("one-parameter dilation shrinks support and grows the sup") {
  BumpSpec b = BumpSpec::separable({BumpAtom1D::mollifier(0.25)});
  auto scheme = DilationScheme::product_standard(1);
  auto d = dilate_bump(b, scheme, {3});
  double sup_base = 0.0, sup_dil = 0.0, edge = 0.0;
  for (int i = 0; i <= 4096; ++i) {
    double t = -0.3 + 0.6 * i / 4096;
    sup_base = std::max(sup_base, std::abs(b.eval({t})));
    sup_dil = std::max(sup_dil, std::abs(d.eval({t})));
    if (std::abs(t) > 0.25 / 8.0 + 1e-9) edge = std::max(edge, std::abs(d.eval({t})));
  }
  CHECK(sup_dil == doctest::Approx(8.0 * sup_base).epsilon(1e-3));
  CHECK(edge == 0.0);
}

TEST_CASE("check_cancellation: odd bumps pass, an even bump at a demanding scale fails") {
  auto scheme = DilationScheme::product_standard(2);
  auto lat = ParamLattice::product(2);

  auto rep = check_cancellation(constant_family(scheme, lat, odd_pair(0.25)), 3, 1e-12);
  CHECK(rep.pass);
  CHECK(rep.max_residual <= 1e-12);

  // Even mollifier in the first coordinate: scales with j_1 != 0 demand
  // a vanishing first-block integral and fail by about the bump mass.
  BumpSpec bad =
      BumpSpec::separable({BumpAtom1D::mollifier(1.0), BumpAtom1D::mollifier_deriv(1.0, 1)});
  auto rep2 = check_cancellation(constant_family(scheme, lat, bad), 2, 1e-12);
  CHECK(!rep2.pass);
  CHECK(rep2.max_residual > 0.1);
}

TEST_CASE("synthesize_partial: zero family gives the zero grid") {
  auto scheme = DilationScheme::product_standard(1);
  DyadicKernel k;
  k.scheme = scheme;
  k.lattice = ParamLattice::product(1);
  k.family = [](const LatticePoint&) {
    return BumpSpec::separable({BumpAtom1D::mollifier(0.25, 0.0)});
  };
  GridSpecND grid{{-1.0}, {1.0}, {64}};
  for (double v : synthesize_partial(k, 4, grid)) CHECK(v == 0.0);
}

TEST_CASE("synthesize_partial is linear in the family") {
  auto scheme = DilationScheme::product_standard(1);
  auto lat = ParamLattice::product(1);
  BumpSpec f = BumpSpec::separable({BumpAtom1D::mollifier_deriv(0.25, 1)});
  BumpSpec g = BumpSpec::separable({BumpAtom1D::poly_mollifier(0.25, {Rational(0), Rational(1)})});
  BumpSpec fg = BumpSpec::sum(1, {f.terms[0], g.terms[0]}, 0.25);

  GridSpecND grid{{-0.5}, {0.5}, {257}};
  auto vf = synthesize_partial(constant_family(scheme, lat, f), 5, grid);
  auto vg = synthesize_partial(constant_family(scheme, lat, g), 5, grid);
  auto vfg = synthesize_partial(constant_family(scheme, lat, fg), 5, grid);
  double scale = 0.0;
  for (double v : vfg) scale = std::max(scale, std::abs(v));
  for (std::size_t i = 0; i < vf.size(); ++i)
    CHECK(std::abs(vfg[i] - (vf[i] + vg[i])) <= 1e-13 * std::max(1.0, scale));
}

TEST_CASE("pairing against a fixed test function decays geometrically") {
  auto scheme = DilationScheme::product_standard(1);
  auto k = constant_family(scheme, ParamLattice::product(1),
                           BumpSpec::separable({BumpAtom1D::mollifier_deriv(0.25, 1)}));
  std::vector<LatticePoint> scales;
  for (int j = 0; j <= 6; ++j) scales.push_back({j});
  auto pair = pairing_per_scale(k, scales, [](const std::vector<double>& t) {
    return 0.5 + t[0] / (1.0 + t[0] * t[0]);
  });
  std::vector<double> xs, ys;
  for (int j = 0; j <= 6; ++j) {
    REQUIRE(std::abs(pair[j]) > 0.0);
    xs.push_back(j);
    ys.push_back(std::log2(std::abs(pair[j])));
  }
  auto fit = fit_line(xs, ys);
  CHECK(fit.slope < -0.5);
  CHECK(fit.r2 >= 0.95);
}

TEST_CASE("two-parameter synthesis obeys the product decay bound away from the axes") {
  auto scheme = DilationScheme::product_standard(2);
  auto k = constant_family(scheme, ParamLattice::product(2), odd_pair(0.25));
  // Q_mu = 1 per parameter for the standard two-parameter dilations.
  auto bound_const = [&](int bound) {
    GridSpecND grid{{0.02, 0.02}, {0.9, 0.9}, {40, 40}};
    auto vals = synthesize_partial(k, bound, grid);
    double c = 0.0;
    for (std::size_t g = 0; g < vals.size(); ++g) {
      auto t = grid.point(g);
      c = std::max(c, std::abs(vals[g]) * std::abs(t[0]) * std::abs(t[1]));
    }
    return c;
  };
  double c4 = bound_const(4), c8 = bound_const(8);
  CHECK(c4 > 0.0);
  CHECK(c8 <= 1.1 * c4);
}

TEST_CASE("delta0_family telescopes and passes its cancellations") {
  auto scheme = DilationScheme::product_standard(2);
  BumpSpec eta = BumpSpec::normalized_mollifier(2, 0.25);
  auto fam = delta0_family(eta, scheme);

  // one-parameter family member at the origin scale is eta itself
  auto scheme1 = DilationScheme::product_standard(1);
  BumpSpec eta1 = BumpSpec::normalized_mollifier(1, 0.25);
  auto fam1 = delta0_family(eta1, scheme1);
  auto s0 = fam1.family({0});
  REQUIRE(s0.has_value());
  Rng rng(8);
  for (int s = 0; s < 40; ++s) {
    double t = rng.uniform(-0.3, 0.3);
    CHECK(s0->eval({t}) == doctest::Approx(eta1.eval({t})).epsilon(1e-14));
  }

  for (int m : {1, 2}) {
    GridSpecND grid{{-0.3, -0.3}, {0.3, 0.3}, {33, 33}};
    auto partial = synthesize_partial(fam, m, grid);
    LatticePoint jm = {m, m};
    auto top = dilate_bump(eta, scheme, jm);
    double scale = 0.0, err = 0.0;
    for (std::size_t g = 0; g < partial.size(); ++g) {
      double want = top.eval(grid.point(g));
      scale = std::max(scale, std::abs(want));
      err = std::max(err, std::abs(partial[g] - want));
    }
    CHECK(err <= 1e-12 * scale);
  }

  auto rep = check_cancellation(fam, 3, 1e-10);
  CHECK(rep.pass);
}

TEST_CASE("coefficient collapse of the alternating differences") {
  // In two parameters the net coefficient of each dilate inside the
  // partial sum vanishes unless both coordinates sit at the truncation
  // scale.
  const int m = 3;
  std::map<std::pair<int, int>, int> coeff;
  for (int j1 = 0; j1 <= m; ++j1)
    for (int j2 = 0; j2 <= m; ++j2)
      for (int p1 = 0; p1 <= std::min(1, j1); ++p1)
        for (int p2 = 0; p2 <= std::min(1, j2); ++p2)
          coeff[{j1 - p1, j2 - p2}] += ((p1 + p2) % 2 == 0) ? 1 : -1;
  for (const auto& [l, c] : coeff)
    CHECK(c == ((l.first == m && l.second == m) ? 1 : 0));
}

TEST_CASE("full cancellation passes under every lattice choice") {
  auto scheme = DilationScheme::product_standard(2);
  BumpSpec odd = odd_pair(0.25);
  for (auto lat : {ParamLattice::product(2), ParamLattice::flag(2),
                   ParamLattice::custom(2, {{1, -1, 0}})}) {
    auto k = constant_family(scheme, lat, odd);
    auto rep = check_cancellation(k, 3, 1e-11, 40);
    CHECK(rep.pass);
  }
}

TEST_CASE("delta0_family rejects non-unit masses") {
  auto scheme = DilationScheme::product_standard(1);
  BumpSpec not_unit = BumpSpec::separable({BumpAtom1D::mollifier(0.25)});
  CHECK_THROWS(delta0_family(not_unit, scheme));
}
