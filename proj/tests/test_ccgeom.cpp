#include <doctest.h>

#include <cmath>

#include "mpradon/ccgeom.hpp"

using namespace mpradon;
using namespace mpradon::ccgeom;
using vfields::DegreedField;
using vfields::VField;

namespace {

dilations::DegreeVector deg(std::vector<std::int64_t> cs) {
  dilations::DegreeVector d;
  for (auto c : cs) d.components.push_back(Rational(c));
  return d;
}

std::vector<DegreedField> grushin() {
  return {{VField::parse(2, "[1, 0]"), deg({1}), "dx"},
          {VField::parse(2, "[0, x1]"), deg({1}), "x dy"}};
}

std::vector<DegreedField> heis_triple() {
  auto X = VField::parse(3, "[1, 0, 2*x2]");
  auto Y = VField::parse(3, "[0, 1, -2*x1]");
  return {{X, deg({1, 0}), "X"}, {Y, deg({0, 1}), "Y"},
          {vfields::bracket(X, Y), deg({1, 1}), "T"}};
}

}  // namespace

TEST_CASE("flow_endpoint: constant field moves by the control mass") {
  std::vector<VField> fields = {VField::parse(1, "[1/2]")};
  auto p = SubunitPath::constant({0.999});
  CHECK(p.is_subunit());
  auto y = flow_endpoint(fields, p, {0.25}, 1e-12);
  CHECK(y[0] == doctest::Approx(0.25 + 0.999 * 0.5).epsilon(1e-12));
}

TEST_CASE("flow_endpoint: zero path stays put") {
  std::vector<VField> fields = {VField::parse(1, "[1]")};
  auto y = flow_endpoint(fields, SubunitPath::constant({0.0}), {0.7}, 1e-12);
  CHECK(y[0] == 0.7);
}

TEST_CASE("flow_endpoint: two-segment path matches a dense-stepping oracle") {
  auto list = grushin();
  std::vector<VField> fields = {list[0].field, list[1].field};
  SubunitPath p;
  p.segments = 2;
  p.coeffs = {{0.6, 0.3}, {-0.2, 0.7}};
  auto fine = flow_endpoint(fields, p, {0.0, 0.0}, 1e-12);
  // independent dense RK2 integration
  double x = 0.0, y = 0.0;
  const int steps = 200000;
  for (int s = 0; s < steps; ++s) {
    const auto& a = p.coeffs[s < steps / 2 ? 0 : 1];
    double h = 1.0 / steps;
    double xm = x + 0.5 * h * a[0];
    x += h * a[0];
    y += h * a[1] * xm;
  }
  CHECK(std::abs(fine[0] - x) <= 1e-8);
  CHECK(std::abs(fine[1] - y) <= 1e-8);
}

TEST_CASE("ball monotonicity by path reuse") {
  auto list = heis_triple();
  Rng rng(3);
  std::vector<double> delta = {0.5, 0.25};
  std::vector<double> delta2 = {0.75, 0.5};  // componentwise larger
  for (int trial = 0; trial < 10; ++trial) {
    auto path = SubunitPath::random(4, 3, 0.9, rng);
    auto c1 = scaling_chart(list, {0.1, -0.1, 0.0}, delta);
    auto c2 = scaling_chart(list, {0.1, -0.1, 0.0}, delta2);
    auto end1 = flow_endpoint(c1.scaled_fields, path, {0.1, -0.1, 0.0}, 1e-11);
    SubunitPath reused = path;
    for (auto& seg : reused.coeffs)
      for (int j = 0; j < 3; ++j)
        seg[j] *= list[j].degree.pow_delta(delta) / list[j].degree.pow_delta(delta2);
    CHECK(reused.is_subunit());
    auto end2 = flow_endpoint(c2.scaled_fields, reused, {0.1, -0.1, 0.0}, 1e-11);
    for (int k = 0; k < 3; ++k) CHECK(std::abs(end1[k] - end2[k]) <= 1e-9);
  }
}

TEST_CASE("scaling_chart: constant frame gives the affine chart") {
  std::vector<DegreedField> consts = {{VField::parse(2, "[1, 0]"), deg({1}), "dx"},
                                      {VField::parse(2, "[0, 1]"), deg({1}), "dy"}};
  auto chart = scaling_chart(consts, {0.3, -0.4}, {1.0});
  CHECK(chart.n0 == 2);
  auto y = chart.forward({0.12, -0.05});
  CHECK(y[0] == doctest::Approx(0.42).epsilon(1e-12));
  CHECK(y[1] == doctest::Approx(-0.45).epsilon(1e-12));
  auto py = chart.pullback_field(1, {0.05, 0.02}, 1e-5);
  CHECK(py[0] == doctest::Approx(0.0).epsilon(1e-6));
  CHECK(py[1] == doctest::Approx(1.0).epsilon(1e-6));
}

TEST_CASE("scaling_chart on a rank-one frame keeps one chart direction") {
  std::vector<DegreedField> single = {{VField::parse(2, "[1, 0]"), deg({1}), "dx"}};
  auto chart = scaling_chart(single, {0.0, 0.25}, {1.0});
  CHECK(chart.n0 == 1);
  auto y = chart.forward({0.2});
  CHECK(y[0] == doctest::Approx(0.2).epsilon(1e-12));
  CHECK(y[1] == doctest::Approx(0.25).epsilon(1e-12));
}

TEST_CASE("scaling_chart: the anisotropic frame at a regular point") {
  auto chart = scaling_chart(grushin(), {1.0, 0.0}, {1.0});
  CHECK(chart.n0 == 2);
  REQUIRE(chart.J0 == std::vector<int>{0, 1});
  // hand solution of the chart flow: (1+u1, u2(1+u1/2))
  for (auto u : {std::vector<double>{0.2, 0.1}, {-0.15, 0.22}}) {
    auto y = chart.forward(u);
    CHECK(y[0] == doctest::Approx(1.0 + u[0]).epsilon(1e-9));
    CHECK(y[1] == doctest::Approx(u[1] * (1.0 + 0.5 * u[0])).epsilon(1e-9));
  }
}

TEST_CASE("pullback consistency: the differential pushes Y back onto Z") {
  auto chart = scaling_chart(grushin(), {1.0, 0.0}, {1.0});
  const double h = 1e-5;
  for (auto u : {std::vector<double>{0.1, 0.05}, {-0.2, 0.15}}) {
    for (int j = 0; j < 2; ++j) {
      auto Y = chart.pullback_field(j, u, 1e-5);
      std::vector<double> pf(2, 0.0);
      for (int i = 0; i < 2; ++i) {
        auto up = u, um = u;
        up[i] += h;
        um[i] -= h;
        auto fp = chart.forward(up), fm = chart.forward(um);
        for (int k = 0; k < 2; ++k) pf[k] += Y[i] * (fp[k] - fm[k]) / (2 * h);
      }
      auto z = chart.scaled_fields[j].eval(chart.forward(u));
      for (int k = 0; k < 2; ++k) CHECK(std::abs(pf[k] - z[k]) <= 1e-6);
    }
  }
}

TEST_CASE("chart_verify: constant frame has unit pullback volume") {
  std::vector<DegreedField> consts = {{VField::parse(2, "[1, 0]"), deg({1}), "dx"},
                                      {VField::parse(2, "[0, 1]"), deg({1}), "dy"}};
  auto chart = scaling_chart(consts, {0.0, 0.0}, {1.0});
  ChartVerifyConfig cfg;
  cfg.samples = 60;
  cfg.probe_paths = 40;
  auto rep = chart_verify(chart, cfg);
  CHECK(rep.pass);
  CHECK(rep.det_min == doctest::Approx(1.0).epsilon(1e-5));
  CHECK(rep.det_max == doctest::Approx(1.0).epsilon(1e-5));
}

TEST_CASE("chart_verify: anisotropic frame stays within the volume-ratio bound") {
  auto chart = scaling_chart(grushin(), {1.0, 0.0}, {1.0});
  ChartVerifyConfig cfg;
  cfg.samples = 80;
  cfg.probe_paths = 60;
  cfg.det_ratio_bound = 4.0;
  auto rep = chart_verify(chart, cfg);
  CHECK(rep.pass);
  CHECK(rep.det_ratio <= 4.0);
  // hand bound from det Y = (1+u1)/(1+u1/2) on |u| <= 0.25
  CHECK(rep.det_ratio <= 1.4);
}

TEST_CASE("chart_verify: scaled step-2 frame inverts every probe endpoint") {
  auto chart = scaling_chart(heis_triple(), {0.0, 0.0, 0.0}, {0.5, 0.25});
  ChartVerifyConfig cfg;
  cfg.samples = 50;
  cfg.probe_paths = 100;
  cfg.probe_radius = chart.eta1 / 8.0;
  auto rep = chart_verify(chart, cfg);
  CHECK(rep.inclusion_failures == 0);
  CHECK(rep.injectivity_violations == 0);
}

TEST_CASE("multi-scale consistency: pre-scaled fields against scaled controls") {
  auto list = heis_triple();
  std::vector<double> delta = {0.5, 0.25};
  Rng rng(9);
  auto path = SubunitPath::random(6, 3, 0.8, rng);
  auto chart = scaling_chart(list, {0.0, 0.0, 0.0}, delta);
  auto end1 = flow_endpoint(chart.scaled_fields, path, {0.0, 0.0, 0.0}, 1e-11);
  SubunitPath path2 = path;
  for (auto& seg : path2.coeffs)
    for (int j = 0; j < 3; ++j) seg[j] *= list[j].degree.pow_delta(delta);
  std::vector<VField> plain;
  for (const auto& df : list) plain.push_back(df.field);
  auto end2 = flow_endpoint(plain, path2, {0.0, 0.0, 0.0}, 1e-11);
  for (int k = 0; k < 3; ++k) CHECK(std::abs(end1[k] - end2[k]) <= 1e-9);
}

TEST_CASE("scaling_chart rejects a fully degenerate base point") {
  std::vector<DegreedField> vanish = {{VField::parse(1, "[x1]"), deg({1}), "x dx"}};
  CHECK_THROWS(scaling_chart(vanish, {0.0}, {1.0}));
}
