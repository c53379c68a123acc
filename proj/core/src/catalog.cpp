#include "mpradon/catalog.hpp"

#include <cmath>

#include "mpradon/odeint.hpp"
#include "mpradon/quadrature.hpp"

namespace mpradon::surfaces {

namespace {

using vfields::VField;

WSpec make_wspec(int N, int n, std::vector<std::pair<std::vector<int>, std::string>> terms) {
  WSpec w;
  w.N = N;
  w.n = n;
  w.scheme = dilations::DilationScheme::product_standard(N);
  for (auto& [alpha, text] : terms) w.terms.emplace_back(alpha, VField::parse(n, text));
  return w;
}

double flat_g(double x) {
  if (x == 0.0) return 0.0;
  return std::exp(-1.0 / (x * x));
}

}  // namespace

std::vector<CatalogEntry> surface_catalog(double ode_tol) {
  std::vector<CatalogEntry> cat;

  {  // 1. straight translation, N = n = 1
    CatalogEntry e;
    e.name = "translate";
    e.map = SurfaceMap::from_wspec(make_wspec(1, 1, {{{1}, "[1]"}}), ode_tol, 0.5, "translate");
    e.oracle = SurfaceMap::closed_form(
        1, 1, [](const std::vector<double>& t, const std::vector<double>& x) {
          return std::vector<double>{x[0] + t[0]};
        },
        [](const std::vector<double>& t, const std::vector<double>& x) {
          return std::vector<double>{x[0] - t[0]};
        },
        0.5, "translate_cf");
    e.x0 = {0.0};
    e.cz_M = 1; e.cz_Mprime = 1; e.cj_M = 1;
    cat.push_back(std::move(e));
  }
  {  // 2. scaling flow x e^t
    CatalogEntry e;
    e.name = "scaling";
    e.map = SurfaceMap::from_wspec(make_wspec(1, 1, {{{1}, "[x1]"}}), ode_tol, 0.5, "scaling");
    e.oracle = SurfaceMap::closed_form(
        1, 1, [](const std::vector<double>& t, const std::vector<double>& x) {
          return std::vector<double>{x[0] * std::exp(t[0])};
        },
        [](const std::vector<double>& t, const std::vector<double>& x) {
          return std::vector<double>{x[0] * std::exp(-t[0])};
        },
        0.5, "scaling_cf");
    e.x0 = {0.5};
    e.cz_M = 1; e.cz_Mprime = 1; e.cj_M = 1;
    cat.push_back(std::move(e));
  }
  {  // 3. quadratic-in-t drift x + t^2/2
    CatalogEntry e;
    e.name = "parabola_half";
    e.map = SurfaceMap::from_wspec(make_wspec(1, 1, {{{2}, "[1]"}}), ode_tol, 0.5, "parabola_half");
    e.oracle = SurfaceMap::closed_form(
        1, 1, [](const std::vector<double>& t, const std::vector<double>& x) {
          return std::vector<double>{x[0] + 0.5 * t[0] * t[0]};
        },
        [](const std::vector<double>& t, const std::vector<double>& x) {
          return std::vector<double>{x[0] - 0.5 * t[0] * t[0]};
        },
        0.5, "parabola_half_cf");
    e.x0 = {0.0};
    e.cz_M = 2; e.cz_Mprime = 1; e.cj_M = 1;
    cat.push_back(std::move(e));
  }
  {  // 4. quadratic vector field, Moebius-type flow
    CatalogEntry e;
    e.name = "moebius";
    e.map = SurfaceMap::from_wspec(make_wspec(1, 1, {{{1}, "[x1^2]"}}), ode_tol, 0.4, "moebius");
    e.oracle = SurfaceMap::closed_form(
        1, 1, [](const std::vector<double>& t, const std::vector<double>& x) {
          return std::vector<double>{x[0] / (1.0 - t[0] * x[0])};
        },
        [](const std::vector<double>& t, const std::vector<double>& x) {
          return std::vector<double>{x[0] / (1.0 + t[0] * x[0])};
        },
        0.4, "moebius_cf");
    e.x0 = {0.5};
    e.cz_M = 1; e.cz_Mprime = 1; e.cj_M = 1;
    cat.push_back(std::move(e));
  }
  {  // 5. rigid rotation in the plane; a rank-one geometry where the
     //    spanning checks must agree on failure
    CatalogEntry e;
    e.name = "rotation";
    e.map = SurfaceMap::from_wspec(make_wspec(1, 2, {{{1}, "[-x2, x1]"}}), ode_tol, 0.5, "rotation");
    e.oracle = SurfaceMap::closed_form(
        1, 2, [](const std::vector<double>& t, const std::vector<double>& x) {
          double c = std::cos(t[0]), s = std::sin(t[0]);
          return std::vector<double>{c * x[0] - s * x[1], s * x[0] + c * x[1]};
        },
        [](const std::vector<double>& t, const std::vector<double>& x) {
          double c = std::cos(t[0]), s = std::sin(t[0]);
          return std::vector<double>{c * x[0] + s * x[1], -s * x[0] + c * x[1]};
        },
        0.5, "rotation_cf");
    e.x0 = {1.0, 0.0};
    e.cz_M = 1; e.cz_Mprime = 3; e.cj_M = 2;
    e.spanning_expected = false;
    cat.push_back(std::move(e));
  }
  {  // 6. shear with a quadratic correction, n = 2
    CatalogEntry e;
    e.name = "shear";
    e.map = SurfaceMap::from_wspec(make_wspec(1, 2, {{{1}, "[1, x1]"}, {{2}, "[0, 1]"}}), ode_tol,
                                   0.5, "shear");
    e.oracle = SurfaceMap::closed_form(
        1, 2, [](const std::vector<double>& t, const std::vector<double>& x) {
          return std::vector<double>{x[0] + t[0], x[1] + t[0] * x[0] + t[0] * t[0]};
        },
        [](const std::vector<double>& t, const std::vector<double>& x) {
          double x0 = x[0] - t[0];
          return std::vector<double>{x0, x[1] - t[0] * x0 - t[0] * t[0]};
        },
        0.5, "shear_cf");
    e.x0 = {0.1, -0.2};
    e.cz_M = 2; e.cz_Mprime = 2; e.cj_M = 1;
    cat.push_back(std::move(e));
  }
  {  // 7. bilinear drift x - s t: the single generator is non-pure
    CatalogEntry e;
    e.name = "bilinear";
    e.map = SurfaceMap::from_wspec(make_wspec(2, 1, {{{1, 1}, "[-2]"}}), ode_tol, 0.5, "bilinear");
    e.oracle = SurfaceMap::closed_form(
        2, 1, [](const std::vector<double>& t, const std::vector<double>& x) {
          return std::vector<double>{x[0] - t[0] * t[1]};
        },
        [](const std::vector<double>& t, const std::vector<double>& x) {
          return std::vector<double>{x[0] + t[0] * t[1]};
        },
        0.5, "bilinear_cf");
    e.x0 = {0.0};
    e.cz_M = 2; e.cz_Mprime = 1; e.cj_M = 1;
    cat.push_back(std::move(e));
  }
  {  // 8. parabola x + t^2
    CatalogEntry e;
    e.name = "parabola";
    e.map = SurfaceMap::from_wspec(make_wspec(1, 1, {{{2}, "[2]"}}), ode_tol, 0.5, "parabola");
    e.oracle = SurfaceMap::closed_form(
        1, 1, [](const std::vector<double>& t, const std::vector<double>& x) {
          return std::vector<double>{x[0] + t[0] * t[0]};
        },
        [](const std::vector<double>& t, const std::vector<double>& x) {
          return std::vector<double>{x[0] - t[0] * t[0]};
        },
        0.5, "parabola_cf");
    e.x0 = {0.0};
    e.cz_M = 2; e.cz_Mprime = 1; e.cj_M = 1;
    cat.push_back(std::move(e));
  }
  {  // 9. two-parameter exponential on the step-2 nilpotent frame
    CatalogEntry e;
    e.name = "nilpotent_exp";
    e.map = SurfaceMap::from_wspec(
        make_wspec(2, 3, {{{1, 0}, "[1, 0, 2*x2]"}, {{0, 1}, "[0, 1, -2*x1]"}}), ode_tol, 0.5,
        "nilpotent_exp");
    e.oracle = SurfaceMap::closed_form(
        2, 3, [](const std::vector<double>& t, const std::vector<double>& x) {
          return std::vector<double>{x[0] + t[0], x[1] + t[1],
                                     x[2] + 2.0 * (t[0] * x[1] - t[1] * x[0])};
        },
        [](const std::vector<double>& t, const std::vector<double>& x) {
          // flow of -(sX + tY) from x
          return std::vector<double>{x[0] - t[0], x[1] - t[1],
                                     x[2] - 2.0 * (t[0] * x[1] - t[1] * x[0])};
        },
        0.5, "nilpotent_exp_cf");
    e.x0 = {0.2, -0.1, 0.0};
    e.cz_M = 1; e.cz_Mprime = 2; e.cj_M = 2;
    cat.push_back(std::move(e));
  }
  {  // 10. mixed flag-type surface with a flat coefficient; closed form
     //     up to a smooth 1-d quadrature
    CatalogEntry e;
    e.name = "flag_mixed";
    auto fwd = [](const std::vector<double>& t, const std::vector<double>& x) {
      const double s = t[0], u = t[1];
      double integral = integrate([&](double w) { return flat_g(x[0] + s * w); }, 0.0, 1.0, 32);
      return std::vector<double>{x[0] + s, x[1] + u + s * s * integral};
    };
    auto inv = [](const std::vector<double>& t, const std::vector<double>& x) {
      const double s = t[0], u = t[1];
      const double x0 = x[0] - s;
      double integral = integrate([&](double w) { return flat_g(x0 + s * w); }, 0.0, 1.0, 32);
      return std::vector<double>{x0, x[1] - u - s * s * integral};
    };
    e.map = SurfaceMap::closed_form(2, 2, fwd, inv, 0.4, "flag_mixed");
    e.x0 = {0.3, 0.0};
    e.cz_M = 1; e.cz_Mprime = 1; e.cj_M = 1;
    cat.push_back(std::move(e));
  }
  return cat;
}

std::vector<double> gamma_from_w_numeric(
    const std::function<std::vector<double>(const std::vector<double>&,
                                            const std::vector<double>&)>& w,
    const std::vector<double>& t, const std::vector<double>& x, double ode_tol) {
  auto rhs = [&](double eps, const std::vector<double>& y) {
    std::vector<double> ts(t.size());
    for (std::size_t i = 0; i < t.size(); ++i) ts[i] = eps * t[i];
    auto v = w(ts, y);
    for (auto& vv : v) vv /= eps;
    return v;
  };
  // W vanishes linearly at eps = 0, so starting just off 0 costs O(eps0^2).
  const double eps0 = 1e-8;
  return rk4_adaptive(rhs, eps0, 1.0, x, ode_tol);
}

}  // namespace mpradon::surfaces
