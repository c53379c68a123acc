#include "mpradon/bumps.hpp"

#include <cmath>
#include <mutex>
#include <stdexcept>

#include "mpradon/expr.hpp"
#include "mpradon/quadrature.hpp"

namespace mpradon::kernels {

namespace {

// M^(d)(u) for the mollifier M(u) = exp(-1/(1-u^2)), via the exact
// expression-tree derivative; cached per order.
const vfields::Expr& mollifier_derivative_expr(int order) {
  static std::vector<vfields::Expr> cache;
  static std::mutex mutex;
  std::lock_guard<std::mutex> lock(mutex);
  if (cache.empty()) {
    using E = vfields::Expr;
    E u = E::var(0);
    E one = E::constant(Rational(1));
    E m = E::exp_of(-(E::pow(one - u * u, -1)));
    cache.push_back(m);
  }
  while (static_cast<int>(cache.size()) <= order) cache.push_back(cache.back().derivative(0));
  return cache[order];
}

double eval_mollifier_deriv(int order, double u) {
  if (std::abs(u) >= 1.0 - 1e-13) return 0.0;
  return mollifier_derivative_expr(order).eval({u});
}

}  // namespace

double BumpAtom1D::eval(double x) const {
  const double u = x / radius;
  if (std::abs(u) >= 1.0 - 1e-13) return 0.0;
  double p = 0.0;
  for (std::size_t k = poly.size(); k-- > 0;) p = p * u + poly[k].value();
  return amplitude * p * eval_mollifier_deriv(deriv, u);
}

double BumpAtom1D::integral(int quad_order) const {
  return integrate([this](double x) { return eval(x); }, -radius, radius, quad_order);
}

double BumpAtom1D::moment(int k, int quad_order) const {
  return integrate([this, k](double x) { return std::pow(x, k) * eval(x); }, -radius, radius,
                   quad_order);
}

double BumpAtom1D::sup_abs(int samples) const {
  double m = 0.0;
  for (int i = 0; i <= samples; ++i) {
    double x = -radius + 2.0 * radius * i / samples;
    m = std::max(m, std::abs(eval(x)));
  }
  return m;
}

double BumpAtom1D::sup_abs_deriv(int samples) const {
  double m = 0.0, h = radius / samples;
  for (int i = 1; i < samples; ++i) {
    double x = -radius + 2.0 * radius * i / samples;
    m = std::max(m, std::abs((eval(x + h) - eval(x - h)) / (2.0 * h)));
  }
  return m;
}

BumpAtom1D BumpAtom1D::mollifier(double radius, double amplitude) {
  BumpAtom1D b;
  b.radius = radius;
  b.amplitude = amplitude;
  return b;
}

BumpAtom1D BumpAtom1D::mollifier_deriv(double radius, int order, double amplitude) {
  BumpAtom1D b;
  b.deriv = order;
  b.radius = radius;
  b.amplitude = amplitude;
  return b;
}

BumpAtom1D BumpAtom1D::poly_mollifier(double radius, std::vector<Rational> poly,
                                      double amplitude) {
  BumpAtom1D b;
  b.poly = std::move(poly);
  b.radius = radius;
  b.amplitude = amplitude;
  return b;
}

BumpAtom1D BumpAtom1D::rescaled_mass_preserving(double lambda) const {
  BumpAtom1D b = *this;
  b.radius = radius / lambda;
  b.amplitude = amplitude * lambda;
  return b;
}

double BumpSpec::eval(const std::vector<double>& t) const {
  if (static_cast<int>(t.size()) != dim)
    throw std::invalid_argument("BumpSpec::eval: arity mismatch");
  double s = 0.0;
  for (const auto& term : terms) {
    double p = term.coeff;
    for (int i = 0; i < dim && p != 0.0; ++i) p *= term.factors[i].eval(t[i]);
    s += p;
  }
  return s;
}

double BumpSpec::integral() const {
  double s = 0.0;
  for (const auto& term : terms) {
    double p = term.coeff;
    for (int i = 0; i < dim; ++i) p *= term.factors[i].integral();
    s += p;
  }
  return s;
}

double BumpSpec::c0_norm() const {
  double s = 0.0;
  for (const auto& term : terms) {
    double p = std::abs(term.coeff);
    for (int i = 0; i < dim; ++i) p *= term.factors[i].sup_abs();
    s += p;
  }
  return s;
}

double BumpSpec::c1_norm() const {
  double s = c0_norm();
  for (const auto& term : terms) {
    for (int axis = 0; axis < dim; ++axis) {
      double p = std::abs(term.coeff);
      for (int i = 0; i < dim; ++i)
        p *= (i == axis) ? term.factors[i].sup_abs_deriv() : term.factors[i].sup_abs();
      s += p;
    }
  }
  return s;
}

BumpSpec BumpSpec::separable(std::vector<BumpAtom1D> factors, double coeff) {
  BumpSpec b;
  b.dim = static_cast<int>(factors.size());
  double r = 0.0;
  for (const auto& f : factors) r = std::max(r, f.radius);
  b.support_radius = r;
  b.terms.push_back(Term{coeff, std::move(factors)});
  return b;
}

BumpSpec BumpSpec::sum(int dim, std::vector<Term> terms, double support_radius) {
  BumpSpec b;
  b.dim = dim;
  b.support_radius = support_radius;
  for (const auto& t : terms)
    if (static_cast<int>(t.factors.size()) != dim)
      throw std::invalid_argument("BumpSpec::sum: factor arity mismatch");
  b.terms = std::move(terms);
  return b;
}

BumpSpec BumpSpec::normalized_mollifier(int dim, double radius) {
  BumpAtom1D atom = BumpAtom1D::mollifier(radius);
  const double mass = atom.integral();
  atom.amplitude = 1.0 / mass;
  return separable(std::vector<BumpAtom1D>(dim, atom));
}

double DilatedBump::eval(const std::vector<double>& t) const {
  std::vector<double> scaled(t.size());
  for (std::size_t i = 0; i < t.size(); ++i) scaled[i] = axis_scale[i] * t[i];
  return amplitude * spec->eval(scaled);
}

DilatedBump dilate_bump(const BumpSpec& spec, const dilations::DilationScheme& scheme,
                        const dilations::LatticePoint& j) {
  if (spec.dim != scheme.N) throw std::invalid_argument("dilate_bump: dimension mismatch");
  DilatedBump d;
  d.spec = &spec;
  d.axis_scale.resize(scheme.N);
  double log2_amp = 0.0;
  for (int i = 0; i < scheme.N; ++i) {
    double je = 0.0;
    for (int mu = 0; mu < scheme.nu; ++mu) je += j[mu] * scheme.exponents[i][mu].value();
    d.axis_scale[i] = std::exp2(je);
    log2_amp += je;
  }
  d.amplitude = std::exp2(log2_amp);
  return d;
}

}  // namespace mpradon::kernels
