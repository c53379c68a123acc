#pragma once

#include <functional>
#include <vector>

#include "mpradon/dilations.hpp"
#include "mpradon/rational.hpp"

namespace mpradon::kernels {

/// One-dimensional catalog atom: amplitude * P(u) * M^(d)(u) at u = x/radius,
/// where M(u) = exp(-1/(1-u^2)) on (-1,1) is the standard mollifier.
/// Support is exactly (-radius, radius); values outside are 0 by
/// construction. Closed forms keep cancellation arrangeable analytically.
struct BumpAtom1D {
  int deriv = 0;
  std::vector<Rational> poly{Rational(1)};  // coefficients in u, low to high
  double radius = 1.0;
  double amplitude = 1.0;

  double eval(double x) const;
  double integral(int quad_order = 96) const;
  double moment(int k, int quad_order = 96) const;  // \int x^k b(x) dx
  double sup_abs(int samples = 2048) const;
  double sup_abs_deriv(int samples = 2048) const;  // sup |b'|

  static BumpAtom1D mollifier(double radius, double amplitude = 1.0);
  static BumpAtom1D mollifier_deriv(double radius, int order, double amplitude = 1.0);
  static BumpAtom1D poly_mollifier(double radius, std::vector<Rational> poly,
                                   double amplitude = 1.0);
  /// Rescaled copy: support shrinks by 1/lambda, mass is preserved.
  BumpAtom1D rescaled_mass_preserving(double lambda) const;
};

/// Finite sum of separable products of atoms on R^N.
struct BumpSpec {
  struct Term {
    double coeff = 1.0;
    std::vector<BumpAtom1D> factors;  // size = dim
  };
  int dim = 1;
  double support_radius = 0.25;
  std::vector<Term> terms;

  double eval(const std::vector<double>& t) const;
  double integral() const;
  /// C^0 and C^1 norms, reported by per-axis sampling of the factors.
  double c0_norm() const;
  double c1_norm() const;

  static BumpSpec separable(std::vector<BumpAtom1D> factors, double coeff = 1.0);
  static BumpSpec sum(int dim, std::vector<Term> terms, double support_radius);

  /// Tensor mollifier on B(radius), normalized to unit integral.
  static BumpSpec normalized_mollifier(int dim, double radius);
};

/// Scale-dilated evaluator 2^{j.e_1+...+j.e_N} bump(2^j t); the
/// normalization preserves the integral.
struct DilatedBump {
  const BumpSpec* spec = nullptr;
  double amplitude = 1.0;
  std::vector<double> axis_scale;  // per-coordinate 2^{j.e_i}

  double eval(const std::vector<double>& t) const;
};

DilatedBump dilate_bump(const BumpSpec& spec, const dilations::DilationScheme& scheme,
                        const dilations::LatticePoint& j);

}  // namespace mpradon::kernels
