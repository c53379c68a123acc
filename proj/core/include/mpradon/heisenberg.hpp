#pragma once

#include <vector>

#include "mpradon/opnorm.hpp"
#include "mpradon/rational.hpp"

namespace mpradon::decide {

/// Point of the 3-dimensional Heisenberg group in exponential
/// coordinates (x, y, t); the product twists t by the symplectic form.
struct HeisPoint {
  double x = 0, y = 0, t = 0;
};

HeisPoint heis_mul(const HeisPoint& a, const HeisPoint& b);
HeisPoint heis_inv(const HeisPoint& a);
HeisPoint heis_dilate(double d1, double d2, const HeisPoint& a);  // (d1 x, d2 y, d1 d2 t)

/// Exact-arithmetic twin for the group-axiom and automorphism tests.
struct HeisPointQ {
  Rational x, y, t;
  bool operator==(const HeisPointQ& o) const { return x == o.x && y == o.y && t == o.t; }
};
HeisPointQ heis_mul(const HeisPointQ& a, const HeisPointQ& b);
HeisPointQ heis_inv(const HeisPointQ& a);
HeisPointQ heis_dilate(const Rational& d1, const Rational& d2, const HeisPointQ& a);

struct HeisGrid {
  int nx = 32, ny = 32, nt = 32;
  double Lx = 2.0, Ly = 2.0, Lt = 1.5;  // extents [-L, L] per axis
  std::size_t size() const { return static_cast<std::size_t>(nx) * ny * nt; }
};

/// Group-convolution piece at the diagonal scale pair (m, -m) under the
/// Zygmund-type dilations: f -> f * bump_m with the product taken in the
/// group. Applied matrix-free on the grid with trilinear interpolation
/// and zero extension.
class HeisPieceOp {
public:
  HeisPieceOp(int m, const HeisGrid& grid, int quad_ab = 8, int quad_c = 16);

  void apply(const std::vector<double>& f, std::vector<double>& out) const;
  void apply_adjoint(const std::vector<double>& f, std::vector<double>& out) const;
  int scale() const { return m_; }
  const HeisGrid& grid() const { return grid_; }

private:
  void apply_impl(const std::vector<double>& f, std::vector<double>& out, bool adjoint) const;
  int m_;
  HeisGrid grid_;
  int quad_ab_, quad_c_;
};

struct HeisReport {
  double psi_hat_1 = 0.0;       // \hat psi(1) of the t-profile
  double euclid_partial = 0.0;  // Fourier mass of the diagonal pieces at (0,0,1)
  double euclid_expected = 0.0;
  double euclid_rel_err = 0.0;
  std::vector<opnorm::PairNormEntry> table;  // group-side pair norms over diagonal scales
  double table_max = 0.0;
  opnorm::DecayFit fit;  // over |m - m'| >= 1
  bool euclid_pass = false;
};

/// Euclidean-vs-group contrast for the diagonal bump family: the
/// Euclidean Fourier transform of the partial kernel at (0,0,1) grows
/// linearly in the number of diagonal scales, while the group-side pair
/// norms stay summable.
HeisReport heis_divergence_check(int M, const HeisGrid& grid, double power_tol = 1e-3,
                                 int fit_scale_cap = 2, bool with_group_side = true);

/// t-profile used by the diagonal family: negative second derivative of
/// a (-1,1) mollifier, so it has zero mean and a positive Fourier
/// transform at frequency 1.
double heis_psi(double t);
double heis_phi(double x);  // unit-mass mollifier on (-1,1)
double heis_psi_hat1();

}  // namespace mpradon::decide
