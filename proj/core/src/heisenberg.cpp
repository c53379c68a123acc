#include "mpradon/heisenberg.hpp"

#include <cmath>
#include <stdexcept>

#include "mpradon/expr.hpp"
#include "mpradon/kernels.hpp"
#include "mpradon/parallel.hpp"
#include "mpradon/quadrature.hpp"

namespace mpradon::decide {

HeisPoint heis_mul(const HeisPoint& a, const HeisPoint& b) {
  return {a.x + b.x, a.y + b.y, a.t + b.t + 2.0 * (a.y * b.x - a.x * b.y)};
}

HeisPoint heis_inv(const HeisPoint& a) { return {-a.x, -a.y, -a.t}; }

HeisPoint heis_dilate(double d1, double d2, const HeisPoint& a) {
  return {d1 * a.x, d2 * a.y, d1 * d2 * a.t};
}

HeisPointQ heis_mul(const HeisPointQ& a, const HeisPointQ& b) {
  return {a.x + b.x, a.y + b.y,
          a.t + b.t + Rational(2) * (a.y * b.x - a.x * b.y)};
}

HeisPointQ heis_inv(const HeisPointQ& a) { return {-a.x, -a.y, -a.t}; }

HeisPointQ heis_dilate(const Rational& d1, const Rational& d2, const HeisPointQ& a) {
  return {d1 * a.x, d2 * a.y, d1 * d2 * a.t};
}

// ---------------------------------------------------------------------------
// Profiles

namespace {

double mollifier(double u) {
  if (std::abs(u) >= 1.0 - 1e-13) return 0.0;
  return std::exp(-1.0 / (1.0 - u * u));
}

double mollifier_d2(double u) {
  static const vfields::Expr d2 = [] {
    using E = vfields::Expr;
    E v = E::var(0);
    E one = E::constant(Rational(1));
    return E::exp_of(-(E::pow(one - v * v, -1))).derivative(0).derivative(0);
  }();
  if (std::abs(u) >= 1.0 - 1e-13) return 0.0;
  return d2.eval({u});
}

double phi_mass() {
  static const double m = integrate(mollifier, -1.0, 1.0, 200);
  return m;
}

}  // namespace

double heis_phi(double x) { return mollifier(x) / phi_mass(); }

double heis_psi(double t) { return -mollifier_d2(t); }

double heis_psi_hat1() {
  static const double v =
      integrate([](double t) { return heis_psi(t) * std::cos(t); }, -1.0, 1.0, 200);
  return v;
}

// ---------------------------------------------------------------------------
// Group-convolution pieces

HeisPieceOp::HeisPieceOp(int m, const HeisGrid& grid, int quad_ab, int quad_c)
    : m_(m), grid_(grid), quad_ab_(quad_ab), quad_c_(quad_c) {}

void HeisPieceOp::apply_impl(const std::vector<double>& f, std::vector<double>& out,
                             bool adjoint) const {
  const HeisGrid& g = grid_;
  out.assign(g.size(), 0.0);
  const auto& rab = gauss_legendre(quad_ab_);
  const auto& rc = gauss_legendre(quad_c_);
  const double sa = std::exp2(-m_);  // a-support half-width after substitution
  const double sb = std::exp2(m_);
  const double sign = adjoint ? 1.0 : -1.0;

  // t-smoothing first: G(x,y,s) = \int f(x, y, s + sign*c) psi(c) dc on
  // the grid, then the (a,b) gather with the twisted t-shift. The
  // interpolation stencil per (k, node) is independent of the column, so
  // it is tabulated once.
  std::vector<double> G(g.size(), 0.0);
  const double ht = 2.0 * g.Lt / (g.nt - 1);
  struct TStencil {
    int k, it;
    double w0, w1;
  };
  std::vector<TStencil> tsten;
  {
    std::vector<double> wq(rc.nodes.size());
    for (std::size_t q = 0; q < rc.nodes.size(); ++q)
      wq[q] = rc.weights[q] * heis_psi(rc.nodes[q]);
    for (int k = 0; k < g.nt; ++k) {
      const double t = -g.Lt + k * ht;
      for (std::size_t q = 0; q < rc.nodes.size(); ++q) {
        if (wq[q] == 0.0) continue;
        const double pt = (t + sign * rc.nodes[q] + g.Lt) / ht;
        if (pt < 0 || pt > g.nt - 1) continue;
        const int it = std::min(static_cast<int>(pt), g.nt - 2);
        const double ft = pt - it;
        tsten.push_back({k, it, wq[q] * (1 - ft), wq[q] * ft});
      }
    }
  }
  parallel_for(static_cast<std::size_t>(g.nx) * g.ny, [&](std::size_t xy) {
    const std::size_t base = xy * g.nt;
    for (const auto& s : tsten)
      G[base + s.k] += s.w0 * f[base + s.it] + s.w1 * f[base + s.it + 1];
  });

  // Unit-substituted (a,b) nodes: the substitution Jacobian cancels the
  // anisotropic profile scalings exactly, leaving plain phi weights. For
  // a fixed (x, y, a, b) the twisted shift is constant along the t-line,
  // so the inner loop is a single linear blend of two contiguous runs.
  const double hx = 2.0 * g.Lx / (g.nx - 1);
  const double hy = 2.0 * g.Ly / (g.ny - 1);
  std::vector<double> phi_w(rab.nodes.size());
  for (std::size_t q = 0; q < rab.nodes.size(); ++q)
    phi_w[q] = rab.weights[q] * heis_phi(rab.nodes[q]);
  parallel_for(static_cast<std::size_t>(g.nx) * g.ny, [&](std::size_t xy) {
    const int i = static_cast<int>(xy) / g.ny;
    const int jy = static_cast<int>(xy) % g.ny;
    const double x = -g.Lx + i * hx;
    const double y = -g.Ly + jy * hy;
    double* out_line = &out[(static_cast<std::size_t>(i) * g.ny + jy) * g.nt];
    for (std::size_t qa = 0; qa < rab.nodes.size(); ++qa) {
      const double a = sa * rab.nodes[qa];
      const double wa = phi_w[qa];
      if (wa == 0.0) continue;
      const double xs = x + sign * a;
      const double px = (xs + g.Lx) / hx;
      if (px < 0 || px > g.nx - 1) continue;
      const int ix = std::min(static_cast<int>(px), g.nx - 2);
      const double fx = px - ix;
      for (std::size_t qb = 0; qb < rab.nodes.size(); ++qb) {
        const double b = sb * rab.nodes[qb];
        const double w = wa * phi_w[qb];
        if (w == 0.0) continue;
        const double ys = y + sign * b;
        const double py = (ys + g.Ly) / hy;
        if (py < 0 || py > g.ny - 1) continue;
        const int iy = std::min(static_cast<int>(py), g.ny - 2);
        const double fy = py - iy;
        const double shift = sign * 2.0 * (y * a - x * b);
        const double koff = shift / ht;  // constant fractional t-offset
        const double w00 = w * (1 - fx) * (1 - fy), w10 = w * fx * (1 - fy);
        const double w01 = w * (1 - fx) * fy, w11 = w * fx * fy;
        const double* g00 = &G[(static_cast<std::size_t>(ix) * g.ny + iy) * g.nt];
        const double* g10 = &G[(static_cast<std::size_t>(ix + 1) * g.ny + iy) * g.nt];
        const double* g01 = &G[(static_cast<std::size_t>(ix) * g.ny + iy + 1) * g.nt];
        const double* g11 = &G[(static_cast<std::size_t>(ix + 1) * g.ny + iy + 1) * g.nt];
        const double kfloor = std::floor(koff);
        const int ik = static_cast<int>(kfloor);
        const double ft = koff - kfloor;
        const int klo = std::max(0, -ik);
        const int khi = std::min(g.nt, g.nt - 1 - ik);
        for (int k = klo; k < khi; ++k) {
          const int kk = k + ik;
          const double v0 = w00 * g00[kk] + w10 * g10[kk] + w01 * g01[kk] + w11 * g11[kk];
          const double v1 =
              w00 * g00[kk + 1] + w10 * g10[kk + 1] + w01 * g01[kk + 1] + w11 * g11[kk + 1];
          out_line[k] += v0 * (1 - ft) + v1 * ft;
        }
      }
    }
  });
}

void HeisPieceOp::apply(const std::vector<double>& f, std::vector<double>& out) const {
  apply_impl(f, out, false);
}

void HeisPieceOp::apply_adjoint(const std::vector<double>& f, std::vector<double>& out) const {
  apply_impl(f, out, true);
}

HeisReport heis_divergence_check(int M, const HeisGrid& grid, double power_tol,
                                 int fit_scale_cap, bool with_group_side) {
  HeisReport rep;
  rep.psi_hat_1 = heis_psi_hat1();

  // Euclidean side: the Fourier transform of each diagonal piece at
  // (0,0,1) computed by tensor quadrature over its own support.
  double partial = 0.0;
  for (int m = -M; m <= M; ++m) {
    const double sx = std::exp2(-m), sy = std::exp2(m);
    double ix = integrate([&](double x) { return std::exp2(static_cast<double>(m)) *
                                                 heis_phi(std::exp2(static_cast<double>(m)) * x); },
                          -sx, sx, 96);
    double iy = integrate([&](double y) { return std::exp2(static_cast<double>(-m)) *
                                                 heis_phi(std::exp2(static_cast<double>(-m)) * y); },
                          -sy, sy, 96);
    double it = integrate([](double t) { return heis_psi(t) * std::cos(t); }, -1.0, 1.0, 96);
    partial += ix * iy * it;
  }
  rep.euclid_partial = partial;
  rep.euclid_expected = (2.0 * M + 1.0) * rep.psi_hat_1;
  rep.euclid_rel_err = std::abs(partial - rep.euclid_expected) /
                       std::max(std::abs(rep.euclid_expected), 1e-300);
  rep.euclid_pass = rep.euclid_rel_err <= 0.01;

  if (!with_group_side) return rep;

  // Group side: pair norms over the diagonal scales, capped for the fit.
  std::vector<HeisPieceOp> pieces;
  std::vector<int> scales;
  for (int m = -M; m <= M; ++m) {
    pieces.emplace_back(m, grid);
    scales.push_back(m);
  }
  const int dim = static_cast<int>(grid.size());
  for (std::size_t a = 0; a < pieces.size(); ++a)
    for (std::size_t b = a; b < pieces.size(); ++b) {
      auto fwd = [&](const std::vector<double>& v, std::vector<double>& o) {
        std::vector<double> mid;
        pieces[a].apply(v, mid);
        pieces[b].apply_adjoint(mid, o);
      };
      auto adj = [&](const std::vector<double>& v, std::vector<double>& o) {
        std::vector<double> mid;
        pieces[b].apply(v, mid);
        pieces[a].apply_adjoint(mid, o);
      };
      double norm = opnorm::spectral_norm_op(fwd, adj, dim, dim, power_tol, 400);
      opnorm::PairNormEntry e;
      e.j = {scales[a]};
      e.k = {scales[b]};
      e.norm_star = norm;
      rep.table.push_back(e);
      rep.table_max = std::max(rep.table_max, norm);
    }

  // Slope fit over the well-resolved inner scales.
  std::vector<double> xs, ys;
  for (const auto& e : rep.table) {
    if (std::abs(e.j[0]) > fit_scale_cap || std::abs(e.k[0]) > fit_scale_cap) continue;
    const double d = std::abs(e.j[0] - e.k[0]);
    if (d >= 1.0 && e.norm_star > 0.0) {
      xs.push_back(d);
      ys.push_back(std::log2(e.norm_star));
    }
  }
  if (xs.size() >= 3) {
    auto lf = kernels::fit_line(xs, ys);
    rep.fit.slope = lf.slope;
    rep.fit.intercept = lf.intercept;
    rep.fit.r2 = lf.r2;
  }
  return rep;
}

}  // namespace mpradon::decide
