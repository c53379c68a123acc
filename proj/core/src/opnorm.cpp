#include "mpradon/opnorm.hpp"

#include <cmath>
#include <map>
#include <set>
#include <stdexcept>

#include "mpradon/kernels.hpp"
#include "mpradon/quadrature.hpp"
#include "mpradon/rng.hpp"

namespace mpradon::opnorm {

DiscretizedOp discretize_piece(const surfaces::SurfaceMap& surface, const kernels::BumpSpec& bump,
                               const dilations::DilationScheme& scheme,
                               const dilations::LatticePoint& j, const Cutoffs& cutoffs,
                               const GridSpec& grid) {
  const int N = scheme.N;
  if (surface.N() != N || surface.n() != 1)
    throw std::invalid_argument("discretize_piece: expects a 1-d surface over the t-space");
  const XGrid& xg = grid.x;
  auto psi1 = cutoffs.psi1 ? cutoffs.psi1 : [](double) { return 1.0; };
  auto psi2 = cutoffs.psi2 ? cutoffs.psi2 : [](double) { return 1.0; };
  auto kappa = cutoffs.kappa ? cutoffs.kappa : [](const std::vector<double>&, double) { return 1.0; };

  const auto delta = dilations::dyadic_delta(scheme.nu, j);
  const double a = bump.support_radius;
  const auto& rule = gauss_legendre(grid.t_quad_order);

  std::vector<Eigen::Triplet<double>> trip;
  // Quadrature in unit-support coordinates: t in [-a,a]^N against
  // bump(t), the surface evaluated at the dilated parameter.
  struct QNode {
    std::vector<double> t;
    double w;
  };
  std::vector<QNode> nodes;
  if (grid.align_t_nodes) {
    if (N != 1)
      throw std::invalid_argument("discretize_piece: aligned t-nodes need a 1-d t-space");
    // Lattice sampling of the dilated bump at the x-grid spacing; the
    // node weights fold the dilation in, so qn.t stays in unit-support
    // coordinates like the Gauss path below.
    const double h = xg.h();
    // dilated support: |t| < a * delta-power along the single axis
    std::vector<double> probe = dilations::scale_point(scheme, delta, {a});
    const double reach = std::abs(probe[0]);
    const int kmax = static_cast<int>(std::ceil(reach / h)) + 1;
    for (int k = -kmax; k <= kmax; ++k) {
      const double td = k * h;  // dilated coordinate, on the lattice
      // invert the dilation for the unit-support coordinate
      const double tu = td / (reach / a);
      QNode qn;
      qn.t = {tu};
      qn.w = (h / (reach / a)) * bump.eval({tu});
      if (qn.w != 0.0) nodes.push_back(std::move(qn));
    }
  } else {
    std::vector<std::size_t> idx(N, 0);
    for (;;) {
      QNode qn;
      qn.t.resize(N);
      qn.w = 1.0;
      for (int i = 0; i < N; ++i) {
        qn.t[i] = a * rule.nodes[idx[i]];
        qn.w *= a * rule.weights[idx[i]];
      }
      qn.w *= bump.eval(qn.t);
      if (qn.w != 0.0) nodes.push_back(std::move(qn));
      int k = N - 1;
      while (k >= 0 && ++idx[k] == rule.nodes.size()) idx[k--] = 0;
      if (k < 0) break;
    }
  }

  for (int r = 0; r < xg.n; ++r) {
    const double xr = xg.point(r);
    const double p1 = psi1(xr);
    if (p1 == 0.0) continue;
    for (const auto& qn : nodes) {
      auto td = dilations::scale_point(scheme, delta, qn.t);
      double y = surface.apply(td, {xr})[0];
      double w = qn.w * p1 * psi2(y) * kappa(td, xr);
      if (w == 0.0) continue;
      // linear interpolation weights of y on the grid
      double pos = (y - xg.lo) / xg.h();
      if (xg.periodic) {
        pos = std::fmod(pos, static_cast<double>(xg.n));
        if (pos < 0) pos += xg.n;
        int c0 = static_cast<int>(std::floor(pos));
        double fr = pos - c0;
        trip.emplace_back(r, c0 % xg.n, w * (1.0 - fr));
        trip.emplace_back(r, (c0 + 1) % xg.n, w * fr);
      } else {
        if (pos < 0.0 || pos > xg.n - 1)
          throw std::runtime_error("discretize_piece: mapped point leaves the grid at x=" +
                                   std::to_string(xr));
        int c0 = std::min(static_cast<int>(std::floor(pos)), xg.n - 2);
        double fr = pos - c0;
        trip.emplace_back(r, c0, w * (1.0 - fr));
        trip.emplace_back(r, c0 + 1, w * fr);
      }
    }
  }
  DiscretizedOp op;
  op.j = j;
  op.mat.resize(xg.n, xg.n);
  op.mat.setFromTriplets(trip.begin(), trip.end());
  op.mat.makeCompressed();
  return op;
}

namespace {

double power_iterate(const std::function<void(const std::vector<double>&, std::vector<double>&)>& fwd,
                     const std::function<void(const std::vector<double>&, std::vector<double>&)>& adj,
                     int dim_in, int dim_out, double tol, int max_iter) {
  Rng rng(0x5eedf00dull);
  std::vector<double> v(dim_in);
  double nv = 0.0;
  for (auto& e : v) {
    e = 2.0 * rng.next_double() - 1.0;
    nv += e * e;
  }
  nv = std::sqrt(nv);
  for (auto& e : v) e /= nv;

  std::vector<double> y(dim_out), z(dim_in);
  std::vector<double> history;
  double sigma = 0.0, last_accel = -1.0;
  for (int it = 0; it < max_iter; ++it) {
    fwd(v, y);
    double ny = 0.0;
    for (double e : y) ny += e * e;
    ny = std::sqrt(ny);
    if (ny == 0.0) return 0.0;
    adj(y, z);
    double nz = 0.0;
    for (double e : z) nz += e * e;
    nz = std::sqrt(nz);
    if (nz == 0.0) return ny;
    for (int i = 0; i < dim_in; ++i) v[i] = z[i] / nz;
    double s = ny;  // ||A v|| with unit v: the Rayleigh estimate, increasing
    if (it > 2 && std::abs(s - sigma) <= tol * std::max(s, 1e-300)) return std::max(s, sigma);
    sigma = s;
    history.push_back(s);
    // Clustered spectra make the Rayleigh sequence geometric with a
    // ratio near 1; successive differences then pass any tolerance long
    // before the limit. Aitken extrapolation over a stride recovers the
    // limit of the dominant geometric mode; accept it once stable.
    const int stride = 8;
    if (history.size() >= 3 * stride) {
      const double x1 = history[history.size() - 1 - 2 * stride];
      const double x2 = history[history.size() - 1 - stride];
      const double x3 = history.back();
      const double d1 = x2 - x1, d2 = x3 - x2;
      if (d1 > 0 && d2 > 0 && d2 < d1) {
        const double rho = d2 / d1;
        const double accel = x3 + d2 * rho / (1.0 - rho);
        if (last_accel > 0 && std::abs(accel - last_accel) <= tol * accel &&
            accel - x3 <= 0.2 * x3)
          return std::max(accel, x3);
        last_accel = accel;
      }
    }
  }
  throw std::runtime_error("spectral_norm: no convergence; last iterate sigma=" +
                           std::to_string(sigma));
}

}  // namespace

double spectral_norm(const Eigen::SparseMatrix<double>& A, double tol) {
  Eigen::SparseMatrix<double> At = A.transpose();
  auto fwd = [&](const std::vector<double>& x, std::vector<double>& y) {
    Eigen::Map<const Eigen::VectorXd> xv(x.data(), x.size());
    Eigen::VectorXd yv = A * xv;
    y.assign(yv.data(), yv.data() + yv.size());
  };
  auto adj = [&](const std::vector<double>& x, std::vector<double>& y) {
    Eigen::Map<const Eigen::VectorXd> xv(x.data(), x.size());
    Eigen::VectorXd yv = At * xv;
    y.assign(yv.data(), yv.data() + yv.size());
  };
  return power_iterate(fwd, adj, static_cast<int>(A.cols()), static_cast<int>(A.rows()), tol,
                       10000);
}

double spectral_norm_dense(const Eigen::MatrixXd& A, double tol) {
  auto fwd = [&](const std::vector<double>& x, std::vector<double>& y) {
    Eigen::Map<const Eigen::VectorXd> xv(x.data(), x.size());
    Eigen::VectorXd yv = A * xv;
    y.assign(yv.data(), yv.data() + yv.size());
  };
  auto adj = [&](const std::vector<double>& x, std::vector<double>& y) {
    Eigen::Map<const Eigen::VectorXd> xv(x.data(), x.size());
    Eigen::VectorXd yv = A.transpose() * xv;
    y.assign(yv.data(), yv.data() + yv.size());
  };
  return power_iterate(fwd, adj, static_cast<int>(A.cols()), static_cast<int>(A.rows()), tol,
                       10000);
}

double spectral_norm_op(
    const std::function<void(const std::vector<double>&, std::vector<double>&)>& apply,
    const std::function<void(const std::vector<double>&, std::vector<double>&)>& apply_adjoint,
    int dim_in, int dim_out, double tol, int max_iter) {
  return power_iterate(apply, apply_adjoint, dim_in, dim_out, tol, max_iter);
}

DecayFit ao_decay_fit(const std::vector<DiscretizedOp>& pieces, double power_tol) {
  DecayFit fit;
  std::vector<double> xs, ys;
  std::set<long long> seps;
  for (std::size_t a = 0; a < pieces.size(); ++a)
    for (std::size_t b = a; b < pieces.size(); ++b) {
      // ||T_b^* T_a||: iterate with the composed operator.
      const auto& Ta = pieces[a].mat;
      Eigen::SparseMatrix<double> Tbt = pieces[b].mat.transpose();
      Eigen::SparseMatrix<double> Tat = Ta.transpose();
      const auto& Tb = pieces[b].mat;
      auto fwd = [&](const std::vector<double>& x, std::vector<double>& y) {
        Eigen::Map<const Eigen::VectorXd> xv(x.data(), x.size());
        Eigen::VectorXd yv = Tbt * (Ta * xv).eval();
        y.assign(yv.data(), yv.data() + yv.size());
      };
      auto adj = [&](const std::vector<double>& x, std::vector<double>& y) {
        Eigen::Map<const Eigen::VectorXd> xv(x.data(), x.size());
        Eigen::VectorXd yv = Tat * (Tb * xv).eval();
        y.assign(yv.data(), yv.data() + yv.size());
      };
      double norm = power_iterate(fwd, adj, static_cast<int>(Ta.cols()),
                                  static_cast<int>(Tbt.rows()), power_tol, 10000);
      PairNormEntry e;
      e.j = pieces[a].j;
      e.k = pieces[b].j;
      e.norm_star = norm;
      fit.table.push_back(e);
      double d2 = 0.0;
      for (std::size_t m = 0; m < e.j.size(); ++m) {
        double d = e.j[m] - e.k[m];
        d2 += d * d;
      }
      double dist = std::sqrt(d2);
      if (dist >= 1.0 && norm > 0.0) {
        xs.push_back(dist);
        ys.push_back(std::log2(norm));
        seps.insert(llround(dist * 1024));
      }
    }
  if (seps.size() < 3)
    throw std::runtime_error("ao_decay_fit: fewer than 3 distinct separations");
  auto lf = kernels::fit_line(xs, ys);
  fit.slope = lf.slope;
  fit.intercept = lf.intercept;
  fit.r2 = lf.r2;
  return fit;
}

double cotlar_bound(const std::vector<PairNormEntry>& star_table,
                    const std::vector<PairNormEntry>& adj_table) {
  std::map<dilations::LatticePoint, double> per_j;
  auto add = [&](const std::vector<PairNormEntry>& tab) {
    std::map<std::pair<dilations::LatticePoint, dilations::LatticePoint>, double> m;
    for (const auto& e : tab) {
      m[{e.j, e.k}] = std::max(m[{e.j, e.k}], e.norm_star);
      m[{e.k, e.j}] = std::max(m[{e.k, e.j}], e.norm_star);
    }
    return m;
  };
  auto ms = add(star_table);
  auto ma = add(adj_table);
  std::set<dilations::LatticePoint> js;
  for (const auto& [key, v] : ms) js.insert(key.first);
  double best = 0.0;
  for (const auto& j : js) {
    double sum = 0.0;
    for (const auto& k : js) {
      double s = 0.0;
      auto it = ms.find({j, k});
      if (it != ms.end()) s = it->second;
      auto it2 = ma.find({j, k});
      if (it2 != ma.end()) s = std::max(s, it2->second);
      sum += std::sqrt(s);
    }
    best = std::max(best, sum);
  }
  return best;
}

// ---------------------------------------------------------------------------
// Transported densities

TransportResult transport_density(
    const std::function<double(const std::vector<double>&)>& psi_map,
    const std::function<double(const std::vector<double>&)>& weight,
    const std::vector<std::pair<double, double>>& tau_box, const XGrid& ygrid,
    int quad_per_axis) {
  const int d = static_cast<int>(tau_box.size());
  TransportResult res;
  res.ygrid = ygrid;
  res.density.assign(ygrid.n, 0.0);

  // Hypothesis probe: some derivative order alpha (|alpha| <= 3) of the
  // 1 x d Jacobian keeps a component away from zero over the whole box.
  {
    const double h = 1e-3;
    auto jac_entry = [&](const std::vector<double>& tau, int i) {
      auto tp = tau, tm = tau;
      tp[i] += h;
      tm[i] -= h;
      return (psi_map(tp) - psi_map(tm)) / (2.0 * h);
    };
    auto stencil = [](int k) -> std::vector<std::pair<int, double>> {
      switch (k) {
        case 0: return {{0, 1.0}};
        case 1: return {{-1, -0.5}, {1, 0.5}};
        case 2: return {{-1, 1.0}, {0, -2.0}, {1, 1.0}};
        default: return {{-2, -0.5}, {-1, 1.0}, {1, -1.0}, {2, 0.5}};
      }
    };
    const int scan = 9;
    for (const auto& alpha : surfaces::multi_indices(d, 0, 3)) {
      int atot = 0;
      for (int ax = 0; ax < d; ++ax) atot += alpha[ax];
      if (atot > 3) continue;
      std::vector<std::vector<std::pair<int, double>>> stens;
      for (int ax = 0; ax < d; ++ax) stens.push_back(stencil(alpha[ax]));

      double min_abs = 1e300;
      std::vector<int> idx(d, 0);
      for (;;) {
        std::vector<double> tau(d);
        for (int i = 0; i < d; ++i) {
          auto [lo, hi] = tau_box[i];
          tau[i] = lo + (hi - lo) * idx[i] / (scan - 1);
        }
        double best = 0.0;
        for (int i = 0; i < d; ++i) {
          double acc = 0.0;
          std::vector<std::size_t> si(d, 0);
          for (;;) {
            double w = 1.0;
            auto tt = tau;
            for (int ax = 0; ax < d; ++ax) {
              w *= stens[ax][si[ax]].second;
              tt[ax] += stens[ax][si[ax]].first * h;
            }
            acc += w * jac_entry(tt, i);
            int c = d - 1;
            while (c >= 0 && ++si[c] == stens[c].size()) si[c--] = 0;
            if (c < 0) break;
          }
          acc /= std::pow(h, atot);
          best = std::max(best, std::abs(acc));
        }
        min_abs = std::min(min_abs, best);
        int c = d - 1;
        while (c >= 0 && ++idx[c] == scan) idx[c--] = 0;
        if (c < 0) break;
      }
      if (min_abs > 1e-6) {
        res.hypothesis_ok = true;
        res.alpha_used = alpha;
        break;
      }
    }
    if (!res.hypothesis_ok)
      res.warning = "no derivative of the Jacobian stays away from zero on the box; "
                    "the transported density may fail the smoothness class";
  }

  // Quadrature pushforward with linear (mass-preserving) deposition.
  // Composite panels keep the node spacing below the deposition grid
  // spacing, otherwise the combed point masses alias into the density.
  const int per_panel = 16;
  const auto& rule = gauss_legendre(per_panel);
  const int panels = std::max(1, quad_per_axis / per_panel);
  const int nodes_1d = panels * per_panel;
  auto node = [&](int axis, int i, double& t, double& w) {
    auto [lo, hi] = tau_box[axis];
    const double ph = (hi - lo) / panels;
    const int p = i / per_panel, q = i % per_panel;
    t = lo + (p + 0.5) * ph + 0.5 * ph * rule.nodes[q];
    w = 0.5 * ph * rule.weights[q];
  };
  std::vector<int> idx(d, 0);
  const double hy = ygrid.h();
  for (;;) {
    std::vector<double> tau(d);
    double w = 1.0;
    for (int i = 0; i < d; ++i) {
      double t, wi;
      node(i, idx[i], t, wi);
      tau[i] = t;
      w *= wi;
    }
    w *= weight(tau);
    if (w != 0.0) {
      res.mass_in += w;
      double y = psi_map(tau);
      double pos = (y - ygrid.lo) / hy;
      if (pos >= 0.0 && pos <= ygrid.n - 1) {
        int c0 = std::min(static_cast<int>(std::floor(pos)), ygrid.n - 2);
        double fr = pos - c0;
        res.density[c0] += w * (1.0 - fr) / hy;
        res.density[c0 + 1] += w * fr / hy;
      }
    }
    int c = d - 1;
    while (c >= 0 && ++idx[c] == nodes_1d) idx[c--] = 0;
    if (c < 0) break;
  }
  res.mass_out = grid_mass(res.density, ygrid);
  return res;
}

double grid_mass(const std::vector<double>& h, const XGrid& g) {
  double s = 0.0;
  for (double v : h) s += v;
  return s * g.h();
}

double l1delta_seminorm(const std::vector<double>& h, const XGrid& ygrid, double delta,
                        const std::vector<double>& zset) {
  auto interp = [&](double y) -> double {
    double pos = (y - ygrid.lo) / ygrid.h();
    if (pos < 0.0 || pos > ygrid.n - 1) return 0.0;
    int c0 = std::min(static_cast<int>(std::floor(pos)), ygrid.n - 2);
    double fr = pos - c0;
    return h[c0] * (1.0 - fr) + h[c0 + 1] * fr;
  };
  double best = 0.0;
  for (double z : zset) {
    if (z == 0.0) continue;
    double s = 0.0;
    for (int i = 0; i < ygrid.n; ++i) {
      double y = ygrid.point(i);
      s += std::abs(interp(y - z) - h[i]);
    }
    s *= ygrid.h();
    best = std::max(best, s / std::pow(std::abs(z), delta));
  }
  return best;
}

}  // namespace mpradon::opnorm
