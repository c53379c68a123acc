#include "mpradon/ccgeom.hpp"

#include <Eigen/Dense>
#include <cmath>
#include <sstream>
#include <stdexcept>

#include "mpradon/odeint.hpp"

namespace mpradon::ccgeom {

double SubunitPath::sup_norm() const {
  double m = 0.0;
  for (const auto& seg : coeffs) {
    double s = 0.0;
    for (double a : seg) s += a * a;
    m = std::max(m, std::sqrt(s));
  }
  return m;
}

SubunitPath SubunitPath::constant(std::vector<double> a) {
  SubunitPath p;
  p.segments = 1;
  p.coeffs.push_back(std::move(a));
  return p;
}

SubunitPath SubunitPath::random(int segments, int q, double radius, Rng& rng) {
  SubunitPath p;
  p.segments = segments;
  for (int s = 0; s < segments; ++s) {
    std::vector<double> a(q);
    double norm2 = 0.0;
    for (auto& v : a) {
      v = 2.0 * rng.next_double() - 1.0;
      norm2 += v * v;
    }
    double norm = std::sqrt(norm2);
    double r = radius * std::pow(rng.next_double(), 1.0 / q);
    for (auto& v : a) v *= (norm > 0 ? r / norm : 0.0);
    p.coeffs.push_back(std::move(a));
  }
  return p;
}

std::vector<double> flow_endpoint(const std::vector<vfields::VField>& fields,
                                  const SubunitPath& path, const std::vector<double>& x0,
                                  double ode_tol) {
  std::vector<double> y = x0;
  const double seg_len = 1.0 / path.segments;
  for (int s = 0; s < path.segments; ++s) {
    const auto& a = path.coeffs[s];
    auto rhs = [&fields, &a](double, const std::vector<double>& z) {
      std::vector<double> v(z.size(), 0.0);
      for (std::size_t j = 0; j < fields.size(); ++j) {
        if (a[j] == 0.0) continue;
        auto f = fields[j].eval(z);
        for (std::size_t k = 0; k < v.size(); ++k) v[k] += a[j] * f[k];
      }
      return v;
    };
    y = rk4_adaptive(rhs, 0.0, seg_len, y, ode_tol);
  }
  return y;
}

std::vector<double> exp_flow(const std::vector<vfields::VField>& fields,
                             const std::vector<double>& u, const std::vector<double>& x0,
                             double ode_tol) {
  auto rhs = [&fields, &u](double, const std::vector<double>& z) {
    std::vector<double> v(z.size(), 0.0);
    for (std::size_t j = 0; j < fields.size(); ++j) {
      if (u[j] == 0.0) continue;
      auto f = fields[j].eval(z);
      for (std::size_t k = 0; k < v.size(); ++k) v[k] += u[j] * f[k];
    }
    return v;
  };
  return rk4_adaptive(rhs, 0.0, 1.0, x0, ode_tol);
}

std::vector<double> ScalingChart::forward(const std::vector<double>& u) const {
  std::vector<vfields::VField> sel;
  for (int j : J0) sel.push_back(scaled_fields[j]);
  return exp_flow(sel, u, x0, ode_tol);
}

std::vector<double> ScalingChart::inverse(const std::vector<double>& y) const {
  const int m = n0;
  std::vector<double> u(m, 0.0);
  const double h = 1e-6;
  for (int iter = 0; iter < 50; ++iter) {
    auto f = forward(u);
    Eigen::VectorXd r(f.size());
    for (std::size_t k = 0; k < f.size(); ++k) r(k) = f[k] - y[k];
    if (r.cwiseAbs().maxCoeff() < 1e-11) return u;
    Eigen::MatrixXd J(f.size(), m);
    for (int i = 0; i < m; ++i) {
      auto up = u, um = u;
      up[i] += h;
      um[i] -= h;
      auto fp = forward(up), fm = forward(um);
      for (std::size_t k = 0; k < f.size(); ++k) J(k, i) = (fp[k] - fm[k]) / (2.0 * h);
    }
    Eigen::VectorXd step = J.completeOrthogonalDecomposition().solve(r);
    double len = step.cwiseAbs().maxCoeff();
    if (len > 0.5) step *= 0.5 / len;  // damped far from the center
    for (int i = 0; i < m; ++i) u[i] -= step(i);
    if (std::isnan(u[0]))
      throw std::runtime_error("ScalingChart::inverse: diverged");
  }
  throw std::runtime_error("ScalingChart::inverse: no convergence");
}

std::vector<double> ScalingChart::pullback_field(int j, const std::vector<double>& u,
                                                 double fd_step) const {
  // Y_j(u) = dPhi^{-1}(Phi(u)) Z_j(Phi(u)), with the differential taken
  // by centered differences of the inverse along the field direction.
  auto y = forward(u);
  auto z = scaled_fields[j].eval(y);
  double norm = 0.0;
  for (double v : z) norm = std::max(norm, std::abs(v));
  if (norm == 0.0) return std::vector<double>(n0, 0.0);
  const double h = fd_step / norm;
  std::vector<double> yp = y, ym = y;
  for (std::size_t k = 0; k < y.size(); ++k) {
    yp[k] += h * z[k];
    ym[k] -= h * z[k];
  }
  auto up = inverse(yp);
  auto um = inverse(ym);
  std::vector<double> out(n0);
  for (int k = 0; k < n0; ++k) out[k] = (up[k] - um[k]) / (2.0 * h);
  return out;
}

double ScalingChart::pullback_det(const std::vector<double>& u, double fd_step) const {
  Eigen::MatrixXd Y(n0, n0);
  for (int c = 0; c < n0; ++c) {
    auto col = pullback_field(J0[c], u, fd_step);
    for (int r = 0; r < n0; ++r) Y(r, c) = col[r];
  }
  return Y.determinant();
}

ScalingChart scaling_chart(const std::vector<vfields::DegreedField>& fields,
                           const std::vector<double>& x0, const std::vector<double>& delta,
                           double ode_tol) {
  if (fields.empty()) throw std::invalid_argument("scaling_chart: empty field list");
  const int n = fields.front().field.dim;
  const int q = static_cast<int>(fields.size());

  ScalingChart chart;
  chart.x0 = x0;
  chart.ode_tol = ode_tol;
  // Scale each field by delta^{d_j}, stored as an exact dyadic rational
  // when the weight is one (the usual case for dyadic deltas and integer
  // degrees) and a 1e-15-relative rational otherwise.
  for (const auto& df : fields) {
    double w = df.degree.pow_delta(delta);
    vfields::VField scaled = df.field;
    Rational rw = [&]() -> Rational {
      // try exact dyadic representation w = m * 2^{-k}
      double mant = w;
      int k = 0;
      while (mant != std::floor(mant) && k < 62) {
        mant *= 2.0;
        ++k;
      }
      if (mant == std::floor(mant) && std::abs(mant) < 9e15)
        return Rational(static_cast<std::int64_t>(mant), static_cast<std::int64_t>(1) << k);
      // fall back to a 1e-15-relative rational approximation
      const std::int64_t den = 1000000000000000ll;
      return Rational(static_cast<std::int64_t>(std::llround(w * static_cast<double>(den))), den);
    }();
    for (auto& c : scaled.coeffs) c = vfields::Expr::constant(rw) * c;
    chart.scaled_fields.push_back(std::move(scaled));
  }

  // Rank and column selection at x0 by exhaustive minor search.
  Eigen::MatrixXd Z(n, q);
  for (int j = 0; j < q; ++j) {
    auto v = chart.scaled_fields[j].eval(x0);
    for (int k = 0; k < n; ++k) Z(k, j) = v[k];
  }
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(Z);
  const double rank_tol = 1e-10 * std::max(1.0, svd.singularValues()(0));
  int n0 = 0;
  for (Eigen::Index i = 0; i < svd.singularValues().size(); ++i)
    if (svd.singularValues()(i) > rank_tol) ++n0;
  if (n0 == 0) throw std::runtime_error("scaling_chart: all fields vanish at x0 (degenerate)");
  chart.n0 = n0;

  // Maximize the largest |n0 x n0 minor| over column subsets J; ties go
  // to the lexicographically first subset.
  std::vector<int> pick(n0);
  for (int i = 0; i < n0; ++i) pick[i] = i;
  double best = -1.0;
  std::vector<int> best_pick;
  for (;;) {
    // max |det| over row subsets for this column pick
    double local = 0.0;
    std::vector<int> rows(n0);
    for (int i = 0; i < n0; ++i) rows[i] = i;
    for (;;) {
      Eigen::MatrixXd M(n0, n0);
      for (int c = 0; c < n0; ++c)
        for (int r = 0; r < n0; ++r) M(r, c) = Z(rows[r], pick[c]);
      local = std::max(local, std::abs(M.determinant()));
      int i = n0 - 1;
      while (i >= 0 && rows[i] == n - n0 + i) --i;
      if (i < 0) break;
      ++rows[i];
      for (int k = i + 1; k < n0; ++k) rows[k] = rows[k - 1] + 1;
    }
    if (local > best + 1e-15) {
      best = local;
      best_pick = pick;
    }
    int i = n0 - 1;
    while (i >= 0 && pick[i] == q - n0 + i) --i;
    if (i < 0) break;
    ++pick[i];
    for (int k = i + 1; k < n0; ++k) pick[k] = pick[k - 1] + 1;
  }
  chart.J0 = best_pick;
  return chart;
}

ChartReport chart_verify(const ScalingChart& chart, const ChartVerifyConfig& cfg) {
  ChartReport rep;
  Rng rng(cfg.seed);
  const int m = chart.n0;

  // (i) sampled injectivity
  std::vector<std::vector<double>> us;
  std::vector<std::vector<double>> images;
  for (int s = 0; s < cfg.samples; ++s) {
    std::vector<double> u(m);
    for (auto& v : u) v = chart.eta1 * (2.0 * rng.next_double() - 1.0);
    us.push_back(u);
    images.push_back(chart.forward(u));
  }
  for (std::size_t a = 0; a < us.size(); ++a)
    for (std::size_t b = a + 1; b < us.size(); ++b) {
      double du = 0.0, dy = 0.0;
      for (int k = 0; k < m; ++k) du = std::max(du, std::abs(us[a][k] - us[b][k]));
      for (std::size_t k = 0; k < images[a].size(); ++k)
        dy = std::max(dy, std::abs(images[a][k] - images[b][k]));
      ++rep.injectivity_pairs_checked;
      if (dy < 1e-9 && du > 1e-7) ++rep.injectivity_violations;
    }

  // (ii) sampled ball inclusion at the probe radius
  for (int p = 0; p < cfg.probe_paths; ++p) {
    auto path = SubunitPath::random(8, static_cast<int>(chart.scaled_fields.size()),
                                    cfg.probe_radius, rng);
    auto endpoint = flow_endpoint(chart.scaled_fields, path, chart.x0, chart.ode_tol);
    ++rep.inclusion_paths;
    bool ok = true;
    std::vector<double> u;
    try {
      u = chart.inverse(endpoint);
      for (double v : u)
        if (std::abs(v) > chart.eta1) ok = false;
      auto back = chart.forward(u);
      double err = 0.0;
      for (std::size_t k = 0; k < back.size(); ++k)
        err = std::max(err, std::abs(back[k] - endpoint[k]));
      if (err > 1e-7) ok = false;
    } catch (const std::exception&) {
      ok = false;
    }
    if (!ok) ++rep.inclusion_failures;
  }

  // (iii) det Y scan over the u-ball
  rep.det_min = 1e300;
  rep.det_max = -1e300;
  for (int s = 0; s < cfg.samples; ++s) {
    std::vector<double> u(m);
    for (auto& v : u) v = chart.eta1 * (2.0 * rng.next_double() - 1.0);
    double d = chart.pullback_det(u, cfg.fd_step);
    rep.det_min = std::min(rep.det_min, std::abs(d));
    rep.det_max = std::max(rep.det_max, std::abs(d));
    std::ostringstream row;
    for (int k = 0; k < m; ++k) row << u[k] << ",";
    row << d << ",1";
    rep.csv_rows.push_back(row.str());
  }
  rep.det_ratio = rep.det_min > 0 ? rep.det_max / rep.det_min : 1e300;

  rep.pass = rep.injectivity_violations == 0 && rep.inclusion_failures == 0 &&
             rep.det_ratio <= cfg.det_ratio_bound;
  std::ostringstream note;
  note << "det ratio " << rep.det_ratio << " (bound " << cfg.det_ratio_bound << "), "
       << rep.inclusion_failures << "/" << rep.inclusion_paths << " inclusion failures";
  rep.note = note.str();
  return rep;
}

}  // namespace mpradon::ccgeom
