#include "mpradon/vfield.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

namespace mpradon::vfields {

VField VField::zero(int dim) {
  VField f;
  f.dim = dim;
  f.coeffs.assign(dim, Expr::constant(Rational(0)));
  return f;
}

VField VField::coordinate(int dim, int axis) {
  VField f = zero(dim);
  f.coeffs[axis] = Expr::constant(Rational(1));
  return f;
}

VField VField::parse(int dim, const std::string& text) {
  std::size_t lo = text.find('[');
  std::size_t hi = text.rfind(']');
  if (lo == std::string::npos || hi == std::string::npos || hi <= lo)
    throw std::invalid_argument("VField::parse: expected '[...]'");
  std::string body = text.substr(lo + 1, hi - lo - 1);
  // Split on commas at depth 0.
  std::vector<std::string> parts;
  int depth = 0;
  std::string cur;
  for (char c : body) {
    if (c == '(') ++depth;
    if (c == ')') --depth;
    if (c == ',' && depth == 0) {
      parts.push_back(cur);
      cur.clear();
    } else {
      cur += c;
    }
  }
  parts.push_back(cur);
  if (static_cast<int>(parts.size()) != dim)
    throw std::invalid_argument("VField::parse: arity mismatch");
  VField f;
  f.dim = dim;
  for (const auto& p : parts) f.coeffs.push_back(parse_expr(p));
  return f;
}

std::vector<double> VField::eval(const std::vector<double>& x) const {
  std::vector<double> v(dim);
  for (int k = 0; k < dim; ++k) v[k] = coeffs[k].eval(x);
  return v;
}

std::vector<std::vector<double>> VField::jacobian(const std::vector<double>& x) const {
  std::vector<std::vector<double>> J(dim, std::vector<double>(dim));
  for (int k = 0; k < dim; ++k)
    for (int i = 0; i < dim; ++i) J[k][i] = coeffs[k].derivative(i).eval(x);
  return J;
}

std::string VField::str() const {
  std::string s = "[";
  for (int k = 0; k < dim; ++k) {
    if (k) s += ", ";
    s += coeffs[k].str();
  }
  return s + "]";
}

VField bracket(const VField& X, const VField& Y) {
  if (X.dim != Y.dim) throw std::invalid_argument("bracket: dimension mismatch");
  VField r = VField::zero(X.dim);
  for (int k = 0; k < X.dim; ++k) {
    std::vector<Expr> terms;
    for (int i = 0; i < X.dim; ++i) {
      terms.push_back(X.coeffs[i] * Y.coeffs[k].derivative(i));
      terms.push_back(-(Y.coeffs[i] * X.coeffs[k].derivative(i)));
    }
    r.coeffs[k] = Expr::add(terms);
  }
  return r;
}

namespace {

bool field_is_zero(const VField& f, Rng& rng, bool* exact) {
  bool all_exact = true;
  for (const auto& c : f.coeffs) {
    auto [zero, ex] = expr_is_zero(c, f.dim, rng);
    all_exact = all_exact && ex;
    if (!zero) { if (exact) *exact = ex; return false; }
  }
  if (exact) *exact = all_exact;
  return true;
}

// Exact span membership over the rationals: target = sum c_l * fields_l
// with constant c_l, tested coefficientwise on normal forms. Returns
// nullopt when some coefficient fails to normalize.
std::optional<bool> constant_span_exact(const std::vector<VField>& fields, const VField& target) {
  const int n = target.dim;
  std::vector<std::vector<NormalForm>> nf(fields.size());
  for (std::size_t l = 0; l < fields.size(); ++l)
    for (int k = 0; k < n; ++k) {
      auto f = normalize(fields[l].coeffs[k], n);
      if (!f) return std::nullopt;
      nf[l].push_back(*f);
    }
  std::vector<NormalForm> tf;
  for (int k = 0; k < n; ++k) {
    auto f = normalize(target.coeffs[k], n);
    if (!f) return std::nullopt;
    tf.push_back(*f);
  }
  // Collect the joint monomial basis per coordinate.
  std::vector<std::pair<int, Monomial>> rows;
  {
    std::map<std::pair<int, Monomial>, int> seen;
    auto note = [&](int k, const Monomial& m) {
      auto key = std::make_pair(k, m);
      if (!seen.count(key)) {
        seen.emplace(key, 1);
        rows.push_back(key);
      }
    };
    for (int k = 0; k < n; ++k) {
      for (const auto& [m, c] : tf[k].terms) note(k, m);
      for (const auto& fl : nf)
        for (const auto& [m, c] : fl[k].terms) note(k, m);
    }
  }
  const std::size_t q = fields.size();
  std::vector<std::vector<Rational>> A(rows.size(), std::vector<Rational>(q + 1, Rational(0)));
  for (std::size_t r = 0; r < rows.size(); ++r) {
    auto [k, m] = rows[r];
    for (std::size_t l = 0; l < q; ++l) {
      auto it = nf[l][k].terms.find(m);
      if (it != nf[l][k].terms.end()) A[r][l] = it->second;
    }
    auto it = tf[k].terms.find(m);
    if (it != tf[k].terms.end()) A[r][q] = it->second;
  }
  // Rational Gaussian elimination; consistent iff no pivotless row keeps
  // a nonzero rhs.
  std::size_t row = 0;
  for (std::size_t col = 0; col < q && row < A.size(); ++col) {
    std::size_t piv = row;
    while (piv < A.size() && A[piv][col].is_zero()) ++piv;
    if (piv == A.size()) continue;
    std::swap(A[piv], A[row]);
    for (std::size_t r = 0; r < A.size(); ++r) {
      if (r == row || A[r][col].is_zero()) continue;
      Rational f = A[r][col] / A[row][col];
      for (std::size_t c = col; c <= q; ++c) A[r][c] -= f * A[row][c];
    }
    ++row;
  }
  for (const auto& r : A) {
    bool all_zero = true;
    for (std::size_t c = 0; c < q; ++c)
      if (!r[c].is_zero()) { all_zero = false; break; }
    if (all_zero && !r[q].is_zero()) return false;
  }
  return true;
}

bool constant_span_sampled(const std::vector<VField>& fields, const VField& target, Rng& rng) {
  const int n = target.dim;
  const int pts = 4 * static_cast<int>(fields.size()) + 8;
  Eigen::MatrixXd A(pts * n, fields.size());
  Eigen::VectorXd b(pts * n);
  for (int s = 0; s < pts; ++s) {
    std::vector<double> x(n);
    for (auto& v : x) v = rng.uniform(0.15, 0.85) * (rng.next_double() < 0.5 ? -1.0 : 1.0);
    auto tv = target.eval(x);
    for (int k = 0; k < n; ++k) {
      b(s * n + k) = tv[k];
      for (std::size_t l = 0; l < fields.size(); ++l)
        A(s * n + k, l) = fields[l].eval(x)[k];
    }
  }
  Eigen::VectorXd c = A.completeOrthogonalDecomposition().solve(b);
  double res = (A * c - b).norm();
  return res <= 1e-7 * (1.0 + b.norm());
}

}  // namespace

GenerateReport generate_list(const std::vector<DegreedField>& seeds, int M, Rng rng) {
  if (M < 1) throw std::invalid_argument("generate_list: M must be >= 1");
  for (const auto& s : seeds)
    if (s.degree.is_zero()) throw std::invalid_argument("generate_list: zero seed degree");

  GenerateReport rep;
  rep.exact = true;
  // orders[m] holds indices into rep.list of fields with bracket-word length m+1.
  std::vector<std::vector<std::size_t>> orders(1);

  auto try_add = [&](DegreedField df, int order) -> void {
    bool exact = true;
    if (field_is_zero(df.field, rng, &exact)) {
      rep.exact = rep.exact && exact;
      return;
    }
    for (const auto& existing : rep.list) {
      if (!(existing.degree == df.degree)) continue;
      auto pr = exprs_proportional(df.field.coeffs, existing.field.coeffs, df.field.dim, rng);
      if (pr.proportional) {
        rep.exact = rep.exact && pr.exact;
        return;
      }
    }
    if (static_cast<int>(orders.size()) <= order) orders.resize(order + 1);
    orders[order].push_back(rep.list.size());
    rep.list.push_back(std::move(df));
  };

  int idx = 0;
  for (const auto& s : seeds) {
    DegreedField df = s;
    if (df.name.empty()) df.name = "seed" + std::to_string(++idx);
    try_add(std::move(df), 0);
  }

  for (int m = 2; m <= M; ++m) {
    // Bracket word of length m = word of length i against word of length m-i.
    std::vector<DegreedField> fresh;
    for (int i = 1; i < m; ++i) {
      int a = i - 1, b = m - i - 1;
      if (a >= static_cast<int>(orders.size()) || b >= static_cast<int>(orders.size())) continue;
      for (std::size_t ia : orders[a])
        for (std::size_t ib : orders[b]) {
          if (ia == ib) continue;
          DegreedField df;
          df.field = bracket(rep.list[ia].field, rep.list[ib].field);
          df.degree = rep.list[ia].degree + rep.list[ib].degree;
          df.name = "[" + rep.list[ia].name + "," + rep.list[ib].name + "]";
          fresh.push_back(std::move(df));
        }
    }
    for (auto& df : fresh) try_add(std::move(df), m - 1);
  }

  // Closure probe at order M+1.
  std::vector<VField> plain;
  for (const auto& d : rep.list) plain.push_back(d.field);
  rep.closed = true;
  for (std::size_t ia = 0; ia < rep.list.size() && rep.closed; ++ia)
    for (std::size_t ib = 0; ib < rep.list.size(); ++ib) {
      if (ia == ib) continue;
      VField br = bracket(rep.list[ia].field, rep.list[ib].field);
      bool exact = true;
      if (field_is_zero(br, rng, &exact)) continue;
      auto ex = constant_span_exact(plain, br);
      bool in_span;
      if (ex.has_value()) {
        in_span = *ex;
      } else {
        in_span = constant_span_sampled(plain, br, rng);
        rep.exact = false;
      }
      if (!in_span) {
        rep.closed = false;
        rep.witness = "[" + rep.list[ia].name + "," + rep.list[ib].name +
                      "] escapes the constant span";
        break;
      }
    }
  return rep;
}

std::vector<std::vector<double>> default_delta_grid(const dilations::ParamLattice& lattice,
                                                    int per_axis) {
  std::vector<std::vector<double>> out;
  for (const auto& j : lattice.enumerate(per_axis - 1))
    out.push_back(dilations::dyadic_delta(lattice.nu(), j));
  return out;
}

std::string SamplingPlan::echo() const {
  std::ostringstream os;
  os << "base_points=" << base_points.size() << " deltas=" << deltas.size()
     << " t_samples=" << t_samples << " t_radius=" << t_radius
     << " cloud_radius=" << cloud_radius << " cloud_multiplier=" << cloud_multiplier
     << " seed=" << seed;
  return os.str();
}

namespace {

struct SolveOutcome {
  double residual_rel = 0.0;
  double coef_norm = 0.0;
  bool degenerate = false;
  Eigen::VectorXd c;
};

// Min-norm least squares for sum_l c_l u_l(x_s) = rhs(x_s) over a cloud,
// with constant coefficients on the cloud.
SolveOutcome solve_cloud(const std::vector<std::vector<std::vector<double>>>& cols,
                         const std::vector<std::vector<double>>& rhs) {
  const std::size_t S = rhs.size();
  const int n = static_cast<int>(rhs[0].size());
  const std::size_t q = cols.size();
  Eigen::MatrixXd A(S * n, q);
  Eigen::VectorXd b(S * n);
  for (std::size_t s = 0; s < S; ++s)
    for (int k = 0; k < n; ++k) {
      b(s * n + k) = rhs[s][k];
      for (std::size_t l = 0; l < q; ++l) A(s * n + k, l) = cols[l][s][k];
    }
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(A, Eigen::ComputeThinU | Eigen::ComputeThinV);
  svd.setThreshold(1e-11);
  SolveOutcome out;
  out.c = svd.solve(b);
  out.degenerate = svd.rank() < static_cast<Eigen::Index>(q);
  out.residual_rel = (A * out.c - b).norm() / std::max(b.norm(), 1e-30);
  out.coef_norm = out.c.size() ? out.c.cwiseAbs().maxCoeff() : 0.0;
  return out;
}

std::vector<std::vector<double>> make_cloud(const std::vector<double>& x0, double radius,
                                            int count, Rng& rng) {
  std::vector<std::vector<double>> cloud;
  cloud.push_back(x0);
  for (int s = 1; s < count; ++s) {
    std::vector<double> x = x0;
    for (auto& v : x) v += radius * (2.0 * rng.next_double() - 1.0);
    cloud.push_back(std::move(x));
  }
  return cloud;
}

// Shared engine for check_D / check_control / check_control_fn. The rhs
// generator is called per (delta, cloud) and may produce several right
// hand sides (one per bracket pair or per t sample).
ControlCertificate run_check(
    const std::vector<DegreedField>& list, const dilations::ParamLattice& lattice,
    const SamplingPlan& plan, int m_max, double tol, double coef_bound,
    const std::function<std::vector<std::vector<std::vector<double>>>(
        const std::vector<double>& delta, const std::vector<std::vector<double>>& cloud)>& rhss) {
  (void)lattice;
  ControlCertificate cert;
  cert.plan_echo = plan.echo();
  if (list.empty() || plan.base_points.empty() || plan.deltas.empty()) {
    cert.status = ControlCertificate::Status::kUncertified;
    cert.witness = "empty sampling plan";
    return cert;
  }
  Rng rng(plan.seed);
  const int n = list.front().field.dim;
  const int cloud_count = std::max(2, plan.cloud_multiplier * static_cast<int>(list.size()));

  double worst_ratio = -1.0;
  for (std::size_t di = 0; di < plan.deltas.size(); ++di) {
    const auto& delta = plan.deltas[di];
    double per_delta = 0.0;
    for (const auto& x0 : plan.base_points) {
      auto cloud = make_cloud(x0, plan.cloud_radius, cloud_count, rng);
      // Columns: delta-scaled list fields over the cloud.
      std::vector<std::vector<std::vector<double>>> cols(list.size());
      for (std::size_t l = 0; l < list.size(); ++l) {
        double w = list[l].degree.pow_delta(delta);
        cols[l].reserve(cloud.size());
        for (const auto& x : cloud) {
          auto v = list[l].field.eval(x);
          for (auto& vv : v) vv *= w;
          cols[l].push_back(std::move(v));
        }
      }
      for (const auto& rhs : rhss(delta, cloud)) {
        double scale = 0.0;
        for (const auto& r : rhs)
          for (double v : r) scale = std::max(scale, std::abs(v));
        if (scale < 1e-300) continue;  // identically zero target on this cloud
        auto out = solve_cloud(cols, rhs);
        cert.degenerate = cert.degenerate || out.degenerate;
        cert.max_residual = std::max(cert.max_residual, out.residual_rel);
        cert.max_coef_norm = std::max(cert.max_coef_norm, out.coef_norm);
        per_delta = std::max(per_delta, out.coef_norm);
        double ratio = std::max(out.residual_rel / tol, out.coef_norm / coef_bound);
        if (ratio > worst_ratio) {
          worst_ratio = ratio;
          std::ostringstream os;
          os << "delta=(";
          for (std::size_t m = 0; m < delta.size(); ++m) os << (m ? "," : "") << delta[m];
          os << ") x0=(";
          for (std::size_t m = 0; m < x0.size(); ++m) os << (m ? "," : "") << x0[m];
          os << ") residual=" << out.residual_rel << " coef=" << out.coef_norm;
          cert.witness = os.str();
        }
      }
      // Sampled first-order scaled derivative of the coefficients: move
      // the base point along each scaled list direction and difference
      // the recovered coefficients.
      if (m_max >= 1) {
        const double h = 0.5 * plan.cloud_radius;
        auto rhs0 = rhss(delta, cloud);
        for (std::size_t l = 0; l < list.size() && !rhs0.empty(); ++l) {
          auto dir = list[l].field.eval(x0);
          double w = list[l].degree.pow_delta(delta);
          double len = 0.0;
          for (double v : dir) len += v * v;
          len = std::sqrt(len) * w;
          if (len < 1e-12) continue;
          std::vector<double> x1 = x0;
          for (int k = 0; k < n; ++k) x1[k] += h * w * dir[k] / std::max(len, 1e-12);
          auto cloud1 = make_cloud(x1, plan.cloud_radius, cloud_count, rng);
          std::vector<std::vector<std::vector<double>>> cols1(list.size());
          for (std::size_t m = 0; m < list.size(); ++m) {
            double wm = list[m].degree.pow_delta(delta);
            for (const auto& x : cloud1) {
              auto v = list[m].field.eval(x);
              for (auto& vv : v) vv *= wm;
              cols1[m].push_back(std::move(v));
            }
          }
          auto rhs1 = rhss(delta, cloud1);
          for (std::size_t r = 0; r < std::min(rhs0.size(), rhs1.size()); ++r) {
            auto o0 = solve_cloud(cols, rhs0[r]);
            auto o1 = solve_cloud(cols1, rhs1[r]);
            if (o0.c.size() == o1.c.size() && o0.c.size() > 0) {
              double d = (o1.c - o0.c).cwiseAbs().maxCoeff() / h;
              cert.max_deriv_norm = std::max(cert.max_deriv_norm, d);
            }
          }
          break;  // one direction probe per (delta, x0) keeps this cheap
        }
      }
    }
    cert.per_delta_coef_norm.push_back(per_delta);
  }
  cert.coef_norm_at_first_delta = cert.per_delta_coef_norm.front();

  const bool pass = cert.max_residual <= tol && cert.max_coef_norm <= coef_bound &&
                    (m_max < 1 || cert.max_deriv_norm <= coef_bound * 100.0);
  cert.status = pass ? ControlCertificate::Status::kPass : ControlCertificate::Status::kFail;
  if (plan.deltas.size() < 2 || plan.base_points.size() < 1)
    cert.status = ControlCertificate::Status::kUncertified;
  return cert;
}

}  // namespace

ControlCertificate check_D(const std::vector<DegreedField>& list,
                           const dilations::ParamLattice& lattice, const SamplingPlan& plan,
                           int m_max, double tol, double coef_bound) {
  auto rhss = [&](const std::vector<double>& delta,
                  const std::vector<std::vector<double>>& cloud) {
    std::vector<std::vector<std::vector<double>>> out;
    for (std::size_t i = 0; i < list.size(); ++i)
      for (std::size_t j = i + 1; j < list.size(); ++j) {
        VField br = bracket(list[i].field, list[j].field);
        double w = (list[i].degree + list[j].degree).pow_delta(delta);
        std::vector<std::vector<double>> rhs;
        rhs.reserve(cloud.size());
        for (const auto& x : cloud) {
          auto v = br.eval(x);
          for (auto& vv : v) vv *= w;
          rhs.push_back(std::move(v));
        }
        out.push_back(std::move(rhs));
      }
    return out;
  };
  return run_check(list, lattice, plan, m_max, tol, coef_bound, rhss);
}

ControlCertificate check_control(const std::vector<DegreedField>& list, const DegreedField& target,
                                 const dilations::ParamLattice& lattice, const SamplingPlan& plan,
                                 int m_max, double tol, double coef_bound) {
  if (target.degree.is_zero())
    throw std::invalid_argument("check_control: target degree must be nonzero");
  auto rhss = [&](const std::vector<double>& delta,
                  const std::vector<std::vector<double>>& cloud) {
    double w = target.degree.pow_delta(delta);
    std::vector<std::vector<double>> rhs;
    rhs.reserve(cloud.size());
    for (const auto& x : cloud) {
      auto v = target.field.eval(x);
      for (auto& vv : v) vv *= w;
      rhs.push_back(std::move(v));
    }
    return std::vector<std::vector<std::vector<double>>>{rhs};
  };
  return run_check(list, lattice, plan, m_max, tol, coef_bound, rhss);
}

ControlCertificate check_control_fn(const std::vector<DegreedField>& list, const SurfaceW& target,
                                    int tdim, const dilations::ParamLattice& lattice,
                                    const SamplingPlan& plan, int m_max, double tol,
                                    double coef_bound) {
  Rng trng(plan.seed ^ 0x5eedull);
  std::vector<std::vector<double>> tset;
  for (int s = 0; s < plan.t_samples; ++s) {
    std::vector<double> t(tdim);
    for (auto& v : t) v = plan.t_radius * (2.0 * trng.next_double() - 1.0);
    tset.push_back(std::move(t));
  }
  auto rhss = [&, tset](const std::vector<double>& delta,
                        const std::vector<std::vector<double>>& cloud) {
    std::vector<std::vector<std::vector<double>>> out;
    for (const auto& t : tset) {
      std::vector<std::vector<double>> rhs;
      rhs.reserve(cloud.size());
      for (const auto& x : cloud) rhs.push_back(target(delta, t, x));
      out.push_back(std::move(rhs));
    }
    return out;
  };
  return run_check(list, lattice, plan, m_max, tol, coef_bound, rhss);
}

}  // namespace mpradon::vfields
