#include "mpradon/surfaces.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <map>
#include <stdexcept>

#include "mpradon/odeint.hpp"

namespace mpradon::surfaces {

namespace {

double pow_multi(const std::vector<double>& t, const std::vector<int>& alpha) {
  double p = 1.0;
  for (std::size_t i = 0; i < alpha.size(); ++i)
    for (int k = 0; k < alpha[i]; ++k) p *= t[i];
  return p;
}

int total(const std::vector<int>& alpha) {
  int s = 0;
  for (int a : alpha) s += a;
  return s;
}

}  // namespace

std::vector<double> WSpec::eval(const std::vector<double>& t, const std::vector<double>& x) const {
  std::vector<double> w(n, 0.0);
  for (const auto& [alpha, X] : terms) {
    const double c = pow_multi(t, alpha);
    if (c == 0.0) continue;
    auto v = X.eval(x);
    for (int k = 0; k < n; ++k) w[k] += c * v[k];
  }
  return w;
}

std::vector<double> WSpec::desingularized_rhs(double eps, const std::vector<double>& t,
                                              const std::vector<double>& x) const {
  std::vector<double> w(n, 0.0);
  for (const auto& [alpha, X] : terms) {
    const int m = total(alpha);
    const double c = pow_multi(t, alpha) * std::pow(eps, m - 1);
    if (c == 0.0) continue;
    auto v = X.eval(x);
    for (int k = 0; k < n; ++k) w[k] += c * v[k];
  }
  return w;
}

std::vector<double> flow_endpoint_w(const WSpec& w, double eps_end, const std::vector<double>& t,
                                    const std::vector<double>& x, double ode_tol) {
  auto rhs = [&w, &t](double eps, const std::vector<double>& y) {
    return w.desingularized_rhs(eps, t, y);
  };
  return rk4_adaptive(rhs, 0.0, eps_end, x, ode_tol);
}

std::vector<double> gamma_from_w(const WSpec& w, const std::vector<double>& t,
                                 const std::vector<double>& x, double ode_tol) {
  return flow_endpoint_w(w, 1.0, t, x, ode_tol);
}

SurfaceMap SurfaceMap::closed_form(int N, int n, Map forward, Map inverse, double rho,
                                   std::string name) {
  SurfaceMap s;
  s.N_ = N;
  s.n_ = n;
  s.rho_ = rho;
  s.name_ = std::move(name);
  s.forward_ = std::move(forward);
  s.inverse_ = std::move(inverse);
  return s;
}

SurfaceMap SurfaceMap::closed_form(int N, int n, Map forward, double rho, std::string name) {
  return closed_form(N, n, std::move(forward), Map{}, rho, std::move(name));
}

SurfaceMap SurfaceMap::from_wspec(WSpec w, double ode_tol, double rho, std::string name) {
  SurfaceMap s;
  s.N_ = w.N;
  s.n_ = w.n;
  s.rho_ = rho;
  s.name_ = std::move(name);
  s.ode_tol_ = ode_tol;
  s.w_ = std::move(w);
  const WSpec& stored = *s.w_;
  double tol = ode_tol;
  s.forward_ = [&stored, tol](const std::vector<double>& t, const std::vector<double>& x) {
    return gamma_from_w(stored, t, x, tol);
  };
  return s;
}

std::vector<double> SurfaceMap::apply(const std::vector<double>& t,
                                      const std::vector<double>& x) const {
  if (w_) return gamma_from_w(*w_, t, x, ode_tol_);
  return forward_(t, x);
}

std::vector<double> SurfaceMap::apply_inverse(const std::vector<double>& t,
                                              const std::vector<double>& x) const {
  if (inverse_) return inverse_(t, x);
  // Newton on y -> gamma_t(y) = x, seeded at x; Jacobian by central FD.
  std::vector<double> y = x;
  const double h = 1e-6;
  for (int iter = 0; iter < 40; ++iter) {
    auto g = apply(t, y);
    double res = 0.0;
    for (int k = 0; k < n_; ++k) res = std::max(res, std::abs(g[k] - x[k]));
    if (res < 1e-12) return y;
    Eigen::MatrixXd J(n_, n_);
    for (int i = 0; i < n_; ++i) {
      auto yp = y, ym = y;
      yp[i] += h;
      ym[i] -= h;
      auto gp = apply(t, yp), gm = apply(t, ym);
      for (int k = 0; k < n_; ++k) J(k, i) = (gp[k] - gm[k]) / (2.0 * h);
    }
    Eigen::VectorXd r(n_);
    for (int k = 0; k < n_; ++k) r(k) = g[k] - x[k];
    Eigen::VectorXd step = J.partialPivLu().solve(r);
    for (int k = 0; k < n_; ++k) y[k] -= step(k);
  }
  if (w_) {
    // Fall back to the reversed radial flow: running the desingularized
    // flow from eps = 1 at x back to eps = 0 traces the trajectory that
    // ends at x, so its start point is the inverse image.
    auto rhs = [this, &t](double eps, const std::vector<double>& z) {
      return w_->desingularized_rhs(eps, t, z);
    };
    return rk4_adaptive(rhs, 1.0, 0.0, x, ode_tol_);
  }
  throw std::runtime_error("SurfaceMap::apply_inverse: Newton failed to converge");
}

namespace {

std::vector<double> scale_t(const std::vector<double>& t, double c) {
  std::vector<double> s = t;
  for (auto& v : s) v *= c;
  return s;
}

}  // namespace

std::vector<double> w_from_gamma(const SurfaceMap& gamma, const std::vector<double>& t,
                                 const std::vector<double>& x, double fd_step) {
  auto y = gamma.apply_inverse(t, x);
  auto diff = [&](double h) {
    auto gp = gamma.apply(scale_t(t, 1.0 + h), y);
    auto gm = gamma.apply(scale_t(t, 1.0 - h), y);
    std::vector<double> d(gp.size());
    for (std::size_t k = 0; k < d.size(); ++k) d[k] = (gp[k] - gm[k]) / (2.0 * h);
    return d;
  };
  auto d1 = diff(fd_step);
  auto d2 = diff(0.5 * fd_step);
  for (std::size_t k = 0; k < d1.size(); ++k) d2[k] = (4.0 * d2[k] - d1[k]) / 3.0;
  return d2;
}

std::vector<double> wj_from_gamma(const SurfaceMap& gamma, int j, const std::vector<double>& t,
                                  const std::vector<double>& x, double fd_step) {
  auto y = gamma.apply_inverse(t, x);
  auto diff = [&](double h) {
    auto tp = t, tm = t;
    tp[j] += h;
    tm[j] -= h;
    auto gp = gamma.apply(tp, y);
    auto gm = gamma.apply(tm, y);
    std::vector<double> d(gp.size());
    for (std::size_t k = 0; k < d.size(); ++k) d[k] = (gp[k] - gm[k]) / (2.0 * h);
    return d;
  };
  auto d1 = diff(fd_step);
  auto d2 = diff(0.5 * fd_step);
  for (std::size_t k = 0; k < d1.size(); ++k) d2[k] = (4.0 * d2[k] - d1[k]) / 3.0;
  return d2;
}

std::vector<double> compose_gamma(const std::vector<const SurfaceMap*>& gammas,
                                  const std::vector<bool>& invert_mask,
                                  const std::vector<double>& tau, const std::vector<double>& x) {
  if (!invert_mask.empty() && invert_mask.size() != gammas.size())
    throw std::invalid_argument("compose_gamma: mask arity mismatch");
  std::size_t expected = 0;
  for (const auto* g : gammas) expected += g->N();
  if (tau.size() != expected) throw std::invalid_argument("compose_gamma: tau arity mismatch");

  // Split tau into per-factor blocks, then apply the rightmost factor first.
  std::vector<std::vector<double>> blocks;
  std::size_t off = 0;
  for (const auto* g : gammas) {
    blocks.emplace_back(tau.begin() + off, tau.begin() + off + g->N());
    off += g->N();
  }
  std::vector<double> y = x;
  for (std::size_t i = gammas.size(); i-- > 0;) {
    for (double v : blocks[i])
      if (std::abs(v) > gammas[i]->rho())
        throw std::runtime_error("compose_gamma: factor " + std::to_string(i) +
                                 " parameter outside its domain radius");
    const bool inv = !invert_mask.empty() && invert_mask[i];
    y = inv ? gammas[i]->apply_inverse(blocks[i], y) : gammas[i]->apply(blocks[i], y);
  }
  return y;
}

// ---------------------------------------------------------------------------
// Polynomial fields

std::vector<double> PolyField::eval(const std::vector<double>& x) const {
  std::vector<double> v(dim, 0.0);
  for (int k = 0; k < dim; ++k)
    for (const auto& [mono, c] : comps[k]) {
      double p = c;
      for (int i = 0; i < dim; ++i)
        for (int e = 0; e < mono[i]; ++e) p *= x[i];
      v[k] += p;
    }
  return v;
}

PolyField PolyField::zero(int dim) {
  PolyField f;
  f.dim = dim;
  f.comps.resize(dim);
  return f;
}

namespace {

void poly_add_term(std::map<std::vector<int>, double>& m, std::vector<int> mono, double c) {
  if (c == 0.0) return;
  auto it = m.find(mono);
  if (it == m.end()) m.emplace(std::move(mono), c);
  else {
    it->second += c;
    if (std::abs(it->second) < 1e-300) m.erase(it);
  }
}

// d/dx_i of a monomial map, multiplied by the monomial map of factor g.
void accumulate_product_derivative(std::map<std::vector<int>, double>& out,
                                   const std::map<std::vector<int>, double>& g,
                                   const std::map<std::vector<int>, double>& f, int i,
                                   double sign) {
  for (const auto& [mf, cf] : f) {
    if (mf[i] == 0) continue;
    std::vector<int> dm = mf;
    dm[i] -= 1;
    double dc = cf * mf[i];
    for (const auto& [mg, cg] : g) {
      std::vector<int> mono(dm.size());
      for (std::size_t k = 0; k < mono.size(); ++k) mono[k] = dm[k] + mg[k];
      poly_add_term(out, std::move(mono), sign * dc * cg);
    }
  }
}

}  // namespace

PolyField poly_bracket(const PolyField& X, const PolyField& Y) {
  PolyField r = PolyField::zero(X.dim);
  for (int k = 0; k < X.dim; ++k)
    for (int i = 0; i < X.dim; ++i) {
      accumulate_product_derivative(r.comps[k], X.comps[i], Y.comps[k], i, +1.0);
      accumulate_product_derivative(r.comps[k], Y.comps[i], X.comps[k], i, -1.0);
    }
  return r;
}

std::vector<std::vector<int>> multi_indices(int dim, int min_total, int max_total) {
  std::vector<std::vector<int>> out;
  std::vector<int> a(dim, 0);
  for (;;) {
    int s = total(a);
    if (s >= min_total && s <= max_total) out.push_back(a);
    int k = dim - 1;
    while (k >= 0 && a[k] == max_total) a[k--] = 0;
    if (k < 0) break;
    ++a[k];
  }
  std::sort(out.begin(), out.end(), [](const auto& p, const auto& q) {
    if (total(p) != total(q)) return total(p) < total(q);
    return p < q;
  });
  return out;
}

namespace {

// Central finite-difference stencils (offset, weight) for d^k/du^k, O(h^2).
const std::vector<std::pair<int, double>>& stencil_1d(int k) {
  static const std::vector<std::vector<std::pair<int, double>>> tables = {
      {{0, 1.0}},
      {{-1, -0.5}, {1, 0.5}},
      {{-1, 1.0}, {0, -2.0}, {1, 1.0}},
      {{-2, -0.5}, {-1, 1.0}, {1, -1.0}, {2, 0.5}},
      {{-2, 1.0}, {-1, -4.0}, {0, 6.0}, {1, -4.0}, {2, 1.0}},
  };
  if (k < 0 || k >= static_cast<int>(tables.size()))
    throw std::invalid_argument("stencil order must be 0..4");
  return tables[k];
}

double factorial(int k) {
  double f = 1.0;
  for (int i = 2; i <= k; ++i) f *= i;
  return f;
}

// Tensor stencil application: (1/alpha!) d_t^alpha F(t)|_{t=0} from
// cached evaluations F(offset * h).
template <typename F>
std::vector<double> taylor_coeff(const std::vector<int>& alpha, double h, int n, F&& eval_at) {
  std::vector<std::vector<std::pair<int, double>>> st;
  for (int a : alpha) st.push_back(stencil_1d(a));
  std::vector<double> acc(n, 0.0);
  std::vector<std::size_t> idx(alpha.size(), 0);
  for (;;) {
    double w = 1.0;
    std::vector<int> off(alpha.size());
    for (std::size_t i = 0; i < alpha.size(); ++i) {
      off[i] = st[i][idx[i]].first;
      w *= st[i][idx[i]].second;
    }
    const std::vector<double>& v = eval_at(off);
    for (int k = 0; k < n; ++k) acc[k] += w * v[k];
    int c = static_cast<int>(alpha.size()) - 1;
    while (c >= 0 && ++idx[c] == st[c].size()) idx[c--] = 0;
    if (c < 0) break;
  }
  // taylor coefficient = derivative / alpha!; the stencil sums need h^|alpha|.
  double scale = std::pow(h, total(alpha));
  double afact = 1.0;
  for (int a : alpha) afact *= factorial(a);
  for (int k = 0; k < n; ++k) acc[k] /= scale * afact;
  return acc;
}

// Fits value samples (x_s, v_s) by a polynomial of the given degree via
// least squares; returns monomial->coefficient.
std::map<std::vector<int>, double> fit_poly(const std::vector<std::vector<double>>& xs,
                                            const std::vector<double>& vs, int dim, int degree) {
  auto monos = multi_indices(dim, 0, degree);
  // keep only |mono| <= degree (multi_indices bounds per-axis too; filter)
  std::vector<std::vector<int>> basis;
  for (const auto& m : monos)
    if (total(m) <= degree) basis.push_back(m);
  Eigen::MatrixXd A(xs.size(), basis.size());
  Eigen::VectorXd b(xs.size());
  for (std::size_t s = 0; s < xs.size(); ++s) {
    b(s) = vs[s];
    for (std::size_t m = 0; m < basis.size(); ++m) {
      double p = 1.0;
      for (int i = 0; i < dim; ++i)
        for (int e = 0; e < basis[m][i]; ++e) p *= xs[s][i];
      A(s, m) = p;
    }
  }
  Eigen::VectorXd c = A.completeOrthogonalDecomposition().solve(b);
  std::map<std::vector<int>, double> out;
  for (std::size_t m = 0; m < basis.size(); ++m)
    if (std::abs(c(m)) > 1e-9) out.emplace(basis[m], c(m));
  return out;
}

std::optional<PolyField> vfield_to_poly(const vfields::VField& f) {
  PolyField p = PolyField::zero(f.dim);
  for (int k = 0; k < f.dim; ++k) {
    auto nf = vfields::normalize(f.coeffs[k], f.dim);
    if (!nf) return std::nullopt;
    for (const auto& [mono, c] : nf->terms) {
      for (int e : mono.xpow)
        if (e < 0) return std::nullopt;
      for (int e : mono.flatpow)
        if (e != 0) return std::nullopt;
      p.comps[k].emplace(mono.xpow, c.value());
    }
  }
  return p;
}

}  // namespace

TaylorFieldSet taylor_fields(const SurfaceMap& gamma, int order, const std::vector<double>& x0,
                             const FdGrid& fd) {
  TaylorFieldSet set;
  const int n = gamma.n();
  if (const WSpec* w = gamma.wspec()) {
    // Exact echo of the stored terms.
    for (const auto& [alpha, X] : w->terms) {
      if (total(alpha) > order) continue;
      set.alphas.push_back(alpha);
      if (auto p = vfield_to_poly(X)) {
        set.fields.push_back(*p);
      } else {
        // Non-polynomial coefficients: sample and fit around x0.
        std::vector<std::vector<double>> xs;
        std::vector<std::vector<double>> vals;
        std::vector<int> idx(n, 0);
        for (;;) {
          std::vector<double> x = x0;
          for (int i = 0; i < n; ++i) x[i] += (idx[i] - 1) * fd.x_step;
          xs.push_back(x);
          vals.push_back(X.eval(x));
          int c = n - 1;
          while (c >= 0 && ++idx[c] == 3) idx[c--] = 0;
          if (c < 0) break;
        }
        PolyField fitted = PolyField::zero(n);
        for (int k = 0; k < n; ++k) {
          std::vector<double> vk(xs.size());
          for (std::size_t s = 0; s < xs.size(); ++s) vk[s] = vals[s][k];
          fitted.comps[k] = fit_poly(xs, vk, n, fd.x_degree);
        }
        set.fields.push_back(std::move(fitted));
      }
      set.degrees.push_back(dilations::degree(w->scheme, alpha));
    }
    return set;
  }

  // General map: estimate X_alpha = (1/alpha!) d_t^alpha W(t, x)|_{t=0}
  // per x-sample, then fit polynomials in x.
  const int N = gamma.N();
  std::vector<std::vector<double>> xs;
  {
    std::vector<int> idx(n, 0);
    for (;;) {
      std::vector<double> x = x0;
      for (int i = 0; i < n; ++i) x[i] += (idx[i] - 1) * fd.x_step;
      xs.push_back(x);
      int c = n - 1;
      while (c >= 0 && ++idx[c] == 3) idx[c--] = 0;
      if (c < 0) break;
    }
  }
  auto alphas = multi_indices(N, 1, order);
  std::vector<std::vector<int>> kept;
  for (const auto& a : alphas)
    if (total(a) <= order) kept.push_back(a);

  // Cache W on the t-stencil per x-sample.
  std::vector<std::map<std::vector<int>, std::vector<double>>> cache(xs.size());
  auto w_at = [&](std::size_t s, const std::vector<int>& off) -> const std::vector<double>& {
    auto it = cache[s].find(off);
    if (it != cache[s].end()) return it->second;
    std::vector<double> t(N);
    for (int i = 0; i < N; ++i) t[i] = off[i] * fd.t_step;
    auto w = w_from_gamma(gamma, t, xs[s], fd.fd_w_step);
    return cache[s].emplace(off, std::move(w)).first->second;
  };

  for (const auto& alpha : kept) {
    std::vector<std::vector<double>> coeff_per_x(xs.size());
    for (std::size_t s = 0; s < xs.size(); ++s)
      coeff_per_x[s] =
          taylor_coeff(alpha, fd.t_step, n, [&](const std::vector<int>& off) -> const std::vector<double>& {
            return w_at(s, off);
          });
    PolyField p = PolyField::zero(n);
    for (int k = 0; k < n; ++k) {
      std::vector<double> vk(xs.size());
      for (std::size_t s = 0; s < xs.size(); ++s) vk[s] = coeff_per_x[s][k];
      p.comps[k] = fit_poly(xs, vk, n, fd.x_degree);
    }
    set.alphas.push_back(alpha);
    set.fields.push_back(std::move(p));
  }
  return set;
}

namespace {

double best_minor(const std::vector<std::vector<double>>& columns, int n) {
  // columns[c] is an n-vector; maximize |det| over n-subsets.
  const int L = static_cast<int>(columns.size());
  if (L < n) return 0.0;
  std::vector<int> pick(n);
  for (int i = 0; i < n; ++i) pick[i] = i;
  double best = 0.0;
  for (;;) {
    Eigen::MatrixXd M(n, n);
    for (int c = 0; c < n; ++c)
      for (int r = 0; r < n; ++r) M(r, c) = columns[pick[c]][r];
    best = std::max(best, std::abs(M.determinant()));
    int i = n - 1;
    while (i >= 0 && pick[i] == L - n + i) --i;
    if (i < 0) break;
    ++pick[i];
    for (int k = i + 1; k < n; ++k) pick[k] = pick[k - 1] + 1;
  }
  return best;
}

}  // namespace

CurvatureReport curvature_check(const SurfaceMap& gamma, const std::vector<double>& x0,
                                CurvatureMode mode, int M, int Mprime, const FdGrid& fd) {
  CurvatureReport rep;
  rep.mode = mode;
  rep.order_used = M;
  rep.bracket_order = Mprime;
  const int n = gamma.n();
  const int N = gamma.N();

  if (mode == CurvatureMode::kCJ) {
    // Derivatives of the n x n Jacobian minors of the n-fold composition
    // against tau at tau = 0.
    const int D = N * n;
    std::vector<const SurfaceMap*> factors(n, &gamma);
    std::map<std::vector<int>, std::vector<double>> minor_cache;
    auto minors_at = [&](const std::vector<int>& off) -> const std::vector<double>& {
      auto it = minor_cache.find(off);
      if (it != minor_cache.end()) return it->second;
      std::vector<double> tau(D);
      for (int i = 0; i < D; ++i) tau[i] = off[i] * fd.t_step;
      const double h = fd.t_step;
      Eigen::MatrixXd J(n, D);
      for (int i = 0; i < D; ++i) {
        auto tp = tau, tm = tau;
        tp[i] += h;
        tm[i] -= h;
        auto gp = compose_gamma(factors, {}, tp, x0);
        auto gm = compose_gamma(factors, {}, tm, x0);
        for (int k = 0; k < n; ++k) J(k, i) = (gp[k] - gm[k]) / (2.0 * h);
      }
      std::vector<double> minors;
      std::vector<int> pick(n);
      for (int i = 0; i < n; ++i) pick[i] = i;
      for (;;) {
        Eigen::MatrixXd Msub(n, n);
        for (int c = 0; c < n; ++c)
          for (int r = 0; r < n; ++r) Msub(r, c) = J(r, pick[c]);
        minors.push_back(Msub.determinant());
        int i = n - 1;
        while (i >= 0 && pick[i] == D - n + i) --i;
        if (i < 0) break;
        ++pick[i];
        for (int k = i + 1; k < n; ++k) pick[k] = pick[k - 1] + 1;
      }
      return minor_cache.emplace(off, std::move(minors)).first->second;
    };

    const std::size_t minor_count = minors_at(std::vector<int>(D, 0)).size();
    double best = 0.0;
    std::vector<int> best_beta;
    for (const auto& beta : multi_indices(D, 0, M)) {
      if (total(beta) > M) continue;
      std::vector<double> val =
          taylor_coeff(beta, fd.t_step, static_cast<int>(minor_count),
                       [&](const std::vector<int>& off) -> const std::vector<double>& {
                         return minors_at(off);
                       });
      // taylor_coeff divides by alpha!; undo to report the raw derivative.
      double afact = 1.0;
      for (int a : beta) afact *= factorial(a);
      for (double& v : val) v *= afact;
      for (double v : val)
        if (std::abs(v) > best) {
          best = std::abs(v);
          best_beta = beta;
        }
      if (best > 1e-8) break;  // search in increasing |beta|; first hit wins
    }
    rep.margin = best;
    rep.holds = best > 1e-8;
    rep.indeterminate = !rep.holds && best > 1e-12;
    if (!best_beta.empty() || rep.holds) {
      rep.witness = "beta=(";
      for (std::size_t i = 0; i < best_beta.size(); ++i)
        rep.witness += (i ? "," : "") + std::to_string(best_beta[i]);
      rep.witness += ")";
    }
    return rep;
  }

  // kCZ / kCY: span of Taylor fields plus brackets at x0.
  std::vector<PolyField> fields;
  if (mode == CurvatureMode::kCZ) {
    auto set = taylor_fields(gamma, M, x0, fd);
    fields = set.fields;
  } else {
    // Taylor coefficients of each coordinate-direction generator.
    std::vector<std::vector<double>> xs;
    std::vector<int> idx(n, 0);
    for (;;) {
      std::vector<double> x = x0;
      for (int i = 0; i < n; ++i) x[i] += (idx[i] - 1) * fd.x_step;
      xs.push_back(x);
      int c = n - 1;
      while (c >= 0 && ++idx[c] == 3) idx[c--] = 0;
      if (c < 0) break;
    }
    for (int dir = 0; dir < N; ++dir) {
      std::vector<std::map<std::vector<int>, std::vector<double>>> cache(xs.size());
      auto wj_at = [&](std::size_t s, const std::vector<int>& off) -> const std::vector<double>& {
        auto it = cache[s].find(off);
        if (it != cache[s].end()) return it->second;
        std::vector<double> t(N);
        for (int i = 0; i < N; ++i) t[i] = off[i] * fd.t_step;
        auto w = wj_from_gamma(gamma, dir, t, xs[s], fd.fd_w_step);
        return cache[s].emplace(off, std::move(w)).first->second;
      };
      for (const auto& alpha : multi_indices(N, 0, M)) {
        if (total(alpha) > M) continue;
        std::vector<std::vector<double>> coeff_per_x(xs.size());
        for (std::size_t s = 0; s < xs.size(); ++s)
          coeff_per_x[s] = taylor_coeff(alpha, fd.t_step, n,
                                        [&](const std::vector<int>& off) -> const std::vector<double>& {
                                          return wj_at(s, off);
                                        });
        PolyField p = PolyField::zero(n);
        bool nonzero = false;
        for (int k = 0; k < n; ++k) {
          std::vector<double> vk(xs.size());
          for (std::size_t s = 0; s < xs.size(); ++s) vk[s] = coeff_per_x[s][k];
          p.comps[k] = fit_poly(xs, vk, n, fd.x_degree);
          nonzero = nonzero || !p.comps[k].empty();
        }
        if (nonzero) fields.push_back(std::move(p));
      }
    }
  }

  // Brackets up to depth Mprime.
  std::vector<PolyField> all = fields;
  std::vector<PolyField> frontier = fields;
  for (int depth = 1; depth < Mprime; ++depth) {
    std::vector<PolyField> next;
    for (const auto& f : frontier)
      for (const auto& g : fields) {
        PolyField br = poly_bracket(f, g);
        bool nonzero = false;
        for (const auto& comp : br.comps)
          for (const auto& [m, c] : comp)
            if (std::abs(c) > 1e-7) nonzero = true;
        if (nonzero) next.push_back(std::move(br));
      }
    for (auto& f : next) all.push_back(f);
    frontier = std::move(next);
    if (frontier.empty()) break;
  }

  std::vector<std::vector<double>> columns;
  for (const auto& f : all) columns.push_back(f.eval(x0));
  rep.margin = best_minor(columns, n);
  rep.holds = rep.margin > 1e-8;
  rep.indeterminate = !rep.holds && rep.margin > 1e-12;
  rep.witness = "fields=" + std::to_string(all.size());
  return rep;
}

}  // namespace mpradon::surfaces
