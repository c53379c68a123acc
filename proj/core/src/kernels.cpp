#include "mpradon/kernels.hpp"

#include <cmath>
#include <stdexcept>

#include "mpradon/quadrature.hpp"

namespace mpradon::kernels {

std::size_t GridSpecND::size() const {
  std::size_t s = 1;
  for (int n : npts) s *= static_cast<std::size_t>(n);
  return s;
}

std::vector<double> GridSpecND::point(std::size_t flat) const {
  const int d = dim();
  std::vector<double> p(d);
  for (int i = d - 1; i >= 0; --i) {
    std::size_t n = static_cast<std::size_t>(npts[i]);
    std::size_t k = flat % n;
    flat /= n;
    p[i] = npts[i] == 1 ? lo[i] : lo[i] + (hi[i] - lo[i]) * k / (npts[i] - 1);
  }
  return p;
}

CancellationReport check_cancellation(const DyadicKernel& kernel, int bound, double quad_tol,
                                      int search_bound) {
  CancellationReport rep;
  rep.quad_tol = quad_tol;
  rep.pass = true;
  for (const auto& j : kernel.lattice.enumerate(bound)) {
    auto bump = kernel.family(j);
    if (!bump) continue;
    auto cs = dilations::cancellation_structure(kernel.scheme, kernel.lattice, j, kernel.C,
                                                std::max(search_bound, bound));
    rep.certified = rep.certified && cs.certified;
    for (const auto& subset : cs.required_subsets) {
      // Per separable term the partial integral factors: the subset
      // coordinates integrate to exact 1-D quadratures, the remaining
      // coordinates stay as a product of atoms. The residual is the sup
      // of the summed terms over a sampled grid of what remains.
      std::vector<bool> in_subset(bump->dim, false);
      for (int c : subset) in_subset[c] = true;
      std::vector<int> rest;
      for (int i = 0; i < bump->dim; ++i)
        if (!in_subset[i]) rest.push_back(i);

      std::vector<double> term_mass;  // coeff * prod of subset integrals
      for (const auto& term : bump->terms) {
        double p = term.coeff;
        for (int c : subset) p *= term.factors[c].integral();
        term_mass.push_back(p);
      }

      double residual = 0.0;
      if (rest.empty()) {
        double s = 0.0;
        for (double m : term_mass) s += m;
        residual = std::abs(s);
      } else {
        std::vector<double> radius(rest.size(), 0.0);
        for (std::size_t r = 0; r < rest.size(); ++r)
          for (const auto& term : bump->terms)
            radius[r] = std::max(radius[r], term.factors[rest[r]].radius);
        const int per_axis = 33;
        std::vector<int> idx(rest.size(), 0);
        for (;;) {
          double s = 0.0;
          for (std::size_t ti = 0; ti < bump->terms.size(); ++ti) {
            double p = term_mass[ti];
            for (std::size_t r = 0; r < rest.size() && p != 0.0; ++r) {
              double x = -radius[r] + 2.0 * radius[r] * idx[r] / (per_axis - 1);
              p *= bump->terms[ti].factors[rest[r]].eval(x);
            }
            s += p;
          }
          residual = std::max(residual, std::abs(s));
          int k = static_cast<int>(rest.size()) - 1;
          while (k >= 0 && ++idx[k] == per_axis) idx[k--] = 0;
          if (k < 0) break;
        }
      }
      rep.max_residual = std::max(rep.max_residual, residual);
      rep.entries.push_back({j, subset, residual});
      if (residual > quad_tol) rep.pass = false;
    }
  }
  if (!rep.certified) rep.pass = false;
  return rep;
}

std::vector<double> synthesize_partial(const DyadicKernel& kernel, int bound,
                                       const GridSpecND& grid) {
  std::vector<double> values(grid.size(), 0.0);
  for (const auto& j : kernel.lattice.enumerate(bound)) {
    auto bump = kernel.family(j);
    if (!bump) continue;
    DilatedBump d = dilate_bump(*bump, kernel.scheme, j);
    for (std::size_t g = 0; g < values.size(); ++g) values[g] += d.eval(grid.point(g));
  }
  return values;
}

std::vector<double> pairing_per_scale(const DyadicKernel& kernel,
                                      const std::vector<dilations::LatticePoint>& scales,
                                      const std::function<double(const std::vector<double>&)>& f,
                                      int quad_order) {
  std::vector<double> out;
  for (const auto& j : scales) {
    auto bump = kernel.family(j);
    if (!bump) {
      out.push_back(0.0);
      continue;
    }
    DilatedBump d = dilate_bump(*bump, kernel.scheme, j);
    const int N = kernel.scheme.N;
    // Tensor Gauss-Legendre over the dilated support box.
    std::vector<double> radius(N);
    for (int i = 0; i < N; ++i) radius[i] = bump->support_radius / d.axis_scale[i];
    const auto& rule = gauss_legendre(quad_order);
    std::vector<std::size_t> idx(N, 0);
    double sum = 0.0;
    for (;;) {
      std::vector<double> t(N);
      double w = 1.0;
      for (int i = 0; i < N; ++i) {
        t[i] = radius[i] * rule.nodes[idx[i]];
        w *= radius[i] * rule.weights[idx[i]];
      }
      sum += w * d.eval(t) * f(t);
      int k = N - 1;
      while (k >= 0 && ++idx[k] == rule.nodes.size()) idx[k--] = 0;
      if (k < 0) break;
    }
    out.push_back(sum);
  }
  return out;
}

DyadicKernel delta0_family(const BumpSpec& eta, const dilations::DilationScheme& scheme) {
  if (std::abs(eta.integral() - 1.0) > 1e-12)
    throw std::invalid_argument("delta0_family: eta must have unit integral");
  if (eta.dim != scheme.N) throw std::invalid_argument("delta0_family: dimension mismatch");

  DyadicKernel k;
  k.scheme = scheme;
  k.lattice = dilations::ParamLattice::product(scheme.nu);
  const int nu = scheme.nu;
  BumpSpec base = eta;
  // bump_j(t) = sum over p in {0,1}^nu with p <= j of (-1)^{|p|} of eta
  // contracted one dyadic step in the parameters flagged by p; the
  // dilated partial sums then telescope across scales.
  k.family = [base, scheme, nu](const dilations::LatticePoint& j) -> std::optional<BumpSpec> {
    std::vector<BumpSpec::Term> terms;
    for (int mask = 0; mask < (1 << nu); ++mask) {
      bool ok = true;
      int ones = 0;
      for (int mu = 0; mu < nu; ++mu)
        if (mask & (1 << mu)) {
          ++ones;
          if (j[mu] < 1) ok = false;
        }
      if (!ok) continue;
      for (const auto& term : base.terms) {
        BumpSpec::Term t = term;
        t.coeff *= (ones % 2 == 0) ? 1.0 : -1.0;
        for (int i = 0; i < scheme.N; ++i) {
          double pe = 0.0;
          for (int mu = 0; mu < nu; ++mu)
            if (mask & (1 << mu)) pe += scheme.exponents[i][mu].value();
          if (pe != 0.0) t.factors[i] = t.factors[i].rescaled_mass_preserving(std::exp2(-pe));
        }
        terms.push_back(std::move(t));
      }
    }
    double r = 0.0;
    for (const auto& t : terms)
      for (const auto& f : t.factors) r = std::max(r, f.radius);
    return BumpSpec::sum(scheme.N, std::move(terms), r);
  };
  return k;
}

LineFit fit_line(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size() || x.size() < 2)
    throw std::invalid_argument("fit_line: need at least two samples");
  const double n = static_cast<double>(x.size());
  double sx = 0, sy = 0, sxx = 0, sxy = 0, syy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sx += x[i];
    sy += y[i];
    sxx += x[i] * x[i];
    sxy += x[i] * y[i];
    syy += y[i] * y[i];
  }
  LineFit f;
  const double denom = n * sxx - sx * sx;
  f.slope = (n * sxy - sx * sy) / denom;
  f.intercept = (sy - f.slope * sx) / n;
  double ss_res = 0.0, ss_tot = 0.0, ymean = sy / n;
  for (std::size_t i = 0; i < x.size(); ++i) {
    double pred = f.slope * x[i] + f.intercept;
    ss_res += (y[i] - pred) * (y[i] - pred);
    ss_tot += (y[i] - ymean) * (y[i] - ymean);
  }
  f.r2 = ss_tot > 0 ? 1.0 - ss_res / ss_tot : 1.0;
  return f;
}

}  // namespace mpradon::kernels
