#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "mpradon/bumps.hpp"
#include "mpradon/dilations.hpp"

namespace mpradon::kernels {

/// Dyadic family {bump_j} over the lattice shadow, synthesizing a
/// singular kernel as the (distributional) sum of its mass-preserving
/// dilates. The family is given as a generator so unbounded shadows
/// stay representable; all computations truncate explicitly.
struct DyadicKernel {
  dilations::DilationScheme scheme;
  dilations::ParamLattice lattice = dilations::ParamLattice::product(1);
  double C = 1.0;
  std::function<std::optional<BumpSpec>(const dilations::LatticePoint&)> family;
};

struct CancellationEntry {
  dilations::LatticePoint j;
  std::vector<int> subset;  // t-coordinate indices integrated out
  double residual;          // sup over remaining coordinates of |partial integral|
};

struct CancellationReport {
  bool pass = false;
  bool certified = true;    // false when the lattice combinatorics were truncation-limited
  double max_residual = 0.0;
  double quad_tol = 0.0;
  std::vector<CancellationEntry> entries;
};

/// Verifies the required partial-integral cancellations for every j with
/// |j|_inf <= bound. The partial integrals are exact per separable term
/// (product of 1-D quadratures times the sup of the remaining factors).
CancellationReport check_cancellation(const DyadicKernel& kernel, int bound, double quad_tol,
                                      int search_bound = 32);

struct GridSpecND {
  std::vector<double> lo, hi;
  std::vector<int> npts;

  int dim() const { return static_cast<int>(npts.size()); }
  std::size_t size() const;
  std::vector<double> point(std::size_t flat_index) const;
};

/// Pointwise partial sum over {j in shadow : |j|_inf <= bound} of the
/// dilated bumps on the grid. Summation order is lexicographic in j,
/// then grid index, for bit-stable output.
std::vector<double> synthesize_partial(const DyadicKernel& kernel, int bound,
                                       const GridSpecND& grid);

/// Pairing diagnostic: <dilate(bump_j), f> per scale along a ray of
/// scales, for convergence-rate fits.
std::vector<double> pairing_per_scale(const DyadicKernel& kernel,
                                      const std::vector<dilations::LatticePoint>& scales,
                                      const std::function<double(const std::vector<double>&)>& f,
                                      int quad_order = 48);

/// Family of alternating differences of a unit-mass bump whose partial
/// sums telescope to the single dilate at the truncation scale. Requires
/// the product lattice and \int eta = 1.
DyadicKernel delta0_family(const BumpSpec& eta, const dilations::DilationScheme& scheme);

/// least-squares slope/intercept/R^2 of y against x.
struct LineFit {
  double slope = 0.0, intercept = 0.0, r2 = 0.0;
};
LineFit fit_line(const std::vector<double>& x, const std::vector<double>& y);

}  // namespace mpradon::kernels
