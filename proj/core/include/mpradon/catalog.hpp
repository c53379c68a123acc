#pragma once

#include <optional>
#include <string>
#include <vector>

#include "mpradon/surfaces.hpp"

namespace mpradon::surfaces {

/// One gallery surface: the primary map (flow-backed when a finite
/// Taylor model exists) plus an independently implemented closed-form
/// twin for round-trip oracles, and the calibrated orders for the
/// spanning checks.
struct CatalogEntry {
  std::string name;
  SurfaceMap map;
  std::optional<SurfaceMap> oracle;  // closed form, independent of the flow path
  std::vector<double> x0;            // base point for curvature checks
  double t_radius = 0.3;             // sampling radius in t
  double x_radius = 0.3;             // sampling radius around x0
  int cz_M = 2, cz_Mprime = 2, cj_M = 2;
  bool spanning_expected = true;
};

/// The ten-surface gallery behind the round-trip, structure-identity and
/// curvature-equivalence suites.
std::vector<CatalogEntry> surface_catalog(double ode_tol = 1e-10);

/// Radial-flow endpoint for a numerically given generator family
/// W(t, x): integrates dw/deps = W(eps t, w)/eps from eps0 to 1, with
/// the startup handled by the O(eps) vanishing of W near 0.
std::vector<double> gamma_from_w_numeric(
    const std::function<std::vector<double>(const std::vector<double>&,
                                            const std::vector<double>&)>& w,
    const std::vector<double>& t, const std::vector<double>& x, double ode_tol);

}  // namespace mpradon::surfaces
