#pragma once

#include <string>
#include <vector>

#include "mpradon/rng.hpp"
#include "mpradon/vfield.hpp"

namespace mpradon::ccgeom {

/// Piecewise-constant control coefficients a_1..a_q on [0,1]; subunit
/// means sup_s (sum_j a_j(s)^2)^{1/2} < 1.
struct SubunitPath {
  int segments = 1;
  // coeffs[seg][j]: coefficient of field j on segment seg
  std::vector<std::vector<double>> coeffs;

  double sup_norm() const;
  bool is_subunit() const { return sup_norm() < 1.0; }
  static SubunitPath constant(std::vector<double> a);
  static SubunitPath random(int segments, int q, double radius, Rng& rng);
};

/// Endpoint at time 1 of gamma' = sum_j a_j(s) Z_j(gamma), gamma(0) = x0.
/// The fields arrive pre-scaled; reachable endpoints fill the unit ball
/// of the scaled geometry.
std::vector<double> flow_endpoint(const std::vector<vfields::VField>& fields,
                                  const SubunitPath& path, const std::vector<double>& x0,
                                  double ode_tol);

/// Time-1 flow of the single field sum_j u_j Z_j from x0.
std::vector<double> exp_flow(const std::vector<vfields::VField>& fields,
                             const std::vector<double>& u, const std::vector<double>& x0,
                             double ode_tol);

struct ScalingChart {
  std::vector<double> x0;
  std::vector<vfields::VField> scaled_fields;  // Z_j = delta^{d_j} X_j
  int n0 = 0;                                  // rank of span{Z_j(x0)}
  std::vector<int> J0;                         // selected columns (lexicographic tie-break)
  double eta1 = 0.25;                          // u-ball radius
  double xi1 = 0.05;                           // inner ball radius probe
  double ode_tol = 1e-10;

  /// Phi(u) = time-1 flow of u . Z_{J0} from x0 (full-rank charts only;
  /// for n0 < n the chart parameters still live in R^{n0}).
  std::vector<double> forward(const std::vector<double>& u) const;
  /// Newton inversion of Phi near the chart center. Throws on failure.
  std::vector<double> inverse(const std::vector<double>& y) const;
  /// Pullback fields Y_j on the u-ball via the finite-difference
  /// differential of the inverse.
  std::vector<double> pullback_field(int j, const std::vector<double>& u, double fd_step) const;
  /// det of the n0 x n0 matrix of pullback coordinates [Y_{J0(1)},...]
  double pullback_det(const std::vector<double>& u, double fd_step = 1e-5) const;
};

/// Builds the chart: scales the fields by delta^{d_j}, computes the rank
/// n0 at x0, selects J0 as the column set maximizing the largest
/// |minor|, and exposes the exponential chart.
ScalingChart scaling_chart(const std::vector<vfields::DegreedField>& fields,
                           const std::vector<double>& x0, const std::vector<double>& delta,
                           double ode_tol = 1e-10);

struct ChartReport {
  bool pass = false;
  int injectivity_pairs_checked = 0;
  int injectivity_violations = 0;
  int inclusion_paths = 0;
  int inclusion_failures = 0;
  double det_min = 0.0, det_max = 0.0;
  double det_ratio = 0.0;
  std::string note;
  // CSV rows: u..., detY, invert_ok
  std::vector<std::string> csv_rows;
};

struct ChartVerifyConfig {
  int samples = 200;       // u-samples for injectivity and det scan
  double probe_radius = 0.05;  // subunit-path radius for the inclusion probe
  int probe_paths = 100;
  double det_ratio_bound = 4.0;
  double fd_step = 1e-5;
  std::uint64_t seed = 7;
};

/// Sampled verification: injectivity on u-samples, inclusion of sampled
/// subunit-path endpoints via Newton inversion, and the det Y ratio over
/// the u-ball.
ChartReport chart_verify(const ScalingChart& chart, const ChartVerifyConfig& cfg);

}  // namespace mpradon::ccgeom
