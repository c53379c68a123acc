#pragma once

#include <functional>
#include <map>
#include <string>
#include <vector>

#include "mpradon/dilations.hpp"
#include "mpradon/vfield.hpp"

namespace mpradon::surfaces {

/// Finite Taylor model W(t,x) = sum over 0 < |alpha| <= L of t^alpha X_alpha.
/// There is no alpha = 0 term, so W(0,x) = 0 by construction.
struct WSpec {
  int N = 1;
  int n = 1;
  dilations::DilationScheme scheme;  // degree bookkeeping for the alphas
  std::vector<std::pair<std::vector<int>, vfields::VField>> terms;

  std::vector<double> eval(const std::vector<double>& t, const std::vector<double>& x) const;
  /// sum eps^{|alpha|-1} t^alpha X_alpha(x): the 1/eps singularity of the
  /// radial flow equation removed analytically.
  std::vector<double> desingularized_rhs(double eps, const std::vector<double>& t,
                                         const std::vector<double>& x) const;
};

/// Radial-flow endpoint: integrates the desingularized flow from eps = 0
/// to eps_end with adaptive RK4. eps_end = 1 gives the surface map.
std::vector<double> flow_endpoint_w(const WSpec& w, double eps_end, const std::vector<double>& t,
                                    const std::vector<double>& x, double ode_tol);

std::vector<double> gamma_from_w(const WSpec& w, const std::vector<double>& t,
                                 const std::vector<double>& x, double ode_tol);

/// Smooth family of local diffeomorphisms gamma_t with gamma_0 = id.
/// The inverse evaluator is Newton iteration seeded at x, falling back
/// to the reversed flow when Newton stalls.
class SurfaceMap {
public:
  using Map = std::function<std::vector<double>(const std::vector<double>& t,
                                                const std::vector<double>& x)>;

  static SurfaceMap closed_form(int N, int n, Map forward, Map inverse, double rho = 0.5,
                                std::string name = "");
  static SurfaceMap closed_form(int N, int n, Map forward, double rho = 0.5,
                                std::string name = "");
  static SurfaceMap from_wspec(WSpec w, double ode_tol = 1e-10, double rho = 0.5,
                               std::string name = "");

  int N() const { return N_; }
  int n() const { return n_; }
  double rho() const { return rho_; }
  const std::string& name() const { return name_; }
  const WSpec* wspec() const { return w_ ? &*w_ : nullptr; }

  std::vector<double> apply(const std::vector<double>& t, const std::vector<double>& x) const;
  std::vector<double> apply_inverse(const std::vector<double>& t,
                                    const std::vector<double>& x) const;

private:
  int N_ = 1, n_ = 1;
  double rho_ = 0.5;
  std::string name_;
  Map forward_, inverse_;
  std::optional<WSpec> w_;
  double ode_tol_ = 1e-10;
};

/// W(t,x) = d/deps at eps=1 of gamma_{eps t}(gamma_t^{-1}(x)), by central
/// differences with one Richardson level.
std::vector<double> w_from_gamma(const SurfaceMap& gamma, const std::vector<double>& t,
                                 const std::vector<double>& x, double fd_step = 1e-4);

/// W_j(t,x) = d/ds_j at s=0 of gamma_{t+s}(gamma_t^{-1}(x)).
std::vector<double> wj_from_gamma(const SurfaceMap& gamma, int j, const std::vector<double>& t,
                                  const std::vector<double>& x, double fd_step = 1e-4);

/// Right-to-left composition of factors, optionally inverting some of
/// them: result = f_0^{+-1} o f_1^{+-1} o ... applied left to right on x
/// from the innermost factor. tau concatenates each factor's
/// parameters.
std::vector<double> compose_gamma(const std::vector<const SurfaceMap*>& gammas,
                                  const std::vector<bool>& invert_mask,
                                  const std::vector<double>& tau, const std::vector<double>& x);

/// Multivariate polynomial vector field with double coefficients; the
/// numeric carrier for stencil-fitted Taylor fields.
struct PolyField {
  int dim = 0;
  // coefficient maps per output coordinate: monomial exponents -> coeff
  std::vector<std::map<std::vector<int>, double>> comps;

  std::vector<double> eval(const std::vector<double>& x) const;
  static PolyField zero(int dim);
};
PolyField poly_bracket(const PolyField& X, const PolyField& Y);

struct TaylorFieldSet {
  std::vector<std::vector<int>> alphas;
  std::vector<PolyField> fields;           // X_alpha as polynomial fits around x0
  std::vector<dilations::DegreeVector> degrees;
};

struct FdGrid {
  double t_step = 1e-2;   // finite-difference step in t
  double x_step = 5e-2;   // stencil spread in x for the polynomial fit
  int x_degree = 2;       // fitted polynomial degree
  double fd_w_step = 1e-4;  // step used inside w_from_gamma
};

/// Taylor coefficients of W in t at t=0, up to |alpha| <= order. For a
/// WSpec the stored terms are echoed exactly; for a general map they are
/// estimated by finite-difference stencils applied to w_from_gamma and
/// fitted as polynomials in x around x0.
TaylorFieldSet taylor_fields(const SurfaceMap& gamma, int order, const std::vector<double>& x0,
                             const FdGrid& fd = {});

enum class CurvatureMode { kCZ, kCY, kCJ };

struct CurvatureReport {
  CurvatureMode mode;
  bool holds = false;
  bool indeterminate = false;
  int order_used = 0;       // M (and M' for bracket depth)
  int bracket_order = 0;
  std::string witness;
  double margin = 0.0;      // best minor determinant / derivative magnitude
};

/// Hormander-type spanning checks. kCZ/kCY build Taylor fields up to
/// |alpha| <= M and brackets to depth Mprime, then test n x n minors at
/// x0. kCJ searches derivatives of the composed-map Jacobian minors up
/// to total order M. Margins above 1e-8 hold; margins in [1e-12, 1e-8]
/// come back indeterminate.
CurvatureReport curvature_check(const SurfaceMap& gamma, const std::vector<double>& x0,
                                CurvatureMode mode, int M, int Mprime, const FdGrid& fd = {});

/// All multi-indices alpha in N^dim with min_total <= |alpha| <= max_total.
std::vector<std::vector<int>> multi_indices(int dim, int min_total, int max_total);

}  // namespace mpradon::surfaces
