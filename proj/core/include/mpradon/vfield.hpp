#pragma once

#include <functional>
#include <string>
#include <vector>

#include "mpradon/dilations.hpp"
#include "mpradon/expr.hpp"
#include "mpradon/rng.hpp"

namespace mpradon::vfields {

/// Vector field on R^n with expression-tree coefficients.
struct VField {
  int dim = 0;
  std::vector<Expr> coeffs;

  static VField zero(int dim);
  static VField coordinate(int dim, int axis);
  /// Parses "[expr, expr, ...]"; arity must equal dim.
  static VField parse(int dim, const std::string& text);

  std::vector<double> eval(const std::vector<double>& x) const;
  /// Jacobian d(coeffs)/dx, exact, evaluated at x. J(k,i) = d coeff_k / d x_i.
  std::vector<std::vector<double>> jacobian(const std::vector<double>& x) const;
  std::string str() const;
};

/// [X,Y] = X(Y) - Y(X), computed symbolically.
VField bracket(const VField& X, const VField& Y);

struct DegreedField {
  VField field;
  dilations::DegreeVector degree;
  std::string name;
};

struct GenerateReport {
  std::vector<DegreedField> list;  // seeds plus iterated brackets through order M
  bool closed = false;             // order-M+1 brackets lie in the constant span of the list
  bool exact = true;               // certificate is symbolic, not sampled
  std::string witness;             // first non-closure witness
};

/// Iterated brackets of the seeds up to bracket-word length M with
/// summed degrees. Fields that vanish or are constant multiples of an
/// existing member with the same degree are dropped.
GenerateReport generate_list(const std::vector<DegreedField>& seeds, int M, Rng rng);

struct SamplingPlan {
  std::vector<std::vector<double>> base_points;
  std::vector<std::vector<double>> deltas;
  int t_samples = 6;          // surface targets: points per delta in the t-ball
  double t_radius = 0.5;
  double cloud_radius = 0.1;  // local sample cloud around each base point
  int cloud_multiplier = 4;   // cloud size = multiplier * list size
  std::uint64_t seed = 1;

  std::string echo() const;
};

/// Log-spaced dyadic deltas 2^{-j} for shadow points with coordinates
/// below per_axis; includes the boundary rays of the lattice.
std::vector<std::vector<double>> default_delta_grid(const dilations::ParamLattice& lattice,
                                                    int per_axis = 8);

struct ControlCertificate {
  enum class Status { kPass, kFail, kUncertified };
  Status status = Status::kUncertified;
  double max_residual = 0.0;            // relative LSQ residual over all solves
  double max_coef_norm = 0.0;           // sup over samples of |c|_inf
  double coef_norm_at_first_delta = 0;  // |c|_inf at plan.deltas[0] (blow-up baseline)
  std::vector<double> per_delta_coef_norm;
  double max_deriv_norm = 0.0;          // sampled scaled-field derivative of c
  bool degenerate = false;              // rank-deficient local systems encountered
  std::string witness;
  std::string plan_echo;
};

/// Checks the scaled-bracket condition: every [delta^{d_i} X_i,
/// delta^{d_j} X_j] solves as a combination of the delta-scaled list
/// with residual <= tol and coefficients (and their sampled first-order
/// scaled derivatives, when m_max >= 1) bounded by coef_bound across
/// the delta grid.
ControlCertificate check_D(const std::vector<DegreedField>& list,
                           const dilations::ParamLattice& lattice, const SamplingPlan& plan,
                           int m_max, double tol, double coef_bound);

/// Field-case control: delta^{d0} X0 = sum_l c_l delta^{d_l} X_l on
/// sampled clouds, uniformly over the delta grid.
ControlCertificate check_control(const std::vector<DegreedField>& list, const DegreedField& target,
                                 const dilations::ParamLattice& lattice, const SamplingPlan& plan,
                                 int m_max, double tol, double coef_bound);

/// Surface-case control against a caller-supplied W(delta t, x)
/// evaluator; t runs over a sampled ball of dimension tdim.
using SurfaceW = std::function<std::vector<double>(const std::vector<double>& delta,
                                                   const std::vector<double>& t,
                                                   const std::vector<double>& x)>;
ControlCertificate check_control_fn(const std::vector<DegreedField>& list, const SurfaceW& target,
                                    int tdim, const dilations::ParamLattice& lattice,
                                    const SamplingPlan& plan, int m_max, double tol,
                                    double coef_bound);

}  // namespace mpradon::vfields
