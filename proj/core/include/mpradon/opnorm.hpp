#pragma once

#include <Eigen/Sparse>
#include <functional>
#include <string>
#include <vector>

#include "mpradon/bumps.hpp"
#include "mpradon/dilations.hpp"
#include "mpradon/surfaces.hpp"

namespace mpradon::opnorm {

/// Uniform x-grid with linear interpolation; periodic wrap is used by
/// the translation-invariant models.
struct XGrid {
  double lo = -1.0, hi = 1.0;
  int n = 512;
  bool periodic = false;

  double h() const { return (hi - lo) / (periodic ? n : n - 1); }
  double point(int i) const { return lo + i * h(); }
};

struct GridSpec {
  XGrid x;
  int t_quad_order = 64;  // Gauss-Legendre order per t-axis
  // Put the t-nodes on the x-lattice (N = 1 only). Off-grid quadrature
  // deposits alias into spurious high-frequency response of the coarse
  // scales, which floors the far pair norms; aligned nodes avoid the
  // interpolation entirely on periodic translation-invariant models.
  bool align_t_nodes = false;
};

struct Cutoffs {
  std::function<double(double)> psi1;  // defaults to 1
  std::function<double(double)> psi2;
  std::function<double(const std::vector<double>& t, double x)> kappa;  // defaults to 1
};

struct DiscretizedOp {
  Eigen::SparseMatrix<double> mat;  // row r: output at x_r
  dilations::LatticePoint j;
  std::string bump_id, surface_id;
};

/// Matrix for f -> psi1(x) \int f(gamma_{2^{-j}t}(x)) psi2(gamma) kappa
/// sigma_j(t) dt on the grid, with the t-integral in unit-support
/// coordinates and linear interpolation of f at the mapped points.
/// Throws when a mapped point leaves a non-periodic grid.
DiscretizedOp discretize_piece(const surfaces::SurfaceMap& surface, const kernels::BumpSpec& bump,
                               const dilations::DilationScheme& scheme,
                               const dilations::LatticePoint& j, const Cutoffs& cutoffs,
                               const GridSpec& grid);

/// Largest singular value via power iteration on A^T A, seeded start
/// vector, relative tolerance, 10000-iteration cap (throws past it).
double spectral_norm(const Eigen::SparseMatrix<double>& A, double tol = 1e-8);
double spectral_norm_dense(const Eigen::MatrixXd& A, double tol = 1e-8);

/// Matrix-free variant: iterate with y = A x and z = A^T y.
double spectral_norm_op(const std::function<void(const std::vector<double>&, std::vector<double>&)>& apply,
                        const std::function<void(const std::vector<double>&, std::vector<double>&)>& apply_adjoint,
                        int dim_in, int dim_out, double tol = 1e-8, int max_iter = 10000);

struct PairNormEntry {
  dilations::LatticePoint j, k;
  double norm_star;  // ||T_k^* T_j||
};

struct DecayFit {
  std::vector<PairNormEntry> table;
  double slope = 0.0;      // fitted slope of log2 norm against |j-k|
  double intercept = 0.0;
  double r2 = 0.0;
};

/// ||T_k^* T_j|| for all unordered pairs (plus diagonal), fitted against
/// |j-k| over pairs with |j-k| >= 1. Throws when fewer than 3 distinct
/// separations are available.
DecayFit ao_decay_fit(const std::vector<DiscretizedOp>& pieces, double power_tol = 1e-6);

/// sup_j sum_k max(||T_j^* T_k||, ||T_j T_k^*||)^{1/2} from a full pair
/// table; with a symmetric table pass the same entries for both roles.
double cotlar_bound(const std::vector<PairNormEntry>& star_table,
                    const std::vector<PairNormEntry>& adj_table);

// ---------------------------------------------------------------------------
// Transported densities

struct TransportResult {
  std::vector<double> density;  // on ygrid
  XGrid ygrid;
  bool hypothesis_ok = false;   // some |alpha| <= 3 keeps a Jacobian minor away from 0
  std::vector<int> alpha_used;
  double mass_in = 0.0, mass_out = 0.0;
  std::string warning;
};

/// Pushforward of weight(tau) dtau under a map tau -> Psi(tau) in R^1,
/// estimated by quadrature with mass-preserving linear deposition.
TransportResult transport_density(
    const std::function<double(const std::vector<double>&)>& psi_map,
    const std::function<double(const std::vector<double>&)>& weight,
    const std::vector<std::pair<double, double>>& tau_box, const XGrid& ygrid,
    int quad_per_axis = 256);

/// max over z in zset of \int |h(y-z) - h(y)| dy / |z|^delta.
double l1delta_seminorm(const std::vector<double>& h, const XGrid& ygrid, double delta,
                        const std::vector<double>& zset);

double grid_mass(const std::vector<double>& h, const XGrid& g);

}  // namespace mpradon::opnorm
