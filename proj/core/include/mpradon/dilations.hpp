#pragma once

#include <optional>
#include <string>
#include <vector>

#include "mpradon/rational.hpp"

namespace mpradon::dilations {

using LatticePoint = std::vector<int>;  // point of the dyadic shadow, in N^nu

/// Multi-parameter dilation data: N coordinate exponent vectors
/// e_1..e_N, each in [0,inf)^nu and nonzero. Exponents are exact
/// rationals; only scaling evaluations go to floating point.
struct DilationScheme {
  int nu = 1;
  int N = 1;
  std::vector<std::vector<Rational>> exponents;  // exponents[i] = e_{i+1}, size nu

  static DilationScheme make(int nu, std::vector<std::vector<Rational>> exps);

  /// Standard product-type scheme: nu = N, e_i = i-th unit vector.
  static DilationScheme product_standard(int n);

  /// Zygmund-type scheme on R^3: e = ((1,0),(0,1),(1,1)).
  static DilationScheme zygmund3();

  /// Total homogeneous dimension per parameter: Q_mu = sum_i e_i^mu.
  std::vector<Rational> homogeneous_dims() const;
};

/// Applies the anisotropic scaling t -> (delta^{e_1} t_1, ..., delta^{e_N} t_N),
/// with delta^{e_i} the multi-index power over the nu parameters.
std::vector<double> scale_point(const DilationScheme& scheme, const std::vector<double>& delta,
                                const std::vector<double>& t);

/// delta = 2^{-j} for a shadow point j.
std::vector<double> dyadic_delta(int nu, const LatticePoint& j);

enum class PurityClass { kZero, kPure, kNonPure };

/// Formal degree vector in [0,inf)^nu.
struct DegreeVector {
  std::vector<Rational> components;

  bool is_zero() const;
  /// Pure means nonzero in exactly one of the nu components.
  PurityClass purity() const;
  friend DegreeVector operator+(const DegreeVector& a, const DegreeVector& b);
  friend bool operator==(const DegreeVector& a, const DegreeVector& b);
  double pow_delta(const std::vector<double>& delta) const;  // delta^d
  std::string str() const;
};

/// deg(alpha) = sum_i alpha_i e_i for a multi-index alpha in N^N.
DegreeVector degree(const DilationScheme& scheme, const std::vector<int>& alpha);

enum class LatticeKind { kProduct, kFlag, kCustom };

/// A dyadic shadow of the admissible scale set: the sub-lattice
/// {j in N^nu : 2^{-j} admissible}. It must be closed under
/// coordinatewise minimum (the scale set is closed under coordinatewise
/// maximum of deltas). Product is all of N^nu, flag is
/// {j_1 <= j_2 <= ... <= j_nu}; custom is cut out by inequalities
/// a.j <= b with integer coefficients.
class ParamLattice {
public:
  static ParamLattice product(int nu);
  static ParamLattice flag(int nu);
  /// Each row is (a_1,...,a_nu, b) meaning a.j <= b. Throws if the
  /// min-closure check fails within the validation box.
  static ParamLattice custom(int nu, std::vector<std::vector<long long>> inequalities,
                             int validation_bound = 12);

  LatticeKind kind() const { return kind_; }
  int nu() const { return nu_; }
  const std::vector<std::vector<long long>>& inequalities() const { return ineqs_; }

  bool contains(const LatticePoint& j) const;

  /// All lattice points with |j|_inf <= bound, lexicographic order.
  std::vector<LatticePoint> enumerate(int bound) const;

  std::string to_json() const;
  static ParamLattice from_json(const std::string& text);

private:
  ParamLattice() = default;
  LatticeKind kind_ = LatticeKind::kProduct;
  int nu_ = 1;
  std::vector<std::vector<long long>> ineqs_;
};

/// Cancellation bookkeeping at a fixed shadow point j: which parameter
/// indices are minimal, the comparability classes under the relation
/// "every admissible drop in mu_1 is matched, up to the factor C, by a
/// drop in mu_2", and the coordinate subsets on which bump integrals
/// must vanish.
struct CancellationStructure {
  LatticePoint j;
  double C = 1.0;
  std::vector<int> minimal_set;                 // mu with no admissible drop
  std::vector<std::vector<int>> classes;        // classes[mu] = members of [mu]
  std::vector<std::vector<int>> required_subsets;  // t-coordinate index sets (0-based)
  std::vector<int> required_mu;                 // the mu that forced each subset
  bool exact = true;   // closed form (preset) vs brute force (custom)
  bool certified = true;  // brute force ran far enough to certify
};

/// Computes the cancellation structure. Presets are answered in closed
/// form; custom lattices are checked by enumeration up to search_bound
/// and the result is marked uncertified when the bound cannot rule out
/// unbounded witnesses.
CancellationStructure cancellation_structure(const DilationScheme& scheme,
                                             const ParamLattice& lattice, const LatticePoint& j,
                                             double C, int search_bound);

/// Coordinates i with e_i^mu != 0 (the t^mu block).
std::vector<int> coords_of_parameter(const DilationScheme& scheme, int mu);

}  // namespace mpradon::dilations
