#pragma once

#include <array>
#include <complex>
#include <optional>
#include <string>
#include <vector>

#include "mpradon/rational.hpp"

namespace mpradon::decide {

/// Polynomial p(s,t) = sum c_{(e,f)} s^e t^f with exact rational
/// coefficients and no constant term.
struct PolySurface {
  struct Term {
    int e = 0, f = 0;
    Rational c;
  };
  std::vector<Term> terms;

  static PolySurface from_quads(const std::vector<std::array<long long, 4>>& quads);
  /// Minimal pure exponents; nullopt means no pure term in that variable.
  std::optional<int> min_pure_s() const;
  std::optional<int> min_pure_t() const;
  bool has_nonpure() const;
  double eval(double s, double t) const;
  std::string str() const;
};

enum class NewtonMode { kProduct, kFlag };

enum class Boundedness { kBounded, kUnbounded, kUnboundedExtended, kUndecided };

struct NewtonVerdict {
  NewtonMode mode = NewtonMode::kProduct;
  std::optional<int> a, b;  // minimal pure exponents (nullopt = none)
  Boundedness classification = Boundedness::kUndecided;
  std::vector<std::pair<int, int>> witnesses;  // exponents below the line
  bool swapped = false;                        // flag mode ran with s,t roles swapped

  int exit_code() const;
};

/// Product mode: bounded iff every exponent satisfies e/a + f/b >= 1
/// (exact rational test; the line through (a,0) and (0,b)). Flag mode
/// (s-scale dominated by t-scale): requires b <= a, bounded iff
/// e + f >= b. A missing pure exponent together with a surviving
/// non-pure term classifies as unbounded-extended.
NewtonVerdict newton_verdict(const PolySurface& p, NewtonMode mode, bool allow_swap = false);

/// Witness choice for the divergent-kernel construction: among exponents
/// strictly below the line, minimal e/a + f/b, then minimal e.
std::optional<std::pair<int, int>> counterexample_witness(const PolySurface& p);

/// Oscillatory multiplier of the two-parameter dyadic kernel pinned to
/// the witness direction, evaluated at frequency tau^{e/a + f/b}. The
/// kernel stacks M+1 scale pairs (2^j tau^{1/a}, 2^{-j e/f} tau^{1/b});
/// each scale is reduced to unit support before quadrature, so only the
/// dimensionless phase coefficients enter. The base profile is the
/// derivative of a (0,1) mollifier (zero mean, all higher moments
/// negative); it is contracted by the dyadic factor r chosen so the
/// off-line phase terms stay perturbative for every scale requested.
struct MultiplierExperiment {
  PolySurface p;
  double tau = 0.0;
  int a = 0, b = 0;
  std::pair<int, int> witness;
  double m0 = 0.0;             // e/a + f/b
  double rescale = 1.0;        // the contraction factor r
  double contamination = 0.0;  // bound on off-line phase / on-line phase
  bool rescale_capped = false;
  double profile_mass_abs = 0.0;  // \int |profile|, for trivial bounds

  std::complex<double> term(int j) const;
  std::complex<double> partial(int M) const;  // sum of terms 0..M
};

struct MultiplierOptions {
  std::optional<std::pair<int, int>> witness_override;
  double contamination_target = 0.01;
  double max_rescale = 1.0e12;
  int base_quad = 48;
};

MultiplierExperiment make_multiplier_experiment(const PolySurface& p, double tau, int Mmax,
                                                const MultiplierOptions& opts = {});

std::complex<double> counterexample_multiplier(const PolySurface& p, double tau, int M,
                                               const MultiplierOptions& opts = {});

}  // namespace mpradon::decide
