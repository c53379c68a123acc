#pragma once

#include <functional>
#include <vector>

namespace mpradon {

/// Gauss-Legendre nodes and weights on [-1,1].
struct GaussRule {
  std::vector<double> nodes;
  std::vector<double> weights;
};

/// Nodes/weights for an n-point rule, computed by Newton iteration on
/// Legendre polynomials and cached per n.
const GaussRule& gauss_legendre(int n);

/// \int_a^b f dx with an n-point rule.
double integrate(const std::function<double(double)>& f, double a, double b, int n = 64);

/// Panel-wise composite rule; panels chosen so smooth integrands with
/// moderate oscillation stay resolved.
double integrate_panels(const std::function<double(double)>& f, double a, double b,
                        int panels, int n_per_panel = 32);

}  // namespace mpradon
