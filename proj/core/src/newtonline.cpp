#include "mpradon/newtonline.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <stdexcept>

#include "mpradon/expr.hpp"
#include "mpradon/quadrature.hpp"

namespace mpradon::decide {

PolySurface PolySurface::from_quads(const std::vector<std::array<long long, 4>>& quads) {
  PolySurface p;
  for (const auto& q : quads) {
    if (q[0] == 0 && q[1] == 0)
      throw std::invalid_argument("PolySurface: constant term not allowed");
    if (q[0] < 0 || q[1] < 0) throw std::invalid_argument("PolySurface: negative exponent");
    Term t;
    t.e = static_cast<int>(q[0]);
    t.f = static_cast<int>(q[1]);
    t.c = Rational(q[2], q[3]);
    if (!t.c.is_zero()) p.terms.push_back(t);
  }
  return p;
}

std::optional<int> PolySurface::min_pure_s() const {
  std::optional<int> a;
  for (const auto& t : terms)
    if (t.f == 0 && !t.c.is_zero() && (!a || t.e < *a)) a = t.e;
  return a;
}

std::optional<int> PolySurface::min_pure_t() const {
  std::optional<int> b;
  for (const auto& t : terms)
    if (t.e == 0 && !t.c.is_zero() && (!b || t.f < *b)) b = t.f;
  return b;
}

bool PolySurface::has_nonpure() const {
  for (const auto& t : terms)
    if (t.e > 0 && t.f > 0 && !t.c.is_zero()) return true;
  return false;
}

double PolySurface::eval(double s, double t) const {
  double v = 0.0;
  for (const auto& term : terms)
    v += term.c.value() * std::pow(s, term.e) * std::pow(t, term.f);
  return v;
}

std::string PolySurface::str() const {
  std::string s;
  for (const auto& t : terms) {
    if (!s.empty()) s += " + ";
    s += t.c.str() + "*s^" + std::to_string(t.e) + "*t^" + std::to_string(t.f);
  }
  return s;
}

int NewtonVerdict::exit_code() const {
  switch (classification) {
    case Boundedness::kBounded: return 0;
    case Boundedness::kUnbounded: return 3;
    case Boundedness::kUnboundedExtended: return 4;
    case Boundedness::kUndecided: return 5;
  }
  return 5;
}

NewtonVerdict newton_verdict(const PolySurface& p, NewtonMode mode, bool allow_swap) {
  if (p.terms.empty()) throw std::invalid_argument("newton_verdict: zero polynomial");
  NewtonVerdict v;
  v.mode = mode;
  PolySurface q = p;
  v.a = q.min_pure_s();
  v.b = q.min_pure_t();

  if (mode == NewtonMode::kFlag && v.a && v.b && *v.b > *v.a) {
    if (!allow_swap)
      throw std::invalid_argument(
          "newton_verdict: flag mode needs min pure t-exponent <= min pure s-exponent; "
          "pass allow_swap to exchange the roles");
    v.swapped = true;
    for (auto& t : q.terms) std::swap(t.e, t.f);
    std::swap(v.a, v.b);
  }

  if (!v.a || !v.b) {
    if (q.has_nonpure()) {
      v.classification = Boundedness::kUnboundedExtended;
      for (const auto& t : q.terms)
        if (t.e > 0 && t.f > 0) v.witnesses.emplace_back(t.e, t.f);
    } else {
      // Pure powers in a single variable always sit on (the degenerate
      // limit of) the line.
      v.classification = Boundedness::kBounded;
    }
    return v;
  }

  const long long a = *v.a, b = *v.b;
  for (const auto& t : q.terms) {
    bool on_or_above;
    if (mode == NewtonMode::kProduct) {
      // e/a + f/b >= 1  <=>  e*b + f*a >= a*b, exactly in integers.
      on_or_above = static_cast<long long>(t.e) * b + static_cast<long long>(t.f) * a >= a * b;
    } else {
      on_or_above = t.e + t.f >= b;
    }
    if (!on_or_above) v.witnesses.emplace_back(t.e, t.f);
  }
  v.classification = v.witnesses.empty() ? Boundedness::kBounded : Boundedness::kUnbounded;
  return v;
}

std::optional<std::pair<int, int>> counterexample_witness(const PolySurface& p) {
  auto a = p.min_pure_s();
  auto b = p.min_pure_t();
  if (!a || !b) return std::nullopt;
  std::optional<std::pair<int, int>> best;
  Rational best_m(0);
  for (const auto& t : p.terms) {
    Rational m = Rational(t.e, *a) + Rational(t.f, *b);
    if (m >= Rational(1)) continue;
    if (!best || m < best_m || (m == best_m && t.e < best->first)) {
      best = {t.e, t.f};
      best_m = m;
    }
  }
  return best;
}

// ---------------------------------------------------------------------------
// Multiplier evaluation

namespace {

// Base profile: derivative of the (0,1) mollifier, so \int eta = 0 and
// \int u^k eta = -k \int u^{k-1} (mollifier) < 0 for every k >= 1.
double eta_profile(double u) {
  static const vfields::Expr d = [] {
    using E = vfields::Expr;
    E v = E::var(0);
    E one = E::constant(Rational(1));
    return E::exp_of(-(E::pow(one - v * v, -1))).derivative(0);
  }();
  const double w = 2.0 * u - 1.0;
  if (std::abs(w) >= 1.0 - 1e-13) return 0.0;
  return 2.0 * d.eval({w});
}

double eta_moment(int k) {
  return integrate([k](double u) { return std::pow(u, k) * eta_profile(u); }, 0.0, 1.0, 128);
}

double eta_abs_mass() {
  return integrate([](double u) { return std::abs(eta_profile(u)); }, 0.0, 1.0, 256);
}

struct PhaseTerm {
  int g = 0, h = 0;
  double theta = 0.0;
};

// \int_0^1 exp(i sum theta_g u^g) eta(u) du with panel-wise quadrature
// sized by the phase range.
std::complex<double> osc_integral_1d(const std::vector<std::pair<int, double>>& phase,
                                     int base_quad) {
  double range = 0.0;
  for (const auto& [g, th] : phase) range += std::abs(th);
  int panels = std::clamp(static_cast<int>(range / 4.0) + 1, 1, 200000);
  const auto& rule = gauss_legendre(panels == 1 ? base_quad : 16);
  std::complex<double> acc(0.0, 0.0);
  const double hp = 1.0 / panels;
  for (int p = 0; p < panels; ++p) {
    const double mid = (p + 0.5) * hp, half = 0.5 * hp;
    for (std::size_t q = 0; q < rule.nodes.size(); ++q) {
      const double u = mid + half * rule.nodes[q];
      double phi = 0.0;
      for (const auto& [g, th] : phase) phi += th * std::pow(u, g);
      acc += rule.weights[q] * half * eta_profile(u) *
             std::complex<double>(std::cos(phi), std::sin(phi));
    }
  }
  return acc;
}

}  // namespace

std::complex<double> MultiplierExperiment::term(int j) const {
  const auto [e, f] = witness;
  const double log2tau = std::log2(tau);
  const double ef_ratio = static_cast<double>(e) / static_cast<double>(f);

  std::vector<PhaseTerm> phase;
  for (const auto& t : p.terms) {
    const double tau_exp = m0 - static_cast<double>(t.e) / a - static_cast<double>(t.f) / b;
    const double two_exp = -static_cast<double>(j) * (t.e - t.f * ef_ratio);
    const double log2_theta =
        tau_exp * log2tau + two_exp - (t.e + t.f) * std::log2(rescale);
    if (log2_theta < -340.0) continue;
    PhaseTerm pt;
    pt.g = t.e;
    pt.h = t.f;
    pt.theta = t.c.value() * std::exp2(log2_theta);
    if (pt.theta != 0.0) phase.push_back(pt);
  }

  const bool separable = std::all_of(phase.begin(), phase.end(),
                                     [](const PhaseTerm& t) { return t.g == 0 || t.h == 0; });
  if (separable) {
    std::vector<std::pair<int, double>> pu, pv;
    for (const auto& t : phase)
      if (t.h == 0) pu.emplace_back(t.g, t.theta);
      else pv.emplace_back(t.h, t.theta);
    return osc_integral_1d(pu, 48) * osc_integral_1d(pv, 48);
  }

  // Cross-term phase: tensor quadrature on the subtracted integrand
  // (exp(i phi) - 1), which keeps the tiny-phase regime well conditioned
  // because \int eta = 0 kills the constant.
  double range = 0.0;
  for (const auto& t : phase) range += std::abs(t.theta);
  const int panels = std::clamp(static_cast<int>(range / 6.0) + 1, 1, 256);
  const int nq = panels == 1 ? 48 : 16;
  const auto& rule = gauss_legendre(nq);
  const double hp = 1.0 / panels;

  std::complex<double> acc(0.0, 0.0);
  for (int pu = 0; pu < panels; ++pu)
    for (int pv = 0; pv < panels; ++pv) {
      for (std::size_t qu = 0; qu < rule.nodes.size(); ++qu) {
        const double u = (pu + 0.5) * hp + 0.5 * hp * rule.nodes[qu];
        const double wu = 0.5 * hp * rule.weights[qu] * eta_profile(u);
        if (wu == 0.0) continue;
        for (std::size_t qv = 0; qv < rule.nodes.size(); ++qv) {
          const double v = (pv + 0.5) * hp + 0.5 * hp * rule.nodes[qv];
          const double w = wu * 0.5 * hp * rule.weights[qv] * eta_profile(v);
          if (w == 0.0) continue;
          double phi = 0.0;
          for (const auto& t : phase) phi += t.theta * std::pow(u, t.g) * std::pow(v, t.h);
          const double s = std::sin(0.5 * phi);
          acc += w * std::complex<double>(-2.0 * s * s, std::sin(phi));
        }
      }
    }
  return acc;
}

std::complex<double> MultiplierExperiment::partial(int M) const {
  std::complex<double> acc(0.0, 0.0);
  for (int j = 0; j <= M; ++j) acc += term(j);
  return acc;
}

MultiplierExperiment make_multiplier_experiment(const PolySurface& p, double tau, int Mmax,
                                                const MultiplierOptions& opts) {
  MultiplierExperiment ex;
  ex.p = p;
  ex.tau = tau;
  auto a = p.min_pure_s();
  auto b = p.min_pure_t();
  if (!a || !b)
    throw std::invalid_argument("make_multiplier_experiment: needs finite minimal pure exponents");
  ex.a = *a;
  ex.b = *b;

  std::optional<std::pair<int, int>> w =
      opts.witness_override ? opts.witness_override : counterexample_witness(p);
  if (!w)
    throw std::invalid_argument(
        "make_multiplier_experiment: polynomial has no below-line exponent; pass a witness "
        "override for control runs");
  ex.witness = *w;
  const auto [e, f] = ex.witness;
  if (f == 0) throw std::invalid_argument("make_multiplier_experiment: witness must have f > 0");
  ex.m0 = static_cast<double>(e) / ex.a + static_cast<double>(f) / ex.b;
  ex.profile_mass_abs = eta_abs_mass();

  // Witness coefficient; zero only in forced control runs.
  double c_w = 0.0;
  for (const auto& t : p.terms)
    if (t.e == e && t.f == f) c_w = t.c.value();

  const double log2tau = std::log2(tau);
  const double ef_ratio = static_cast<double>(e) / static_cast<double>(f);
  auto theta_abs = [&](const PolySurface::Term& t, int j, double r) {
    const double tau_exp = ex.m0 - static_cast<double>(t.e) / ex.a - static_cast<double>(t.f) / ex.b;
    const double two_exp = -static_cast<double>(j) * (t.e - t.f * ef_ratio);
    return std::abs(t.c.value()) *
           std::exp2(tau_exp * log2tau + two_exp - (t.e + t.f) * std::log2(r));
  };

  // Contract the profile until every off-line phase term is a
  // perturbation of the on-line one (or, with a zero on-line
  // coefficient, until all phases fit the quadrature budget).
  double r = 1.0;
  for (;; r *= 2.0) {
    double off = 0.0, on = std::abs(c_w) * std::exp2(-(e + f) * std::log2(r));
    double max_phase = 0.0;
    for (int j = 0; j <= Mmax; ++j) {
      double s = 0.0;
      for (const auto& t : p.terms) {
        double th = theta_abs(t, j, r);
        max_phase = std::max(max_phase, th);
        if (!(t.e == e && t.f == f)) s += th;
      }
      off = std::max(off, s);
    }
    if (c_w != 0.0) {
      ex.contamination = off / on;
      if (ex.contamination <= opts.contamination_target) break;
    } else {
      ex.contamination = 0.0;
      if (max_phase <= 2.0e5) break;
    }
    if (r >= opts.max_rescale) {
      ex.rescale_capped = true;
      break;
    }
  }
  ex.rescale = r;

  // Nonvanishing of the witness pairing for the contracted profile: the
  // small-phase asymptote i * theta_w * m_e * m_f must dominate.
  if (c_w != 0.0) {
    const double theta_w = c_w * std::exp2(-(e + f) * std::log2(r));
    const double expected = std::abs(theta_w * eta_moment(e) * eta_moment(f));
    // term(0) with only the witness phase present.
    MultiplierExperiment probe = ex;
    probe.p.terms.clear();
    for (const auto& t : p.terms)
      if (t.e == e && t.f == f) probe.p.terms.push_back(t);
    const std::complex<double> val = probe.term(0);
    if (!(std::abs(val) >= 0.3 * expected) || expected == 0.0)
      throw std::runtime_error(
          "make_multiplier_experiment: witness pairing failed the nonvanishing check after "
          "rescaling");
  }
  return ex;
}

std::complex<double> counterexample_multiplier(const PolySurface& p, double tau, int M,
                                               const MultiplierOptions& opts) {
  return make_multiplier_experiment(p, tau, M, opts).partial(M);
}

}  // namespace mpradon::decide
