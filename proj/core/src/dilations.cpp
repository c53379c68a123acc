#include "mpradon/dilations.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <stdexcept>

#include <json.hpp>

namespace mpradon::dilations {

DilationScheme DilationScheme::make(int nu, std::vector<std::vector<Rational>> exps) {
  if (nu < 1) throw std::invalid_argument("DilationScheme: nu must be >= 1");
  if (exps.empty()) throw std::invalid_argument("DilationScheme: need at least one exponent");
  for (const auto& e : exps) {
    if (static_cast<int>(e.size()) != nu)
      throw std::invalid_argument("DilationScheme: exponent arity mismatch");
    bool nonzero = false;
    for (const auto& c : e) {
      if (c.is_negative()) throw std::invalid_argument("DilationScheme: negative exponent");
      if (!c.is_zero()) nonzero = true;
    }
    if (!nonzero) throw std::invalid_argument("DilationScheme: zero exponent vector");
  }
  DilationScheme s;
  s.nu = nu;
  s.N = static_cast<int>(exps.size());
  s.exponents = std::move(exps);
  return s;
}

DilationScheme DilationScheme::product_standard(int n) {
  std::vector<std::vector<Rational>> exps(n, std::vector<Rational>(n, Rational(0)));
  for (int i = 0; i < n; ++i) exps[i][i] = Rational(1);
  return make(n, std::move(exps));
}

DilationScheme DilationScheme::zygmund3() {
  return make(2, {{Rational(1), Rational(0)}, {Rational(0), Rational(1)}, {Rational(1), Rational(1)}});
}

std::vector<Rational> DilationScheme::homogeneous_dims() const {
  std::vector<Rational> q(nu, Rational(0));
  for (const auto& e : exponents)
    for (int mu = 0; mu < nu; ++mu) q[mu] += e[mu];
  return q;
}

std::vector<double> scale_point(const DilationScheme& scheme, const std::vector<double>& delta,
                                const std::vector<double>& t) {
  if (static_cast<int>(delta.size()) != scheme.nu)
    throw std::invalid_argument("scale_point: delta arity mismatch");
  if (static_cast<int>(t.size()) != scheme.N)
    throw std::invalid_argument("scale_point: t arity mismatch");
  std::vector<double> out(scheme.N);
  for (int i = 0; i < scheme.N; ++i) {
    double p = 1.0;
    for (int mu = 0; mu < scheme.nu; ++mu) {
      const Rational& e = scheme.exponents[i][mu];
      if (!e.is_zero()) p *= std::pow(delta[mu], e.value());
    }
    out[i] = p * t[i];
  }
  return out;
}

std::vector<double> dyadic_delta(int nu, const LatticePoint& j) {
  std::vector<double> d(nu);
  for (int mu = 0; mu < nu; ++mu) d[mu] = std::ldexp(1.0, -j[mu]);
  return d;
}

bool DegreeVector::is_zero() const {
  for (const auto& c : components)
    if (!c.is_zero()) return false;
  return true;
}

PurityClass DegreeVector::purity() const {
  int nonzero = 0;
  for (const auto& c : components)
    if (!c.is_zero()) ++nonzero;
  if (nonzero == 0) return PurityClass::kZero;
  return nonzero == 1 ? PurityClass::kPure : PurityClass::kNonPure;
}

DegreeVector operator+(const DegreeVector& a, const DegreeVector& b) {
  if (a.components.size() != b.components.size())
    throw std::invalid_argument("DegreeVector: arity mismatch");
  DegreeVector r = a;
  for (std::size_t i = 0; i < r.components.size(); ++i) r.components[i] += b.components[i];
  return r;
}

bool operator==(const DegreeVector& a, const DegreeVector& b) {
  return a.components == b.components;
}

double DegreeVector::pow_delta(const std::vector<double>& delta) const {
  double p = 1.0;
  for (std::size_t mu = 0; mu < components.size(); ++mu)
    if (!components[mu].is_zero()) p *= std::pow(delta[mu], components[mu].value());
  return p;
}

std::string DegreeVector::str() const {
  std::string s = "(";
  for (std::size_t i = 0; i < components.size(); ++i) {
    if (i) s += ",";
    s += components[i].str();
  }
  return s + ")";
}

DegreeVector degree(const DilationScheme& scheme, const std::vector<int>& alpha) {
  if (static_cast<int>(alpha.size()) != scheme.N)
    throw std::invalid_argument("degree: alpha arity mismatch");
  DegreeVector d;
  d.components.assign(scheme.nu, Rational(0));
  for (int i = 0; i < scheme.N; ++i) {
    if (alpha[i] == 0) continue;
    for (int mu = 0; mu < scheme.nu; ++mu)
      d.components[mu] += Rational(alpha[i]) * scheme.exponents[i][mu];
  }
  return d;
}

ParamLattice ParamLattice::product(int nu) {
  ParamLattice l;
  l.kind_ = LatticeKind::kProduct;
  l.nu_ = nu;
  return l;
}

ParamLattice ParamLattice::flag(int nu) {
  ParamLattice l;
  l.kind_ = LatticeKind::kFlag;
  l.nu_ = nu;
  return l;
}

ParamLattice ParamLattice::custom(int nu, std::vector<std::vector<long long>> inequalities,
                                  int validation_bound) {
  ParamLattice l;
  l.kind_ = LatticeKind::kCustom;
  l.nu_ = nu;
  for (const auto& row : inequalities)
    if (static_cast<int>(row.size()) != nu + 1)
      throw std::invalid_argument("ParamLattice: inequality row must have nu+1 entries");
  l.ineqs_ = std::move(inequalities);
  if (!l.contains(LatticePoint(nu, 0)))
    throw std::invalid_argument("ParamLattice: custom lattice must contain the origin");
  // Min-closure check on the validation box.
  auto pts = l.enumerate(validation_bound);
  std::set<LatticePoint> inside(pts.begin(), pts.end());
  for (const auto& a : pts)
    for (const auto& b : pts) {
      LatticePoint m(nu);
      for (int i = 0; i < nu; ++i) m[i] = std::min(a[i], b[i]);
      if (!inside.count(m))
        throw std::invalid_argument("ParamLattice: custom lattice not closed under min");
    }
  return l;
}

bool ParamLattice::contains(const LatticePoint& j) const {
  if (static_cast<int>(j.size()) != nu_) return false;
  for (int v : j)
    if (v < 0) return false;
  switch (kind_) {
    case LatticeKind::kProduct:
      return true;
    case LatticeKind::kFlag:
      for (int i = 0; i + 1 < nu_; ++i)
        if (j[i] > j[i + 1]) return false;
      return true;
    case LatticeKind::kCustom:
      for (const auto& row : ineqs_) {
        long long s = 0;
        for (int i = 0; i < nu_; ++i) s += row[i] * j[i];
        if (s > row[nu_]) return false;
      }
      return true;
  }
  return false;
}

std::vector<LatticePoint> ParamLattice::enumerate(int bound) const {
  std::vector<LatticePoint> out;
  LatticePoint j(nu_, 0);
  for (;;) {
    if (contains(j)) out.push_back(j);
    int k = nu_ - 1;
    while (k >= 0 && j[k] == bound) j[k--] = 0;
    if (k < 0) break;
    ++j[k];
  }
  std::sort(out.begin(), out.end());
  return out;
}

std::string ParamLattice::to_json() const {
  nlohmann::json j;
  j["kind"] = kind_ == LatticeKind::kProduct ? "product"
              : kind_ == LatticeKind::kFlag  ? "flag"
                                             : "custom";
  j["nu"] = nu_;
  if (kind_ == LatticeKind::kCustom) j["inequalities"] = ineqs_;
  return j.dump();
}

ParamLattice ParamLattice::from_json(const std::string& text) {
  auto j = nlohmann::json::parse(text);
  const std::string kind = j.at("kind").get<std::string>();
  const int nu = j.at("nu").get<int>();
  if (kind == "product") return product(nu);
  if (kind == "flag") return flag(nu);
  if (kind == "custom")
    return custom(nu, j.at("inequalities").get<std::vector<std::vector<long long>>>());
  throw std::invalid_argument("ParamLattice: unknown kind '" + kind + "'");
}

std::vector<int> coords_of_parameter(const DilationScheme& scheme, int mu) {
  std::vector<int> out;
  for (int i = 0; i < scheme.N; ++i)
    if (!scheme.exponents[i][mu].is_zero()) out.push_back(i);
  return out;
}

namespace {

// mu is minimal at j iff no lattice point k has k_mu < j_mu.
bool is_minimal_closed_form(const ParamLattice& lat, const LatticePoint& j, int mu) {
  // For product and flag the origin is in the lattice, so the only way
  // mu can be minimal is j_mu = 0. Same for any custom lattice
  // containing the origin.
  (void)lat;
  return j[mu] == 0;
}

// Closed-form comparability mu1 <= mu2 for the presets. The quantifier
// runs over all admissible k with k_{mu1} < j_{mu1}; a single escaping
// ray of k_{mu2} refutes it.
bool preceq_closed_form(LatticeKind kind, const LatticePoint& j, double C, int mu1, int mu2) {
  if (mu1 == mu2) return true;
  if (j[mu1] == 0) return true;  // vacuous
  if (kind == LatticeKind::kProduct) {
    // k_{mu2} is unconstrained, so the bound always fails for mu2 != mu1.
    return false;
  }
  // Flag: j_1 <= ... <= j_nu. For mu2 > mu1 the coordinate k_{mu2} can
  // grow without bound while k_{mu1} stays below j_{mu1}. For mu2 < mu1
  // the worst witness is k_{mu2} = k_{mu1} = j_{mu2}; the bound holds
  // iff j_{mu2} = j_{mu1}.
  if (mu2 > mu1) return false;
  (void)C;
  return j[mu2] == j[mu1];
}

bool preceq_brute(const ParamLattice& lat, const LatticePoint& j, double C, int mu1, int mu2,
                  int search_bound) {
  for (const auto& k : lat.enumerate(search_bound)) {
    if (k[mu1] >= j[mu1]) continue;
    if (j[mu1] - k[mu1] > C * (j[mu2] - k[mu2]) + 1e-12) return false;
  }
  return true;
}

}  // namespace

CancellationStructure cancellation_structure(const DilationScheme& scheme,
                                             const ParamLattice& lattice, const LatticePoint& j,
                                             double C, int search_bound) {
  if (C < 1.0) throw std::invalid_argument("cancellation_structure: C must be >= 1");
  if (!lattice.contains(j))
    throw std::invalid_argument("cancellation_structure: j not in the lattice shadow");
  const int nu = scheme.nu;
  int jmax = 0;
  for (int v : j) jmax = std::max(jmax, v);
  if (search_bound < jmax)
    throw std::invalid_argument("cancellation_structure: search_bound below |j|_inf");

  CancellationStructure cs;
  cs.j = j;
  cs.C = C;
  const bool preset = lattice.kind() != LatticeKind::kCustom;
  cs.exact = preset;
  // Brute force sees every refuting witness with k <= j_mu + C*(range of
  // j), so the certification horizon below is conservative for bounded
  // witnesses; unbounded escapes are only decidable in closed form.
  cs.certified = preset || search_bound >= 2 * jmax + static_cast<int>(C) * (jmax + 1);

  auto preceq = [&](int m1, int m2) {
    if (preset) return preceq_closed_form(lattice.kind(), j, C, m1, m2);
    return preceq_brute(lattice, j, C, m1, m2, search_bound);
  };

  std::vector<bool> minimal(nu);
  for (int mu = 0; mu < nu; ++mu) {
    minimal[mu] = preset ? is_minimal_closed_form(lattice, j, mu) : [&] {
      for (const auto& k : lattice.enumerate(search_bound))
        if (k[mu] < j[mu]) return false;
      return true;
    }();
    if (minimal[mu]) cs.minimal_set.push_back(mu);
  }

  std::vector<std::vector<bool>> pre(nu, std::vector<bool>(nu));
  for (int a = 0; a < nu; ++a)
    for (int b = 0; b < nu; ++b) pre[a][b] = preceq(a, b);

  cs.classes.resize(nu);
  for (int mu = 0; mu < nu; ++mu)
    for (int m2 = 0; m2 < nu; ++m2)
      if (pre[mu][m2] && pre[m2][mu]) cs.classes[mu].push_back(m2);

  for (int mu = 0; mu < nu; ++mu) {
    if (minimal[mu]) continue;
    bool strictly_below_something = false;
    for (int m2 = 0; m2 < nu; ++m2)
      if (pre[mu][m2] && !pre[m2][mu]) strictly_below_something = true;
    if (strictly_below_something) continue;
    // Required subset: all t-coordinates charged to any parameter in [mu].
    std::set<int> coords;
    for (int m2 : cs.classes[mu])
      for (int c : coords_of_parameter(scheme, m2)) coords.insert(c);
    cs.required_subsets.emplace_back(coords.begin(), coords.end());
    cs.required_mu.push_back(mu);
  }
  return cs;
}

}  // namespace mpradon::dilations
