#pragma once

#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "mpradon/rational.hpp"
#include "mpradon/rng.hpp"

namespace mpradon::vfields {

/// Immutable expression tree over variables x1..xn.
///
/// Node set: constants, variables, sums, products, integer powers,
/// exp(), and flat() where flat(u) = e^{-1/u^2} extended by 0 at u = 0
/// together with all of its derivatives (flat-point convention).
/// Differentiation is closed in this node set: d flat(u) = 2 u^-3 flat(u) du.
///
/// Textual grammar (parse_expr):
///   expr   := term (('+'|'-') term)*
///   term   := factor ('*' factor)*
///   factor := ('-')* atom ('^' int)?
///   atom   := number | ident | '(' expr ')' | 'exp(' expr ')' | 'flat(' expr ')'
///   number := int | int '/' int | decimal
///   ident  := 'x' digits           (1-based variable index)
class Expr {
public:
  enum class Kind { kConst, kVar, kAdd, kMul, kPow, kExp, kFlat };

  Expr() : Expr(constant(Rational(0))) {}

  static Expr constant(const Rational& c);
  static Expr constant(std::int64_t c) { return constant(Rational(c)); }
  static Expr var(int index);  // 0-based
  static Expr add(const std::vector<Expr>& terms);
  static Expr mul(const std::vector<Expr>& factors);
  static Expr pow(const Expr& base, int exponent);
  static Expr exp_of(const Expr& arg);
  static Expr flat_of(const Expr& arg);

  friend Expr operator+(const Expr& a, const Expr& b) { return add({a, b}); }
  friend Expr operator-(const Expr& a, const Expr& b) {
    return add({a, mul({constant(Rational(-1)), b})});
  }
  friend Expr operator*(const Expr& a, const Expr& b) { return mul({a, b}); }
  Expr operator-() const { return mul({constant(Rational(-1)), *this}); }

  Kind kind() const;
  bool is_zero_const() const;

  /// Evaluates at a point. A product with a flat factor whose argument
  /// vanishes evaluates to 0 before any sibling is touched, which is
  /// what makes rational-function x flat combinations well defined at
  /// the flat point. A bare negative power at 0 throws.
  double eval(const std::vector<double>& x) const;

  /// Exact partial derivative d/dx_i.
  Expr derivative(int i) const;

  std::string str() const;

  struct Node;
  using NodePtr = std::shared_ptr<const Node>;
  explicit Expr(NodePtr n) : node_(std::move(n)) {}
  const NodePtr& node() const { return node_; }

private:
  NodePtr node_;
};

Expr parse_expr(const std::string& text);

/// Canonical form for the subring generated by variables, their
/// inverses, and flat factors: sum of rational multiples of monomials
/// x^a * flat(x)^b with a in Z^n, b in N^n. exp() and composite flat
/// arguments are outside it; normalize returns nullopt for those.
struct Monomial {
  std::vector<int> xpow;
  std::vector<int> flatpow;
  bool operator<(const Monomial& o) const {
    if (xpow != o.xpow) return xpow < o.xpow;
    return flatpow < o.flatpow;
  }
  bool operator==(const Monomial& o) const { return xpow == o.xpow && flatpow == o.flatpow; }
};

struct NormalForm {
  int dim = 0;
  std::map<Monomial, Rational> terms;

  bool is_zero() const { return terms.empty(); }
  NormalForm& operator+=(const NormalForm& o);
  NormalForm& operator*=(const Rational& c);
  friend NormalForm operator*(const NormalForm& a, const NormalForm& b);
  bool operator==(const NormalForm& o) const { return dim == o.dim && terms == o.terms; }
};

std::optional<NormalForm> normalize(const Expr& e, int dim);

/// Zero test: exact when the expression normalizes, otherwise sampled
/// at seeded random points. Returns {is_zero, exact}.
std::pair<bool, bool> expr_is_zero(const Expr& e, int dim, Rng& rng);

/// Proportionality test a = c*b for a scalar constant c. Exact when
/// both normalize, otherwise ratio-sampled at 5 points.
struct ProportionalityResult {
  bool proportional = false;
  bool exact = false;
  double ratio = 0.0;
};
ProportionalityResult exprs_proportional(const std::vector<Expr>& a, const std::vector<Expr>& b,
                                         int dim, Rng& rng);

}  // namespace mpradon::vfields
