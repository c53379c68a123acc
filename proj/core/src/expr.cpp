#include "mpradon/expr.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <stdexcept>

namespace mpradon::vfields {

struct Expr::Node {
  Kind kind;
  Rational value;               // kConst
  int var = -1;                 // kVar
  int exponent = 1;             // kPow
  std::vector<Expr> children;   // kAdd, kMul, kPow(1), kExp(1), kFlat(1)
};

namespace {

Expr make_node(Expr::Kind k, Rational v, int var, int exponent, std::vector<Expr> ch) {
  auto n = std::make_shared<Expr::Node>();
  n->kind = k;
  n->value = v;
  n->var = var;
  n->exponent = exponent;
  n->children = std::move(ch);
  return Expr(n);
}

}  // namespace

Expr Expr::constant(const Rational& c) {
  return make_node(Kind::kConst, c, -1, 1, {});
}

Expr Expr::var(int index) {
  if (index < 0) throw std::invalid_argument("Expr::var: negative index");
  return make_node(Kind::kVar, Rational(0), index, 1, {});
}

Expr::Kind Expr::kind() const { return node_->kind; }

bool Expr::is_zero_const() const {
  return node_->kind == Kind::kConst && node_->value.is_zero();
}

Expr Expr::add(const std::vector<Expr>& terms) {
  std::vector<Expr> flat;
  Rational c(0);
  for (const auto& t : terms) {
    if (t.node_->kind == Kind::kAdd) {
      for (const auto& s : t.node_->children) {
        if (s.node_->kind == Kind::kConst) c += s.node_->value;
        else flat.push_back(s);
      }
    } else if (t.node_->kind == Kind::kConst) {
      c += t.node_->value;
    } else {
      flat.push_back(t);
    }
  }
  if (!c.is_zero()) flat.push_back(constant(c));
  if (flat.empty()) return constant(Rational(0));
  if (flat.size() == 1) return flat[0];
  return make_node(Kind::kAdd, Rational(0), -1, 1, std::move(flat));
}

Expr Expr::mul(const std::vector<Expr>& factors) {
  std::vector<Expr> flat;
  Rational c(1);
  for (const auto& f : factors) {
    if (f.node_->kind == Kind::kMul) {
      for (const auto& s : f.node_->children) {
        if (s.node_->kind == Kind::kConst) c *= s.node_->value;
        else flat.push_back(s);
      }
    } else if (f.node_->kind == Kind::kConst) {
      c *= f.node_->value;
    } else {
      flat.push_back(f);
    }
  }
  if (c.is_zero()) return constant(Rational(0));
  if (!(c == Rational(1))) flat.insert(flat.begin(), constant(c));
  if (flat.empty()) return constant(Rational(1));
  if (flat.size() == 1) return flat[0];
  return make_node(Kind::kMul, Rational(0), -1, 1, std::move(flat));
}

Expr Expr::pow(const Expr& base, int exponent) {
  if (exponent == 0) return constant(Rational(1));
  if (exponent == 1) return base;
  if (base.node_->kind == Kind::kConst && exponent > 0) {
    Rational r(1);
    for (int i = 0; i < exponent; ++i) r *= base.node_->value;
    return constant(r);
  }
  return make_node(Kind::kPow, Rational(0), -1, exponent, {base});
}

Expr Expr::exp_of(const Expr& arg) {
  if (arg.is_zero_const()) return constant(Rational(1));
  return make_node(Kind::kExp, Rational(0), -1, 1, {arg});
}

Expr Expr::flat_of(const Expr& arg) {
  return make_node(Kind::kFlat, Rational(0), -1, 1, {arg});
}

double Expr::eval(const std::vector<double>& x) const {
  const Node& n = *node_;
  switch (n.kind) {
    case Kind::kConst:
      return n.value.value();
    case Kind::kVar:
      if (n.var >= static_cast<int>(x.size()))
        throw std::invalid_argument("Expr::eval: variable index out of range");
      return x[n.var];
    case Kind::kAdd: {
      double s = 0.0;
      for (const auto& c : n.children) s += c.eval(x);
      return s;
    }
    case Kind::kMul: {
      // Flat dominance: a vanishing flat factor kills the whole product,
      // including inverse-power siblings.
      for (const auto& c : n.children)
        if (c.node_->kind == Kind::kFlat && c.node_->children[0].eval(x) == 0.0) return 0.0;
      double p = 1.0;
      for (const auto& c : n.children) p *= c.eval(x);
      return p;
    }
    case Kind::kPow: {
      double b = n.children[0].eval(x);
      if (b == 0.0 && n.exponent < 0)
        throw std::domain_error("Expr::eval: negative power of zero outside a flat guard");
      return std::pow(b, n.exponent);
    }
    case Kind::kExp:
      return std::exp(n.children[0].eval(x));
    case Kind::kFlat: {
      double u = n.children[0].eval(x);
      if (u == 0.0) return 0.0;
      return std::exp(-1.0 / (u * u));
    }
  }
  return 0.0;
}

Expr Expr::derivative(int i) const {
  const Node& n = *node_;
  switch (n.kind) {
    case Kind::kConst:
      return constant(Rational(0));
    case Kind::kVar:
      return constant(Rational(n.var == i ? 1 : 0));
    case Kind::kAdd: {
      std::vector<Expr> d;
      d.reserve(n.children.size());
      for (const auto& c : n.children) d.push_back(c.derivative(i));
      return add(d);
    }
    case Kind::kMul: {
      std::vector<Expr> terms;
      for (std::size_t k = 0; k < n.children.size(); ++k) {
        std::vector<Expr> f = n.children;
        f[k] = n.children[k].derivative(i);
        terms.push_back(mul(f));
      }
      return add(terms);
    }
    case Kind::kPow: {
      const Expr& b = n.children[0];
      return mul({constant(Rational(n.exponent)), pow(b, n.exponent - 1), b.derivative(i)});
    }
    case Kind::kExp:
      return mul({*this, n.children[0].derivative(i)});
    case Kind::kFlat: {
      const Expr& u = n.children[0];
      return mul({constant(Rational(2)), pow(u, -3), *this, u.derivative(i)});
    }
  }
  return constant(Rational(0));
}

std::string Expr::str() const {
  const Node& n = *node_;
  switch (n.kind) {
    case Kind::kConst:
      return n.value.str();
    case Kind::kVar:
      return "x" + std::to_string(n.var + 1);
    case Kind::kAdd: {
      std::string s = "(";
      for (std::size_t i = 0; i < n.children.size(); ++i) {
        if (i) s += " + ";
        s += n.children[i].str();
      }
      return s + ")";
    }
    case Kind::kMul: {
      std::string s;
      for (std::size_t i = 0; i < n.children.size(); ++i) {
        if (i) s += "*";
        s += n.children[i].str();
      }
      return s;
    }
    case Kind::kPow:
      return n.children[0].str() + "^" + std::to_string(n.exponent);
    case Kind::kExp:
      return "exp(" + n.children[0].str() + ")";
    case Kind::kFlat:
      return "flat(" + n.children[0].str() + ")";
  }
  return "";
}

// ---------------------------------------------------------------------------
// Parser

namespace {

struct Parser {
  const std::string& s;
  std::size_t pos = 0;

  void skip() {
    while (pos < s.size() && std::isspace(static_cast<unsigned char>(s[pos]))) ++pos;
  }

  bool eat(char c) {
    skip();
    if (pos < s.size() && s[pos] == c) { ++pos; return true; }
    return false;
  }

  [[noreturn]] void fail(const std::string& what) {
    throw std::invalid_argument("parse_expr: " + what + " at offset " + std::to_string(pos) +
                                " in '" + s + "'");
  }

  Expr parse_full() {
    Expr e = parse_sum();
    skip();
    if (pos != s.size()) fail("trailing input");
    return e;
  }

  Expr parse_sum() {
    Expr e = parse_term();
    for (;;) {
      skip();
      if (eat('+')) e = e + parse_term();
      else if (eat('-')) e = e - parse_term();
      else return e;
    }
  }

  Expr parse_term() {
    Expr e = parse_factor();
    for (;;) {
      skip();
      if (eat('*')) e = e * parse_factor();
      else return e;
    }
  }

  Expr parse_factor() {
    skip();
    bool neg = false;
    while (eat('-')) neg = !neg;
    Expr e = parse_atom();
    skip();
    if (eat('^')) {
      skip();
      bool eneg = eat('-');
      std::size_t start = pos;
      while (pos < s.size() && std::isdigit(static_cast<unsigned char>(s[pos]))) ++pos;
      if (start == pos) fail("expected integer exponent");
      int k = std::stoi(s.substr(start, pos - start));
      e = Expr::pow(e, eneg ? -k : k);
    }
    return neg ? -e : e;
  }

  Expr parse_atom() {
    skip();
    if (pos >= s.size()) fail("unexpected end of input");
    if (eat('(')) {
      Expr e = parse_sum();
      if (!eat(')')) fail("expected ')'");
      return e;
    }
    if (s.compare(pos, 4, "exp(") == 0) {
      pos += 4;
      Expr a = parse_sum();
      if (!eat(')')) fail("expected ')'");
      return Expr::exp_of(a);
    }
    if (s.compare(pos, 5, "flat(") == 0) {
      pos += 5;
      Expr a = parse_sum();
      if (!eat(')')) fail("expected ')'");
      return Expr::flat_of(a);
    }
    if (s[pos] == 'x') {
      ++pos;
      std::size_t start = pos;
      while (pos < s.size() && std::isdigit(static_cast<unsigned char>(s[pos]))) ++pos;
      if (start == pos) fail("expected variable index after 'x'");
      int idx = std::stoi(s.substr(start, pos - start));
      if (idx < 1) fail("variable indices are 1-based");
      return Expr::var(idx - 1);
    }
    if (std::isdigit(static_cast<unsigned char>(s[pos]))) {
      std::size_t start = pos;
      while (pos < s.size() && std::isdigit(static_cast<unsigned char>(s[pos]))) ++pos;
      if (pos < s.size() && s[pos] == '.') {
        ++pos;
        std::size_t fstart = pos;
        while (pos < s.size() && std::isdigit(static_cast<unsigned char>(s[pos]))) ++pos;
        std::int64_t ip = std::stoll(s.substr(start, fstart - 1 - start));
        std::string frac = s.substr(fstart, pos - fstart);
        std::int64_t den = 1;
        for (std::size_t i = 0; i < frac.size(); ++i) den *= 10;
        std::int64_t fp = frac.empty() ? 0 : std::stoll(frac);
        return Expr::constant(Rational(ip * den + fp, den));
      }
      std::int64_t n = std::stoll(s.substr(start, pos - start));
      skip();
      if (pos < s.size() && s[pos] == '/') {
        std::size_t save = pos;
        ++pos;
        skip();
        std::size_t dstart = pos;
        while (pos < s.size() && std::isdigit(static_cast<unsigned char>(s[pos]))) ++pos;
        if (dstart == pos) { pos = save; return Expr::constant(Rational(n)); }
        std::int64_t d = std::stoll(s.substr(dstart, pos - dstart));
        return Expr::constant(Rational(n, d));
      }
      return Expr::constant(Rational(n));
    }
    fail("unexpected character");
  }
};

}  // namespace

Expr parse_expr(const std::string& text) {
  Parser p{text};
  return p.parse_full();
}

// ---------------------------------------------------------------------------
// Normal forms

NormalForm& NormalForm::operator+=(const NormalForm& o) {
  for (const auto& [m, c] : o.terms) {
    auto it = terms.find(m);
    if (it == terms.end()) {
      terms.emplace(m, c);
    } else {
      it->second += c;
      if (it->second.is_zero()) terms.erase(it);
    }
  }
  return *this;
}

NormalForm& NormalForm::operator*=(const Rational& c) {
  if (c.is_zero()) { terms.clear(); return *this; }
  for (auto& [m, v] : terms) v *= c;
  return *this;
}

NormalForm operator*(const NormalForm& a, const NormalForm& b) {
  NormalForm r;
  r.dim = std::max(a.dim, b.dim);
  for (const auto& [ma, ca] : a.terms)
    for (const auto& [mb, cb] : b.terms) {
      Monomial m;
      m.xpow.resize(r.dim, 0);
      m.flatpow.resize(r.dim, 0);
      for (int i = 0; i < r.dim; ++i) {
        m.xpow[i] = (i < (int)ma.xpow.size() ? ma.xpow[i] : 0) +
                    (i < (int)mb.xpow.size() ? mb.xpow[i] : 0);
        m.flatpow[i] = (i < (int)ma.flatpow.size() ? ma.flatpow[i] : 0) +
                       (i < (int)mb.flatpow.size() ? mb.flatpow[i] : 0);
      }
      Rational c = ca * cb;
      auto it = r.terms.find(m);
      if (it == r.terms.end()) r.terms.emplace(m, c);
      else {
        it->second += c;
        if (it->second.is_zero()) r.terms.erase(it);
      }
    }
  return r;
}

std::optional<NormalForm> normalize(const Expr& e, int dim) {
  using Kind = Expr::Kind;
  const auto& n = *e.node();
  NormalForm r;
  r.dim = dim;
  switch (n.kind) {
    case Kind::kConst: {
      if (!n.value.is_zero()) {
        Monomial m;
        m.xpow.assign(dim, 0);
        m.flatpow.assign(dim, 0);
        r.terms.emplace(m, n.value);
      }
      return r;
    }
    case Kind::kVar: {
      if (n.var >= dim) return std::nullopt;
      Monomial m;
      m.xpow.assign(dim, 0);
      m.flatpow.assign(dim, 0);
      m.xpow[n.var] = 1;
      r.terms.emplace(m, Rational(1));
      return r;
    }
    case Kind::kAdd: {
      for (const auto& c : n.children) {
        auto nf = normalize(c, dim);
        if (!nf) return std::nullopt;
        r += *nf;
      }
      return r;
    }
    case Kind::kMul: {
      Monomial unit;
      unit.xpow.assign(dim, 0);
      unit.flatpow.assign(dim, 0);
      r.terms.emplace(unit, Rational(1));
      for (const auto& c : n.children) {
        auto nf = normalize(c, dim);
        if (!nf) return std::nullopt;
        r = r * *nf;
      }
      return r;
    }
    case Kind::kPow: {
      auto base = normalize(n.children[0], dim);
      if (!base) return std::nullopt;
      if (n.exponent >= 0) {
        Monomial unit;
        unit.xpow.assign(dim, 0);
        unit.flatpow.assign(dim, 0);
        r.terms.emplace(unit, Rational(1));
        for (int k = 0; k < n.exponent; ++k) r = r * *base;
        return r;
      }
      // Negative powers only of a single flat-free monomial.
      if (base->terms.size() != 1) return std::nullopt;
      const auto& [m, c] = *base->terms.begin();
      for (int f : m.flatpow)
        if (f != 0) return std::nullopt;
      if (c.is_zero()) return std::nullopt;
      Monomial inv;
      inv.xpow.resize(dim);
      inv.flatpow.assign(dim, 0);
      for (int i = 0; i < dim; ++i) inv.xpow[i] = m.xpow[i] * n.exponent;
      Rational coeff(1);
      for (int k = 0; k < -n.exponent; ++k) coeff /= c;
      r.terms.emplace(inv, coeff);
      return r;
    }
    case Kind::kExp:
      return std::nullopt;
    case Kind::kFlat: {
      auto arg = normalize(n.children[0], dim);
      if (!arg || arg->terms.size() != 1) return std::nullopt;
      const auto& [m, c] = *arg->terms.begin();
      if (!(c == Rational(1))) return std::nullopt;
      int which = -1;
      for (int i = 0; i < dim; ++i) {
        if (m.flatpow[i] != 0) return std::nullopt;
        if (m.xpow[i] == 1 && which < 0) which = i;
        else if (m.xpow[i] != 0) return std::nullopt;
      }
      if (which < 0) return std::nullopt;
      Monomial f;
      f.xpow.assign(dim, 0);
      f.flatpow.assign(dim, 0);
      f.flatpow[which] = 1;
      r.terms.emplace(f, Rational(1));
      return r;
    }
  }
  return std::nullopt;
}

std::pair<bool, bool> expr_is_zero(const Expr& e, int dim, Rng& rng) {
  if (auto nf = normalize(e, dim)) return {nf->is_zero(), true};
  for (int s = 0; s < 7; ++s) {
    std::vector<double> x(dim);
    for (auto& v : x) v = rng.uniform(0.15, 0.9) * (rng.next_double() < 0.5 ? -1.0 : 1.0);
    if (std::abs(e.eval(x)) > 1e-9) return {false, false};
  }
  return {true, false};
}

ProportionalityResult exprs_proportional(const std::vector<Expr>& a, const std::vector<Expr>& b,
                                         int dim, Rng& rng) {
  ProportionalityResult res;
  // Exact path: both sides normalize and a = c*b term by term.
  std::vector<NormalForm> na, nb;
  bool exact_ok = a.size() == b.size();
  for (std::size_t i = 0; exact_ok && i < a.size(); ++i) {
    auto fa = normalize(a[i], dim), fb = normalize(b[i], dim);
    if (!fa || !fb) { exact_ok = false; break; }
    na.push_back(*fa);
    nb.push_back(*fb);
  }
  if (exact_ok) {
    std::optional<Rational> ratio;
    for (std::size_t i = 0; i < na.size(); ++i) {
      if (na[i].is_zero() != nb[i].is_zero()) return res;
      if (na[i].is_zero()) continue;
      if (na[i].terms.size() != nb[i].terms.size()) return res;
      auto ita = na[i].terms.begin();
      auto itb = nb[i].terms.begin();
      for (; ita != na[i].terms.end(); ++ita, ++itb) {
        if (!(ita->first == itb->first)) return res;
        Rational r = ita->second / itb->second;
        if (!ratio) ratio = r;
        else if (!(*ratio == r)) return res;
      }
    }
    res.proportional = true;
    res.exact = true;
    res.ratio = ratio ? ratio->value() : 0.0;
    return res;
  }
  // Sampled ratio test at 5 points.
  std::optional<double> ratio;
  for (int s = 0; s < 5; ++s) {
    std::vector<double> x(dim);
    for (auto& v : x) v = rng.uniform(0.2, 0.8) * (rng.next_double() < 0.5 ? -1.0 : 1.0);
    for (std::size_t i = 0; i < a.size(); ++i) {
      double va = a[i].eval(x), vb = b[i].eval(x);
      if (std::abs(vb) < 1e-12) {
        if (std::abs(va) > 1e-9) return res;
        continue;
      }
      double r = va / vb;
      if (!ratio) ratio = r;
      else if (std::abs(*ratio - r) > 1e-7 * (1.0 + std::abs(*ratio))) return res;
    }
  }
  if (!ratio) return res;  // both identically ~0; caller handles via zero test
  res.proportional = true;
  res.exact = false;
  res.ratio = *ratio;
  return res;
}

}  // namespace mpradon::vfields
