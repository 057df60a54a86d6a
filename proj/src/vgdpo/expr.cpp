// Copyright 2026 The vgdpo Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "vgdpo/expr.hpp"

#include <algorithm>
#include <cctype>
#include <memory>
#include <random>
#include <utility>

#include "vgdpo/solution_parser.hpp"

namespace vgdpo {

Expr Expr::literal(Rational v) {
  Expr e;
  e.kind = ExprKind::literal;
  e.value = std::move(v);
  return e;
}

Expr Expr::variable(std::string name) {
  Expr e;
  e.kind = ExprKind::variable;
  e.name = std::move(name);
  return e;
}

Expr Expr::neg(Expr inner) {
  Expr e;
  e.kind = ExprKind::neg;
  e.args.push_back(std::move(inner));
  return e;
}

Expr Expr::binary(ExprKind kind, Expr lhs, Expr rhs) {
  Expr e;
  e.kind = kind;
  e.args.push_back(std::move(lhs));
  e.args.push_back(std::move(rhs));
  return e;
}

Expr Expr::undefined() {
  Expr e;
  e.kind = ExprKind::undefined;
  return e;
}

// ---------------------------------------------------------------------------
// Parsing

namespace {

enum class Tok { number, ident, plus, minus, star, slash, caret, lparen, rparen, end };

struct Token {
  Tok kind;
  std::string_view text;
  std::size_t pos;
};

bool letter(char c) { return std::isalpha(static_cast<unsigned char>(c)) != 0; }
bool digit(char c) { return c >= '0' && c <= '9'; }

std::vector<Token> lex(std::string_view s) {
  std::vector<Token> out;
  std::size_t i = 0;
  auto single = [&](Tok kind, std::size_t len) {
    out.push_back({kind, s.substr(i, len), i});
    i += len;
  };
  while (i < s.size()) {
    char c = s[i];
    if (std::isspace(static_cast<unsigned char>(c))) {
      ++i;
      continue;
    }
    if (digit(c) || (c == '.' && i + 1 < s.size() && digit(s[i + 1]))) {
      std::size_t start = i;
      while (i < s.size() && digit(s[i])) ++i;
      if (i < s.size() && s[i] == '.' && i + 1 < s.size() && digit(s[i + 1])) {
        ++i;
        while (i < s.size() && digit(s[i])) ++i;
      }
      out.push_back({Tok::number, s.substr(start, i - start), start});
      continue;
    }
    if (letter(c)) {
      // One letter plus an optional numeric subscript: x, x2, x_2. Letter
      // runs are words ("hello", "cm"), which is what makes prose
      // incomparable rather than a product of variables.
      std::size_t start = i++;
      if (i + 1 < s.size() && s[i] == '_' && digit(s[i + 1])) ++i;
      while (i < s.size() && digit(s[i])) ++i;
      if (i < s.size() && (letter(s[i]) || s[i] == '_')) {
        throw ParseError("word is not an expression", start);
      }
      out.push_back({Tok::ident, s.substr(start, i - start), start});
      continue;
    }
    switch (c) {
      case '+': single(Tok::plus, 1); continue;
      case '-': single(Tok::minus, 1); continue;
      case '*': single(Tok::star, 1); continue;
      case '/': single(Tok::slash, 1); continue;
      case '^': single(Tok::caret, 1); continue;
      case '(': single(Tok::lparen, 1); continue;
      case ')': single(Tok::rparen, 1); continue;
      default: break;
    }
    std::string_view rest = s.substr(i);
    if (rest.starts_with("\xC3\x97") || rest.starts_with("\xC2\xB7")) {  // × ·
      single(Tok::star, 2);
      continue;
    }
    if (rest.starts_with("\xC3\xB7")) {  // ÷
      single(Tok::slash, 2);
      continue;
    }
    if (rest.starts_with("\xE2\x88\x92")) {  // − (minus sign)
      single(Tok::minus, 3);
      continue;
    }
    throw ParseError("unexpected character", i);
  }
  out.push_back({Tok::end, {}, s.size()});
  return out;
}

class Parser {
 public:
  explicit Parser(std::string_view text) : tokens_(lex(text)) {}

  Expr parse() {
    Expr e = parse_sum();
    if (peek().kind != Tok::end) throw ParseError("unexpected token", peek().pos);
    return e;
  }

 private:
  const Token& peek() const { return tokens_[at_]; }
  const Token& next() { return tokens_[at_++]; }

  Expr parse_sum() {
    Expr lhs = parse_product();
    while (peek().kind == Tok::plus || peek().kind == Tok::minus) {
      ExprKind op = next().kind == Tok::plus ? ExprKind::add : ExprKind::sub;
      lhs = Expr::binary(op, std::move(lhs), parse_product());
    }
    return lhs;
  }

  Expr parse_product() {
    Expr lhs = parse_unary();
    for (;;) {
      Tok k = peek().kind;
      if (k == Tok::star || k == Tok::slash) {
        next();
        lhs = Expr::binary(k == Tok::star ? ExprKind::mul : ExprKind::div,
                           std::move(lhs), parse_unary());
      } else if (k == Tok::ident || k == Tok::lparen) {
        lhs = Expr::binary(ExprKind::mul, std::move(lhs), parse_power());
      } else if (k == Tok::number) {
        throw ParseError("number follows an operand without an operator", peek().pos);
      } else {
        return lhs;
      }
    }
  }

  Expr parse_unary() {
    if (peek().kind == Tok::minus) {
      next();
      return Expr::neg(parse_unary());
    }
    if (peek().kind == Tok::plus) {
      next();
      return parse_unary();
    }
    return parse_power();
  }

  Expr parse_power() {
    Expr base = parse_primary();
    if (peek().kind != Tok::caret) return base;
    std::size_t pos = next().pos;
    Expr exponent = parse_unary();
    bool negative = false;
    if (exponent.kind == ExprKind::neg) {
      negative = true;
      exponent = exponent.args[0];
    }
    if (!exponent.is_literal() || denominator(exponent.value) != 1 ||
        exponent.value > kMaxLiteralExponent) {
      throw ParseError("exponent must be an integer literal in [-8, 8]", pos);
    }
    Rational n = negative ? Rational(-exponent.value) : exponent.value;
    return Expr::binary(ExprKind::pow, std::move(base), Expr::literal(n));
  }

  Expr parse_primary() {
    const Token& t = peek();
    switch (t.kind) {
      case Tok::number: {
        next();
        auto v = parse_number(t.text);
        if (!v) throw ParseError("malformed number", t.pos);
        return Expr::literal(*v);
      }
      case Tok::ident:
        next();
        return Expr::variable(std::string(t.text));
      case Tok::lparen: {
        next();
        Expr inner = parse_sum();
        if (peek().kind != Tok::rparen) throw ParseError("expected ')'", peek().pos);
        next();
        return inner;
      }
      case Tok::end:
        throw ParseError("unexpected end of expression", t.pos);
      default:
        throw ParseError("expected an operand", t.pos);
    }
  }

  std::vector<Token> tokens_;
  std::size_t at_ = 0;
};

}  // namespace

Expr parse_expr(std::string_view text) { return Parser(text).parse(); }

// ---------------------------------------------------------------------------
// Canonical form

namespace {

struct Poly;

struct Atom {
  std::string var;                    // variable name when base is null
  std::shared_ptr<const Poly> base;   // opaque sum otherwise
};

using Factor = std::pair<Atom, Integer>;
using Monomial = std::vector<Factor>;

struct Term {
  Monomial mono;
  Rational coef;
};

struct Poly {
  std::vector<Term> terms;  // sorted by mono, no zero coefficients
};

struct Undefined {};

constexpr std::size_t kMaxTerms = 4096;

template <typename T>
int cmp3(const T& a, const T& b) {
  return a < b ? -1 : (b < a ? 1 : 0);
}

int cmp(const Poly& a, const Poly& b);

int cmp(const Atom& a, const Atom& b) {
  if (!a.base && !b.base) return a.var.compare(b.var) < 0 ? -1 : (a.var == b.var ? 0 : 1);
  if (!a.base) return -1;
  if (!b.base) return 1;
  return cmp(*a.base, *b.base);
}

int cmp(const Monomial& a, const Monomial& b) {
  std::size_t n = std::min(a.size(), b.size());
  for (std::size_t i = 0; i < n; ++i) {
    if (int c = cmp(a[i].first, b[i].first)) return c;
    if (int c = cmp3(a[i].second, b[i].second)) return c;
  }
  return cmp3(a.size(), b.size());
}

int cmp(const Poly& a, const Poly& b) {
  std::size_t n = std::min(a.terms.size(), b.terms.size());
  for (std::size_t i = 0; i < n; ++i) {
    if (int c = cmp(a.terms[i].mono, b.terms[i].mono)) return c;
    if (int c = cmp3(a.terms[i].coef, b.terms[i].coef)) return c;
  }
  return cmp3(a.terms.size(), b.terms.size());
}

struct MonoLess {
  bool operator()(const Monomial& a, const Monomial& b) const { return cmp(a, b) < 0; }
};

using TermMap = std::map<Monomial, Rational, MonoLess>;

Poly from_map(TermMap&& m) {
  Poly p;
  for (auto& [mono, coef] : m) {
    if (coef != 0) p.terms.push_back({mono, coef});
  }
  if (p.terms.size() > kMaxTerms) throw Error(ErrorKind::internal, "expression too large to canonicalize");
  return p;
}

Poly constant(const Rational& v) {
  Poly p;
  if (v != 0) p.terms.push_back({{}, v});
  return p;
}

Poly single(Monomial mono, Rational coef) {
  Poly p;
  if (coef != 0) p.terms.push_back({std::move(mono), std::move(coef)});
  return p;
}

Monomial mul_mono(const Monomial& a, const Monomial& b) {
  Monomial out;
  std::size_t i = 0, j = 0;
  while (i < a.size() || j < b.size()) {
    int c = i == a.size() ? 1 : (j == b.size() ? -1 : cmp(a[i].first, b[j].first));
    if (c < 0) {
      out.push_back(a[i++]);
    } else if (c > 0) {
      out.push_back(b[j++]);
    } else {
      Integer e = a[i].second + b[j].second;
      if (e != 0) out.push_back({a[i].first, e});
      ++i;
      ++j;
    }
  }
  return out;
}

Poly add(const Poly& a, const Poly& b) {
  TermMap m;
  for (const auto& t : a.terms) m[t.mono] += t.coef;
  for (const auto& t : b.terms) m[t.mono] += t.coef;
  return from_map(std::move(m));
}

Poly scale(const Poly& a, const Rational& k) {
  if (k == 0) return {};
  Poly out = a;
  for (auto& t : out.terms) t.coef *= k;
  return out;
}

Rational rational_pow(const Rational& base, Integer n) {
  if (n < 0) {
    if (base == 0) throw Undefined{};
    return rational_pow(Rational(1) / base, -n);
  }
  Rational result = 1;
  Rational b = base;
  while (n > 0) {
    if ((n & 1) != 0) result *= b;
    b *= b;
    n >>= 1;
  }
  return result;
}

Poly finalize(Poly p);
Poly mul(const Poly& a, const Poly& b);

// Writes a multi-term poly as lead * base with base primitive.
std::pair<Rational, Poly> primitive(const Poly& p) {
  Rational lead = p.terms.front().coef;
  return {lead, scale(p, Rational(1) / lead)};
}

Poly pow_int(const Poly& p, const Integer& n) {
  if (n == 0) return constant(1);
  if (p.terms.empty()) {
    if (n < 0) throw Undefined{};
    return {};
  }
  if (p.terms.size() == 1) {
    const Term& t = p.terms.front();
    Monomial mono = t.mono;
    for (auto& f : mono) f.second *= n;
    return single(std::move(mono), rational_pow(t.coef, n));
  }
  if (n > 0 && n <= kMaxExpandExponent) {
    Poly out = p;
    for (Integer k = 1; k < n; ++k) out = mul(out, p);
    return out;
  }
  auto [lead, base] = primitive(p);
  Atom atom{{}, std::make_shared<const Poly>(std::move(base))};
  return single(Monomial{{std::move(atom), n}}, rational_pow(lead, n));
}

// A multi-term operand equal to lead * B, multiplied by a single term that
// carries B with a negative exponent, is rewritten as lead * B^1 so the
// factors cancel.
Poly as_atom_if_cancels(const Poly& multi, const Poly& other) {
  if (multi.terms.size() < 2 || other.terms.size() != 1) return multi;
  for (const auto& [atom, exp] : other.terms.front().mono) {
    if (!atom.base || exp >= 0) continue;
    auto [lead, base] = primitive(multi);
    if (cmp(base, *atom.base) == 0) {
      return single(Monomial{{atom, Integer(1)}}, lead);
    }
  }
  return multi;
}

Poly mul(const Poly& a_in, const Poly& b_in) {
  Poly a = as_atom_if_cancels(a_in, b_in);
  Poly b = as_atom_if_cancels(b_in, a);
  if (a.terms.size() * b.terms.size() > kMaxTerms) {
    throw Error(ErrorKind::internal, "expression too large to canonicalize");
  }
  TermMap m;
  for (const auto& x : a.terms) {
    for (const auto& y : b.terms) {
      m[mul_mono(x.mono, y.mono)] += x.coef * y.coef;
    }
  }
  return finalize(from_map(std::move(m)));
}

// Opaque sums with a small positive exponent are multiplied out.
Poly finalize(Poly p) {
  bool needs = false;
  for (const auto& t : p.terms) {
    for (const auto& [atom, exp] : t.mono) {
      if (atom.base && exp > 0 && exp <= kMaxExpandExponent) needs = true;
    }
  }
  if (!needs) return p;

  Poly out;
  for (const auto& t : p.terms) {
    Monomial rest;
    Poly expanded = constant(t.coef);
    for (const auto& [atom, exp] : t.mono) {
      if (atom.base && exp > 0 && exp <= kMaxExpandExponent) {
        expanded = mul(expanded, pow_int(*atom.base, exp));
      } else {
        rest.push_back({atom, exp});
      }
    }
    out = add(out, mul(expanded, single(std::move(rest), 1)));
  }
  return out;
}

Poly to_poly(const Expr& e) {
  switch (e.kind) {
    case ExprKind::literal:
      return constant(e.value);
    case ExprKind::variable:
      return single(Monomial{{Atom{e.name, nullptr}, Integer(1)}}, 1);
    case ExprKind::neg:
      return scale(to_poly(e.args[0]), -1);
    case ExprKind::add:
      return add(to_poly(e.args[0]), to_poly(e.args[1]));
    case ExprKind::sub:
      return add(to_poly(e.args[0]), scale(to_poly(e.args[1]), -1));
    case ExprKind::mul:
      return mul(to_poly(e.args[0]), to_poly(e.args[1]));
    case ExprKind::div:
      return mul(to_poly(e.args[0]), pow_int(to_poly(e.args[1]), -1));
    case ExprKind::pow: {
      Poly exponent = to_poly(e.args[1]);
      Rational n = exponent.terms.empty() ? Rational(0) : exponent.terms.front().coef;
      if (exponent.terms.size() > 1 ||
          (!exponent.terms.empty() && !exponent.terms.front().mono.empty()) ||
          denominator(n) != 1 || abs(n) > 64) {
        throw Error(ErrorKind::parse, "exponent must be a small integer constant");
      }
      return pow_int(to_poly(e.args[0]), numerator(n));
    }
    case ExprKind::undefined:
      throw Undefined{};
  }
  throw Error(ErrorKind::internal, "unknown expression kind");
}

Expr from_poly(const Poly& p);

Expr factor_expr(const Atom& atom, const Integer& exp) {
  Expr base = atom.base ? from_poly(*atom.base) : Expr::variable(atom.var);
  if (exp == 1) return base;
  return Expr::binary(ExprKind::pow, std::move(base), Expr::literal(Rational(exp)));
}

Expr from_poly(const Poly& p) {
  if (p.terms.empty()) return Expr::literal(0);
  std::optional<Expr> sum;
  for (const auto& t : p.terms) {
    std::optional<Expr> product;
    if (t.mono.empty() || t.coef != 1) product = Expr::literal(t.coef);
    for (const auto& [atom, exp] : t.mono) {
      Expr f = factor_expr(atom, exp);
      product = product ? Expr::binary(ExprKind::mul, std::move(*product), std::move(f))
                        : std::move(f);
    }
    sum = sum ? Expr::binary(ExprKind::add, std::move(*sum), std::move(*product))
              : std::move(*product);
  }
  return *sum;
}

}  // namespace

Expr canonicalize(const Expr& e) {
  try {
    return from_poly(to_poly(e));
  } catch (const Undefined&) {
    return Expr::undefined();
  }
}

// ---------------------------------------------------------------------------
// Printing, evaluation, comparison

namespace {

int precedence(ExprKind k) {
  switch (k) {
    case ExprKind::add:
    case ExprKind::sub: return 1;
    case ExprKind::mul:
    case ExprKind::div: return 2;
    case ExprKind::neg: return 3;
    case ExprKind::pow: return 4;
    default: return 5;
  }
}

void print(const Expr& e, std::string& out) {
  auto child = [&out](const Expr& c, int min_prec) {
    bool paren = precedence(c.kind) < min_prec ||
                 (c.is_literal() && c.value < 0 && min_prec > 1);
    if (paren) out += '(';
    print(c, out);
    if (paren) out += ')';
  };
  switch (e.kind) {
    case ExprKind::literal:
      if (denominator(e.value) == 1) {
        out += numerator(e.value).str();
      } else {
        out += '(' + numerator(e.value).str() + '/' + denominator(e.value).str() + ')';
      }
      return;
    case ExprKind::variable:
      out += e.name;
      return;
    case ExprKind::undefined:
      out += "undefined";
      return;
    case ExprKind::neg:
      out += '-';
      child(e.args[0], 3);
      return;
    case ExprKind::pow:
      child(e.args[0], 5);
      out += '^';
      child(e.args[1], 5);
      return;
    default: {
      int p = precedence(e.kind);
      const char* op = e.kind == ExprKind::add   ? "+"
                       : e.kind == ExprKind::sub ? "-"
                       : e.kind == ExprKind::mul ? "*"
                                                 : "/";
      child(e.args[0], p);
      out += op;
      child(e.args[1], p + 1);
      return;
    }
  }
}

void collect_vars(const Expr& e, std::set<std::string>& out) {
  if (e.kind == ExprKind::variable) out.insert(e.name);
  for (const auto& a : e.args) collect_vars(a, out);
}

}  // namespace

std::string to_string(const Expr& e) {
  std::string out;
  print(e, out);
  return out;
}

std::set<std::string> variables(const Expr& e) {
  std::set<std::string> out;
  collect_vars(e, out);
  return out;
}

std::optional<Rational> evaluate(const Expr& e,
                                 const std::map<std::string, Rational>& env) {
  switch (e.kind) {
    case ExprKind::literal:
      return e.value;
    case ExprKind::variable: {
      auto it = env.find(e.name);
      if (it == env.end()) {
        throw Error(ErrorKind::invalid_argument, "unbound variable '" + e.name + "'");
      }
      return it->second;
    }
    case ExprKind::undefined:
      return std::nullopt;
    case ExprKind::neg: {
      auto v = evaluate(e.args[0], env);
      if (!v) return std::nullopt;
      return Rational(-*v);
    }
    default:
      break;
  }
  auto a = evaluate(e.args[0], env);
  auto b = evaluate(e.args[1], env);
  if (!a || !b) return std::nullopt;
  switch (e.kind) {
    case ExprKind::add: return Rational(*a + *b);
    case ExprKind::sub: return Rational(*a - *b);
    case ExprKind::mul: return Rational(*a * *b);
    case ExprKind::div:
      if (*b == 0) return std::nullopt;
      return Rational(*a / *b);
    case ExprKind::pow:
      if (denominator(*b) != 1) {
        throw Error(ErrorKind::invalid_argument, "non-integer exponent");
      }
      try {
        return rational_pow(*a, numerator(*b));
      } catch (const Undefined&) {
        return std::nullopt;
      }
    default:
      throw Error(ErrorKind::internal, "unknown expression kind");
  }
}

Equivalence check_equivalent(const Expr& a, const Expr& b) {
  Equivalence out;
  Expr ca, cb;
  try {
    ca = canonicalize(a);
    cb = canonicalize(b);
  } catch (const Error& e) {
    // Too large or malformed to canonicalize; rely on substitution below.
    ca = a;
    cb = b;
    out.diagnostic = e.what();
  }
  if (ca.is_undefined() || cb.is_undefined()) {
    out.diagnostic = "undefined operand";
    return out;
  }
  if (ca == cb) {
    out.equivalent = true;
    return out;
  }
  if (ca.is_literal() && cb.is_literal()) {
    out.equivalent = relaxed_equal(ca.value, cb.value);
    return out;
  }

  std::set<std::string> vars = variables(a);
  for (const auto& v : variables(b)) vars.insert(v);
  if (vars.empty()) return out;

  // Numerators and denominators drawn from fixed small sets; draws where
  // either side is undefined are skipped.
  static constexpr int kNumerators[] = {-7, -5, -3, -2, -1, 1, 2, 3, 4, 5, 6, 7, 9, 11, 13};
  static constexpr int kDenominators[] = {1, 1, 2, 3, 5, 7};
  std::mt19937_64 rng(0x5eedf00dULL);
  std::uniform_int_distribution<std::size_t> pick_num(0, std::size(kNumerators) - 1);
  std::uniform_int_distribution<std::size_t> pick_den(0, std::size(kDenominators) - 1);
  const Rational tolerance(1, 1000000000);

  int agreed = 0;
  for (int attempt = 0; attempt < 10 * kSubstitutionDraws && agreed < kSubstitutionDraws;
       ++attempt) {
    std::map<std::string, Rational> env;
    for (const auto& v : vars) {
      env[v] = Rational(kNumerators[pick_num(rng)], kDenominators[pick_den(rng)]);
    }
    auto x = evaluate(a, env);
    auto y = evaluate(b, env);
    if (!x || !y) continue;
    Rational scale = std::max({Rational(1), Rational(abs(*x)), Rational(abs(*y))});
    if (abs(*x - *y) > tolerance * scale) {
      out.diagnostic.clear();
      return out;
    }
    ++agreed;
  }
  if (agreed < kSubstitutionDraws) {
    out.diagnostic = "too few defined substitutions";
    return out;
  }
  out.equivalent = true;
  out.probabilistic = true;
  out.diagnostic = "probabilistic";
  return out;
}

std::string_view to_string(MismatchClass c) {
  switch (c) {
    case MismatchClass::equivalent: return "equivalent";
    case MismatchClass::numeric_slip: return "numeric_slip";
    case MismatchClass::symbolic_error: return "symbolic_error";
    case MismatchClass::incomparable: return "incomparable";
  }
  return "incomparable";
}

bool shape_isomorphic(const Expr& a, const Expr& b) {
  if (a.kind != b.kind) return false;
  if (a.kind == ExprKind::variable) return a.name == b.name;
  if (a.args.size() != b.args.size()) return false;
  for (std::size_t i = 0; i < a.args.size(); ++i) {
    if (!shape_isomorphic(a.args[i], b.args[i])) return false;
  }
  return true;
}

MismatchClass classify_mismatch(const Expr& pred, const Expr& ref) {
  if (pred == ref || equivalent(pred, ref)) return MismatchClass::equivalent;
  if (shape_isomorphic(pred, ref)) return MismatchClass::numeric_slip;
  return MismatchClass::symbolic_error;
}

MismatchClass classify_mismatch(std::string_view pred, std::string_view ref) {
  Expr p, r;
  try {
    p = parse_expr(pred);
    r = parse_expr(ref);
  } catch (const ParseError&) {
    return MismatchClass::incomparable;
  }
  return classify_mismatch(p, r);
}

}  // namespace vgdpo
