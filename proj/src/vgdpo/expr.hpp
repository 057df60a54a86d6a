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

// Minimal exact-arithmetic expression engine: enough algebra to tell an
// arithmetic slip from a wrong formula.
//
// Canonical form is a sum of terms `c * f1^e1 * ... * fk^ek` with rational
// c != 0 and integer e != 0. A factor is a variable or an opaque sum, the
// latter only appearing with a negative exponent or an exponent above
// kMaxExpandExponent. Opaque sums are stored primitive (first coefficient 1).
// Terms are ordered constant first, then by factor list: variables by name
// before opaque sums, opaque sums by structure.

#pragma once

#include <cstddef>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "vgdpo/common.hpp"

namespace vgdpo {

enum class ExprKind { literal, variable, neg, add, sub, mul, div, pow, undefined };

struct Expr {
  ExprKind kind = ExprKind::literal;
  Rational value;          // literal
  std::string name;        // variable
  std::vector<Expr> args;  // neg: 1, binary: 2

  static Expr literal(Rational v);
  static Expr variable(std::string name);
  static Expr neg(Expr e);
  static Expr binary(ExprKind kind, Expr lhs, Expr rhs);
  static Expr undefined();

  bool is_literal() const { return kind == ExprKind::literal; }
  bool is_undefined() const { return kind == ExprKind::undefined; }

  friend bool operator==(const Expr&, const Expr&) = default;
};

class ParseError : public Error {
 public:
  ParseError(const std::string& message, std::size_t position)
      : Error(ErrorKind::parse, message + " at byte " + std::to_string(position)),
        position_(position) {}

  std::size_t position() const noexcept { return position_; }

 private:
  std::size_t position_;
};

inline constexpr int kMaxLiteralExponent = 8;
inline constexpr int kMaxExpandExponent = 4;

/// Precedence ^ > unary minus > * / > + -; `^` is right-associative and
/// takes an integer literal exponent in [-8, 8]. Implicit multiplication is
/// accepted before identifiers and parentheses ("2x", "2(x+1)"). A variable
/// is one letter with an optional numeric subscript (x, x2, x_2); a run of
/// letters is a word and fails to parse.
Expr parse_expr(std::string_view text);

/// Returns an Expr of kind `undefined` when a denominator is exactly zero.
Expr canonicalize(const Expr& e);

std::string to_string(const Expr& e);

std::set<std::string> variables(const Expr& e);

/// Exact evaluation; nullopt on division by zero. Throws Error for an
/// unbound variable.
std::optional<Rational> evaluate(const Expr& e,
                                 const std::map<std::string, Rational>& env);

struct Equivalence {
  bool equivalent = false;
  bool probabilistic = false;
  std::string diagnostic;
};

inline constexpr int kSubstitutionDraws = 20;

/// Canonical equality, then the relaxed numeric comparison for constants,
/// then kSubstitutionDraws seeded rational substitutions.
Equivalence check_equivalent(const Expr& a, const Expr& b);

inline bool equivalent(const Expr& a, const Expr& b) {
  return check_equivalent(a, b).equivalent;
}

enum class MismatchClass { equivalent, numeric_slip, symbolic_error, incomparable };

std::string_view to_string(MismatchClass c);

/// Same operators, same variables, same shape; literal values may differ.
bool shape_isomorphic(const Expr& a, const Expr& b);

MismatchClass classify_mismatch(const Expr& pred, const Expr& ref);

/// Parses both sides first; a parse failure on either side is incomparable.
MismatchClass classify_mismatch(std::string_view pred, std::string_view ref);

}  // namespace vgdpo
