#pragma once

#include <string>
#include <vector>

#include "fracorder/errors.hpp"
#include "fracorder/mesh.hpp"

namespace fracorder {

struct ExpressionError : ConfigError {
  using ConfigError::ConfigError;
};

// Arithmetic over x (= x1), x2, t with + - * / ^, parentheses, sin, cos, exp, sqrt,
// the constant pi and chi(s, lo, hi) = 1 if lo <= s < hi else 0.
// Parsed once into postfix code.
class Expression {
 public:
  Expression() = default;
  // Throws ParseError (column in the message) on malformed input.
  static Expression parse(const std::string& text);

  // Throws ExpressionError on division by zero, domain errors or a non-finite result.
  double operator()(const Point& x, double t) const;

  const std::string& text() const { return text_; }
  bool uses_t() const { return uses_t_; }
  bool uses_x2() const { return uses_x2_; }
  // True when the expression is the literal 0 (possibly written as "0.0" etc.).
  bool is_zero_literal() const;

  enum class Op : unsigned char { push, x1, x2, t, add, sub, mul, div, pow, neg, sin, cos, exp, sqrt, chi };
  struct Instr {
    Op op;
    double value = 0.0;
  };

 private:
  friend class ExprParser;
  std::string text_;
  std::vector<Instr> code_;
  int max_depth_ = 0;
  bool uses_t_ = false, uses_x2_ = false;
};

double eval_expression(const std::string& expr, const Point& x, double t);

}  // namespace fracorder
