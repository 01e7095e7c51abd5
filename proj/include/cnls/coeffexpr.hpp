#pragma once

// Time-dependent coefficient expressions.
//
// Grammar (one variable, t):
//
//   expr    := term   { ('+' | '-') term }
//   term    := unary  { ('*' | '/') unary }
//   unary   := '-' unary | power
//   power   := atom   { '^' ['-'] integer }
//   atom    := number | 't' | 'pi' | 'e' | func '(' expr ')' | '(' expr ')'
//   func    := exp | cos | sin | sqrt | abs
//
// '^' binds tighter than unary minus, so "-2^2" is -4.  Exponents are integer
// literals only.

#include <memory>
#include <string>
#include <string_view>

#include "cnls/quadrature.hpp"

namespace cnls {

class CoeffExpr {
 public:
  enum class Kind { Constant, Time, Add, Sub, Mul, Div, Neg, Pow, Call };
  enum class Func { Exp, Cos, Sin, Sqrt, Abs };

  struct Node {
    Kind kind = Kind::Constant;
    double value = 0.0;  // Constant
    int exponent = 0;    // Pow
    Func func = Func::Exp;
    std::shared_ptr<const Node> lhs;  // operand of Neg / Pow / Call, left of binaries
    std::shared_ptr<const Node> rhs;
  };

  // Zero constant.
  CoeffExpr();

  // Builders.  Constants must be finite and non-negative; negative values are
  // spelled as negation so that printing and parsing agree.
  static CoeffExpr constant(double value);
  static CoeffExpr time();
  static CoeffExpr binary(Kind op, const CoeffExpr& lhs, const CoeffExpr& rhs);
  static CoeffExpr negate(const CoeffExpr& operand);
  static CoeffExpr power(const CoeffExpr& base, int exponent);
  static CoeffExpr call(Func func, const CoeffExpr& arg);

  // Throws EvalError on division by zero, sqrt of a negative number or any
  // non-finite intermediate.
  double operator()(double t) const;

  const Node& root() const { return *root_; }

  friend bool operator==(const CoeffExpr& lhs, const CoeffExpr& rhs);

 private:
  explicit CoeffExpr(std::shared_ptr<const Node> root) : root_(std::move(root)) {}

  std::shared_ptr<const Node> root_;
};

// Throws ParseError (with byte offset) on malformed input or unknown names.
CoeffExpr parse(std::string_view src);

double eval(const CoeffExpr& e, double t);

// Canonical text with the minimum parentheses; parse(print(e)) == e.
std::string print(const CoeffExpr& e);

double definite_integral(const CoeffExpr& e, double t0, double t1, double tol = kDefaultQuadratureTol);

// Callable view of an expression.
TimeFunction as_function(const CoeffExpr& e);

// The six coefficients of the coupled system, as callables.
struct CoefficientFunctions {
  TimeFunction a, b, c, d, g, h;
};

struct CoefficientSources {
  std::string a = "0";
  std::string b = "0";
  std::string c = "0";
  std::string d = "0";
  std::string g = "0";
  std::string h = "0";
};

struct CoefficientSet {
  CoeffExpr a, b, c, d, g, h;

  // Parses all six; throws ParseError naming the offending coefficient.
  static CoefficientSet parse(const CoefficientSources& src);

  // Throws EvalError if any coefficient fails at t.
  void validate_at(double t = 0.0) const;

  CoefficientFunctions functions() const;
  CoefficientSources sources() const;
};

}  // namespace cnls
