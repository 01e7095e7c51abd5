#include "cnls/coeffexpr.hpp"

#include <array>
#include <cctype>
#include <charconv>
#include <cmath>
#include <numbers>
#include <optional>
#include <utility>

#include "cnls/errors.hpp"

namespace cnls {

using Node = CoeffExpr::Node;
using Kind = CoeffExpr::Kind;
using Func = CoeffExpr::Func;

namespace {

constexpr std::array<std::pair<std::string_view, Func>, 5> kFunctions{{
    {"exp", Func::Exp},
    {"cos", Func::Cos},
    {"sin", Func::Sin},
    {"sqrt", Func::Sqrt},
    {"abs", Func::Abs},
}};

std::string_view function_name(Func f) {
  for (const auto& [name, func] : kFunctions) {
    if (func == f) {
      return name;
    }
  }
  return "?";
}

std::optional<Func> lookup_function(std::string_view name) {
  for (const auto& [n, func] : kFunctions) {
    if (n == name) {
      return func;
    }
  }
  return std::nullopt;
}

double checked(double v, double t, const char* what) {
  if (!std::isfinite(v)) {
    throw EvalError(std::string(what) + " produced a non-finite value at t = " + std::to_string(t));
  }
  return v;
}

double evaluate(const Node& n, double t) {
  switch (n.kind) {
    case Kind::Constant:
      return n.value;
    case Kind::Time:
      return t;
    case Kind::Add:
      return checked(evaluate(*n.lhs, t) + evaluate(*n.rhs, t), t, "addition");
    case Kind::Sub:
      return checked(evaluate(*n.lhs, t) - evaluate(*n.rhs, t), t, "subtraction");
    case Kind::Mul:
      return checked(evaluate(*n.lhs, t) * evaluate(*n.rhs, t), t, "multiplication");
    case Kind::Div: {
      const double num = evaluate(*n.lhs, t);
      const double den = evaluate(*n.rhs, t);
      if (den == 0.0) {
        throw EvalError("division by zero at t = " + std::to_string(t));
      }
      return checked(num / den, t, "division");
    }
    case Kind::Neg:
      return -evaluate(*n.lhs, t);
    case Kind::Pow: {
      const double base = evaluate(*n.lhs, t);
      if (base == 0.0 && n.exponent < 0) {
        throw EvalError("zero raised to a negative power at t = " + std::to_string(t));
      }
      return checked(std::pow(base, n.exponent), t, "power");
    }
    case Kind::Call: {
      const double x = evaluate(*n.lhs, t);
      switch (n.func) {
        case Func::Exp:
          return checked(std::exp(x), t, "exp");
        case Func::Cos:
          return std::cos(x);
        case Func::Sin:
          return std::sin(x);
        case Func::Sqrt:
          if (x < 0.0) {
            throw EvalError("sqrt of negative value at t = " + std::to_string(t));
          }
          return std::sqrt(x);
        case Func::Abs:
          return std::abs(x);
      }
    }
  }
  throw EvalError("corrupt expression node");
}

bool equal_nodes(const Node& a, const Node& b) {
  if (a.kind != b.kind) {
    return false;
  }
  switch (a.kind) {
    case Kind::Constant:
      return a.value == b.value;
    case Kind::Time:
      return true;
    case Kind::Neg:
      return equal_nodes(*a.lhs, *b.lhs);
    case Kind::Pow:
      return a.exponent == b.exponent && equal_nodes(*a.lhs, *b.lhs);
    case Kind::Call:
      return a.func == b.func && equal_nodes(*a.lhs, *b.lhs);
    default:
      return equal_nodes(*a.lhs, *b.lhs) && equal_nodes(*a.rhs, *b.rhs);
  }
}

// Precedence levels shared by parser and printer.
constexpr int kAdditive = 1;
constexpr int kMultiplicative = 2;
constexpr int kUnary = 3;
constexpr int kPower = 4;
constexpr int kAtom = 5;

int precedence(const Node& n) {
  switch (n.kind) {
    case Kind::Add:
    case Kind::Sub:
      return kAdditive;
    case Kind::Mul:
    case Kind::Div:
      return kMultiplicative;
    case Kind::Neg:
      return kUnary;
    case Kind::Pow:
      return kPower;
    default:
      return kAtom;
  }
}

std::string format_number(double v) {
  std::array<char, 64> buf{};
  const auto res = std::to_chars(buf.data(), buf.data() + buf.size(), v);
  return std::string(buf.data(), res.ptr);
}

void print_node(const Node& n, int min_prec, std::string& out) {
  const int prec = precedence(n);
  const bool wrap = prec < min_prec;
  if (wrap) {
    out += '(';
  }
  switch (n.kind) {
    case Kind::Constant:
      out += format_number(n.value);
      break;
    case Kind::Time:
      out += 't';
      break;
    case Kind::Add:
    case Kind::Sub:
    case Kind::Mul:
    case Kind::Div: {
      print_node(*n.lhs, prec, out);
      const char* op = n.kind == Kind::Add ? " + " : n.kind == Kind::Sub ? " - " : n.kind == Kind::Mul ? " * " : " / ";
      out += op;
      print_node(*n.rhs, prec + 1, out);
      break;
    }
    case Kind::Neg:
      out += '-';
      print_node(*n.lhs, kUnary, out);
      break;
    case Kind::Pow:
      print_node(*n.lhs, kAtom, out);
      out += '^';
      out += std::to_string(n.exponent);
      break;
    case Kind::Call:
      out += function_name(n.func);
      out += '(';
      print_node(*n.lhs, 0, out);
      out += ')';
      break;
  }
  if (wrap) {
    out += ')';
  }
}

// Pratt parser over the raw text; tokens are scanned on demand.
class Parser {
 public:
  explicit Parser(std::string_view src) : src_(src) {}

  CoeffExpr parse_all() {
    if (src_.find_first_not_of(" \t\r\n") == std::string_view::npos) {
      throw ParseError(0, "empty expression");
    }
    CoeffExpr e = expression(0);
    skip_space();
    if (pos_ < src_.size()) {
      throw ParseError(pos_, std::string("unexpected '") + src_[pos_] + "', expected operator or end of input");
    }
    return e;
  }

 private:
  void skip_space() {
    while (pos_ < src_.size() && std::isspace(static_cast<unsigned char>(src_[pos_]))) {
      ++pos_;
    }
  }

  char peek() {
    skip_space();
    return pos_ < src_.size() ? src_[pos_] : '\0';
  }

  void expect(char c) {
    if (peek() != c) {
      throw ParseError(pos_, std::string("expected '") + c + "'" + found());
    }
    ++pos_;
  }

  std::string found() const {
    if (pos_ >= src_.size()) {
      return ", found end of input";
    }
    return std::string(", found '") + src_[pos_] + "'";
  }

  CoeffExpr expression(int min_prec) {
    CoeffExpr lhs = prefix();
    for (;;) {
      const char c = peek();
      int prec = 0;
      Kind kind{};
      switch (c) {
        case '+':
          prec = kAdditive, kind = Kind::Add;
          break;
        case '-':
          prec = kAdditive, kind = Kind::Sub;
          break;
        case '*':
          prec = kMultiplicative, kind = Kind::Mul;
          break;
        case '/':
          prec = kMultiplicative, kind = Kind::Div;
          break;
        case '^':
          prec = kPower;
          break;
        default:
          return lhs;
      }
      if (prec < min_prec) {
        return lhs;
      }
      ++pos_;
      if (c == '^') {
        lhs = CoeffExpr::power(lhs, integer_exponent());
      } else {
        lhs = CoeffExpr::binary(kind, lhs, expression(prec + 1));
      }
    }
  }

  CoeffExpr prefix() {
    const char c = peek();
    if (c == '-') {
      ++pos_;
      return CoeffExpr::negate(expression(kUnary));
    }
    if (c == '(') {
      ++pos_;
      CoeffExpr inner = expression(0);
      expect(')');
      return inner;
    }
    if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') {
      return CoeffExpr::constant(number());
    }
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
      return identifier();
    }
    throw ParseError(pos_, "expected number, 't', function call or '('" + found());
  }

  double number() {
    const std::size_t start = pos_;
    auto digits = [&] {
      while (pos_ < src_.size() && std::isdigit(static_cast<unsigned char>(src_[pos_]))) {
        ++pos_;
      }
    };
    digits();
    if (pos_ < src_.size() && src_[pos_] == '.') {
      ++pos_;
      digits();
    }
    if (pos_ < src_.size() && (src_[pos_] == 'e' || src_[pos_] == 'E')) {
      std::size_t look = pos_ + 1;
      if (look < src_.size() && (src_[look] == '+' || src_[look] == '-')) {
        ++look;
      }
      if (look < src_.size() && std::isdigit(static_cast<unsigned char>(src_[look]))) {
        pos_ = look;
        digits();
      }
    }
    double v = 0.0;
    const auto res = std::from_chars(src_.data() + start, src_.data() + pos_, v);
    if (res.ec != std::errc() || res.ptr != src_.data() + pos_ || !std::isfinite(v)) {
      throw ParseError(start, "malformed number '" + std::string(src_.substr(start, pos_ - start)) + "'");
    }
    return v;
  }

  int integer_exponent() {
    skip_space();
    const std::size_t start = pos_;
    bool negative = false;
    if (pos_ < src_.size() && src_[pos_] == '-') {
      negative = true;
      ++pos_;
    }
    const std::size_t digits_start = pos_;
    while (pos_ < src_.size() && std::isdigit(static_cast<unsigned char>(src_[pos_]))) {
      ++pos_;
    }
    if (pos_ == digits_start) {
      throw ParseError(pos_, "expected integer exponent after '^'" + found());
    }
    if (pos_ < src_.size() && (src_[pos_] == '.' || src_[pos_] == 'e' || src_[pos_] == 'E')) {
      throw ParseError(start, "exponent must be an integer literal");
    }
    int v = 0;
    const auto res = std::from_chars(src_.data() + digits_start, src_.data() + pos_, v);
    if (res.ec != std::errc() || v > 1024) {
      throw ParseError(start, "exponent out of range");
    }
    return negative ? -v : v;
  }

  CoeffExpr identifier() {
    const std::size_t start = pos_;
    while (pos_ < src_.size() && (std::isalnum(static_cast<unsigned char>(src_[pos_])) || src_[pos_] == '_')) {
      ++pos_;
    }
    const std::string_view name = src_.substr(start, pos_ - start);
    if (name == "t") {
      return CoeffExpr::time();
    }
    if (name == "pi") {
      return CoeffExpr::constant(std::numbers::pi);
    }
    if (name == "e") {
      return CoeffExpr::constant(std::numbers::e);
    }
    if (const auto func = lookup_function(name)) {
      if (peek() != '(') {
        throw ParseError(pos_, "expected '(' after function name '" + std::string(name) + "'" + found());
      }
      ++pos_;
      CoeffExpr arg = expression(0);
      expect(')');
      return CoeffExpr::call(*func, arg);
    }
    throw ParseError(start, "unknown identifier '" + std::string(name) + "'");
  }

  std::string_view src_;
  std::size_t pos_ = 0;
};

}  // namespace

CoeffExpr::CoeffExpr() : CoeffExpr(constant(0.0)) {}

CoeffExpr CoeffExpr::constant(double value) {
  if (!std::isfinite(value) || value < 0.0) {
    throw DomainError("expression constants must be finite and non-negative");
  }
  auto n = std::make_shared<Node>();
  n->kind = Kind::Constant;
  n->value = value;
  return CoeffExpr(std::move(n));
}

CoeffExpr CoeffExpr::time() {
  auto n = std::make_shared<Node>();
  n->kind = Kind::Time;
  return CoeffExpr(std::move(n));
}

CoeffExpr CoeffExpr::binary(Kind op, const CoeffExpr& lhs, const CoeffExpr& rhs) {
  if (op != Kind::Add && op != Kind::Sub && op != Kind::Mul && op != Kind::Div) {
    throw DomainError("binary() takes +, -, * or /");
  }
  auto n = std::make_shared<Node>();
  n->kind = op;
  n->lhs = lhs.root_;
  n->rhs = rhs.root_;
  return CoeffExpr(std::move(n));
}

CoeffExpr CoeffExpr::negate(const CoeffExpr& operand) {
  auto n = std::make_shared<Node>();
  n->kind = Kind::Neg;
  n->lhs = operand.root_;
  return CoeffExpr(std::move(n));
}

CoeffExpr CoeffExpr::power(const CoeffExpr& base, int exponent) {
  auto n = std::make_shared<Node>();
  n->kind = Kind::Pow;
  n->exponent = exponent;
  n->lhs = base.root_;
  return CoeffExpr(std::move(n));
}

CoeffExpr CoeffExpr::call(Func func, const CoeffExpr& arg) {
  auto n = std::make_shared<Node>();
  n->kind = Kind::Call;
  n->func = func;
  n->lhs = arg.root_;
  return CoeffExpr(std::move(n));
}

double CoeffExpr::operator()(double t) const { return evaluate(*root_, t); }

bool operator==(const CoeffExpr& lhs, const CoeffExpr& rhs) { return equal_nodes(*lhs.root_, *rhs.root_); }

CoeffExpr parse(std::string_view src) { return Parser(src).parse_all(); }

double eval(const CoeffExpr& e, double t) { return e(t); }

std::string print(const CoeffExpr& e) {
  std::string out;
  print_node(e.root(), 0, out);
  return out;
}

double definite_integral(const CoeffExpr& e, double t0, double t1, double tol) {
  return integrate([&e](double t) { return e(t); }, t0, t1, tol);
}

TimeFunction as_function(const CoeffExpr& e) {
  return [e](double t) { return e(t); };
}

CoefficientSet CoefficientSet::parse(const CoefficientSources& src) {
  auto one = [](const std::string& text, const char* name) {
    try {
      return cnls::parse(text);
    } catch (const ParseError& err) {
      throw ParseError(err.offset(), std::string("coefficient ") + name + " = \"" + text + "\": " + err.what());
    }
  };
  return {one(src.a, "a"), one(src.b, "b"), one(src.c, "c"), one(src.d, "d"), one(src.g, "g"), one(src.h, "h")};
}

void CoefficientSet::validate_at(double t) const {
  const std::array<std::pair<const char*, const CoeffExpr*>, 6> all{
      {{"a", &a}, {"b", &b}, {"c", &c}, {"d", &d}, {"g", &g}, {"h", &h}}};
  for (const auto& [name, e] : all) {
    try {
      (*e)(t);
    } catch (const EvalError& err) {
      throw EvalError(std::string("coefficient ") + name + ": " + err.what());
    }
  }
}

CoefficientFunctions CoefficientSet::functions() const {
  return {as_function(a), as_function(b), as_function(c), as_function(d), as_function(g), as_function(h)};
}

CoefficientSources CoefficientSet::sources() const {
  return {print(a), print(b), print(c), print(d), print(g), print(h)};
}

}  // namespace cnls
