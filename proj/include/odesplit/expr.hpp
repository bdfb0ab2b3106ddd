#pragma once

// Symbolic scalar functions of the independent variable t.
//
// Grammar (function names are lowercase and case-sensitive):
//
//   expr    = term , { ("+" | "-") , term } ;
//   term    = unary , { ("*" | "/") , unary } ;
//   unary   = ("-" | "+") , unary | power ;
//   power   = primary , [ "^" , unary ] ;          (* right-associative *)
//   primary = number | name | name , "(" , expr , ")" | "(" , expr , ")" ;
//   number  = digits , [ "." , digits ] , [ ("e" | "E") , [ "+" | "-" ] , digits ]
//           | "." , digits , [ exponent ] ;
//   name    = letter , { letter | digit | "_" } ;
//
// Reserved names: `t` (the variable), `i` (imaginary unit), `pi`.
// Functions: sin, cos, exp, ln, sqrt. Other names must be supplied as
// parameters to parse() and are substituted as constants.
//
// Evaluation is complex-valued throughout. sqrt, ln and non-integer powers
// use the principal branch with the cut on the negative real axis; a point
// exactly on the cut (zero imaginary part, of either sign) takes the value
// from the upper side, so sqrt(-1) == i.

#include <complex>
#include <map>
#include <memory>
#include <string>
#include <string_view>

namespace odesplit {

using cplx = std::complex<double>;

enum class NodeKind { Constant, Variable, Add, Sub, Mul, Div, Pow, Neg, Call };
enum class Func { Sin, Cos, Exp, Ln, Sqrt };

struct Node;

/// Immutable expression tree. Copies share structure.
class Expr {
public:
  /// The constant 0.
  Expr();

  static Expr constant(cplx value);
  static Expr variable();
  static Expr call(Func f, Expr arg);

  NodeKind kind() const noexcept;
  /// Constant value; only meaningful when kind() == Constant.
  cplx value() const noexcept;
  Func func() const noexcept;
  Expr lhs() const;
  Expr rhs() const;
  /// Operand of Neg and Call nodes.
  Expr arg() const { return lhs(); }

  bool is_constant() const noexcept { return kind() == NodeKind::Constant; }
  bool is_zero() const noexcept { return is_constant() && value() == cplx{}; }
  bool is_one() const noexcept { return is_constant() && value() == cplx{1.0}; }

  cplx operator()(cplx t) const;
  cplx operator()(double t) const { return (*this)(cplx{t, 0.0}); }

  friend Expr operator+(const Expr& a, const Expr& b);
  friend Expr operator-(const Expr& a, const Expr& b);
  friend Expr operator*(const Expr& a, const Expr& b);
  friend Expr operator/(const Expr& a, const Expr& b);
  friend Expr operator-(const Expr& a);
  friend Expr pow(const Expr& base, const Expr& exponent);

private:
  explicit Expr(std::shared_ptr<const Node> node) : node_(std::move(node)) {}
  std::shared_ptr<const Node> node_;
};

using ParamTable = std::map<std::string, cplx, std::less<>>;

/// Parses `source`. Throws ParseError with the byte offset of the failure.
Expr parse(std::string_view source, const ParamTable& params = {});

/// Evaluates at `t`. Throws NumericalError(EvalDomain) on division by zero,
/// ln(0) and 0 raised to a non-positive power.
cplx eval(const Expr& e, cplx t);

/// d/dt. The result is itself differentiable.
Expr differentiate(const Expr& e);

/// Text form accepted by parse(); constants carry 17 significant digits.
std::string to_string(const Expr& e);

std::string_view function_name(Func f);

Expr sin(const Expr& u);
Expr cos(const Expr& u);
Expr exp(const Expr& u);
Expr ln(const Expr& u);
Expr sqrt(const Expr& u);

}  // namespace odesplit
