#include "odesplit/expr.hpp"

#include <cctype>
#include <cmath>
#include <cstdio>
#include <numbers>
#include <optional>

#include "odesplit/errors.hpp"

namespace odesplit {

struct Node {
  NodeKind kind = NodeKind::Constant;
  cplx value{};
  Func func = Func::Sin;
  std::shared_ptr<const Node> a;
  std::shared_ptr<const Node> b;
};

namespace {

std::shared_ptr<const Node> make_node(NodeKind kind, std::shared_ptr<const Node> a = nullptr,
                                      std::shared_ptr<const Node> b = nullptr) {
  auto n = std::make_shared<Node>();
  n->kind = kind;
  n->a = std::move(a);
  n->b = std::move(b);
  return n;
}

std::shared_ptr<const Node> make_constant(cplx v) {
  auto n = std::make_shared<Node>();
  n->value = v;
  return n;
}

// Points exactly on the negative real axis are taken from the upper side.
cplx on_cut_upper(cplx z) {
  if (z.imag() == 0.0) return {z.real(), 0.0};
  return z;
}

[[noreturn]] void domain_error(cplx t, const char* what) {
  throw NumericalError(NumericalErrorKind::EvalDomain, t.real(), what);
}

std::optional<long> integer_exponent(const Node& n) {
  if (n.kind != NodeKind::Constant || n.value.imag() != 0.0) return std::nullopt;
  double r = n.value.real();
  if (std::abs(r) > 1024.0 || std::trunc(r) != r) return std::nullopt;
  return static_cast<long>(r);
}

cplx int_pow(cplx base, long n, cplx t) {
  if (n < 0 && base == cplx{}) domain_error(t, "division by zero in negative power");
  unsigned long k = static_cast<unsigned long>(n < 0 ? -n : n);
  cplx result{1.0};
  cplx p = base;
  while (k) {
    if (k & 1UL) result *= p;
    p *= p;
    k >>= 1;
  }
  return n < 0 ? cplx{1.0} / result : result;
}

cplx apply_func(Func f, cplx u, cplx t) {
  switch (f) {
    case Func::Sin: return std::sin(u);
    case Func::Cos: return std::cos(u);
    case Func::Exp: return std::exp(u);
    case Func::Ln:
      if (u == cplx{}) domain_error(t, "ln(0)");
      return std::log(on_cut_upper(u));
    case Func::Sqrt: return std::sqrt(on_cut_upper(u));
  }
  return {};
}

cplx eval_node(const Node& n, cplx t) {
  switch (n.kind) {
    case NodeKind::Constant: return n.value;
    case NodeKind::Variable: return t;
    case NodeKind::Add: return eval_node(*n.a, t) + eval_node(*n.b, t);
    case NodeKind::Sub: return eval_node(*n.a, t) - eval_node(*n.b, t);
    case NodeKind::Mul: return eval_node(*n.a, t) * eval_node(*n.b, t);
    case NodeKind::Div: {
      cplx num = eval_node(*n.a, t);
      cplx den = eval_node(*n.b, t);
      if (den == cplx{}) domain_error(t, "division by zero");
      return num / den;
    }
    case NodeKind::Pow: {
      cplx base = eval_node(*n.a, t);
      if (auto k = integer_exponent(*n.b)) return int_pow(base, *k, t);
      cplx ex = eval_node(*n.b, t);
      if (base == cplx{}) {
        if (ex.real() > 0.0) return {};
        domain_error(t, "zero raised to a non-positive power");
      }
      return std::exp(ex * std::log(on_cut_upper(base)));
    }
    case NodeKind::Neg: return -eval_node(*n.a, t);
    case NodeKind::Call: return apply_func(n.func, eval_node(*n.a, t), t);
  }
  return {};
}

}  // namespace

// ---------------------------------------------------------------------------
// Construction. Constant operands are folded with the same arithmetic eval
// uses, and additive zeros / multiplicative ones are dropped, so folding
// never changes a value.

Expr::Expr() : node_(make_constant({})) {}

Expr Expr::constant(cplx value) { return Expr(make_constant(value)); }
Expr Expr::variable() { return Expr(make_node(NodeKind::Variable)); }

Expr Expr::call(Func f, Expr arg) {
  if (arg.is_constant()) {
    try {
      return constant(apply_func(f, arg.value(), {}));
    } catch (const NumericalError&) {
      // keep the node so the error surfaces at evaluation time
    }
  }
  auto n = std::make_shared<Node>();
  n->kind = NodeKind::Call;
  n->func = f;
  n->a = arg.node_;
  return Expr(std::move(n));
}

NodeKind Expr::kind() const noexcept { return node_->kind; }
cplx Expr::value() const noexcept { return node_->value; }
Func Expr::func() const noexcept { return node_->func; }
Expr Expr::lhs() const { return node_->a ? Expr(node_->a) : Expr(); }
Expr Expr::rhs() const { return node_->b ? Expr(node_->b) : Expr(); }

cplx Expr::operator()(cplx t) const { return eval_node(*node_, t); }

Expr operator+(const Expr& a, const Expr& b) {
  if (a.is_constant() && b.is_constant()) return Expr::constant(a.value() + b.value());
  if (a.is_zero()) return b;
  if (b.is_zero()) return a;
  return Expr(make_node(NodeKind::Add, a.node_, b.node_));
}

Expr operator-(const Expr& a, const Expr& b) {
  if (a.is_constant() && b.is_constant()) return Expr::constant(a.value() - b.value());
  if (b.is_zero()) return a;
  if (a.is_zero()) return -b;
  return Expr(make_node(NodeKind::Sub, a.node_, b.node_));
}

Expr operator*(const Expr& a, const Expr& b) {
  if (a.is_constant() && b.is_constant()) return Expr::constant(a.value() * b.value());
  if (a.is_one()) return b;
  if (b.is_one()) return a;
  return Expr(make_node(NodeKind::Mul, a.node_, b.node_));
}

Expr operator/(const Expr& a, const Expr& b) {
  if (a.is_constant() && b.is_constant() && b.value() != cplx{})
    return Expr::constant(a.value() / b.value());
  if (b.is_one()) return a;
  return Expr(make_node(NodeKind::Div, a.node_, b.node_));
}

Expr operator-(const Expr& a) {
  if (a.is_constant()) return Expr::constant(-a.value());
  if (a.kind() == NodeKind::Neg) return a.arg();
  return Expr(make_node(NodeKind::Neg, a.node_));
}

Expr pow(const Expr& base, const Expr& exponent) {
  if (exponent.is_one()) return base;
  if (base.is_constant() && exponent.is_constant()) {
    Expr folded(make_node(NodeKind::Pow, base.node_, exponent.node_));
    try {
      return Expr::constant(folded(cplx{}));
    } catch (const NumericalError&) {
      return folded;
    }
  }
  return Expr(make_node(NodeKind::Pow, base.node_, exponent.node_));
}

Expr sin(const Expr& u) { return Expr::call(Func::Sin, u); }
Expr cos(const Expr& u) { return Expr::call(Func::Cos, u); }
Expr exp(const Expr& u) { return Expr::call(Func::Exp, u); }
Expr ln(const Expr& u) { return Expr::call(Func::Ln, u); }
Expr sqrt(const Expr& u) { return Expr::call(Func::Sqrt, u); }

cplx eval(const Expr& e, cplx t) { return e(t); }

std::string_view function_name(Func f) {
  switch (f) {
    case Func::Sin: return "sin";
    case Func::Cos: return "cos";
    case Func::Exp: return "exp";
    case Func::Ln: return "ln";
    case Func::Sqrt: return "sqrt";
  }
  return "?";
}

// ---------------------------------------------------------------------------
// Differentiation

namespace {

// u' * outer, omitting the factor when u' is 1 and the whole term when u' is 0.
Expr chain(const Expr& du, const Expr& outer) {
  if (du.is_zero()) return Expr();
  return du * outer;
}

}  // namespace

Expr differentiate(const Expr& e) {
  switch (e.kind()) {
    case NodeKind::Constant: return Expr();
    case NodeKind::Variable: return Expr::constant(1.0);
    case NodeKind::Add: return differentiate(e.lhs()) + differentiate(e.rhs());
    case NodeKind::Sub: return differentiate(e.lhs()) - differentiate(e.rhs());
    case NodeKind::Neg: return -differentiate(e.arg());
    case NodeKind::Mul: {
      Expr a = e.lhs(), b = e.rhs();
      Expr da = differentiate(a), db = differentiate(b);
      Expr left = da.is_zero() ? Expr() : da * b;
      Expr right = db.is_zero() ? Expr() : a * db;
      return left + right;
    }
    case NodeKind::Div: {
      Expr a = e.lhs(), b = e.rhs();
      Expr da = differentiate(a), db = differentiate(b);
      if (db.is_zero()) return da.is_zero() ? Expr() : da / b;
      Expr num = (da.is_zero() ? Expr() : da * b) - a * db;
      return num / pow(b, Expr::constant(2.0));
    }
    case NodeKind::Pow: {
      Expr a = e.lhs(), b = e.rhs();
      Expr da = differentiate(a), db = differentiate(b);
      if (db.is_zero()) {
        if (da.is_zero()) return Expr();
        Expr lowered = pow(a, b - Expr::constant(1.0));
        return chain(da, b * lowered);
      }
      Expr log_term = db * ln(a);
      Expr inner = da.is_zero() ? log_term : log_term + b * da / a;
      return e * inner;
    }
    case NodeKind::Call: {
      Expr u = e.arg();
      Expr du = differentiate(u);
      switch (e.func()) {
        case Func::Sin: return chain(du, cos(u));
        case Func::Cos: return chain(du, -sin(u));
        case Func::Exp: return chain(du, e);
        case Func::Ln: return du.is_zero() ? Expr() : du / u;
        case Func::Sqrt: return du.is_zero() ? Expr() : du / (Expr::constant(2.0) * e);
      }
    }
  }
  return Expr();
}

// ---------------------------------------------------------------------------
// Printing

namespace {

int precedence(const Expr& e) {
  switch (e.kind()) {
    case NodeKind::Add:
    case NodeKind::Sub: return 1;
    case NodeKind::Mul:
    case NodeKind::Div: return 2;
    case NodeKind::Neg: return 3;
    case NodeKind::Pow: return 4;
    default: return 5;
  }
}

std::string format_real(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string format_constant(cplx v) {
  const double re = v.real(), im = v.imag();
  if (im == 0.0) {
    if (re < 0.0 || std::signbit(re)) return "(" + format_real(re) + ")";
    return format_real(re);
  }
  std::string imag_part = format_real(std::abs(im)) + "*i";
  if (re == 0.0 && !std::signbit(re)) return im < 0.0 ? "(-" + imag_part + ")" : "(" + imag_part + ")";
  return "(" + format_real(re) + (im < 0.0 ? "-" : "+") + imag_part + ")";
}

std::string print(const Expr& e);

std::string wrap_if(const Expr& e, bool needed) {
  return needed ? "(" + print(e) + ")" : print(e);
}

std::string print(const Expr& e) {
  switch (e.kind()) {
    case NodeKind::Constant: return format_constant(e.value());
    case NodeKind::Variable: return "t";
    case NodeKind::Add:
    case NodeKind::Sub:
    case NodeKind::Mul:
    case NodeKind::Div: {
      const int p = precedence(e);
      const char* op = e.kind() == NodeKind::Add   ? "+"
                       : e.kind() == NodeKind::Sub ? "-"
                       : e.kind() == NodeKind::Mul ? "*"
                                                   : "/";
      return wrap_if(e.lhs(), precedence(e.lhs()) < p) + op + wrap_if(e.rhs(), precedence(e.rhs()) <= p);
    }
    case NodeKind::Neg: return "-" + wrap_if(e.arg(), precedence(e.arg()) < 3);
    case NodeKind::Pow:
      return wrap_if(e.lhs(), precedence(e.lhs()) <= 4) + "^" + wrap_if(e.rhs(), precedence(e.rhs()) < 4);
    case NodeKind::Call: return std::string(function_name(e.func())) + "(" + print(e.arg()) + ")";
  }
  return {};
}

}  // namespace

std::string to_string(const Expr& e) { return print(e); }

// ---------------------------------------------------------------------------
// Parsing

namespace {

class Parser {
public:
  Parser(std::string_view src, const ParamTable& params) : src_(src), params_(params) {}

  Expr parse_all() {
    skip_ws();
    Expr e = parse_expr();
    skip_ws();
    if (pos_ != src_.size()) fail("unexpected trailing input");
    return e;
  }

private:
  std::string_view src_;
  const ParamTable& params_;
  std::size_t pos_ = 0;

  [[noreturn]] void fail(std::string expected) const { throw ParseError(pos_, std::move(expected), src_); }

  void skip_ws() {
    while (pos_ < src_.size() && std::isspace(static_cast<unsigned char>(src_[pos_]))) ++pos_;
  }

  bool accept(char c) {
    skip_ws();
    if (pos_ < src_.size() && src_[pos_] == c) {
      ++pos_;
      return true;
    }
    return false;
  }

  Expr parse_expr() {
    Expr lhs = parse_term();
    for (;;) {
      if (accept('+')) lhs = lhs + parse_term();
      else if (accept('-')) lhs = lhs - parse_term();
      else return lhs;
    }
  }

  Expr parse_term() {
    Expr lhs = parse_unary();
    for (;;) {
      if (accept('*')) lhs = lhs * parse_unary();
      else if (accept('/')) lhs = lhs / parse_unary();
      else return lhs;
    }
  }

  Expr parse_unary() {
    if (accept('-')) return -parse_unary();
    if (accept('+')) return parse_unary();
    return parse_power();
  }

  Expr parse_power() {
    Expr base = parse_primary();
    if (accept('^')) return pow(base, parse_unary());
    return base;
  }

  Expr parse_primary() {
    skip_ws();
    if (pos_ >= src_.size()) fail("expected operand");
    const char c = src_[pos_];
    if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') return parse_number();
    if (std::isalpha(static_cast<unsigned char>(c))) return parse_name();
    if (c == '(') {
      ++pos_;
      Expr inner = parse_expr();
      if (!accept(')')) fail("expected ')'");
      return inner;
    }
    fail("expected operand");
  }

  Expr parse_number() {
    const std::size_t start = pos_;
    auto digits = [&] {
      std::size_t n = 0;
      while (pos_ < src_.size() && std::isdigit(static_cast<unsigned char>(src_[pos_]))) ++pos_, ++n;
      return n;
    };
    std::size_t n = digits();
    if (pos_ < src_.size() && src_[pos_] == '.') {
      ++pos_;
      n += digits();
    }
    if (n == 0) {
      pos_ = start;
      fail("expected digits");
    }
    if (pos_ < src_.size() && (src_[pos_] == 'e' || src_[pos_] == 'E')) {
      std::size_t save = pos_++;
      if (pos_ < src_.size() && (src_[pos_] == '+' || src_[pos_] == '-')) ++pos_;
      if (digits() == 0) pos_ = save;  // a bare 'e' is not part of the number
    }
    std::string text(src_.substr(start, pos_ - start));
    return Expr::constant(std::strtod(text.c_str(), nullptr));
  }

  Expr parse_name() {
    const std::size_t start = pos_;
    while (pos_ < src_.size() &&
           (std::isalnum(static_cast<unsigned char>(src_[pos_])) || src_[pos_] == '_'))
      ++pos_;
    std::string_view name = src_.substr(start, pos_ - start);

    static constexpr std::pair<std::string_view, Func> functions[] = {
        {"sin", Func::Sin}, {"cos", Func::Cos}, {"exp", Func::Exp}, {"ln", Func::Ln}, {"sqrt", Func::Sqrt}};
    for (auto [fname, f] : functions) {
      if (name == fname) {
        if (!accept('(')) fail("expected '(' after function name");
        Expr arg = parse_expr();
        if (!accept(')')) fail("expected ')'");
        return Expr::call(f, arg);
      }
    }
    if (name == "t") return Expr::variable();
    if (name == "i") return Expr::constant({0.0, 1.0});
    if (name == "pi") return Expr::constant(std::numbers::pi);
    if (auto it = params_.find(name); it != params_.end()) return Expr::constant(it->second);

    pos_ = start;
    fail("unknown identifier '" + std::string(name) + "'");
  }
};

}  // namespace

Expr parse(std::string_view source, const ParamTable& params) {
  return Parser(source, params).parse_all();
}

}  // namespace odesplit
