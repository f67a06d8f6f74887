// Closed-form scalar expressions over chart coordinates x1..xm and the
// path parameter t: parsing, exact structural differentiation, and
// IEEE-double point evaluation. Trees are immutable and shared, so a
// constructed Expr may be evaluated concurrently from any number of
// threads.
//
// Coordinates are named x1..xm in the source language (1-based) and are
// slot-indexed 0..m-1 internally. The path parameter t lives in its own
// slot (kTimeSlot) and is only admitted when a parse asks for it.
#pragma once

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <memory>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace pg {

using Point = std::vector<double>;

// Evaluation failures (division by zero, log of a non-positive value,
// sqrt of a negative value, missing t) abort the enclosing computation;
// they are never folded into NaN.
struct EvalError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct ParseError : std::runtime_error {
  std::size_t offset;
  ParseError(const std::string& msg, std::size_t at)
      : std::runtime_error(msg + " (at byte " + std::to_string(at) + ")"),
        offset(at) {}
};

inline constexpr int kTimeSlot = -1;

enum class NodeKind { Const, Var, Add, Mul, Div, Pow, Neg, Func };
enum class FuncKind { Sin, Cos, Exp, Log, Sqrt };

namespace detail {

struct ExprNode;
using NodeRef = std::shared_ptr<const ExprNode>;

struct ExprNode {
  NodeKind kind;
  double value = 0.0;       // Const
  int slot = 0;             // Var
  long long exponent = 0;   // Pow
  FuncKind func = FuncKind::Sin;
  std::vector<NodeRef> kids;
};

inline NodeRef make_const(double v) {
  auto n = std::make_shared<ExprNode>();
  n->kind = NodeKind::Const;
  n->value = v;
  return n;
}

inline const char* func_name(FuncKind f) {
  switch (f) {
    case FuncKind::Sin: return "sin";
    case FuncKind::Cos: return "cos";
    case FuncKind::Exp: return "exp";
    case FuncKind::Log: return "log";
    case FuncKind::Sqrt: return "sqrt";
  }
  return "?";
}

}  // namespace detail

class Expr {
 public:
  Expr() : node_(zero_node()) {}
  explicit Expr(double v) : node_(constant(v).node_) {}

  static Expr constant(double v) {
    if (v == 0.0) return Expr(zero_node());
    if (v == 1.0) return Expr(one_node());
    return Expr(detail::make_const(v));
  }

  static Expr var(int slot) {
    auto n = std::make_shared<detail::ExprNode>();
    n->kind = NodeKind::Var;
    n->slot = slot;
    return Expr(std::move(n));
  }

  static Expr time() { return var(kTimeSlot); }

  NodeKind kind() const { return node_->kind; }
  FuncKind func_kind() const { return node_->func; }
  bool is_const() const { return node_->kind == NodeKind::Const; }
  bool is_zero() const { return is_const() && node_->value == 0.0; }
  bool is_one() const { return is_const() && node_->value == 1.0; }
  double const_value() const { return node_->value; }

  friend Expr operator+(const Expr& a, const Expr& b) {
    if (a.is_zero()) return b;
    if (b.is_zero()) return a;
    if (a.is_const() && b.is_const())
      return constant(a.const_value() + b.const_value());
    return nary(NodeKind::Add, a, b);
  }

  friend Expr operator*(const Expr& a, const Expr& b) {
    if (a.is_zero() || b.is_zero()) return Expr();
    if (a.is_one()) return b;
    if (b.is_one()) return a;
    if (a.is_const() && b.is_const())
      return constant(a.const_value() * b.const_value());
    return nary(NodeKind::Mul, a, b);
  }

  friend Expr operator-(const Expr& a) {
    if (a.is_const()) return constant(-a.const_value());
    auto n = std::make_shared<detail::ExprNode>();
    n->kind = NodeKind::Neg;
    n->kids = {a.node_};
    return Expr(std::move(n));
  }

  friend Expr operator-(const Expr& a, const Expr& b) { return a + (-b); }

  friend Expr operator/(const Expr& a, const Expr& b) {
    if (b.is_one()) return a;
    if (a.is_const() && b.is_const() && b.const_value() != 0.0)
      return constant(a.const_value() / b.const_value());
    auto n = std::make_shared<detail::ExprNode>();
    n->kind = NodeKind::Div;
    n->kids = {a.node_, b.node_};
    return Expr(std::move(n));
  }

  friend Expr pow(const Expr& base, long long k) {
    if (k == 0) return constant(1.0);
    if (k == 1) return base;
    if (base.is_const()) return constant(int_pow(base.const_value(), k));
    auto n = std::make_shared<detail::ExprNode>();
    n->kind = NodeKind::Pow;
    n->exponent = k;
    n->kids = {base.node_};
    return Expr(std::move(n));
  }

  friend Expr apply(FuncKind f, const Expr& x) {
    if (x.is_const()) {
      double v = eval_func(f, x.const_value(), nullptr);
      if (std::isfinite(v)) return constant(v);
    }
    auto n = std::make_shared<detail::ExprNode>();
    n->kind = NodeKind::Func;
    n->func = f;
    n->kids = {x.node_};
    return Expr(std::move(n));
  }

  double eval(std::span<const double> x,
              std::optional<double> t = std::nullopt) const {
    return eval_node(*node_, x, t);
  }
  double eval(const Point& x, std::optional<double> t = std::nullopt) const {
    return eval_node(*node_, std::span<const double>(x), t);
  }
  // Evaluation of a pure function of t (no coordinate slots).
  double eval_time(double t) const {
    return eval_node(*node_, std::span<const double>(), t);
  }

  Expr diff(int slot) const { return diff_node(*node_, slot); }

  // Replaces coordinate slot i by subs[i]; t is left alone unless t_sub is
  // given. Used for change-of-coordinate checks.
  Expr substitute(const std::vector<Expr>& subs,
                  const std::optional<Expr>& t_sub = std::nullopt) const {
    return subst_node(*node_, subs, t_sub);
  }

  bool depends_on(int slot) const { return depends_node(*node_, slot); }

  std::string str() const {
    std::string out;
    print_node(*node_, out);
    return out;
  }

 private:
  explicit Expr(detail::NodeRef n) : node_(std::move(n)) {}

  static const detail::NodeRef& zero_node() {
    static const detail::NodeRef z = detail::make_const(0.0);
    return z;
  }
  static const detail::NodeRef& one_node() {
    static const detail::NodeRef o = detail::make_const(1.0);
    return o;
  }

  static Expr nary(NodeKind k, const Expr& a, const Expr& b) {
    auto n = std::make_shared<detail::ExprNode>();
    n->kind = k;
    n->kids = {a.node_, b.node_};
    return Expr(std::move(n));
  }

  static double int_pow(double b, long long k) {
    bool inv = k < 0;
    unsigned long long e = inv ? static_cast<unsigned long long>(-k)
                               : static_cast<unsigned long long>(k);
    double r = 1.0, p = b;
    while (e) {
      if (e & 1ull) r *= p;
      p *= p;
      e >>= 1;
    }
    return inv ? 1.0 / r : r;
  }

  // ctx != nullptr: throw on domain error; nullptr: return NaN (folding).
  static double eval_func(FuncKind f, double v, const char* ctx) {
    switch (f) {
      case FuncKind::Sin: return std::sin(v);
      case FuncKind::Cos: return std::cos(v);
      case FuncKind::Exp: return std::exp(v);
      case FuncKind::Log:
        if (v <= 0.0) {
          if (ctx) throw EvalError("log of non-positive value");
          return std::nan("");
        }
        return std::log(v);
      case FuncKind::Sqrt:
        if (v < 0.0) {
          if (ctx) throw EvalError("sqrt of negative value");
          return std::nan("");
        }
        return std::sqrt(v);
    }
    return std::nan("");
  }

  static double eval_node(const detail::ExprNode& n, std::span<const double> x,
                          std::optional<double> t) {
    switch (n.kind) {
      case NodeKind::Const: return n.value;
      case NodeKind::Var:
        if (n.slot == kTimeSlot) {
          if (!t) throw EvalError("path parameter t has no value");
          return *t;
        }
        if (n.slot < 0 || static_cast<std::size_t>(n.slot) >= x.size())
          throw EvalError("variable slot out of range for point");
        return x[static_cast<std::size_t>(n.slot)];
      case NodeKind::Add: {
        double s = 0.0;
        for (const auto& k : n.kids) s += eval_node(*k, x, t);
        return s;
      }
      case NodeKind::Mul: {
        double p = 1.0;
        for (const auto& k : n.kids) p *= eval_node(*k, x, t);
        return p;
      }
      case NodeKind::Div: {
        double den = eval_node(*n.kids[1], x, t);
        if (den == 0.0) throw EvalError("division by zero");
        return eval_node(*n.kids[0], x, t) / den;
      }
      case NodeKind::Pow: {
        double b = eval_node(*n.kids[0], x, t);
        if (n.exponent < 0 && b == 0.0) throw EvalError("division by zero");
        return int_pow(b, n.exponent);
      }
      case NodeKind::Neg: return -eval_node(*n.kids[0], x, t);
      case NodeKind::Func:
        return eval_func(n.func, eval_node(*n.kids[0], x, t), "eval");
    }
    throw EvalError("corrupt expression node");
  }

  static Expr wrap(const detail::NodeRef& n) { return Expr(n); }

  static Expr diff_node(const detail::ExprNode& n, int slot) {
    switch (n.kind) {
      case NodeKind::Const: return Expr();
      case NodeKind::Var: return constant(n.slot == slot ? 1.0 : 0.0);
      case NodeKind::Add: {
        Expr s;
        for (const auto& k : n.kids) s = s + diff_node(*k, slot);
        return s;
      }
      case NodeKind::Mul: {
        Expr s;
        for (std::size_t i = 0; i < n.kids.size(); ++i) {
          Expr term = diff_node(*n.kids[i], slot);
          for (std::size_t j = 0; j < n.kids.size(); ++j)
            if (j != i) term = term * wrap(n.kids[j]);
          s = s + term;
        }
        return s;
      }
      case NodeKind::Div: {
        Expr u = wrap(n.kids[0]), v = wrap(n.kids[1]);
        Expr du = diff_node(*n.kids[0], slot), dv = diff_node(*n.kids[1], slot);
        return (du * v - u * dv) / (v * v);
      }
      case NodeKind::Pow: {
        Expr b = wrap(n.kids[0]);
        Expr db = diff_node(*n.kids[0], slot);
        return constant(static_cast<double>(n.exponent)) *
               pow(b, n.exponent - 1) * db;
      }
      case NodeKind::Neg: return -diff_node(*n.kids[0], slot);
      case NodeKind::Func: {
        Expr u = wrap(n.kids[0]);
        Expr du = diff_node(*n.kids[0], slot);
        switch (n.func) {
          case FuncKind::Sin: return apply(FuncKind::Cos, u) * du;
          case FuncKind::Cos: return -(apply(FuncKind::Sin, u) * du);
          case FuncKind::Exp: return apply(FuncKind::Exp, u) * du;
          case FuncKind::Log: return du / u;
          case FuncKind::Sqrt:
            return du / (constant(2.0) * apply(FuncKind::Sqrt, u));
        }
        return Expr();
      }
    }
    return Expr();
  }

  static Expr subst_node(const detail::ExprNode& n,
                         const std::vector<Expr>& subs,
                         const std::optional<Expr>& t_sub) {
    switch (n.kind) {
      case NodeKind::Const: return constant(n.value);
      case NodeKind::Var:
        if (n.slot == kTimeSlot) return t_sub ? *t_sub : time();
        if (static_cast<std::size_t>(n.slot) < subs.size())
          return subs[static_cast<std::size_t>(n.slot)];
        return var(n.slot);
      case NodeKind::Add: {
        Expr s;
        for (const auto& k : n.kids) s = s + subst_node(*k, subs, t_sub);
        return s;
      }
      case NodeKind::Mul: {
        Expr p = constant(1.0);
        for (const auto& k : n.kids) p = p * subst_node(*k, subs, t_sub);
        return p;
      }
      case NodeKind::Div:
        return subst_node(*n.kids[0], subs, t_sub) /
               subst_node(*n.kids[1], subs, t_sub);
      case NodeKind::Pow:
        return pow(subst_node(*n.kids[0], subs, t_sub), n.exponent);
      case NodeKind::Neg: return -subst_node(*n.kids[0], subs, t_sub);
      case NodeKind::Func:
        return apply(n.func, subst_node(*n.kids[0], subs, t_sub));
    }
    return Expr();
  }

  static bool depends_node(const detail::ExprNode& n, int slot) {
    if (n.kind == NodeKind::Var) return n.slot == slot;
    for (const auto& k : n.kids)
      if (depends_node(*k, slot)) return true;
    return false;
  }

  static void print_num(double v, std::string& out) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    out += buf;
  }

  static void print_node(const detail::ExprNode& n, std::string& out) {
    switch (n.kind) {
      case NodeKind::Const:
        if (n.value < 0.0) {
          out += "(";
          print_num(n.value, out);
          out += ")";
        } else {
          print_num(n.value, out);
        }
        return;
      case NodeKind::Var:
        out += n.slot == kTimeSlot ? "t" : "x" + std::to_string(n.slot + 1);
        return;
      case NodeKind::Add:
        out += "(";
        for (std::size_t i = 0; i < n.kids.size(); ++i) {
          if (i) out += " + ";
          print_node(*n.kids[i], out);
        }
        out += ")";
        return;
      case NodeKind::Mul:
        out += "(";
        for (std::size_t i = 0; i < n.kids.size(); ++i) {
          if (i) out += "*";
          print_node(*n.kids[i], out);
        }
        out += ")";
        return;
      case NodeKind::Div:
        out += "(";
        print_node(*n.kids[0], out);
        out += "/";
        print_node(*n.kids[1], out);
        out += ")";
        return;
      case NodeKind::Pow:
        out += "(";
        print_node(*n.kids[0], out);
        out += "^";
        if (n.exponent < 0) {
          out += "(" + std::to_string(n.exponent) + ")";
        } else {
          out += std::to_string(n.exponent);
        }
        out += ")";
        return;
      case NodeKind::Neg:
        out += "(-";
        print_node(*n.kids[0], out);
        out += ")";
        return;
      case NodeKind::Func:
        out += detail::func_name(n.func);
        out += "(";
        print_node(*n.kids[0], out);
        out += ")";
        return;
    }
  }

  detail::NodeRef node_;
};

inline Expr sin(const Expr& x) { return apply(FuncKind::Sin, x); }
inline Expr cos(const Expr& x) { return apply(FuncKind::Cos, x); }
inline Expr exp(const Expr& x) { return apply(FuncKind::Exp, x); }
inline Expr log(const Expr& x) { return apply(FuncKind::Log, x); }
inline Expr sqrt(const Expr& x) { return apply(FuncKind::Sqrt, x); }

namespace detail {

// Recursive-descent parser for the expression grammar:
//   expr   := term (("+" | "-") term)*
//   term   := factor (("*" | "/") factor)*
//   factor := ("-" factor) | power
//   power  := atom ("^" factor)?
//   atom   := NUMBER | IDENT | IDENT "(" expr ")" | "(" expr ")"
// "^" is right-associative through the factor recursion, and per the
// grammar it binds tighter than a leading unary minus ("-x1^2" is
// -(x1^2)). An exponent must constant-fold to an integer unless the base
// is provably positive (a positive literal, exp(...) or sqrt(...)), in
// which case b^e desugars to exp(e*log(b)).
class Parser {
 public:
  Parser(std::string_view src, int dim, bool allow_t)
      : src_(src), dim_(dim), allow_t_(allow_t) {}

  Expr run() {
    Expr e = parse_expr();
    skip_ws();
    if (pos_ != src_.size())
      throw ParseError("unexpected trailing input", pos_);
    return e;
  }

 private:
  void skip_ws() {
    while (pos_ < src_.size() &&
           (src_[pos_] == ' ' || src_[pos_] == '\t' || src_[pos_] == '\n' ||
            src_[pos_] == '\r'))
      ++pos_;
  }

  bool peek(char c) {
    skip_ws();
    return pos_ < src_.size() && src_[pos_] == c;
  }

  bool accept(char c) {
    if (peek(c)) {
      ++pos_;
      return true;
    }
    return false;
  }

  void expect(char c) {
    if (!accept(c))
      throw ParseError(std::string("expected '") + c + "'", pos_);
  }

  Expr parse_expr() {
    Expr e = parse_term();
    for (;;) {
      if (accept('+'))
        e = e + parse_term();
      else if (accept('-'))
        e = e - parse_term();
      else
        return e;
    }
  }

  Expr parse_term() {
    Expr e = parse_factor();
    for (;;) {
      if (accept('*'))
        e = e * parse_factor();
      else if (accept('/'))
        e = e / parse_factor();
      else
        return e;
    }
  }

  Expr parse_factor() {
    if (accept('-')) return -parse_factor();
    return parse_power();
  }

  Expr parse_power() {
    Expr base = parse_atom();
    if (!accept('^')) return base;
    std::size_t at = pos_;
    Expr e = parse_factor();
    if (e.is_const()) {
      double v = e.const_value();
      if (v == std::floor(v) && std::abs(v) < 1e15)
        return pow(base, static_cast<long long>(v));
    }
    if (provably_positive(base)) return exp(e * log(base));
    throw ParseError(
        "exponent must be an integer literal (or the base provably positive)",
        at);
  }

  static bool provably_positive(const Expr& b) {
    if (b.is_const()) return b.const_value() > 0.0;
    return b.kind() == NodeKind::Func &&
           (b.func_kind() == FuncKind::Exp || b.func_kind() == FuncKind::Sqrt);
  }

  Expr parse_atom() {
    skip_ws();
    if (pos_ >= src_.size()) throw ParseError("unexpected end of input", pos_);
    char c = src_[pos_];
    if (c == '(') {
      ++pos_;
      Expr e = parse_expr();
      expect(')');
      return e;
    }
    if ((c >= '0' && c <= '9') || c == '.') return parse_number();
    if ((c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z')) return parse_ident();
    throw ParseError(std::string("unexpected character '") + c + "'", pos_);
  }

  Expr parse_number() {
    std::size_t start = pos_;
    while (pos_ < src_.size() && std::isdigit((unsigned char)src_[pos_])) ++pos_;
    if (pos_ < src_.size() && src_[pos_] == '.') {
      ++pos_;
      while (pos_ < src_.size() && std::isdigit((unsigned char)src_[pos_]))
        ++pos_;
    }
    if (pos_ < src_.size() && (src_[pos_] == 'e' || src_[pos_] == 'E')) {
      std::size_t mark = pos_;
      ++pos_;
      if (pos_ < src_.size() && (src_[pos_] == '+' || src_[pos_] == '-'))
        ++pos_;
      if (pos_ < src_.size() && std::isdigit((unsigned char)src_[pos_])) {
        while (pos_ < src_.size() && std::isdigit((unsigned char)src_[pos_]))
          ++pos_;
      } else {
        pos_ = mark;  // "e" belongs to something else; not a valid exponent
      }
    }
    std::string text(src_.substr(start, pos_ - start));
    char* end = nullptr;
    double v = std::strtod(text.c_str(), &end);
    if (end != text.c_str() + text.size())
      throw ParseError("malformed number", start);
    return Expr::constant(v);
  }

  Expr parse_ident() {
    std::size_t start = pos_;
    while (pos_ < src_.size() &&
           (std::isalnum((unsigned char)src_[pos_]) || src_[pos_] == '_'))
      ++pos_;
    std::string name(src_.substr(start, pos_ - start));
    if (name == "t") {
      if (!allow_t_)
        throw ParseError("t is not allowed in this expression", start);
      return Expr::time();
    }
    if (name.size() > 1 && name[0] == 'x' &&
        std::all_of(name.begin() + 1, name.end(),
                    [](char ch) { return std::isdigit((unsigned char)ch); })) {
      long idx = std::strtol(name.c_str() + 1, nullptr, 10);
      if (idx < 1 || idx > dim_)
        throw ParseError("variable index out of range: " + name, start);
      return Expr::var(static_cast<int>(idx - 1));
    }
    FuncKind f;
    if (name == "sin")
      f = FuncKind::Sin;
    else if (name == "cos")
      f = FuncKind::Cos;
    else if (name == "exp")
      f = FuncKind::Exp;
    else if (name == "log")
      f = FuncKind::Log;
    else if (name == "sqrt")
      f = FuncKind::Sqrt;
    else
      throw ParseError("unknown identifier " + name, start);
    expect('(');
    Expr arg = parse_expr();
    expect(')');
    return apply(f, arg);
  }

  std::string_view src_;
  int dim_;
  bool allow_t_;
  std::size_t pos_ = 0;
};

}  // namespace detail

inline Expr parse_expr(std::string_view src, int dim, bool allow_t) {
  return detail::Parser(src, dim, allow_t).run();
}

}  // namespace pg
