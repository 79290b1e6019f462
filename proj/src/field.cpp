#include "dirtrace/field.hpp"

#include <array>
#include <cctype>
#include <cmath>
#include <cstdlib>
#include <utility>
#include <vector>

#include "dirtrace/rng.hpp"

namespace dirtrace {

ScalarField::ScalarField(std::string id, int dim,
                         std::function<double(const Point&)> value,
                         std::function<Point(const Point&)> gradient)
    : id_(std::move(id)), dim_(dim), value_(std::move(value)),
      gradient_(std::move(gradient)) {
  if (dim_ < 1) throw BadParameter("field dimension must be >= 1");
  if (!value_ || !gradient_) throw BadParameter("field needs value and gradient");
}

ScalarField constant_field(double c, int dim) {
  return ScalarField("const:" + std::to_string(c), dim,
                     [c](const Point&) { return c; },
                     [dim](const Point&) { return Point::Zero(dim); });
}

// ---------------------------------------------------------------------------
// Forward-mode dual numbers, fixed maximum dimension to stay allocation-free.

namespace {

constexpr int kMaxDim = 4;

struct Dual {
  double v = 0.0;
  std::array<double, kMaxDim> g{};
};

Dual make_const(double c) { return Dual{c, {}}; }

Dual operator+(const Dual& a, const Dual& b) {
  Dual r{a.v + b.v, {}};
  for (int k = 0; k < kMaxDim; ++k) r.g[k] = a.g[k] + b.g[k];
  return r;
}
Dual operator-(const Dual& a, const Dual& b) {
  Dual r{a.v - b.v, {}};
  for (int k = 0; k < kMaxDim; ++k) r.g[k] = a.g[k] - b.g[k];
  return r;
}
Dual operator-(const Dual& a) {
  Dual r{-a.v, {}};
  for (int k = 0; k < kMaxDim; ++k) r.g[k] = -a.g[k];
  return r;
}
Dual operator*(const Dual& a, const Dual& b) {
  Dual r{a.v * b.v, {}};
  for (int k = 0; k < kMaxDim; ++k) r.g[k] = a.g[k] * b.v + a.v * b.g[k];
  return r;
}
Dual operator/(const Dual& a, const Dual& b) {
  Dual r{a.v / b.v, {}};
  const double inv2 = 1.0 / (b.v * b.v);
  for (int k = 0; k < kMaxDim; ++k)
    r.g[k] = (a.g[k] * b.v - a.v * b.g[k]) * inv2;
  return r;
}

Dual chain(const Dual& a, double fv, double dfv) {
  Dual r{fv, {}};
  for (int k = 0; k < kMaxDim; ++k) r.g[k] = dfv * a.g[k];
  return r;
}

Dual pow_dual(const Dual& a, const Dual& b) {
  const bool b_const = [&] {
    for (double x : b.g)
      if (x != 0.0) return false;
    return true;
  }();
  if (b_const && b.v == std::round(b.v) && std::abs(b.v) < 64.0) {
    // integer exponent: defined for any base
    const double n = b.v;
    const double fv = std::pow(a.v, n);
    const double dfv = n == 0.0 ? 0.0 : n * std::pow(a.v, n - 1.0);
    return chain(a, fv, dfv);
  }
  if (b_const) {
    const double p = b.v;
    return chain(a, std::pow(a.v, p), p * std::pow(a.v, p - 1.0));
  }
  // general a^b = exp(b log a), needs a > 0
  const double fv = std::pow(a.v, b.v);
  Dual r{fv, {}};
  const double la = std::log(a.v);
  for (int k = 0; k < kMaxDim; ++k)
    r.g[k] = fv * (b.g[k] * la + b.v * a.g[k] / a.v);
  return r;
}

// -------------------------- expression AST --------------------------------

struct Node {
  virtual ~Node() = default;
  virtual Dual eval(const double* x, int dim) const = 0;
};
using NodePtr = std::unique_ptr<Node>;

struct ConstNode : Node {
  double c;
  explicit ConstNode(double v) : c(v) {}
  Dual eval(const double*, int) const override { return make_const(c); }
};

struct VarNode : Node {
  int k;
  explicit VarNode(int idx) : k(idx) {}
  Dual eval(const double* x, int) const override {
    Dual r{x[k], {}};
    r.g[k] = 1.0;
    return r;
  }
};

struct BinNode : Node {
  char op;
  NodePtr l, r;
  BinNode(char o, NodePtr a, NodePtr b) : op(o), l(std::move(a)), r(std::move(b)) {}
  Dual eval(const double* x, int d) const override {
    const Dual a = l->eval(x, d);
    const Dual b = r->eval(x, d);
    switch (op) {
      case '+': return a + b;
      case '-': return a - b;
      case '*': return a * b;
      case '/': return a / b;
      case '^': return pow_dual(a, b);
    }
    return make_const(0.0);
  }
};

struct NegNode : Node {
  NodePtr c;
  explicit NegNode(NodePtr a) : c(std::move(a)) {}
  Dual eval(const double* x, int d) const override { return -c->eval(x, d); }
};

enum class Fn { Sin, Cos, Tan, Exp, Log, Sqrt, Abs };

struct CallNode : Node {
  Fn fn;
  NodePtr arg;
  CallNode(Fn f, NodePtr a) : fn(f), arg(std::move(a)) {}
  Dual eval(const double* x, int d) const override {
    const Dual a = arg->eval(x, d);
    switch (fn) {
      case Fn::Sin: return chain(a, std::sin(a.v), std::cos(a.v));
      case Fn::Cos: return chain(a, std::cos(a.v), -std::sin(a.v));
      case Fn::Tan: {
        const double t = std::tan(a.v);
        return chain(a, t, 1.0 + t * t);
      }
      case Fn::Exp: {
        const double e = std::exp(a.v);
        return chain(a, e, e);
      }
      case Fn::Log: return chain(a, std::log(a.v), 1.0 / a.v);
      case Fn::Sqrt: {
        const double s = std::sqrt(a.v);
        return chain(a, s, 0.5 / s);
      }
      case Fn::Abs:
        return chain(a, std::abs(a.v), a.v < 0.0 ? -1.0 : 1.0);
    }
    return make_const(0.0);
  }
};

struct Parser {
  const std::string& src;
  std::size_t pos = 0;
  int dim;

  Parser(const std::string& s, int d) : src(s), dim(d) {}

  void skip() {
    while (pos < src.size() && std::isspace(static_cast<unsigned char>(src[pos])))
      ++pos;
  }
  bool eat(char c) {
    skip();
    if (pos < src.size() && src[pos] == c) {
      ++pos;
      return true;
    }
    return false;
  }
  [[noreturn]] void fail(const std::string& what) const {
    throw FieldParseError("cannot parse field expression '" + src + "' at offset " +
                          std::to_string(pos) + ": " + what);
  }

  NodePtr parse() {
    NodePtr e = expr();
    skip();
    if (pos != src.size()) fail("trailing input");
    return e;
  }

  NodePtr expr() {
    NodePtr e = term();
    for (;;) {
      if (eat('+')) e = std::make_unique<BinNode>('+', std::move(e), term());
      else if (eat('-')) e = std::make_unique<BinNode>('-', std::move(e), term());
      else return e;
    }
  }

  NodePtr term() {
    NodePtr e = unary();
    for (;;) {
      if (eat('*')) e = std::make_unique<BinNode>('*', std::move(e), unary());
      else if (eat('/')) e = std::make_unique<BinNode>('/', std::move(e), unary());
      else return e;
    }
  }

  NodePtr unary() {
    if (eat('-')) return std::make_unique<NegNode>(unary());
    if (eat('+')) return unary();
    return power();
  }

  NodePtr power() {
    NodePtr base = atom();
    if (eat('^'))
      return std::make_unique<BinNode>('^', std::move(base), unary());
    return base;
  }

  NodePtr atom() {
    skip();
    if (pos >= src.size()) fail("unexpected end of input");
    const char c = src[pos];
    if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') {
      char* end = nullptr;
      const double v = std::strtod(src.c_str() + pos, &end);
      if (end == src.c_str() + pos) fail("bad number");
      pos = static_cast<std::size_t>(end - src.c_str());
      return std::make_unique<ConstNode>(v);
    }
    if (c == '(') {
      ++pos;
      NodePtr e = expr();
      if (!eat(')')) fail("missing ')'");
      return e;
    }
    if (std::isalpha(static_cast<unsigned char>(c))) {
      std::size_t start = pos;
      while (pos < src.size() &&
             (std::isalnum(static_cast<unsigned char>(src[pos])) || src[pos] == '_'))
        ++pos;
      const std::string name = src.substr(start, pos - start);
      if (name == "pi") return std::make_unique<ConstNode>(M_PI);
      if (name.size() >= 2 && name[0] == 'x') {
        char* end = nullptr;
        const long idx = std::strtol(name.c_str() + 1, &end, 10);
        if (*end == '\0' && idx >= 1 && idx <= dim)
          return std::make_unique<VarNode>(static_cast<int>(idx - 1));
        if (*end == '\0')
          fail("variable " + name + " out of range for dimension " +
               std::to_string(dim));
      }
      static const std::vector<std::pair<std::string, Fn>> fns = {
          {"sin", Fn::Sin}, {"cos", Fn::Cos},   {"tan", Fn::Tan}, {"exp", Fn::Exp},
          {"log", Fn::Log}, {"sqrt", Fn::Sqrt}, {"abs", Fn::Abs}};
      for (const auto& [fname, f] : fns)
        if (name == fname) {
          if (!eat('(')) fail("expected '(' after " + fname);
          NodePtr a = expr();
          if (!eat(')')) fail("missing ')' after " + fname + " argument");
          return std::make_unique<CallNode>(f, std::move(a));
        }
      fail("unknown identifier '" + name + "'");
    }
    fail(std::string("unexpected character '") + c + "'");
  }
};

}  // namespace

ScalarField parse_field(const std::string& expr, int dim) {
  if (dim < 1 || dim > kMaxDim)
    throw BadParameter("parse_field supports dimensions 1.." +
                       std::to_string(kMaxDim));
  Parser p(expr, dim);
  std::shared_ptr<Node> ast(p.parse().release());
  auto value = [ast, dim](const Point& x) {
    double buf[kMaxDim] = {0, 0, 0, 0};
    for (int k = 0; k < dim; ++k) buf[k] = x[k];
    return ast->eval(buf, dim).v;
  };
  auto gradient = [ast, dim](const Point& x) {
    double buf[kMaxDim] = {0, 0, 0, 0};
    for (int k = 0; k < dim; ++k) buf[k] = x[k];
    const Dual d = ast->eval(buf, dim);
    Point g(dim);
    for (int k = 0; k < dim; ++k) g[k] = d.g[k];
    return g;
  };
  return ScalarField(expr, dim, std::move(value), std::move(gradient));
}

double validate_field_gradient(const ScalarField& u, const DomainModel& dom,
                               int n, std::uint64_t seed) {
  const CounterRng rng = CounterRng::from_seed(seed, "validate_field_gradient");
  const AxisBox& bb = dom.bounding_box();
  const int d = dom.dim();
  double worst = 0.0;
  int accepted = 0;
  for (std::uint64_t i = 0; accepted < n && i < 1000ull * static_cast<std::uint64_t>(n) + 1000; ++i) {
    Point x = rng.point_in_box(i, bb.lo, bb.hi);
    if (!dom.contains(x)) continue;
    const double h = 1e-6 * (1.0 + x.norm());
    bool usable = true;
    Point fd(d);
    for (int k = 0; k < d && usable; ++k) {
      Point xp = x, xm = x;
      xp[k] += h;
      xm[k] -= h;
      if (!dom.contains(xp) || !dom.contains(xm)) {
        usable = false;
        break;
      }
      fd[k] = (u.value(xp) - u.value(xm)) / (2.0 * h);
    }
    if (!usable) continue;
    ++accepted;
    const Point g = u.gradient(x);
    worst = std::max(worst, (g - fd).norm() / (1.0 + g.norm()));
  }
  if (accepted == 0)
    throw DegenerateDomain("validate_field_gradient found no usable interior points");
  return worst;
}

}  // namespace dirtrace
