// Recursive-descent parser and forward-mode evaluator for the small
// arithmetic language used to define test functions from config files.

#include <array>
#include <cctype>
#include <cmath>
#include <memory>
#include <vector>

#include "field_impl.hpp"
#include "thinfilm/rng.hpp"

namespace thinfilm {

namespace {

struct Dual {
  double v = 0.0;
  std::array<double, kMaxDim> g{};
};

enum class Op { add, sub, mul, div, pow };
enum class Fn { sin, cos, exp };

struct Node {
  enum class Kind { number, var, unary_minus, binary, call } kind;
  double num = 0.0;
  int var = 0;
  Op op = Op::add;
  Fn fn = Fn::sin;
  std::unique_ptr<Node> a, b;
};

double eval(const Node& n, std::span<const double> x) {
  switch (n.kind) {
    case Node::Kind::number: return n.num;
    case Node::Kind::var: return x[n.var];
    case Node::Kind::unary_minus: return -eval(*n.a, x);
    case Node::Kind::binary: {
      const double l = eval(*n.a, x), r = eval(*n.b, x);
      switch (n.op) {
        case Op::add: return l + r;
        case Op::sub: return l - r;
        case Op::mul: return l * r;
        case Op::div: return l / r;
        case Op::pow: return std::pow(l, r);
      }
      return 0.0;
    }
    case Node::Kind::call: {
      const double a = eval(*n.a, x);
      switch (n.fn) {
        case Fn::sin: return std::sin(a);
        case Fn::cos: return std::cos(a);
        case Fn::exp: return std::exp(a);
      }
      return 0.0;
    }
  }
  return 0.0;
}

Dual evald(const Node& n, std::span<const double> x, int d) {
  Dual out;
  switch (n.kind) {
    case Node::Kind::number:
      out.v = n.num;
      return out;
    case Node::Kind::var:
      out.v = x[n.var];
      out.g[n.var] = 1.0;
      return out;
    case Node::Kind::unary_minus: {
      out = evald(*n.a, x, d);
      out.v = -out.v;
      for (int a = 0; a < d; ++a) out.g[a] = -out.g[a];
      return out;
    }
    case Node::Kind::binary: {
      const Dual l = evald(*n.a, x, d), r = evald(*n.b, x, d);
      switch (n.op) {
        case Op::add:
          out.v = l.v + r.v;
          for (int a = 0; a < d; ++a) out.g[a] = l.g[a] + r.g[a];
          return out;
        case Op::sub:
          out.v = l.v - r.v;
          for (int a = 0; a < d; ++a) out.g[a] = l.g[a] - r.g[a];
          return out;
        case Op::mul:
          out.v = l.v * r.v;
          for (int a = 0; a < d; ++a) out.g[a] = l.g[a] * r.v + l.v * r.g[a];
          return out;
        case Op::div:
          out.v = l.v / r.v;
          for (int a = 0; a < d; ++a) out.g[a] = (l.g[a] - out.v * r.g[a]) / r.v;
          return out;
        case Op::pow: {
          out.v = std::pow(l.v, r.v);
          // d(l^r) = l^r * (r' ln l + r l'/l); constant exponents dominate in practice
          for (int a = 0; a < d; ++a) {
            double term = 0.0;
            if (r.g[a] != 0.0) term += r.g[a] * std::log(l.v);
            if (l.g[a] != 0.0) term += r.v * l.g[a] / l.v;
            out.g[a] = out.v * term;
          }
          return out;
        }
      }
      return out;
    }
    case Node::Kind::call: {
      const Dual a = evald(*n.a, x, d);
      double f = 0.0, df = 0.0;
      switch (n.fn) {
        case Fn::sin: f = std::sin(a.v); df = std::cos(a.v); break;
        case Fn::cos: f = std::cos(a.v); df = -std::sin(a.v); break;
        case Fn::exp: f = std::exp(a.v); df = f; break;
      }
      out.v = f;
      for (int k = 0; k < d; ++k) out.g[k] = df * a.g[k];
      return out;
    }
  }
  return out;
}

bool uses_var(const Node& n, int var) {
  switch (n.kind) {
    case Node::Kind::number: return false;
    case Node::Kind::var: return n.var == var;
    case Node::Kind::unary_minus: return uses_var(*n.a, var);
    case Node::Kind::binary: return uses_var(*n.a, var) || uses_var(*n.b, var);
    case Node::Kind::call: return uses_var(*n.a, var);
  }
  return false;
}

class Parser {
 public:
  Parser(const std::string& text, int d) : text_(text), d_(d) {}

  std::unique_ptr<Node> parse() {
    auto e = expr();
    skip_ws();
    if (pos_ != text_.size())
      throw Error(Errc::parse_error, "unexpected input at offset " + std::to_string(pos_), pos_);
    return e;
  }

 private:
  const std::string& text_;
  int d_;
  std::size_t pos_ = 0;

  void skip_ws() {
    while (pos_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[pos_]))) ++pos_;
  }

  bool consume(char c) {
    skip_ws();
    if (pos_ < text_.size() && text_[pos_] == c) {
      ++pos_;
      return true;
    }
    return false;
  }

  char peek() {
    skip_ws();
    return pos_ < text_.size() ? text_[pos_] : '\0';
  }

  [[noreturn]] void fail(const std::string& what) {
    skip_ws();
    throw Error(Errc::parse_error, what + " at offset " + std::to_string(pos_), pos_);
  }

  std::unique_ptr<Node> expr() {
    auto lhs = term();
    for (;;) {
      if (consume('+')) lhs = binary(Op::add, std::move(lhs), term());
      else if (consume('-')) lhs = binary(Op::sub, std::move(lhs), term());
      else return lhs;
    }
  }

  std::unique_ptr<Node> term() {
    auto lhs = unary();
    for (;;) {
      if (consume('*')) lhs = binary(Op::mul, std::move(lhs), unary());
      else if (consume('/')) lhs = binary(Op::div, std::move(lhs), unary());
      else return lhs;
    }
  }

  std::unique_ptr<Node> unary() {
    if (consume('-')) {
      auto n = std::make_unique<Node>();
      n->kind = Node::Kind::unary_minus;
      n->a = unary();
      return n;
    }
    return power();
  }

  std::unique_ptr<Node> power() {
    auto base = primary();
    if (consume('^')) return binary(Op::pow, std::move(base), unary());  // right-assoc
    return base;
  }

  std::unique_ptr<Node> primary() {
    skip_ws();
    if (pos_ >= text_.size()) fail("expected operand");
    const char c = text_[pos_];
    if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') return number();
    if (std::isalpha(static_cast<unsigned char>(c))) return ident();
    if (consume('(')) {
      auto e = expr();
      if (!consume(')')) fail("expected ')'");
      return e;
    }
    fail("expected operand");
  }

  std::unique_ptr<Node> number() {
    const char* begin = text_.c_str() + pos_;
    char* end = nullptr;
    double v = std::strtod(begin, &end);
    if (end == begin) fail("expected number");
    pos_ += std::size_t(end - begin);
    auto n = std::make_unique<Node>();
    n->kind = Node::Kind::number;
    n->num = v;
    return n;
  }

  std::unique_ptr<Node> ident() {
    const std::size_t start = pos_;
    while (pos_ < text_.size() &&
           (std::isalnum(static_cast<unsigned char>(text_[pos_])) || text_[pos_] == '_'))
      ++pos_;
    const std::string name = text_.substr(start, pos_ - start);
    if (name.size() >= 2 && name[0] == 'x') {
      char* end = nullptr;
      long idx = std::strtol(name.c_str() + 1, &end, 10);
      if (*end == '\0') {
        if (idx < 1 || idx > d_)
          throw Error(Errc::unknown_variable,
                      "variable " + name + " out of range for dimension " + std::to_string(d_), start);
        auto n = std::make_unique<Node>();
        n->kind = Node::Kind::var;
        n->var = int(idx - 1);
        return n;
      }
    }
    Fn fn;
    if (name == "sin") fn = Fn::sin;
    else if (name == "cos") fn = Fn::cos;
    else if (name == "exp") fn = Fn::exp;
    else throw Error(Errc::unknown_variable, "unknown identifier '" + name + "'", start);
    if (!consume('(')) fail("expected '(' after " + name);
    auto n = std::make_unique<Node>();
    n->kind = Node::Kind::call;
    n->fn = fn;
    n->a = expr();
    if (!consume(')')) fail("expected ')'");
    return n;
  }

  static std::unique_ptr<Node> binary(Op op, std::unique_ptr<Node> a, std::unique_ptr<Node> b) {
    auto n = std::make_unique<Node>();
    n->kind = Node::Kind::binary;
    n->op = op;
    n->a = std::move(a);
    n->b = std::move(b);
    return n;
  }
};

class ExpressionImpl final : public FieldImpl {
 public:
  ExpressionImpl(std::unique_ptr<Node> root, std::string text, int d)
      : root_(std::move(root)), text_(std::move(text)), d_(d) {
    horizontal_ = !uses_var(*root_, d_ - 1);
  }

  int dim() const override { return d_; }
  double value(std::span<const double> x) const override { return eval(*root_, x); }
  bool has_gradient() const override { return true; }
  void gradient(std::span<const double> x, std::span<double> out) const override {
    const Dual r = evald(*root_, x, d_);
    for (int a = 0; a < d_; ++a) out[a] = r.g[a];
  }
  bool horizontal_only() const override { return horizontal_; }

  SmoothnessBounds bounds(const Box& box) const override {
    // Sampled gradient sup with a 1.5 safety factor; curvature bounds are not
    // estimated, so the dense oracle keeps its conservative path here.
    const CounterRng rng = CounterRng::make(0xE57D0C5ULL, 0);
    double sup = 0.0;
    std::array<double, kMaxDim> x{}, g{};
    for (int i = 0; i < 10000; ++i) {
      for (int a = 0; a < d_; ++a)
        x[a] = box.lo[a] + rng.uniform(std::uint64_t(i), std::uint32_t(a)) * box.extent(a);
      gradient({x.data(), std::size_t(d_)}, {g.data(), std::size_t(d_)});
      double n2 = 0.0;
      for (int a = 0; a < d_; ++a) n2 += g[a] * g[a];
      sup = std::max(sup, n2);
    }
    SmoothnessBounds b;
    b.lip = 1.5 * std::sqrt(sup);
    b.estimated = true;
    return b;
  }

  std::string describe() const override { return "expr:" + text_; }

 private:
  std::unique_ptr<Node> root_;
  std::string text_;
  int d_;
  bool horizontal_ = false;
};

}  // namespace

FieldFunction parse_expression(const std::string& text, int d) {
  if (d < 1 || d > kMaxDim) throw Error(Errc::invalid_dimension, "dimension out of range");
  Parser p(text, d);
  auto root = p.parse();
  return FieldFunction(std::make_shared<ExpressionImpl>(std::move(root), text, d));
}

}  // namespace thinfilm
