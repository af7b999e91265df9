#include "lorhol/expr.hpp"

#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <numbers>
#include <unordered_map>

namespace lorhol {
namespace detail {

enum class Op { Const, Pi, Var, Add, Sub, Mul, Div, Neg, Pow, Sin, Cos, Exp, Sqrt, Step };

struct Node {
  Op op = Op::Const;
  double value = 0.0;  // Const
  int index = 0;       // Var: coordinate, Pow: exponent
  std::shared_ptr<const Node> lhs, rhs;
};

using NodePtr = std::shared_ptr<const Node>;

namespace {

NodePtr make_const(double c) {
  auto n = std::make_shared<Node>();
  n->op = Op::Const;
  n->value = c;
  return n;
}

NodePtr make_leaf(Op op, int index = 0) {
  auto n = std::make_shared<Node>();
  n->op = op;
  n->index = index;
  return n;
}

NodePtr make_unary(Op op, NodePtr a, int index = 0) {
  auto n = std::make_shared<Node>();
  n->op = op;
  n->index = index;
  n->lhs = std::move(a);
  return n;
}

NodePtr make_binary(Op op, NodePtr a, NodePtr b) {
  auto n = std::make_shared<Node>();
  n->op = op;
  n->lhs = std::move(a);
  n->rhs = std::move(b);
  return n;
}

const char* function_name(Op op) {
  switch (op) {
    case Op::Sin: return "sin";
    case Op::Cos: return "cos";
    case Op::Exp: return "exp";
    case Op::Sqrt: return "sqrt";
    case Op::Step: return "sstep";
    default: return nullptr;
  }
}

double ipow(double a, int k) {
  bool invert = k < 0;
  unsigned e = static_cast<unsigned>(invert ? -k : k);
  double result = 1.0;
  double base = a;
  while (e != 0) {
    if (e & 1u) result *= base;
    base *= base;
    e >>= 1u;
  }
  return invert ? 1.0 / result : result;
}

// exp(-1/t) and its first two derivatives; identically zero for t <= 1/720.
void mollifier(double t, double& e0, double& e1, double& e2) {
  if (t <= 1.0 / 720.0) {
    e0 = e1 = e2 = 0.0;
    return;
  }
  const double inv = 1.0 / t;
  e0 = std::exp(-inv);
  e1 = e0 * inv * inv;
  e2 = e0 * (1.0 - 2.0 * t) * inv * inv * inv * inv;
}

void smooth_step_derivs(double t, double& s0, double& s1, double& s2) {
  double a0, a1, a2, b0, b1, b2;
  mollifier(t, a0, a1, a2);
  mollifier(1.0 - t, b0, b1, b2);
  b1 = -b1;
  const double S0 = a0 + b0, S1 = a1 + b1, S2 = a2 + b2;
  s0 = a0 / S0;
  s1 = a1 / S0 - a0 * S1 / (S0 * S0);
  s2 = a2 / S0 - 2.0 * a1 * S1 / (S0 * S0) - a0 * S2 / (S0 * S0) +
       2.0 * a0 * S1 * S1 / (S0 * S0 * S0);
}

// Scalar value and first two derivatives of a unary primitive.
void unary_derivs(Op op, int k, double a, int order, double& f0, double& f1, double& f2) {
  f1 = f2 = 0.0;
  switch (op) {
    case Op::Neg:
      f0 = -a;
      f1 = -1.0;
      return;
    case Op::Sin:
      f0 = std::sin(a);
      if (order >= 1) f1 = std::cos(a);
      f2 = -f0;
      return;
    case Op::Cos:
      f0 = std::cos(a);
      if (order >= 1) f1 = -std::sin(a);
      f2 = -f0;
      return;
    case Op::Exp:
      f0 = f1 = f2 = std::exp(a);
      return;
    case Op::Sqrt:
      if (a < 0.0) throw DomainError("sqrt of a negative number");
      f0 = std::sqrt(a);
      if (order >= 1) {
        if (a == 0.0) throw DomainError("derivative of sqrt at zero");
        f1 = 0.5 / f0;
        f2 = -0.25 / (f0 * a);
      }
      return;
    case Op::Step:
      smooth_step_derivs(a, f0, f1, f2);
      return;
    case Op::Pow:
      if (a == 0.0 && k < 0) throw DomainError("negative power of zero");
      f0 = ipow(a, k);
      if (k == 0) return;
      f1 = k * ipow(a, k - 1);
      if (k != 1) f2 = static_cast<double>(k) * (k - 1) * ipow(a, k - 2);
      return;
    default:
      throw Error("not a unary primitive");
  }
}

void collect_text(const Node& node, std::string& out) {
  char buf[64];
  switch (node.op) {
    case Op::Const:
      if (node.value < 0.0) {
        std::snprintf(buf, sizeof buf, "(-%.17g)", -node.value);
      } else {
        std::snprintf(buf, sizeof buf, "%.17g", node.value);
      }
      out += buf;
      return;
    case Op::Pi: out += "pi"; return;
    case Op::Var: return;  // handled by caller, needs n
    default: break;
  }
}

}  // namespace

// Straight-line program in SSA form; slot i holds the jet of instruction i.
class Tape {
 public:
  struct Instr {
    Op op;
    int a = -1;
    int b = -1;
    double c = 0.0;
    int k = 0;
  };

  Tape(std::span<const NodePtr> roots, int m, std::vector<int>& outputs) : m_(m) {
    std::unordered_map<const Node*, int> seen;
    outputs.clear();
    for (const auto& r : roots) outputs.push_back(emit(*r, seen));
    for (int i = 0; i < m_; ++i)
      for (int j = i; j < m_; ++j) pairs_.push_back({i, j});
  }

  int num_coords() const noexcept { return m_; }
  std::size_t root_slot() const noexcept { return code_.size() - 1; }

  std::size_t stride(int order) const {
    std::size_t s = 1;
    if (order >= 1) s += static_cast<std::size_t>(m_);
    if (order >= 2) s += pairs_.size();
    return s;
  }

  // Evaluates every slot; returns pointer to slot storage (thread-local).
  const double* run(const Point& p, int order, std::size_t& stride_out) const {
    const std::size_t s = stride(order);
    stride_out = s;
    thread_local std::vector<double> work;
    work.assign((code_.size() + 1) * s, 0.0);
    double* scratch = work.data() + code_.size() * s;
    const std::size_t H = 1 + static_cast<std::size_t>(m_);
    const std::size_t P = pairs_.size();

    for (std::size_t idx = 0; idx < code_.size(); ++idx) {
      const Instr& in = code_[idx];
      double* o = work.data() + idx * s;
      const double* A = in.a >= 0 ? work.data() + static_cast<std::size_t>(in.a) * s : nullptr;
      const double* B = in.b >= 0 ? work.data() + static_cast<std::size_t>(in.b) * s : nullptr;
      switch (in.op) {
        case Op::Const:
        case Op::Pi:
          o[0] = in.c;
          break;
        case Op::Var:
          o[0] = p[in.k];
          if (order >= 1) o[1 + in.k] = 1.0;
          break;
        case Op::Add:
          for (std::size_t t = 0; t < s; ++t) o[t] = A[t] + B[t];
          break;
        case Op::Sub:
          for (std::size_t t = 0; t < s; ++t) o[t] = A[t] - B[t];
          break;
        case Op::Mul:
          multiply(A, B, o, order, H, P);
          break;
        case Op::Div: {
          if (B[0] == 0.0) throw DomainError("division by zero");
          const double r = 1.0 / B[0];
          chain(B, scratch, r, -r * r, 2.0 * r * r * r, order, H, P);
          multiply(A, scratch, o, order, H, P);
          break;
        }
        default: {
          double f0, f1, f2;
          unary_derivs(in.op, in.k, A[0], order, f0, f1, f2);
          chain(A, o, f0, f1, f2, order, H, P);
          break;
        }
      }
    }
    return work.data();
  }

  std::size_t hess_slot(int i, int j) const {
    if (i > j) std::swap(i, j);
    // row-major packed upper triangle
    return 1 + static_cast<std::size_t>(m_) +
           static_cast<std::size_t>(i * m_ - i * (i - 1) / 2 + (j - i));
  }

 private:
  int emit(const Node& node, std::unordered_map<const Node*, int>& seen) {
    if (auto it = seen.find(&node); it != seen.end()) return it->second;
    Instr in{node.op};
    switch (node.op) {
      case Op::Const: in.c = node.value; break;
      case Op::Pi: in.c = std::numbers::pi; break;
      case Op::Var: in.k = node.index; break;
      case Op::Pow: in.k = node.index; in.a = emit(*node.lhs, seen); break;
      default:
        in.a = emit(*node.lhs, seen);
        if (node.rhs) in.b = emit(*node.rhs, seen);
        break;
    }
    code_.push_back(in);
    const int slot = static_cast<int>(code_.size()) - 1;
    seen.emplace(&node, slot);
    return slot;
  }

  void chain(const double* a, double* o, double f0, double f1, double f2, int order,
             std::size_t H, std::size_t P) const {
    o[0] = f0;
    if (order < 1) return;
    for (int i = 0; i < m_; ++i) o[1 + i] = f1 * a[1 + i];
    if (order < 2) return;
    for (std::size_t q = 0; q < P; ++q) {
      const auto [i, j] = pairs_[q];
      o[H + q] = f1 * a[H + q] + f2 * a[1 + i] * a[1 + j];
    }
  }

  void multiply(const double* a, const double* b, double* o, int order, std::size_t H,
                std::size_t P) const {
    o[0] = a[0] * b[0];
    if (order < 1) return;
    for (int i = 0; i < m_; ++i) o[1 + i] = a[0] * b[1 + i] + b[0] * a[1 + i];
    if (order < 2) return;
    for (std::size_t q = 0; q < P; ++q) {
      const auto [i, j] = pairs_[q];
      o[H + q] = a[0] * b[H + q] + b[0] * a[H + q] + a[1 + i] * b[1 + j] + a[1 + j] * b[1 + i];
    }
  }

  int m_;
  std::vector<Instr> code_;
  std::vector<std::pair<int, int>> pairs_;
};

}  // namespace detail

using detail::Node;
using detail::NodePtr;
using detail::Op;

// ---------------------------------------------------------------------------
// ScalarField

ScalarField::ScalarField(int n) : ScalarField(n, detail::make_const(0.0)) {}

ScalarField::ScalarField(int n, std::shared_ptr<const detail::Node> root)
    : n_(n), root_(std::move(root)) {
  if (n_ < 0) throw ValidationError("screen dimension must be non-negative");
  std::vector<int> outputs;
  NodePtr roots[] = {root_};
  tape_ = std::make_shared<const detail::Tape>(roots, n_ + 2, outputs);
}

ScalarField ScalarField::constant(int n, double c) { return ScalarField(n, detail::make_const(c)); }

ScalarField ScalarField::coordinate(int n, int index) {
  if (index < 0 || index > n + 1) throw DomainError("coordinate index out of range");
  return ScalarField(n, detail::make_leaf(Op::Var, index));
}

void ScalarField::check_point(const Point& p) const {
  if (p.size() != n_ + 2) throw DomainError("point has wrong number of coordinates");
}

double ScalarField::eval(const Point& p) const {
  check_point(p);
  std::size_t stride;
  const double* w = tape_->run(p, 0, stride);
  return w[tape_->root_slot() * stride];
}

Jet ScalarField::jet(const Point& p, int order) const {
  check_point(p);
  if (order < 0 || order > 2) throw DomainError("jet order must be 0, 1 or 2");
  std::size_t stride;
  const double* w = tape_->run(p, order, stride) + tape_->root_slot() * stride;
  Jet j;
  j.value = w[0];
  const int m = n_ + 2;
  if (order >= 1) j.gradient = Eigen::Map<const Vector>(w + 1, m);
  if (order >= 2) {
    j.hessian.resize(m, m);
    for (int a = 0; a < m; ++a)
      for (int b = a; b < m; ++b) j.hessian(a, b) = j.hessian(b, a) = w[tape_->hess_slot(a, b)];
  }
  return j;
}

double ScalarField::partial(const Point& p, std::span<const int> idx) const {
  if (idx.size() > 2) throw DomainError("derivatives of order above 2 are not supported");
  for (int i : idx)
    if (i < 0 || i > n_ + 1) throw DomainError("derivative index out of range");
  const Jet j = jet(p, static_cast<int>(idx.size()));
  if (idx.empty()) return j.value;
  if (idx.size() == 1) return j.gradient[idx[0]];
  return j.hessian(idx[0], idx[1]);
}

namespace {

bool depends(const Node& node, int coord) {
  if (node.op == Op::Var) return node.index == coord;
  if (node.lhs && depends(*node.lhs, coord)) return true;
  if (node.rhs && depends(*node.rhs, coord)) return true;
  return false;
}

bool is_constant_tree(const Node& node) {
  if (node.op == Op::Var) return false;
  if (node.lhs && !is_constant_tree(*node.lhs)) return false;
  if (node.rhs && !is_constant_tree(*node.rhs)) return false;
  return true;
}

bool same(const Node& a, const Node& b) {
  if (&a == &b) return true;
  if (a.op != b.op || a.index != b.index) return false;
  if (a.op == Op::Const && a.value != b.value) return false;
  if (static_cast<bool>(a.lhs) != static_cast<bool>(b.lhs)) return false;
  if (static_cast<bool>(a.rhs) != static_cast<bool>(b.rhs)) return false;
  if (a.lhs && !same(*a.lhs, *b.lhs)) return false;
  if (a.rhs && !same(*a.rhs, *b.rhs)) return false;
  return true;
}

void print(const Node& node, int n, std::string& out) {
  switch (node.op) {
    case Op::Const:
    case Op::Pi:
      detail::collect_text(node, out);
      return;
    case Op::Var:
      if (node.index == 0) out += "x";
      else if (node.index == n + 1) out += "z";
      else out += "y" + std::to_string(node.index);
      return;
    case Op::Add:
    case Op::Sub:
    case Op::Mul:
    case Op::Div: {
      const char* sym = node.op == Op::Add ? " + " : node.op == Op::Sub ? " - " : node.op == Op::Mul ? " * " : " / ";
      out += "(";
      print(*node.lhs, n, out);
      out += sym;
      print(*node.rhs, n, out);
      out += ")";
      return;
    }
    case Op::Neg:
      out += "(-";
      print(*node.lhs, n, out);
      out += ")";
      return;
    case Op::Pow:
      out += "(";
      print(*node.lhs, n, out);
      out += "^";
      out += node.index < 0 ? "(" + std::to_string(node.index) + ")" : std::to_string(node.index);
      out += ")";
      return;
    default:
      out += detail::function_name(node.op);
      out += "(";
      print(*node.lhs, n, out);
      out += ")";
      return;
  }
}

void require_same_dim(const ScalarField& a, const ScalarField& b) {
  if (a.screen_dim() != b.screen_dim())
    throw ValidationError("fields belong to charts of different dimension");
}

}  // namespace

bool ScalarField::depends_on(int coord) const { return depends(*root_, coord); }

std::optional<double> ScalarField::constant_value() const {
  if (!is_constant_tree(*root_)) return std::nullopt;
  return eval(Point::Zero(n_ + 2));
}

std::string ScalarField::to_string() const {
  std::string out;
  print(*root_, n_, out);
  return out;
}

bool ScalarField::same_tree(const ScalarField& other) const {
  return n_ == other.n_ && same(*root_, *other.root_);
}

ScalarField ScalarField::pow(int k) const { return ScalarField(n_, detail::make_unary(Op::Pow, root_, k)); }
ScalarField ScalarField::sin() const { return ScalarField(n_, detail::make_unary(Op::Sin, root_)); }
ScalarField ScalarField::cos() const { return ScalarField(n_, detail::make_unary(Op::Cos, root_)); }
ScalarField ScalarField::exp() const { return ScalarField(n_, detail::make_unary(Op::Exp, root_)); }
ScalarField ScalarField::sqrt() const { return ScalarField(n_, detail::make_unary(Op::Sqrt, root_)); }
ScalarField ScalarField::smooth_step() const { return ScalarField(n_, detail::make_unary(Op::Step, root_)); }

ScalarField operator+(const ScalarField& a, const ScalarField& b) {
  require_same_dim(a, b);
  return ScalarField(a.n_, detail::make_binary(Op::Add, a.root_, b.root_));
}
ScalarField operator-(const ScalarField& a, const ScalarField& b) {
  require_same_dim(a, b);
  return ScalarField(a.n_, detail::make_binary(Op::Sub, a.root_, b.root_));
}
ScalarField operator*(const ScalarField& a, const ScalarField& b) {
  require_same_dim(a, b);
  return ScalarField(a.n_, detail::make_binary(Op::Mul, a.root_, b.root_));
}
ScalarField operator/(const ScalarField& a, const ScalarField& b) {
  require_same_dim(a, b);
  return ScalarField(a.n_, detail::make_binary(Op::Div, a.root_, b.root_));
}
ScalarField operator-(const ScalarField& a) { return ScalarField(a.n_, detail::make_unary(Op::Neg, a.root_)); }
ScalarField operator+(const ScalarField& a, double b) { return a + ScalarField::constant(a.n_, b); }
ScalarField operator*(double a, const ScalarField& b) { return ScalarField::constant(b.n_, a) * b; }

// ---------------------------------------------------------------------------
// Parser

namespace {

class Parser {
 public:
  Parser(std::string_view src, int n, const Definitions& defs) : src_(src), n_(n), defs_(defs) {}

  NodePtr parse() {
    NodePtr e = expr();
    skip();
    if (pos_ != src_.size()) fail(ParseError::Kind::Syntax, "unexpected character");
    return e;
  }

 private:
  [[noreturn]] void fail(ParseError::Kind kind, const std::string& msg) const {
    throw ParseError(kind, pos_, msg);
  }

  void skip() {
    while (pos_ < src_.size() && (src_[pos_] == ' ' || src_[pos_] == '\t' || src_[pos_] == '\n' || src_[pos_] == '\r'))
      ++pos_;
  }

  bool accept(char c) {
    skip();
    if (pos_ < src_.size() && src_[pos_] == c) {
      ++pos_;
      return true;
    }
    return false;
  }

  void expect(char c) {
    if (!accept(c)) fail(ParseError::Kind::Syntax, std::string("expected '") + c + "'");
  }

  NodePtr expr() {
    NodePtr lhs = term();
    for (;;) {
      if (accept('+')) lhs = detail::make_binary(Op::Add, lhs, term());
      else if (accept('-')) lhs = detail::make_binary(Op::Sub, lhs, term());
      else return lhs;
    }
  }

  NodePtr term() {
    NodePtr lhs = unary();
    for (;;) {
      if (accept('*')) lhs = detail::make_binary(Op::Mul, lhs, unary());
      else if (accept('/')) lhs = detail::make_binary(Op::Div, lhs, unary());
      else return lhs;
    }
  }

  NodePtr unary() {
    if (accept('-')) return detail::make_unary(Op::Neg, unary());
    if (accept('+')) return unary();
    return power();
  }

  NodePtr power() {
    NodePtr base = primary();
    if (!accept('^')) return base;
    const bool paren = accept('(');
    int sign = 1;
    if (accept('-')) sign = -1;
    else accept('+');
    skip();
    const std::size_t start = pos_;
    while (pos_ < src_.size() && std::isdigit(static_cast<unsigned char>(src_[pos_]))) ++pos_;
    if (start == pos_) fail(ParseError::Kind::Syntax, "exponent must be an integer literal");
    int k = 0;
    auto [ptr, ec] = std::from_chars(src_.data() + start, src_.data() + pos_, k);
    if (ec != std::errc()) fail(ParseError::Kind::Syntax, "exponent out of range");
    if (paren) expect(')');
    return detail::make_unary(Op::Pow, base, sign * k);
  }

  NodePtr primary() {
    skip();
    if (pos_ >= src_.size()) fail(ParseError::Kind::Syntax, "unexpected end of expression");
    const char c = src_[pos_];
    if (c == '(') {
      ++pos_;
      NodePtr e = expr();
      expect(')');
      return e;
    }
    if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') return number();
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') return identifier();
    fail(ParseError::Kind::Syntax, std::string("unexpected character '") + c + "'");
  }

  NodePtr number() {
    const std::size_t start = pos_;
    while (pos_ < src_.size() && (std::isdigit(static_cast<unsigned char>(src_[pos_])) || src_[pos_] == '.')) ++pos_;
    if (pos_ < src_.size() && (src_[pos_] == 'e' || src_[pos_] == 'E')) {
      std::size_t look = pos_ + 1;
      if (look < src_.size() && (src_[look] == '+' || src_[look] == '-')) ++look;
      if (look < src_.size() && std::isdigit(static_cast<unsigned char>(src_[look]))) {
        pos_ = look;
        while (pos_ < src_.size() && std::isdigit(static_cast<unsigned char>(src_[pos_]))) ++pos_;
      }
    }
    double v = 0.0;
    auto [ptr, ec] = std::from_chars(src_.data() + start, src_.data() + pos_, v);
    if (ec != std::errc() || ptr != src_.data() + pos_) {
      pos_ = start;
      fail(ParseError::Kind::Syntax, "malformed number");
    }
    return detail::make_const(v);
  }

  NodePtr identifier() {
    const std::size_t start = pos_;
    while (pos_ < src_.size() && (std::isalnum(static_cast<unsigned char>(src_[pos_])) || src_[pos_] == '_')) ++pos_;
    const std::string_view name = src_.substr(start, pos_ - start);

    static constexpr std::pair<std::string_view, Op> functions[] = {
        {"sin", Op::Sin}, {"cos", Op::Cos}, {"exp", Op::Exp}, {"sqrt", Op::Sqrt}, {"sstep", Op::Step}};
    for (const auto& [fname, op] : functions) {
      if (name == fname) {
        expect('(');
        NodePtr arg = expr();
        expect(')');
        return detail::make_unary(op, arg);
      }
    }
    if (name == "pi") return detail::make_leaf(Op::Pi);
    if (name == "x") return detail::make_leaf(Op::Var, 0);
    if (name == "z") return detail::make_leaf(Op::Var, n_ + 1);
    if (name == "y" && n_ == 1) return detail::make_leaf(Op::Var, 1);
    if (name.size() > 1 && name[0] == 'y' &&
        name.find_first_not_of("0123456789", 1) == std::string_view::npos) {
      int k = 0;
      auto [ptr, ec] = std::from_chars(name.data() + 1, name.data() + name.size(), k);
      if (ec != std::errc() || k < 1 || k > n_) {
        pos_ = start;
        fail(ParseError::Kind::IndexOutOfRange,
             "coordinate '" + std::string(name) + "' out of range for n=" + std::to_string(n_));
      }
      return detail::make_leaf(Op::Var, k);
    }
    if (auto it = defs_.find(name); it != defs_.end()) {
      if (it->second.screen_dim() != n_) {
        pos_ = start;
        fail(ParseError::Kind::IndexOutOfRange, "definition '" + std::string(name) + "' has another dimension");
      }
      return it->second.root();
    }
    pos_ = start;
    fail(ParseError::Kind::UnknownIdentifier, "unknown identifier '" + std::string(name) + "'");
  }

  std::string_view src_;
  std::size_t pos_ = 0;
  int n_;
  const Definitions& defs_;
};

}  // namespace

ScalarField parse_expression(std::string_view src, int n, const Definitions& defs) {
  if (n < 0) throw ValidationError("screen dimension must be non-negative");
  Parser parser(src, n, defs);
  return ScalarField(n, parser.parse());
}

// ---------------------------------------------------------------------------
// FieldTape

double JetBuffer::hess(int k, int i, int j) const {
  if (i > j) std::swap(i, j);
  const std::size_t slot = 1 + static_cast<std::size_t>(m_) +
                           static_cast<std::size_t>(i * m_ - i * (i - 1) / 2 + (j - i));
  return data_[static_cast<std::size_t>(k) * stride_ + slot];
}

FieldTape::FieldTape(std::span<const ScalarField> outputs) {
  if (outputs.empty()) return;
  const int n = outputs.front().screen_dim();
  std::vector<NodePtr> roots;
  roots.reserve(outputs.size());
  for (const auto& f : outputs) {
    if (f.screen_dim() != n) throw ValidationError("fields belong to charts of different dimension");
    roots.push_back(f.root());
  }
  m_ = n + 2;
  tape_ = std::make_shared<const detail::Tape>(roots, m_, outputs_);
}

void FieldTape::evaluate(const Point& p, int order, JetBuffer& out) const {
  if (order < 0 || order > 2) throw DomainError("jet order must be 0, 1 or 2");
  if (!tape_) {
    out.outputs_ = 0;
    return;
  }
  if (p.size() != m_) throw DomainError("point has wrong number of coordinates");
  for (int i = 0; i < m_; ++i)
    if (!std::isfinite(p[i])) throw DomainError("point has non-finite coordinates");
  std::size_t stride;
  const double* w = tape_->run(p, order, stride);
  out.outputs_ = static_cast<int>(outputs_.size());
  out.m_ = m_;
  out.order_ = order;
  out.stride_ = stride;
  out.data_.resize(outputs_.size() * stride);
  for (std::size_t k = 0; k < outputs_.size(); ++k)
    std::copy_n(w + static_cast<std::size_t>(outputs_[k]) * stride, stride, out.data_.begin() + k * stride);
}

}  // namespace lorhol
