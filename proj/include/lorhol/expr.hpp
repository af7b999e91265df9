#pragma once

// Coefficient expressions over chart coordinates (x, y1..yn, z) with exact
// derivatives up to second order.
//
// Grammar (see docs/grammar.md):
//   expr    := term (('+' | '-') term)*
//   term    := unary (('*' | '/') unary)*
//   unary   := ('-' | '+') unary | power
//   power   := primary ('^' exponent)?
//   exponent:= ['+'|'-'] INT | '(' ['+'|'-'] INT ')'
//   primary := NUMBER | 'pi' | VAR | NAME | FUNC '(' expr ')' | '(' expr ')'
//   FUNC    := sin | cos | exp | sqrt | sstep

#include <map>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "lorhol/errors.hpp"

namespace lorhol {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

/// Coordinates ordered (x, y1, ..., yn, z).
using Point = Eigen::VectorXd;

/// Value, gradient and Hessian of a scalar field at one point.
struct Jet {
  double value = 0.0;
  Vector gradient;
  Matrix hessian;
};

namespace detail {
struct Node;
class Tape;
}  // namespace detail

/// Immutable expression tree over the coordinates of an (n+2)-dimensional
/// chart. Evaluation is pure; a field may be shared across threads.
class ScalarField {
 public:
  /// The zero field on a chart with screen dimension n.
  explicit ScalarField(int n = 0);

  static ScalarField constant(int n, double c);
  /// Coordinate function; index 0 is x, 1..n are y1..yn, n+1 is z.
  static ScalarField coordinate(int n, int index);

  int screen_dim() const noexcept { return n_; }
  int num_coords() const noexcept { return n_ + 2; }

  double eval(const Point& p) const;
  /// Truncated Taylor data of the requested order (0, 1 or 2). Entries of
  /// higher order than requested are left empty.
  Jet jet(const Point& p, int order = 2) const;
  /// Exact partial derivative for a multi-index of length 0, 1 or 2.
  double partial(const Point& p, std::span<const int> idx) const;

  /// Symbolic dependence on a coordinate (after definitions are inlined).
  bool depends_on(int coord) const;
  std::optional<double> constant_value() const;

  /// Fully parenthesised text that parses back to the same tree.
  std::string to_string() const;
  bool same_tree(const ScalarField& other) const;

  ScalarField pow(int k) const;
  ScalarField sin() const;
  ScalarField cos() const;
  ScalarField exp() const;
  ScalarField sqrt() const;
  /// Smooth transition 0 -> 1 on [0, 1] built from exp(-1/t).
  ScalarField smooth_step() const;

  friend ScalarField operator+(const ScalarField& a, const ScalarField& b);
  friend ScalarField operator-(const ScalarField& a, const ScalarField& b);
  friend ScalarField operator*(const ScalarField& a, const ScalarField& b);
  friend ScalarField operator/(const ScalarField& a, const ScalarField& b);
  friend ScalarField operator-(const ScalarField& a);
  friend ScalarField operator+(const ScalarField& a, double b);
  friend ScalarField operator*(double a, const ScalarField& b);

  const std::shared_ptr<const detail::Node>& root() const noexcept { return root_; }

 private:
  ScalarField(int n, std::shared_ptr<const detail::Node> root);
  void check_point(const Point& p) const;

  int n_;
  std::shared_ptr<const detail::Node> root_;
  std::shared_ptr<const detail::Tape> tape_;

  friend class FieldTape;
  friend ScalarField parse_expression(std::string_view, int, const std::map<std::string, ScalarField, std::less<>>&);
};

/// Named sub-expressions that may be referenced (and are inlined) while parsing.
using Definitions = std::map<std::string, ScalarField, std::less<>>;

/// Parses `src` over the coordinates of a chart with screen dimension `n`.
/// Throws ParseError (syntax, unknown identifier, index out of range).
ScalarField parse_expression(std::string_view src, int n, const Definitions& defs = {});

/// Storage for several jets evaluated together.
class JetBuffer {
 public:
  double value(int k) const { return data_[static_cast<std::size_t>(k) * stride_]; }
  double grad(int k, int i) const { return data_[static_cast<std::size_t>(k) * stride_ + 1 + i]; }
  double hess(int k, int i, int j) const;
  int num_outputs() const noexcept { return outputs_; }
  int order() const noexcept { return order_; }

 private:
  std::vector<double> data_;
  std::vector<int> hess_index_;
  int outputs_ = 0;
  int m_ = 0;
  int order_ = 0;
  std::size_t stride_ = 0;
  friend class FieldTape;
};

/// Several fields compiled into one evaluation program; shared
/// sub-expressions are computed once.
class FieldTape {
 public:
  FieldTape() = default;
  explicit FieldTape(std::span<const ScalarField> outputs);

  int num_outputs() const noexcept { return static_cast<int>(outputs_.size()); }
  void evaluate(const Point& p, int order, JetBuffer& out) const;

 private:
  std::shared_ptr<const detail::Tape> tape_;
  std::vector<int> outputs_;
  int m_ = 0;
};

}  // namespace lorhol
