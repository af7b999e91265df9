#pragma once

#include <cstdint>
#include <optional>
#include <utility>
#include <vector>

#include "lorhol/expr.hpp"

namespace lorhol {

/// Axis-aligned box in chart coordinates.
struct Box {
  Vector lo;
  Vector hi;

  static Box cube(int dim, double lo, double hi);
  bool contains(const Point& p) const;
  Point center() const { return 0.5 * (lo + hi); }
  Box shrink(double margin) const;
  int dim() const { return static_cast<int>(lo.size()); }
};

/// `count` quasi-random points in `box` (Halton sequence, seeded shift).
std::vector<Point> probe_points(const Box& box, int count, std::uint64_t seed = 0);

struct WalkerMeta {
  ScalarField f;
  std::vector<ScalarField> u;
  std::vector<std::vector<ScalarField>> gbase;
};

/// Metric value and first/second coordinate derivatives at a point.
/// dg[k](i,j) = d_k g_ij, d2g[k*m+l](i,j) = d_k d_l g_ij.
struct MetricJet {
  Matrix g;
  std::vector<Matrix> dg;
  std::vector<Matrix> d2g;
};

/// gamma[k](i,j) = Gamma^k_{ij}.
using Christoffel = std::vector<Matrix>;

/// Components R^l_{ijk} with R(d_i, d_j) d_k = R^l_{ijk} d_l.
class CurvatureTensor {
 public:
  explicit CurvatureTensor(int m = 0) : m_(m), data_(static_cast<std::size_t>(m) * m * m * m, 0.0) {}
  int dim() const noexcept { return m_; }
  double& operator()(int l, int i, int j, int k) { return data_[index(l, i, j, k)]; }
  double operator()(int l, int i, int j, int k) const { return data_[index(l, i, j, k)]; }
  /// Endomorphism R(u, v) as an m x m matrix acting on column vectors.
  Matrix endomorphism(const Vector& u, const Vector& v) const;
  /// R_{lijk} = g_{la} R^a_{ijk}.
  CurvatureTensor lowered(const Matrix& g) const;
  double max_abs() const;

 private:
  std::size_t index(int l, int i, int j, int k) const {
    return ((static_cast<std::size_t>(l) * m_ + i) * m_ + j) * m_ + k;
  }
  int m_;
  std::vector<double> data_;
};

class MetricChart {
 public:
  MetricChart() = default;

  int screen_dim() const noexcept { return n_; }
  int dim() const noexcept { return n_ + 2; }
  const ScalarField& entry(int i, int j) const;
  bool is_walker() const noexcept { return walker_.has_value(); }
  const std::optional<WalkerMeta>& walker_meta() const noexcept { return walker_; }

  /// Region used for probe points, holonomy loops and default base points.
  const Box& domain() const noexcept { return domain_; }
  void set_domain(const Box& box);

  Matrix metric_at(const Point& p) const;
  Matrix inverse_at(const Point& p) const;
  /// (negative count, positive count) of the eigenvalues of g(p).
  std::pair<int, int> signature_at(const Point& p) const;
  MetricJet jet(const Point& p, int order) const;

  Christoffel christoffel(const Point& p) const;
  CurvatureTensor riemann(const Point& p) const;
  /// -Gamma^k_{ij} v^i v^j.
  Vector geodesic_acceleration(const Point& p, const Vector& v) const;
  /// Matrix C(k, j) = Gamma^k_{ij} d^i.
  Matrix connection_along(const Point& p, const Vector& d) const;
  /// Coefficient of R^Xi(d_i, d_j) d_x on d_x (Walker charts only).
  double xi_curvature(const Point& p, int i, int j) const;

  /// Throws ValidationError unless the signature is (1, n+1) at every point.
  void validate_lorentzian(std::span<const Point> points) const;

 private:
  friend MetricChart assemble_walker(int, const ScalarField&, const std::vector<ScalarField>&,
                                     const std::vector<std::vector<ScalarField>>&, std::optional<Box>);
  friend MetricChart assemble_general(int, const std::vector<std::vector<ScalarField>>&);

  void compile();
  Matrix inverse_from(const Matrix& g) const;

  int n_ = 0;
  std::vector<ScalarField> entries_;  // row-major m x m
  std::optional<WalkerMeta> walker_;
  Box domain_;
  FieldTape tape_;
  std::vector<std::pair<int, int>> slots_;  // tape output -> (i, j), i <= j
};

/// Walker chart 2dxdz + u_i dy^i dz + f dz^2 + gbase_ab dy^a dy^b.
/// u and gbase must not depend on x; gbase is checked to be positive
/// definite at quasi-random probe points of `probe_box` (default unit cube).
MetricChart assemble_walker(int n, const ScalarField& f, const std::vector<ScalarField>& u,
                            const std::vector<std::vector<ScalarField>>& gbase,
                            std::optional<Box> probe_box = std::nullopt);

/// Chart from an explicit symmetric matrix of entries.
MetricChart assemble_general(int n, const std::vector<std::vector<ScalarField>>& entries);

}  // namespace lorhol
