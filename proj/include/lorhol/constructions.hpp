#pragma once

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "lorhol/metric.hpp"

namespace lorhol {

/// Antisymmetric k x k array of fields over the coordinates of a chart.
class TwoForm {
 public:
  TwoForm() = default;
  /// Zero form of size k over a chart with screen dimension n.
  TwoForm(int k, int n);
  static TwoForm constant(const Matrix& values, int n);

  int size() const noexcept { return k_; }
  int chart_screen_dim() const noexcept { return n_; }
  /// Sets the (i, j) component and the (j, i) component to its negative.
  void set(int i, int j, const ScalarField& value);
  const ScalarField& component(int i, int j) const;
  Matrix at(const Point& p) const;

 private:
  int k_ = 0;
  int n_ = 0;
  std::vector<ScalarField> comps_;  // row-major; lower entries hold the negated field
};

struct Construction {
  std::string name;
  MetricChart chart;
  Point base_point;
  ScalarField f;  // the free coefficient function
  /// Periodic part of the dz^2 coefficient (corollary family).
  std::optional<ScalarField> periodic_part;
  /// Toric kinds: two-form psi on (y1..yn, z) and a potential phi with d phi = psi.
  std::optional<TwoForm> psi;
  std::vector<ScalarField> phi;
};

/// Toric chart over the flat torus: g = 2 dx dz + 2 phi_i dy^i dz
/// + (f + phi_z + c_zz) dz^2 + sum (dy^i)^2, i.e. entry(i, z) = phi_i.
/// `phi` has n + 1 components (phi_1..phi_n, phi_z).
Construction toric_flat_torus(int n, const std::vector<ScalarField>& phi, const ScalarField& f, double c_zz = 0.0,
                              std::optional<TwoForm> psi = std::nullopt);

/// S^1-bundle over T^n defined by c dy1 ^ dy2, potential phi = c y1 dy2.
Construction example51(int n, double c, const ScalarField& f);

/// psi = dy1 ^ dz, eta = dz: g = 2 dx dz + (y1 + f + 1) dz^2 + sum (dy^i)^2.
Construction corollary_ppwave(int n, const ScalarField& f);

/// Three-dimensional chart over T^2 with the volume form (n = 1 corollary shape).
Construction example52(const ScalarField& f);

/// Smooth plateau functions of z on a chart with screen dimension n:
/// f1 = 1 on (-inf, -1], 0 on [-1/2, inf); f2 = 1 on [1, inf), 0 on (-inf, 1/2].
std::pair<ScalarField, ScalarField> bump_pair(int n = 1);

/// g = 2 dx dz + y^2 f1(z) dz^2 + y^2 f2(z) dx^2 + dy^2 on (x, y, z).
Construction footnote_counterexample();

/// (x-independent, x-dependent) default coefficient functions.
std::pair<ScalarField, ScalarField> sufficiently_generic_default(int n);

/// Demo charts by name: flat, toric-ppwave, toric-prwave, corollary,
/// footnote, example52.
Construction demo(const std::string& name);
std::vector<std::string> demo_names();

/// max |d phi - psi| over the given points (toric constructions).
double potential_residual(const Construction& c, std::span<const Point> points);

}  // namespace lorhol
