#pragma once

#include <complex>
#include <vector>

#include "lorhol/constructions.hpp"
#include "lorhol/metric.hpp"

namespace lorhol {

/// Totally antisymmetric constant form of the given degree on R^dim.
class ConstantForm {
 public:
  ConstantForm(int dim, int degree);

  int dim() const noexcept { return dim_; }
  int degree() const noexcept { return degree_; }
  double operator()(std::span<const int> idx) const;
  double at(int a, int b, int c) const;
  double at(int a, int b, int c, int d) const;
  /// Sets one component and all its permutations (with signs).
  void set(std::span<const int> idx, double value);
  double max_abs() const;

 private:
  std::size_t offset(std::span<const int> idx) const;
  int dim_;
  int degree_;
  std::vector<double> data_;
};

/// e123 + e145 + e167 + e246 - e257 - e347 - e356 (indices 1..7 mapped to 0..6).
ConstantForm standard_g2_form();
/// e0 ^ phi + *phi on R^8 = R e0 + R^7.
ConstantForm standard_spin7_form();
/// Hodge star of a form on Euclidean R^dim with orientation e_0 ^ ... ^ e_{dim-1}.
ConstantForm hodge_star(const ConstantForm& w);
/// Action of the endomorphism A as a derivation: -w(A., ., .) - ...
ConstantForm derivation_action(const Matrix& A, const ConstantForm& w);

/// max |psi(J d_j, d_l) + psi(d_j, J d_l)|; zero iff psi is of type (1,1).
double one_one_residual(const Matrix& psi, const Matrix& J);
double check_one_one(const TwoForm& psi, const Matrix& J, const Point& p);

/// Columns e_1..e_m of a unitary frame of (J, G): Gram-Schmidt over the
/// coordinate basis, skipping the complex lines already spanned.
Matrix unitary_frame(const Matrix& J, const Matrix& G);

/// Lambda psi = sum psi(e_i, J e_i) over a unitary frame.
double dual_lefschetz(const Matrix& psi, const Matrix& J, const Matrix& G);
/// max |Lambda psi| over the points, with G taken as the identity.
double check_primitive(const TwoForm& psi, const Matrix& J, const Matrix& G, std::span<const Point> grid);

/// max of the (1,1) residuals for J1 and J2; requires n = 0 mod 4 and J1 J2 = -J2 J1.
double check_hyperkahler(const Matrix& psi, const Matrix& J1, const Matrix& J2);

/// C(a, b, c) = sum psi_{a m} G^{m k} phi_{b k c}.
std::vector<double> g2_contraction(const Matrix& psi, const ConstantForm& phi, const Matrix& G);
/// max-abs of the cyclic sum of g2_contraction over (a, b, c).
double g2_condition(const Matrix& psi, const ConstantForm& phi, const Matrix& G);

/// C(a, b, c, d) = sum psi_{a m} G^{m k} Omega_{b k c d}.
std::vector<double> spin7_contraction(const Matrix& psi, const ConstantForm& omega, const Matrix& G);
/// max-abs of C(abcd) - C(bcda) + C(cdab) - C(dabc).
double spin7_condition(const Matrix& psi, const ConstantForm& omega, const Matrix& G);

/// <nabla_{d_z} Y_j, Y_l> for the horizontal screen frame of a Walker chart.
Matrix screen_twist(const MetricChart& M, const Point& p);

struct SuPhaseResult {
  double residual = 0.0;
  std::vector<std::complex<double>> phases;    // measured, one per (point, dz)
  std::vector<std::complex<double>> expected;  // exp(-i lambda dz)
};

/// Transports a unitary screen frame along z by each dz and compares the
/// complex volume form of (J, screen metric) on the transported frame with
/// exp(-i lambda dz).
SuPhaseResult su_phase_check(const MetricChart& M, const Matrix& J, double lambda, std::span<const Point> grid,
                             std::span<const double> dz, double transport_tol = 1e-11);

}  // namespace lorhol
