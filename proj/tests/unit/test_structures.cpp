#include <algorithm>
#include <array>
#include <complex>
#include <functional>
#include <numeric>

#include "doctest.h"
#include "lorhol/linalg.hpp"
#include "lorhol/structures.hpp"
#include "support.hpp"

using namespace lorhol;
using namespace lorhol::testing;

namespace {

// Antisymmetric basis of so(d) and the kernel dimension of a linear map on it.
std::vector<Matrix> so_basis(int d) {
  std::vector<Matrix> out;
  for (int i = 0; i < d; ++i)
    for (int j = i + 1; j < d; ++j) out.push_back(elementary_two_form(d, i, j));
  return out;
}

int kernel_dim(const std::vector<Matrix>& basis, const std::function<Vector(const Matrix&)>& map) {
  Matrix cols(map(basis[0]).size(), static_cast<Eigen::Index>(basis.size()));
  for (std::size_t k = 0; k < basis.size(); ++k) cols.col(static_cast<Eigen::Index>(k)) = map(basis[k]);
  return static_cast<int>(basis.size()) - numerical_rank(cols, 1e-9);
}

Vector form_vector(const ConstantForm& w) {
  const int d = w.dim();
  const int k = w.degree();
  int total = 1;
  for (int i = 0; i < k; ++i) total *= d;
  Vector v(total);
  std::vector<int> idx(k);
  for (int r = 0; r < total; ++r) {
    int t = r;
    for (int s = k - 1; s >= 0; --s) {
      idx[s] = t % d;
      t /= d;
    }
    v[r] = w(idx);
  }
  return v;
}

Vector g2_residual_vector(const Matrix& psi) {
  const auto C = g2_contraction(psi, standard_g2_form(), Matrix::Identity(7, 7));
  Vector v(343);
  for (int a = 0; a < 7; ++a)
    for (int b = 0; b < 7; ++b)
      for (int c = 0; c < 7; ++c)
        v[(a * 7 + b) * 7 + c] = C[(a * 7 + b) * 7 + c] + C[(b * 7 + c) * 7 + a] + C[(c * 7 + a) * 7 + b];
  return v;
}

Vector spin7_residual_vector(const Matrix& psi) {
  const auto C = spin7_contraction(psi, standard_spin7_form(), Matrix::Identity(8, 8));
  auto at = [&](int a, int b, int c, int d) { return C[((a * 8 + b) * 8 + c) * 8 + d]; };
  Vector v(4096);
  for (int a = 0; a < 8; ++a)
    for (int b = 0; b < 8; ++b)
      for (int c = 0; c < 8; ++c)
        for (int d = 0; d < 8; ++d)
          v[((a * 8 + b) * 8 + c) * 8 + d] = at(a, b, c, d) - at(b, c, d, a) + at(c, d, a, b) - at(d, a, b, c);
  return v;
}

Matrix random_two_form(Rng& rng, int d) {
  Matrix w = Matrix::Zero(d, d);
  for (int i = 0; i < d; ++i)
    for (int j = i + 1; j < d; ++j) {
      w(i, j) = uniform(rng, -1, 1);
      w(j, i) = -w(i, j);
    }
  return w;
}

// Compatible pair (J, G): G = B^{-T} B^{-1}, J = B J0 B^{-1}.
std::pair<Matrix, Matrix> random_hermitian_pair(Rng& rng, int d) {
  Matrix B = Matrix::Identity(d, d);
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < d; ++j) B(i, j) += 0.3 * uniform(rng, -1, 1);
  const Matrix Bi = B.inverse();
  return {B * standard_J(d) * Bi, Bi.transpose() * Bi};
}

// Quaternionic triple on R^4 with J1 = standard J.
std::array<Matrix, 3> quaternion_triple() {
  Matrix J1 = standard_J(4);
  Matrix J2 = Matrix::Zero(4, 4);
  J2(2, 0) = 1;
  J2(0, 2) = -1;
  J2(1, 3) = 1;
  J2(3, 1) = -1;
  return {J1, J2, J1 * J2};
}

}  // namespace

TEST_SUITE("structures") {
  TEST_CASE("(1,1) residual on the standard complex structure") {
    const Matrix J = standard_J(4);
    CHECK(one_one_residual(elementary_two_form(4, 0, 1), J) == 0.0);
    CHECK(one_one_residual(elementary_two_form(4, 0, 2), J) == doctest::Approx(1.0));
    CHECK(one_one_residual(Matrix::Zero(4, 4), J) == 0.0);
    CHECK_THROWS_AS(one_one_residual(Matrix::Zero(3, 3), Matrix::Zero(3, 3)), ValidationError);
    CHECK_THROWS_AS(one_one_residual(Matrix::Zero(4, 4), Matrix::Zero(2, 2)), ValidationError);
  }

  TEST_CASE("(1,1) residual under orthogonal changes of basis") {
    // zero stays zero exactly; the Frobenius size of the residual tensor is invariant
    Rng rng(51);
    for (int trial = 0; trial < 20; ++trial) {
      const int d = 2 * uniform_int(rng, 1, 3);
      const Matrix J = standard_J(d);
      const Matrix R = random_orthogonal(rng, d);
      const Matrix psi = random_two_form(rng, d);
      const Matrix psi11 = 0.5 * (psi + J.transpose() * psi * J);
      const Matrix Jr = R.transpose() * J * R;
      CHECK(one_one_residual(psi11, J) < 1e-14);
      CHECK(one_one_residual(R.transpose() * psi11 * R, Jr) < 1e-10);
      const double before = (J.transpose() * psi + psi * J).norm();
      const Matrix psir = R.transpose() * psi * R;
      CHECK((Jr.transpose() * psir + psir * Jr).norm() == doctest::Approx(before).epsilon(1e-10));
    }
  }

  TEST_CASE("dual Lefschetz values on flat T^4") {
    const Matrix J = standard_J(4);
    const Matrix G = Matrix::Identity(4, 4);
    const Matrix omega = J.transpose() * G;
    CHECK(dual_lefschetz(omega, J, G) == 2.0);
    CHECK(dual_lefschetz(elementary_two_form(4, 0, 1), J, G) == 1.0);
    CHECK(dual_lefschetz(elementary_two_form(4, 0, 1) - elementary_two_form(4, 2, 3), J, G) == 0.0);
  }

  TEST_CASE("dual Lefschetz equals half the trace of psi J G^-1") {
    Rng rng(52);
    for (int trial = 0; trial < 20; ++trial) {
      const int d = 2 * uniform_int(rng, 1, 4);
      const auto [J, G] = random_hermitian_pair(rng, d);
      const Matrix psi = random_two_form(rng, d);
      CHECK(dual_lefschetz(psi, J, G) == doctest::Approx(0.5 * (psi * J * G.inverse()).trace()).epsilon(1e-10));
      const Matrix omega = J.transpose() * G;
      CHECK(dual_lefschetz(omega, J, G) == doctest::Approx(d / 2).epsilon(1e-12));
    }
  }

  TEST_CASE("dual Lefschetz is linear") {
    Rng rng(53);
    const auto [J, G] = random_hermitian_pair(rng, 6);
    for (int trial = 0; trial < 10; ++trial) {
      const Matrix a = random_two_form(rng, 6), b = random_two_form(rng, 6);
      const double s = uniform(rng, -2, 2), t = uniform(rng, -2, 2);
      CHECK(dual_lefschetz(s * a + t * b, J, G) ==
            doctest::Approx(s * dual_lefschetz(a, J, G) + t * dual_lefschetz(b, J, G)).epsilon(1e-12));
    }
  }

  TEST_CASE("unitary frames") {
    Rng rng(54);
    const auto [J, G] = random_hermitian_pair(rng, 6);
    const Matrix E = unitary_frame(J, G);
    Matrix full(6, 6);
    full << E, J * E;
    CHECK((full.transpose() * G * full - Matrix::Identity(6, 6)).cwiseAbs().maxCoeff() < 1e-12);
    Matrix bad = standard_J(4);
    bad(0, 1) = -2.0;
    CHECK_THROWS_AS(unitary_frame(bad, Matrix::Identity(4, 4)), ValidationError);
  }

  TEST_CASE("primitivity over a grid") {
    const int n = 4;
    TwoForm prim(n, n);
    prim.set(0, 1, ScalarField::constant(n, 1.0));
    prim.set(2, 3, ScalarField::constant(n, -1.0));
    const auto grid = probe_points(Box::cube(n + 2, 0.0, 1.0), 8);
    const Matrix J = standard_J(4);
    const Matrix G = Matrix::Identity(4, 4);
    CHECK(check_primitive(prim, J, G, grid) == 0.0);
    TwoForm ky(n, n);
    ky.set(0, 1, parse_expression("1 + y1^2", n));
    CHECK(check_primitive(ky, J, G, grid) > 1.0);
    CHECK(check_one_one(ky, J, grid[0]) == 0.0);
  }

  TEST_CASE("hyperkahler condition") {
    const auto [J1, J2, J3] = quaternion_triple();
    CHECK((J3 * J3 + Matrix::Identity(4, 4)).cwiseAbs().maxCoeff() < 1e-15);
    const Matrix w1 = J1.transpose(), w3 = J3.transpose();
    CHECK(check_hyperkahler(Matrix::Zero(4, 4), J1, J2) == 0.0);
    CHECK(check_hyperkahler(w1, J1, J2) > 0.5);
    CHECK(check_hyperkahler(w3, J1, J2) > 0.5);
    // forms of the opposite duality are (1,1) for the whole triple
    const Matrix asd = elementary_two_form(4, 0, 1) - elementary_two_form(4, 2, 3);
    const Matrix asd_other = (elementary_two_form(4, 0, 2) + elementary_two_form(4, 1, 3)).eval();
    const double r1 = check_hyperkahler(asd, J1, J2), r2 = check_hyperkahler(asd_other, J1, J2);
    CHECK(std::min(r1, r2) == 0.0);
    CHECK_THROWS_AS(check_hyperkahler(Matrix::Zero(4, 4), J1, J1), ValidationError);
    CHECK_THROWS_AS(check_hyperkahler(Matrix::Zero(2, 2), standard_J(2), standard_J(2)), ValidationError);
  }

  TEST_CASE("constant forms are alternating") {
    const ConstantForm phi = standard_g2_form();
    CHECK(phi.at(0, 1, 2) == 1.0);
    CHECK(phi.at(1, 0, 2) == -1.0);
    CHECK(phi.at(2, 0, 1) == 1.0);
    CHECK(phi.at(1, 4, 6) == -1.0);
    CHECK(phi.at(0, 0, 2) == 0.0);
    int nonzero = 0;
    for (int a = 0; a < 7; ++a)
      for (int b = a + 1; b < 7; ++b)
        for (int c = b + 1; c < 7; ++c) nonzero += phi.at(a, b, c) != 0.0;
    CHECK(nonzero == 7);
    const ConstantForm omega = standard_spin7_form();
    int terms = 0;
    for (int a = 0; a < 8; ++a)
      for (int b = a + 1; b < 8; ++b)
        for (int c = b + 1; c < 8; ++c)
          for (int d = c + 1; d < 8; ++d) terms += omega.at(a, b, c, d) != 0.0;
    CHECK(terms == 14);
  }

  TEST_CASE("Hodge star squares to the expected sign") {
    Rng rng(55);
    for (int d : {4, 5, 7}) {
      for (int k = 1; k < d; ++k) {
        ConstantForm w(d, k);
        std::vector<int> idx(k);
        for (int t = 0; t < 5; ++t) {
          std::vector<int> pool(d);
          std::iota(pool.begin(), pool.end(), 0);
          std::shuffle(pool.begin(), pool.end(), rng);
          std::copy(pool.begin(), pool.begin() + k, idx.begin());
          w.set(idx, uniform(rng, -1, 1));
        }
        const double sign = (k * (d - k)) % 2 == 0 ? 1.0 : -1.0;
        CHECK((form_vector(hodge_star(hodge_star(w))) - sign * form_vector(w)).cwiseAbs().maxCoeff() < 1e-15);
      }
    }
    const ConstantForm omega = standard_spin7_form();
    const Vector o = form_vector(omega), so = form_vector(hodge_star(omega));
    CHECK(std::min((o - so).cwiseAbs().maxCoeff(), (o + so).cwiseAbs().maxCoeff()) == 0.0);
  }

  TEST_CASE("stabilizers of the standard forms have dimensions 14 and 21") {
    const auto b7 = so_basis(7);
    const auto b8 = so_basis(8);
    const ConstantForm phi = standard_g2_form();
    const ConstantForm omega = standard_spin7_form();
    CHECK(kernel_dim(b7, [&](const Matrix& A) { return form_vector(derivation_action(A, phi)); }) == 14);
    CHECK(kernel_dim(b8, [&](const Matrix& A) { return form_vector(derivation_action(A, omega)); }) == 21);
    CHECK(kernel_dim(b7, g2_residual_vector) == 14);
    CHECK(kernel_dim(b8, spin7_residual_vector) == 21);
  }

  TEST_CASE("contraction conditions vanish on stabilizer elements") {
    const auto b7 = so_basis(7);
    Matrix cols(343, 21);
    for (int k = 0; k < 21; ++k) cols.col(k) = form_vector(derivation_action(b7[k], standard_g2_form()));
    const Matrix K = null_space(cols, 1e-9);
    REQUIRE(K.cols() == 14);
    Rng rng(56);
    for (int trial = 0; trial < 5; ++trial) {
      const Vector c = K * random_point(rng, 14);
      Matrix A = Matrix::Zero(7, 7);
      for (int k = 0; k < 21; ++k) A += c[k] * b7[k];
      CHECK(g2_condition(A, standard_g2_form(), Matrix::Identity(7, 7)) < 1e-12);
      CHECK(g2_condition(random_two_form(rng, 7), standard_g2_form(), Matrix::Identity(7, 7)) > 1e-3);
    }
    const auto b8 = so_basis(8);
    Matrix cols8(4096, 28);
    for (int k = 0; k < 28; ++k) cols8.col(k) = form_vector(derivation_action(b8[k], standard_spin7_form()));
    const Matrix K8 = null_space(cols8, 1e-9);
    REQUIRE(K8.cols() == 21);
    const Vector c = K8 * random_point(rng, 21);
    Matrix A = Matrix::Zero(8, 8);
    for (int k = 0; k < 28; ++k) A += c[k] * b8[k];
    CHECK(spin7_condition(A, standard_spin7_form(), Matrix::Identity(8, 8)) < 1e-12);
    CHECK(spin7_condition(random_two_form(rng, 8), standard_spin7_form(), Matrix::Identity(8, 8)) > 1e-3);
  }

  TEST_CASE("contraction conditions are zero on zero and linear") {
    Rng rng(57);
    const Matrix I7 = Matrix::Identity(7, 7), I8 = Matrix::Identity(8, 8);
    CHECK(g2_condition(Matrix::Zero(7, 7), standard_g2_form(), I7) == 0.0);
    CHECK(spin7_condition(Matrix::Zero(8, 8), standard_spin7_form(), I8) == 0.0);
    const Matrix p7 = random_two_form(rng, 7), p8 = random_two_form(rng, 8);
    CHECK(g2_condition(3.0 * p7, standard_g2_form(), I7) ==
          doctest::Approx(3.0 * g2_condition(p7, standard_g2_form(), I7)).epsilon(1e-13));
    CHECK(spin7_condition(-2.0 * p8, standard_spin7_form(), I8) ==
          doctest::Approx(2.0 * spin7_condition(p8, standard_spin7_form(), I8)).epsilon(1e-13));
    CHECK_THROWS_AS(g2_condition(Matrix::Zero(6, 6), standard_g2_form(), I7), ValidationError);
    CHECK_THROWS_AS(spin7_condition(Matrix::Zero(7, 7), standard_spin7_form(), I8), ValidationError);
  }

  TEST_CASE("screen twist is minus half the potential's differential") {
    Rng rng(58);
    for (double cval : {1.0, -2.0, 0.7}) {
      const Construction c = example51(2, cval, sufficiently_generic_default(2).first);
      for (const auto& p : probe_points(c.chart.domain(), 5, 4)) {
        const Matrix tw = screen_twist(c.chart, p);
        const Matrix dphi = c.psi->at(p).topLeftCorner(2, 2);
        CHECK((tw + 0.5 * dphi).cwiseAbs().maxCoeff() < 1e-12);
      }
    }
    const int n = 2;
    std::vector<ScalarField> phi(n + 1, ScalarField(n));
    phi[0] = parse_expression("sin(y2)*z", n);
    phi[1] = parse_expression("y1^2 + cos(y1*y2)", n);
    const Construction c = toric_flat_torus(n, phi, ScalarField(n));
    const Point p = random_point(rng, 4, 0.0, 1.0);
    const Matrix tw = screen_twist(c.chart, p);
    const Jet a = phi[0].jet(p), b = phi[1].jet(p);
    const double dphi12 = b.gradient[1] - a.gradient[2];
    CHECK(tw(0, 1) == doctest::Approx(-0.5 * dphi12).epsilon(1e-12));
    CHECK((tw + tw.transpose()).cwiseAbs().maxCoeff() < 1e-12);
  }

  TEST_CASE("SU phase identity on toric charts") {
    const Matrix J = standard_J(2);
    const std::vector<double> dz{0.0, 0.5, M_PI / 2, M_PI};
    // twist dy1^dy2 has Lambda = 1
    const Construction one = example51(2, -2.0, sufficiently_generic_default(2).first);
    const auto grid = probe_points(one.chart.domain(), 3, 2);
    const double lam = dual_lefschetz(screen_twist(one.chart, grid[0]), J, Matrix::Identity(2, 2));
    CHECK(lam == doctest::Approx(1.0).epsilon(1e-12));
    const SuPhaseResult r = su_phase_check(one.chart, J, lam, grid, dz);
    CHECK(r.residual < 1e-6);
    CHECK(std::abs(r.phases[0] - std::complex<double>(1.0, 0.0)) < 1e-14);
    CHECK(std::abs(r.phases[3] - std::complex<double>(-1.0, 0.0)) < 1e-6);
    CHECK(su_phase_check(one.chart, J, -lam, grid, dz).residual > 1.0);

    // primitive twist: phase stays 1
    const int n = 4;
    std::vector<ScalarField> phi(n + 1, ScalarField(n));
    phi[1] = 0.8 * ScalarField::coordinate(n, 1);
    phi[3] = -0.8 * ScalarField::coordinate(n, 3);
    const Construction prim = toric_flat_torus(n, phi, ScalarField(n));
    const Matrix J4 = standard_J(4);
    const auto g4 = probe_points(prim.chart.domain(), 2, 5);
    CHECK(dual_lefschetz(screen_twist(prim.chart, g4[0]), J4, Matrix::Identity(4, 4)) == doctest::Approx(0.0));
    const SuPhaseResult rp = su_phase_check(prim.chart, J4, 0.0, g4, dz);
    CHECK(rp.residual < 1e-6);
    for (const auto& ph : rp.phases) CHECK(std::abs(ph - std::complex<double>(1.0, 0.0)) < 1e-6);
  }
}
