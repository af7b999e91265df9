#include "doctest.h"
#include "lorhol/constructions.hpp"
#include "lorhol/holonomy.hpp"
#include "lorhol/linalg.hpp"
#include "support.hpp"

using namespace lorhol;
using namespace lorhol::testing;

namespace {

Matrix stab(double a, const Matrix& A, const Vector& w) {
  const int n = static_cast<int>(w.size());
  const int m = n + 2;
  Matrix X = Matrix::Zero(m, m);
  X(0, 0) = a;
  X(m - 1, m - 1) = -a;
  X.block(1, 1, n, n) = A;
  X.block(0, 1, 1, n) = w.transpose();
  X.block(1, m - 1, n, 1) = -w;
  return X;
}

Matrix rot(int n, int i, int j) { return elementary_two_form(n, i, j); }

Matrix random_stab(Rng& rng, int n) {
  Matrix A = Matrix::Zero(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j) {
      A(i, j) = uniform(rng, -1, 1);
      A(j, i) = -A(i, j);
    }
  return stab(uniform(rng, -1, 1), A, random_point(rng, n));
}

}  // namespace

TEST_SUITE("holonomy") {
  TEST_CASE("stabilizer elements preserve the adapted Gram matrix") {
    Rng rng(41);
    for (int n = 1; n <= 4; ++n) {
      const Matrix eta = adapted_gram(n);
      const Matrix X = random_stab(rng, n);
      CHECK((X.transpose() * eta + eta * X).cwiseAbs().maxCoeff() < 1e-14);
      const auto s = stabilizer_decompose(X);
      REQUIRE(s.has_value());
      CHECK((stab(s->a, s->A, s->w) - X).cwiseAbs().maxCoeff() < 1e-15);
    }
    Matrix bad = Matrix::Zero(4, 4);
    bad(1, 0) = 1.0;
    bad(3, 1) = -1.0;
    CHECK_FALSE(stabilizer_decompose(bad).has_value());
  }

  TEST_CASE("adapted frames are null frames of the metric") {
    Rng rng(42);
    for (int trial = 0; trial < 15; ++trial) {
      const int n = uniform_int(rng, 1, 3);
      const MetricChart M = random_walker(rng, n);
      const Point p = random_point(rng, n + 2, 0.0, 1.0);
      const AdaptedFrame F = adapted_frame(M, p);
      CHECK(frame_residual(M, F) < 1e-12);
      CHECK(F.V() == Vector::Unit(n + 2, 0));
      const AdaptedFrame R = adapted_frame(M, p, random_orthogonal(rng, n));
      CHECK(frame_residual(M, R) < 1e-12);
      CHECK(R.Z() == F.Z());
    }
  }

  TEST_CASE("horizontal frames are orthonormal on flat screens") {
    const Construction c = demo("toric-prwave");
    const AdaptedFrame H = horizontal_frame(c.chart, c.base_point);
    CHECK(frame_residual(c.chart, H) < 1e-14);
    CHECK_THROWS_AS(horizontal_frame(demo("footnote").chart, demo("footnote").base_point), ValidationError);
  }

  TEST_CASE("generic and null frames on a general chart") {
    const Construction c = demo("footnote");
    const AdaptedFrame G = generic_frame(c.chart, c.base_point);
    CHECK(frame_residual(c.chart, G) < 1e-12);
    const Matrix g = c.chart.metric_at(c.base_point);
    const Vector V = G.V();
    CHECK(std::abs(V.dot(g * V)) < 1e-12);
    const AdaptedFrame N = null_frame(c.chart, c.base_point, V);
    CHECK(frame_residual(c.chart, N) < 1e-12);
    CHECK_THROWS_AS(null_frame(c.chart, c.base_point, Vector::Unit(3, 1)), ValidationError);
  }

  TEST_CASE("closure of so(3) from two generators") {
    const ClosureResult r = lie_closure({rot(3, 0, 1), rot(3, 1, 2)});
    CHECK(r.basis.size() == 3);
    CHECK(r.commutators_added == 1);
  }

  TEST_CASE("closure is a Lie algebra with an orthonormal basis") {
    Rng rng(43);
    for (int trial = 0; trial < 10; ++trial) {
      const int n = uniform_int(rng, 1, 3);
      std::vector<Matrix> gens{random_stab(rng, n), stab(0, Matrix::Zero(n, n), random_point(rng, n))};
      const ClosureResult r = lie_closure(gens);
      const int d = static_cast<int>(r.basis.size());
      Matrix B(d, (n + 2) * (n + 2));
      for (int k = 0; k < d; ++k) B.row(k) = flatten(r.basis[k]).transpose();
      CHECK((B * B.transpose() - Matrix::Identity(d, d)).cwiseAbs().maxCoeff() < 1e-10);
      for (int a = 0; a < d; ++a)
        for (int b = 0; b < d; ++b) {
          const Vector c = flatten(commutator(r.basis[a], r.basis[b]));
          CHECK((c - B.transpose() * (B * c)).norm() < 1e-8 * std::max(1.0, c.norm()));
        }
      CHECK(lie_closure(r.basis).basis.size() == r.basis.size());
    }
  }

  TEST_CASE("closure dimension is monotone under adding generators") {
    Rng rng(44);
    for (int trial = 0; trial < 30; ++trial) {
      const int n = uniform_int(rng, 1, 3);
      std::vector<Matrix> s;
      const int k = uniform_int(rng, 1, 3);
      for (int i = 0; i < k; ++i) {
        Matrix X = random_stab(rng, n);
        if (uniform_int(rng, 0, 1)) X *= 1e-3;
        s.push_back(X);
      }
      std::vector<Matrix> t = s;
      t.push_back(uniform_int(rng, 0, 1) ? random_stab(rng, n) : stab(0, Matrix::Zero(n, n), random_point(rng, n)));
      CHECK(lie_closure(s).basis.size() <= lie_closure(t).basis.size());
    }
  }

  TEST_CASE("closure respects the dimension cap") {
    Rng rng(45);
    std::vector<Matrix> gens;
    for (int i = 0; i < 3; ++i) {
      Matrix X = Matrix::Random(4, 4);
      gens.push_back((X - adapted_gram(2) * X.transpose() * adapted_gram(2)).eval());
    }
    const ClosureResult r = lie_closure(gens, 1e-7, 6);
    CHECK(r.basis.size() == 6);
    CHECK(r.cap_hit);
  }

  TEST_CASE("classifier on hand-built algebras") {
    const int n = 2;
    const Matrix Z2 = Matrix::Zero(n, n);
    const Vector e1 = Vector::Unit(n, 0), e2 = Vector::Unit(n, 1), o = Vector::Zero(n);
    auto label = [&](const std::vector<Matrix>& gens, int nn) {
      return classify_bbi(lie_closure(gens).basis, nn);
    };
    auto c2 = label({stab(0, Z2, e1), stab(0, Z2, e2)}, n);
    CHECK(c2.label == TypeLabel::Type2);
    CHECK(c2.g_dim == 0);
    CHECK(c2.translation_dim == 2);

    auto c1 = label({stab(1, Z2, o), stab(0, Z2, e1), stab(0, Z2, e2)}, n);
    CHECK(c1.label == TypeLabel::Type1);
    CHECK(c1.a_nonzero);

    auto c2g = label({stab(0, rot(n, 0, 1), o), stab(0, Z2, e1)}, n);
    CHECK(c2g.label == TypeLabel::Type2);
    CHECK(c2g.g_dim == 1);

    auto c3 = label({stab(1, rot(n, 0, 1), o), stab(0, Z2, e1), stab(0, Z2, e2)}, n);
    CHECK(c3.label == TypeLabel::Type3);

    const Matrix Z3 = Matrix::Zero(3, 3);
    auto c4 = label({stab(0, rot(3, 0, 1), Vector::Unit(3, 2)), stab(0, Z3, Vector::Unit(3, 0)),
                     stab(0, Z3, Vector::Unit(3, 1))},
                    3);
    CHECK(c4.label == TypeLabel::Type4);
    CHECK(c4.ell == 2);
    CHECK(to_string(c4.label, c4.ell).find('2') != std::string::npos);

    auto cd = label({stab(0, Z2, e1)}, n);
    CHECK(cd.label == TypeLabel::Decomposable);
    CHECK(classify_bbi({}, n).label == TypeLabel::Decomposable);

    Matrix boost = Matrix::Zero(4, 4);
    boost(1, 0) = 1.0;
    boost(3, 1) = -1.0;
    CHECK(classify_bbi(lie_closure({boost}).basis, n).label == TypeLabel::NotReducible);
  }

  TEST_CASE("demo charts") {
    auto run = [](const std::string& name) {
      const Construction c = demo(name);
      return holonomy_report(c.chart, c.base_point);
    };
    const auto flat = run("flat");
    CHECK(flat.dim == 0);
    const auto pp = run("toric-ppwave");
    CHECK(pp.dim == 2);
    CHECK(pp.label == TypeLabel::Type2);
    CHECK(pp.screen_algebra_dim == 0);
    const auto pr = run("toric-prwave");
    CHECK(pr.dim == 3);
    CHECK(pr.label == TypeLabel::Type1);
    const auto e52 = run("example52");
    CHECK(e52.dim == 1);
    CHECK(e52.label == TypeLabel::Type2);
    const auto cor = run("corollary");
    CHECK(cor.dim == 2);
    CHECK(cor.label == TypeLabel::Type2);
  }

  TEST_CASE("labels do not depend on the screen rotation or the seed") {
    Rng rng(46);
    for (const std::string name : {"toric-ppwave", "toric-prwave"}) {
      const Construction c = demo(name);
      const auto base = holonomy_report(c.chart, c.base_point);
      for (int trial = 0; trial < 2; ++trial) {
        const auto r = holonomy_report(c.chart, c.base_point, {}, 1e-7, random_orthogonal(rng, 2));
        CHECK(r.dim == base.dim);
        CHECK(r.label == base.label);
        CHECK(r.screen_algebra_dim == base.screen_algebra_dim);
      }
      for (std::uint64_t seed : {1u, 2u, 99u}) {
        SamplingStrategy s;
        s.seed = seed;
        const auto r = holonomy_report(c.chart, c.base_point, s);
        CHECK(r.dim == base.dim);
        CHECK(r.label == base.label);
      }
    }
  }

  TEST_CASE("vanishing null-line curvature and vanishing a-parts imply each other") {
    Rng rng(47);
    for (int trial = 0; trial < 6; ++trial) {
      const int n = uniform_int(rng, 1, 2);
      const bool with_x = trial % 2 == 1;
      std::string fsrc = gen_expr(rng, n, 2, false).src + " + sin(2*pi*y1)*cos(2*pi*z)";
      if (with_x) fsrc += " + x*sin(z + y1)";
      const ScalarField f = parse_expression(fsrc, n);
      std::vector<std::vector<ScalarField>> g(n, std::vector<ScalarField>(n, ScalarField(n)));
      for (int a = 0; a < n; ++a) g[a][a] = ScalarField::constant(n, 1.0);
      const MetricChart M = assemble_walker(n, f, std::vector<ScalarField>(n, ScalarField(n)), g);
      double xi = 0.0;
      for (const auto& p : probe_points(M.domain(), 16))
        for (int i = 0; i < n + 2; ++i)
          for (int j = 0; j < n + 2; ++j) xi = std::max(xi, std::abs(M.xi_curvature(p, i, j)));
      const auto r = holonomy_report(M, M.domain().center());
      double amax = 0.0;
      for (const auto& e : r.stab_basis) amax = std::max(amax, std::abs(e.a));
      CHECK(r.in_stabilizer);
      CHECK((xi > 1e-8) == with_x);
      CHECK((amax > 1e-8) == (xi > 1e-8));
    }
  }

  TEST_CASE("screen holonomy of toric charts") {
    const Construction flat = demo("toric-ppwave");
    const ScreenHolonomy s0 = screen_holonomy(flat.chart, flat.base_point);
    CHECK(s0.dim == 0);
    CHECK(s0.max_screen_curvature < 1e-9);

    const int n = 2;
    std::vector<ScalarField> phi(n + 1, ScalarField(n));
    phi[1] = parse_expression("y1 + 0.3*sin(2*pi*y1)", n);
    const Construction bent = toric_flat_torus(n, phi, sufficiently_generic_default(n).first);
    const ScreenHolonomy s1 = screen_holonomy(bent.chart, bent.base_point);
    CHECK(s1.dim >= 1);
  }

  TEST_CASE("ambrose-singer samples are expressed in the base frame") {
    const Construction c = demo("toric-prwave");
    const AdaptedFrame F = adapted_frame(c.chart, c.base_point);
    const auto samples = ambrose_singer_sample(c.chart, F, {});
    int kept = 0;
    const Matrix eta = adapted_gram(2);
    for (const auto& s : samples) {
      CHECK((s.X.transpose() * eta + eta * s.X).cwiseAbs().maxCoeff() < 1e-8 * std::max(1.0, s.norm));
      kept += s.kept;
    }
    CHECK(kept > 0);
  }
}
