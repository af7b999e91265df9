#include "doctest.h"
#include "lorhol/expr.hpp"
#include "support.hpp"

using namespace lorhol;
using namespace lorhol::testing;

TEST_SUITE("expr") {
  TEST_CASE("tape values agree with a direct evaluator on random expressions") {
    Rng rng(11);
    for (int trial = 0; trial < 300; ++trial) {
      const int n = uniform_int(rng, 1, 3);
      const GenExpr g = gen_expr(rng, n, 4);
      const ScalarField e = parse_expression(g.src, n);
      const Point p = random_point(rng, n + 2);
      const double want = g.f(p);
      CHECK(e.eval(p) == doctest::Approx(want).epsilon(1e-13));
      CHECK(e.jet(p, 0).value == doctest::Approx(want).epsilon(1e-13));
    }
  }

  TEST_CASE("first and second partials match Richardson differences") {
    Rng rng(12);
    for (int trial = 0; trial < 200; ++trial) {
      const int n = uniform_int(rng, 1, 3);
      const int m = n + 2;
      const GenExpr g = gen_expr(rng, n, 3);
      const ScalarField e = parse_expression(g.src, n);
      const Point p = random_point(rng, m);
      const Jet j = e.jet(p, 2);
      for (int i = 0; i < m; ++i) {
        const double fd = richardson_first(g.f, p, i);
        CHECK(std::abs(j.gradient[i] - fd) <= 1e-6 * std::max(1.0, std::abs(fd)));
        for (int k = 0; k < m; ++k) {
          const double fd2 = richardson_second(g.f, p, i, k);
          CHECK(std::abs(j.hessian(i, k) - fd2) <= 1e-6 * std::max(1.0, std::abs(fd2)));
        }
      }
    }
  }

  TEST_CASE("partial agrees with the jet entries") {
    Rng rng(13);
    const int n = 2;
    const ScalarField e = parse_expression("sin(x*y1) + z^3*exp(y2)", n);
    const Point p = random_point(rng, 4);
    const Jet j = e.jet(p);
    for (int i = 0; i < 4; ++i) {
      const int one[1] = {i};
      CHECK(e.partial(p, one) == doctest::Approx(j.gradient[i]).epsilon(1e-15));
      for (int k = 0; k < 4; ++k) {
        const int two[2] = {i, k};
        CHECK(e.partial(p, two) == doctest::Approx(j.hessian(i, k)).epsilon(1e-15));
      }
    }
    CHECK(e.partial(p, std::span<const int>()) == doctest::Approx(j.value));
  }

  TEST_CASE("Hessian is symmetric") {
    Rng rng(14);
    for (int trial = 0; trial < 50; ++trial) {
      const GenExpr g = gen_expr(rng, 2, 4);
      const Jet j = parse_expression(g.src, 2).jet(random_point(rng, 4));
      CHECK((j.hessian - j.hessian.transpose()).cwiseAbs().maxCoeff() == 0.0);
    }
  }

  TEST_CASE("printer output parses back to the same tree") {
    Rng rng(15);
    for (int trial = 0; trial < 200; ++trial) {
      const int n = uniform_int(rng, 1, 3);
      const ScalarField e = parse_expression(gen_expr(rng, n, 4).src, n);
      const ScalarField back = parse_expression(e.to_string(), n);
      CHECK(back.same_tree(e));
      CHECK(back.to_string() == e.to_string());
    }
  }

  TEST_CASE("printer conventions for negatives") {
    CHECK(ScalarField::constant(1, -2.5).to_string() == "(-2.5)");
    const ScalarField x = ScalarField::coordinate(1, 0);
    CHECK(x.pow(-2).to_string().find("^(-2)") != std::string::npos);
  }

  TEST_CASE("parse errors carry a kind and an offset") {
    auto kind_of = [](const std::string& s, int n) {
      try {
        parse_expression(s, n);
      } catch (const ParseError& e) {
        return e.kind();
      }
      FAIL("no error for " << s);
      return ParseError::Kind::Config;
    };
    CHECK(kind_of("sin(x", 1) == ParseError::Kind::Syntax);
    CHECK(kind_of("x +", 1) == ParseError::Kind::Syntax);
    CHECK(kind_of("x ^ 1.5", 1) == ParseError::Kind::Syntax);
    CHECK(kind_of("foo + x", 1) == ParseError::Kind::UnknownIdentifier);
    CHECK(kind_of("tan(x)", 1) == ParseError::Kind::UnknownIdentifier);
    CHECK(kind_of("y3 + x", 2) == ParseError::Kind::IndexOutOfRange);
    CHECK(kind_of("y0", 2) == ParseError::Kind::IndexOutOfRange);
    try {
      parse_expression("x + $", 1);
      FAIL("expected a syntax error");
    } catch (const ParseError& e) {
      CHECK(e.position() == 4);
    }
  }

  TEST_CASE("definitions are inlined") {
    Definitions defs;
    defs["w"] = parse_expression("sin(2*pi*y1)", 1);
    const ScalarField e = parse_expression("w*w + z", 1, defs);
    Point p(3);
    p << 0.3, 0.1, 0.7;
    const double s = std::sin(2 * M_PI * 0.1);
    CHECK(e.eval(p) == doctest::Approx(s * s + 0.7));
    CHECK_FALSE(e.depends_on(0));
    CHECK(e.depends_on(1));
  }

  TEST_CASE("dependence and constants") {
    const ScalarField e = parse_expression("y1*0 + 3", 2);
    CHECK(e.constant_value().has_value() == !e.depends_on(1));
    CHECK_FALSE(parse_expression("x*z", 2).constant_value().has_value());
    CHECK(parse_expression("2*pi", 2).constant_value().value() == doctest::Approx(2 * M_PI));
  }

  TEST_CASE("domain errors") {
    Point p = Point::Zero(3);
    CHECK_THROWS_AS(parse_expression("sqrt(x - 1)", 1).eval(p), DomainError);
    CHECK_THROWS_AS(parse_expression("1/x", 1).eval(p), DomainError);
    CHECK_THROWS_AS(parse_expression("x^(-1)", 1).eval(p), DomainError);
    CHECK_THROWS_AS(parse_expression("x", 1).eval(Point::Zero(2)), DomainError);
  }

  TEST_CASE("smooth step plateaus and smoothness") {
    const ScalarField s = parse_expression("sstep(z)", 1);
    auto at = [&](double z) {
      Point p = Point::Zero(3);
      p[2] = z;
      return s.jet(p);
    };
    for (double z : {-3.0, -0.5, 0.0, 1e-4}) {
      CHECK(at(z).value == 0.0);
      CHECK(at(z).gradient[2] == 0.0);
    }
    for (double z : {1.0, 1.5, 4.0}) {
      CHECK(at(z).value == doctest::Approx(1.0).epsilon(1e-15));
      CHECK(std::abs(at(z).gradient[2]) < 1e-12);
    }
    CHECK(at(0.5).value == doctest::Approx(0.5).epsilon(1e-12));
    double prev = -1.0;
    for (double z = 0.0; z <= 1.0; z += 0.01) {
      CHECK(at(z).value >= prev);
      prev = at(z).value;
    }
    std::function<double(const Point&)> f = [&](const Point& p) { return s.eval(p); };
    for (double z : {0.05, 0.3, 0.7, 0.95}) {
      Point p = Point::Zero(3);
      p[2] = z;
      CHECK(at(z).gradient[2] == doctest::Approx(richardson_first(f, p, 2, 1e-3)).epsilon(1e-6));
      CHECK(at(z).hessian(2, 2) == doctest::Approx(richardson_second(f, p, 2, 2, 1e-3)).epsilon(1e-5));
    }
  }

  TEST_CASE("field tape shares evaluation across outputs") {
    Rng rng(16);
    std::vector<ScalarField> fs;
    for (int k = 0; k < 5; ++k) fs.push_back(parse_expression(gen_expr(rng, 2, 3).src, 2));
    const FieldTape tape(fs);
    JetBuffer buf;
    const Point p = random_point(rng, 4);
    tape.evaluate(p, 2, buf);
    CHECK(buf.num_outputs() == 5);
    for (int k = 0; k < 5; ++k) {
      const Jet j = fs[k].jet(p);
      CHECK(buf.value(k) == doctest::Approx(j.value).epsilon(1e-15));
      for (int i = 0; i < 4; ++i) {
        CHECK(buf.grad(k, i) == doctest::Approx(j.gradient[i]).epsilon(1e-15));
        for (int l = 0; l < 4; ++l) CHECK(buf.hess(k, i, l) == doctest::Approx(j.hessian(i, l)).epsilon(1e-15));
      }
    }
  }

  TEST_CASE("operator builders match parsed text") {
    const int n = 1;
    const ScalarField x = ScalarField::coordinate(n, 0);
    const ScalarField y = ScalarField::coordinate(n, 1);
    const ScalarField built = (x * y + 2.0 * y.sin()).pow(2) - x / (y.exp() + 1.0);
    const ScalarField parsed = parse_expression("(x*y1 + 2*sin(y1))^2 - x/(exp(y1) + 1)", n);
    Rng rng(17);
    for (int k = 0; k < 20; ++k) {
      const Point p = random_point(rng, 3);
      CHECK(built.eval(p) == doctest::Approx(parsed.eval(p)).epsilon(1e-14));
    }
  }
}
