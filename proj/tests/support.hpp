#pragma once

#include <cmath>
#include <cstdio>
#include <functional>
#include <random>
#include <string>
#include <vector>

#include "lorhol/constructions.hpp"
#include "lorhol/metric.hpp"

namespace lorhol::testing {

using Rng = std::mt19937_64;

inline double uniform(Rng& rng, double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(rng); }
inline int uniform_int(Rng& rng, int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng); }

/// Expression source together with an independent evaluator built from
/// std:: math calls, used as the oracle for the tape.
struct GenExpr {
  std::string src;
  std::function<double(const Point&)> f;
};

inline std::string coord_name(int n, int i) {
  if (i == 0) return "x";
  if (i == n + 1) return "z";
  return "y" + std::to_string(i);
}

inline GenExpr gen_leaf(Rng& rng, int n, bool allow_x) {
  if (uniform_int(rng, 0, 2) == 0) {
    const double c = std::round(uniform(rng, -2.0, 2.0) * 1000.0) / 1000.0;
    char buf[32];
    std::snprintf(buf, sizeof buf, c < 0 ? "(%.3f)" : "%.3f", c);
    return {buf, [c](const Point&) { return c; }};
  }
  const int i = uniform_int(rng, allow_x ? 0 : 1, n + 1);
  return {coord_name(n, i), [i](const Point& p) { return p[i]; }};
}

inline GenExpr gen_expr(Rng& rng, int n, int depth, bool allow_x = true) {
  if (depth == 0 || uniform_int(rng, 0, 4) == 0) return gen_leaf(rng, n, allow_x);
  const int op = uniform_int(rng, 0, 10);
  GenExpr a = gen_expr(rng, n, depth - 1, allow_x);
  if (op <= 2) {
    GenExpr b = gen_expr(rng, n, depth - 1, allow_x);
    const char sym = "+-*"[op];
    auto fa = a.f, fb = b.f;
    std::function<double(const Point&)> f;
    if (op == 0) f = [fa, fb](const Point& p) { return fa(p) + fb(p); };
    if (op == 1) f = [fa, fb](const Point& p) { return fa(p) - fb(p); };
    if (op == 2) f = [fa, fb](const Point& p) { return fa(p) * fb(p); };
    return {"(" + a.src + " " + sym + " " + b.src + ")", f};
  }
  auto fa = a.f;
  switch (op) {
    case 3: {
      GenExpr b = gen_expr(rng, n, depth - 1, allow_x);
      auto fb = b.f;
      return {"(" + a.src + ") / (1.5 + sin(" + b.src + "))",
              [fa, fb](const Point& p) { return fa(p) / (1.5 + std::sin(fb(p))); }};
    }
    case 4: {
      const int k = uniform_int(rng, 2, 3);
      return {"(" + a.src + ")^" + std::to_string(k), [fa, k](const Point& p) { return std::pow(fa(p), k); }};
    }
    case 5:
      return {"(2 + cos(" + a.src + "))^(-1)", [fa](const Point& p) { return 1.0 / (2.0 + std::cos(fa(p))); }};
    case 6:
      return {"sin(" + a.src + ")", [fa](const Point& p) { return std::sin(fa(p)); }};
    case 7:
      return {"cos(" + a.src + ")", [fa](const Point& p) { return std::cos(fa(p)); }};
    case 8:
      return {"exp(sin(" + a.src + "))", [fa](const Point& p) { return std::exp(std::sin(fa(p))); }};
    case 9:
      return {"sqrt(1 + (" + a.src + ")^2)", [fa](const Point& p) { return std::sqrt(1.0 + fa(p) * fa(p)); }};
    default:
      return {"-(" + a.src + ")", [fa](const Point& p) { return -fa(p); }};
  }
}

inline Point random_point(Rng& rng, int m, double lo = -1.0, double hi = 1.0) {
  Point p(m);
  for (int i = 0; i < m; ++i) p[i] = uniform(rng, lo, hi);
  return p;
}

/// Richardson-extrapolated central differences of a scalar function.
inline double richardson_first(const std::function<double(const Point&)>& f, const Point& p, int i, double h = 2e-3) {
  auto d = [&](double s) {
    Point a = p, b = p;
    a[i] += s;
    b[i] -= s;
    return (f(a) - f(b)) / (2.0 * s);
  };
  return (4.0 * d(h / 2) - d(h)) / 3.0;
}

inline double richardson_second(const std::function<double(const Point&)>& f, const Point& p, int i, int j,
                                double h = 3e-3) {
  auto d = [&](double s) {
    if (i == j) {
      Point a = p, b = p;
      a[i] += s;
      b[i] -= s;
      return (f(a) - 2.0 * f(p) + f(b)) / (s * s);
    }
    double acc = 0.0;
    for (int si : {1, -1})
      for (int sj : {1, -1}) {
        Point q = p;
        q[i] += si * s;
        q[j] += sj * s;
        acc += si * sj * f(q);
      }
    return acc / (4.0 * s * s);
  };
  return (4.0 * d(h / 2) - d(h)) / 3.0;
}

/// Random Walker chart: f uses every coordinate, u and the screen block are
/// x-free, the screen block is diagonally dominant.
inline MetricChart random_walker(Rng& rng, int n, int depth = 2) {
  const ScalarField f = parse_expression(gen_expr(rng, n, depth).src, n);
  std::vector<ScalarField> u;
  for (int i = 0; i < n; ++i) u.push_back(parse_expression(gen_expr(rng, n, depth, false).src, n));
  std::vector<std::vector<ScalarField>> g(n, std::vector<ScalarField>(n, ScalarField(n)));
  for (int a = 0; a < n; ++a)
    for (int b = a; b < n; ++b) {
      const std::string arg = gen_expr(rng, n, 1, false).src;
      const std::string s = a == b ? "1 + 0.2*sin(" + arg + ")^2" : "0.1*sin(" + arg + ")";
      g[a][b] = parse_expression(s, n);
      g[b][a] = g[a][b];
    }
  return assemble_walker(n, f, u, g);
}

/// Christoffel symbols from fourth-order central differences of metric_at.
inline Christoffel fd_christoffel(const MetricChart& M, const Point& p, double h = 1e-3) {
  const int m = M.dim();
  std::vector<Matrix> dg(m);
  for (int k = 0; k < m; ++k) {
    auto at = [&](double s) {
      Point q = p;
      q[k] += s;
      return M.metric_at(q);
    };
    dg[k] = (8.0 * (at(h) - at(-h)) - (at(2 * h) - at(-2 * h))) / (12.0 * h);
  }
  const Matrix ginv = M.metric_at(p).inverse();
  Christoffel G(m, Matrix::Zero(m, m));
  for (int k = 0; k < m; ++k)
    for (int i = 0; i < m; ++i)
      for (int j = 0; j < m; ++j) {
        double s = 0.0;
        for (int l = 0; l < m; ++l) s += ginv(k, l) * (dg[i](l, j) + dg[j](l, i) - dg[l](i, j));
        G[k](i, j) = 0.5 * s;
      }
  return G;
}

inline Matrix random_orthogonal(Rng& rng, int d) {
  Matrix a(d, d);
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < d; ++j) a(i, j) = uniform(rng, -1.0, 1.0);
  Eigen::HouseholderQR<Matrix> qr(a);
  return qr.householderQ() * Matrix::Identity(d, d);
}

inline Matrix standard_J(int d) {
  Matrix J = Matrix::Zero(d, d);
  for (int k = 0; k + 1 < d; k += 2) {
    J(k + 1, k) = 1.0;
    J(k, k + 1) = -1.0;
  }
  return J;
}

inline Matrix elementary_two_form(int d, int i, int j) {
  Matrix w = Matrix::Zero(d, d);
  w(i, j) = 1.0;
  w(j, i) = -1.0;
  return w;
}

}  // namespace lorhol::testing
