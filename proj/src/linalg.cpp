#include "lorhol/linalg.hpp"

#include <cmath>

#include <Eigen/SVD>

#include "lorhol/metric.hpp"

namespace lorhol {

Matrix row_space(const Matrix& rows, double tol, Vector* sv) {
  if (rows.rows() == 0) {
    if (sv) sv->resize(0);
    return Matrix(0, rows.cols());
  }
  Eigen::JacobiSVD<Matrix> svd(rows, Eigen::ComputeThinV);
  const Vector& s = svd.singularValues();
  if (sv) *sv = s;
  int r = 0;
  while (r < s.size() && s[r] > tol) ++r;
  return svd.matrixV().leftCols(r).transpose();
}

Matrix null_space(const Matrix& a, double tol) {
  const int cols = static_cast<int>(a.cols());
  if (a.rows() == 0) return Matrix::Identity(cols, cols);
  Eigen::JacobiSVD<Matrix> svd(a, Eigen::ComputeFullV);
  const Vector& s = svd.singularValues();
  int r = 0;
  while (r < s.size() && s[r] > tol) ++r;
  return svd.matrixV().rightCols(cols - r);
}

int numerical_rank(const Matrix& a, double tol) {
  if (a.size() == 0) return 0;
  Eigen::JacobiSVD<Matrix> svd(a);
  const Vector& s = svd.singularValues();
  int r = 0;
  while (r < s.size() && s[r] > tol) ++r;
  return r;
}

Matrix log_near_identity(const Matrix& p) {
  const Matrix x = p - Matrix::Identity(p.rows(), p.cols());
  if (x.norm() >= 1.0) throw NumericalError("log series needs ||P - I|| < 1");
  Matrix term = x;
  Matrix sum = x;
  for (int k = 2; k < 400; ++k) {
    term = term * x;
    const Matrix add = term * ((k % 2 == 0 ? -1.0 : 1.0) / k);
    sum += add;
    if (add.norm() < 1e-17 * (1.0 + sum.norm())) break;
  }
  return sum;
}

Vector flatten(const Matrix& a) { return Eigen::Map<const Vector>(a.data(), a.size()); }

Matrix unflatten(const Vector& v, int rows, int cols) { return Eigen::Map<const Matrix>(v.data(), rows, cols); }

double radical_inverse(std::uint64_t index, int base) {
  double result = 0.0;
  double f = 1.0 / base;
  while (index > 0) {
    result += f * static_cast<double>(index % static_cast<std::uint64_t>(base));
    index /= static_cast<std::uint64_t>(base);
    f /= base;
  }
  return result;
}

std::uint64_t splitmix64(std::uint64_t& state) {
  std::uint64_t z = (state += 0x9E3779B97F4A7C15ull);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
  return z ^ (z >> 31);
}

double uniform01(std::uint64_t& state) { return static_cast<double>(splitmix64(state) >> 11) * 0x1.0p-53; }

Box Box::cube(int dim, double lo, double hi) { return Box{Vector::Constant(dim, lo), Vector::Constant(dim, hi)}; }

bool Box::contains(const Point& p) const {
  if (p.size() != lo.size()) return false;
  for (int i = 0; i < p.size(); ++i)
    if (!(p[i] >= lo[i] && p[i] <= hi[i])) return false;
  return true;
}

Box Box::shrink(double margin) const {
  Box b{lo.array() + margin, hi.array() - margin};
  for (int i = 0; i < b.dim(); ++i)
    if (b.lo[i] > b.hi[i]) b.lo[i] = b.hi[i] = 0.5 * (lo[i] + hi[i]);
  return b;
}

std::vector<Point> probe_points(const Box& box, int count, std::uint64_t seed) {
  static constexpr int primes[] = {2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41, 43, 47, 53, 59, 61, 67, 71};
  const int d = box.dim();
  if (d > static_cast<int>(std::size(primes))) throw ValidationError("probe box dimension too large");
  std::uint64_t state = seed;
  Vector shift(d);
  for (int k = 0; k < d; ++k) shift[k] = seed == 0 ? 0.0 : uniform01(state);
  std::vector<Point> pts;
  pts.reserve(count);
  for (int i = 0; i < count; ++i) {
    Point p(d);
    for (int k = 0; k < d; ++k) {
      double u = radical_inverse(static_cast<std::uint64_t>(i) + 1, primes[k]) + shift[k];
      u -= std::floor(u);
      p[k] = box.lo[k] + u * (box.hi[k] - box.lo[k]);
    }
    pts.push_back(std::move(p));
  }
  return pts;
}

}  // namespace lorhol
