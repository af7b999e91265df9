#include "lorhol/structures.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "lorhol/transport.hpp"

namespace lorhol {

namespace {

int permutation_sign(std::vector<int> idx) {
  int sign = 1;
  for (std::size_t i = 0; i < idx.size(); ++i) {
    for (std::size_t j = i + 1; j < idx.size(); ++j) {
      if (idx[i] == idx[j]) return 0;
      if (idx[i] > idx[j]) sign = -sign;
    }
  }
  return sign;
}

// All strictly increasing k-tuples from 0..dim-1.
std::vector<std::vector<int>> increasing_tuples(int dim, int k) {
  std::vector<std::vector<int>> out;
  std::vector<int> t(static_cast<std::size_t>(k));
  std::iota(t.begin(), t.end(), 0);
  if (k > dim) return out;
  while (true) {
    out.push_back(t);
    int i = k - 1;
    while (i >= 0 && t[i] == dim - k + i) --i;
    if (i < 0) break;
    ++t[i];
    for (int j = i + 1; j < k; ++j) t[j] = t[j - 1] + 1;
  }
  return out;
}

void require_square(const Matrix& a, int dim, const char* what) {
  if (a.rows() != dim || a.cols() != dim) throw ValidationError(std::string(what) + " has the wrong size");
}

void check_complex_structure(const Matrix& J, const Matrix& G) {
  const int d = static_cast<int>(J.rows());
  require_square(J, d, "J");
  require_square(G, d, "G");
  if (d % 2 != 0) throw ValidationError("complex structure needs an even dimension");
  if ((J * J + Matrix::Identity(d, d)).cwiseAbs().maxCoeff() > 1e-10)
    throw ValidationError("J does not square to -1");
  if ((J.transpose() * G * J - G).cwiseAbs().maxCoeff() > 1e-10) throw ValidationError("J is not G-orthogonal");
}

}  // namespace

ConstantForm::ConstantForm(int dim, int degree) : dim_(dim), degree_(degree) {
  if (dim < 1 || degree < 1 || degree > dim) throw ValidationError("invalid constant form shape");
  std::size_t size = 1;
  for (int i = 0; i < degree; ++i) size *= static_cast<std::size_t>(dim);
  data_.assign(size, 0.0);
}

std::size_t ConstantForm::offset(std::span<const int> idx) const {
  if (static_cast<int>(idx.size()) != degree_) throw ValidationError("wrong number of form indices");
  std::size_t off = 0;
  for (int i : idx) {
    if (i < 0 || i >= dim_) throw ValidationError("form index out of range");
    off = off * static_cast<std::size_t>(dim_) + static_cast<std::size_t>(i);
  }
  return off;
}

double ConstantForm::operator()(std::span<const int> idx) const { return data_[offset(idx)]; }

double ConstantForm::at(int a, int b, int c) const {
  const int idx[3] = {a, b, c};
  return (*this)(idx);
}

double ConstantForm::at(int a, int b, int c, int d) const {
  const int idx[4] = {a, b, c, d};
  return (*this)(idx);
}

void ConstantForm::set(std::span<const int> idx, double value) {
  std::vector<int> perm(idx.begin(), idx.end());
  if (permutation_sign(perm) == 0) throw ValidationError("repeated index in an alternating form");
  std::sort(perm.begin(), perm.end());
  do {
    std::vector<int> relabel(perm.size());
    for (std::size_t i = 0; i < perm.size(); ++i)
      relabel[i] = static_cast<int>(std::find(idx.begin(), idx.end(), perm[i]) - idx.begin());
    data_[offset(perm)] = permutation_sign(relabel) * value;
  } while (std::next_permutation(perm.begin(), perm.end()));
}

double ConstantForm::max_abs() const {
  double r = 0.0;
  for (double v : data_) r = std::max(r, std::abs(v));
  return r;
}

ConstantForm standard_g2_form() {
  ConstantForm phi(7, 3);
  const int terms[7][3] = {{1, 2, 3}, {1, 4, 5}, {1, 6, 7}, {2, 4, 6}, {2, 5, 7}, {3, 4, 7}, {3, 5, 6}};
  const double signs[7] = {1, 1, 1, 1, -1, -1, -1};
  for (int t = 0; t < 7; ++t) {
    const int idx[3] = {terms[t][0] - 1, terms[t][1] - 1, terms[t][2] - 1};
    phi.set(idx, signs[t]);
  }
  return phi;
}

ConstantForm hodge_star(const ConstantForm& w) {
  const int d = w.dim();
  const int k = w.degree();
  if (k == d) throw ValidationError("Hodge star of a top form is a function");
  ConstantForm out(d, d - k);
  for (const auto& I : increasing_tuples(d, k)) {
    const double v = w(I);
    if (v == 0.0) continue;
    std::vector<int> J;
    for (int i = 0; i < d; ++i)
      if (std::find(I.begin(), I.end(), i) == I.end()) J.push_back(i);
    std::vector<int> IJ(I);
    IJ.insert(IJ.end(), J.begin(), J.end());
    out.set(J, permutation_sign(IJ) * v);
  }
  return out;
}

ConstantForm standard_spin7_form() {
  const ConstantForm phi = standard_g2_form();
  const ConstantForm star = hodge_star(phi);
  ConstantForm omega(8, 4);
  for (const auto& I : increasing_tuples(7, 3)) {
    const double v = phi(I);
    if (v == 0.0) continue;
    const int idx[4] = {0, I[0] + 1, I[1] + 1, I[2] + 1};
    omega.set(idx, v);
  }
  for (const auto& I : increasing_tuples(7, 4)) {
    const double v = star(I);
    if (v == 0.0) continue;
    const int idx[4] = {I[0] + 1, I[1] + 1, I[2] + 1, I[3] + 1};
    omega.set(idx, v);
  }
  return omega;
}

ConstantForm derivation_action(const Matrix& A, const ConstantForm& w) {
  const int d = w.dim();
  const int k = w.degree();
  require_square(A, d, "derivation");
  ConstantForm out(d, k);
  std::vector<int> idx(static_cast<std::size_t>(k));
  for (const auto& I : increasing_tuples(d, k)) {
    double s = 0.0;
    for (int slot = 0; slot < k; ++slot) {
      idx = I;
      for (int r = 0; r < d; ++r) {
        if (A(r, I[slot]) == 0.0) continue;
        idx[slot] = r;
        s -= A(r, I[slot]) * w(idx);
      }
    }
    out.set(I, s);
  }
  return out;
}

double one_one_residual(const Matrix& psi, const Matrix& J) {
  const int d = static_cast<int>(psi.rows());
  require_square(psi, d, "psi");
  require_square(J, d, "J");
  if (d % 2 != 0) throw ValidationError("(1,1) check needs an even dimension");
  return (J.transpose() * psi + psi * J).cwiseAbs().maxCoeff();
}

double check_one_one(const TwoForm& psi, const Matrix& J, const Point& p) { return one_one_residual(psi.at(p), J); }

Matrix unitary_frame(const Matrix& J, const Matrix& G) {
  check_complex_structure(J, G);
  const int d = static_cast<int>(J.rows());
  const int m = d / 2;
  Matrix E(d, m);
  int found = 0;
  for (int c = 0; c < d && found < m; ++c) {
    Vector v = Vector::Unit(d, c);
    for (int pass = 0; pass < 2; ++pass) {
      for (int k = 0; k < found; ++k) {
        const Vector e = E.col(k);
        const Vector je = J * e;
        v -= (e.dot(G * v)) * e + (je.dot(G * v)) * je;
      }
    }
    const double nrm = std::sqrt(std::max(0.0, v.dot(G * v)));
    if (nrm < 1e-10) continue;
    E.col(found++) = v / nrm;
  }
  if (found < m) throw NumericalError("unitary frame construction failed on a degenerate metric");
  return E;
}

double dual_lefschetz(const Matrix& psi, const Matrix& J, const Matrix& G) {
  require_square(psi, static_cast<int>(J.rows()), "psi");
  const Matrix E = unitary_frame(J, G);
  double s = 0.0;
  for (int k = 0; k < E.cols(); ++k) s += E.col(k).dot(psi * (J * E.col(k)));
  return s;
}

double check_primitive(const TwoForm& psi, const Matrix& J, const Matrix& G, std::span<const Point> grid) {
  double r = 0.0;
  for (const auto& p : grid) r = std::max(r, std::abs(dual_lefschetz(psi.at(p), J, G)));
  return r;
}

double check_hyperkahler(const Matrix& psi, const Matrix& J1, const Matrix& J2) {
  const int d = static_cast<int>(psi.rows());
  if (d % 4 != 0) throw ValidationError("hyperkahler check needs a dimension divisible by 4");
  require_square(J1, d, "J1");
  require_square(J2, d, "J2");
  if ((J1 * J2 + J2 * J1).cwiseAbs().maxCoeff() > 1e-10) throw ValidationError("J1 and J2 do not anticommute");
  return std::max(one_one_residual(psi, J1), one_one_residual(psi, J2));
}

std::vector<double> g2_contraction(const Matrix& psi, const ConstantForm& phi, const Matrix& G) {
  if (phi.dim() != 7 || phi.degree() != 3) throw ValidationError("G2 condition needs a 3-form on R^7");
  require_square(psi, 7, "psi");
  require_square(G, 7, "G");
  const Matrix A = psi * G.inverse();  // A(a, k) = psi_{a m} G^{m k}
  std::vector<double> C(343, 0.0);
  for (int a = 0; a < 7; ++a)
    for (int b = 0; b < 7; ++b)
      for (int c = 0; c < 7; ++c) {
        double s = 0.0;
        for (int k = 0; k < 7; ++k) s += A(a, k) * phi.at(b, k, c);
        C[(a * 7 + b) * 7 + c] = s;
      }
  return C;
}

double g2_condition(const Matrix& psi, const ConstantForm& phi, const Matrix& G) {
  const auto C = g2_contraction(psi, phi, G);
  auto at = [&](int a, int b, int c) { return C[(a * 7 + b) * 7 + c]; };
  double r = 0.0;
  for (int a = 0; a < 7; ++a)
    for (int b = 0; b < 7; ++b)
      for (int c = 0; c < 7; ++c) r = std::max(r, std::abs(at(a, b, c) + at(b, c, a) + at(c, a, b)));
  return r;
}

std::vector<double> spin7_contraction(const Matrix& psi, const ConstantForm& omega, const Matrix& G) {
  if (omega.dim() != 8 || omega.degree() != 4) throw ValidationError("Spin(7) condition needs a 4-form on R^8");
  require_square(psi, 8, "psi");
  require_square(G, 8, "G");
  const Matrix A = psi * G.inverse();
  std::vector<double> C(4096, 0.0);
  for (int a = 0; a < 8; ++a)
    for (int b = 0; b < 8; ++b)
      for (int c = 0; c < 8; ++c)
        for (int d = 0; d < 8; ++d) {
          double s = 0.0;
          for (int k = 0; k < 8; ++k) s += A(a, k) * omega.at(b, k, c, d);
          C[((a * 8 + b) * 8 + c) * 8 + d] = s;
        }
  return C;
}

double spin7_condition(const Matrix& psi, const ConstantForm& omega, const Matrix& G) {
  const auto C = spin7_contraction(psi, omega, G);
  auto at = [&](int a, int b, int c, int d) { return C[((a * 8 + b) * 8 + c) * 8 + d]; };
  double r = 0.0;
  for (int a = 0; a < 8; ++a)
    for (int b = 0; b < 8; ++b)
      for (int c = 0; c < 8; ++c)
        for (int d = 0; d < 8; ++d)
          r = std::max(r, std::abs(at(a, b, c, d) - at(b, c, d, a) + at(c, d, a, b) - at(d, a, b, c)));
  return r;
}

Matrix screen_twist(const MetricChart& M, const Point& p) {
  if (!M.is_walker()) throw ValidationError("screen twist needs a Walker chart");
  const int n = M.screen_dim();
  const int m = n + 2;
  const Matrix g = M.metric_at(p);
  const MetricJet J = M.jet(p, 1);
  const Matrix C = M.connection_along(p, Vector::Unit(m, n + 1));
  Matrix Y = Matrix::Zero(m, n);
  Matrix dY = Matrix::Zero(m, n);
  for (int j = 0; j < n; ++j) {
    Y(1 + j, j) = 1.0;
    Y(0, j) = -g(1 + j, n + 1);
    dY(0, j) = -J.dg[n + 1](1 + j, n + 1);
  }
  const Matrix nabla = C * Y + dY;
  return Y.transpose() * g * nabla;
}

SuPhaseResult su_phase_check(const MetricChart& M, const Matrix& J, double lambda, std::span<const Point> grid,
                             std::span<const double> dz, double transport_tol) {
  if (!M.is_walker()) throw ValidationError("phase check needs a Walker chart");
  const int n = M.screen_dim();
  const int m = n + 2;
  require_square(J, n, "J");
  auto screen_basis = [&](const Point& q) {
    const Matrix g = M.metric_at(q);
    Matrix Y = Matrix::Zero(m, n);
    for (int j = 0; j < n; ++j) {
      Y(1 + j, j) = 1.0;
      Y(0, j) = -g(1 + j, n + 1);
    }
    return std::pair<Matrix, Matrix>(Y, Y.transpose() * g * Y);
  };
  SuPhaseResult out;
  TransportOptions opts;
  opts.tol = transport_tol;
  for (const auto& p : grid) {
    const auto [Yp, Gp] = screen_basis(p);
    const Matrix E = unitary_frame(J, Gp);
    const int k = static_cast<int>(E.cols());
    const Matrix W0 = Yp * E;
    for (double d : dz) {
      Matrix W = W0;
      Matrix Gq = Gp;
      Matrix Yq = Yp;
      if (d != 0.0) {
        Point q = p;
        q[n + 1] += d;
        W = parallel_transport(M, PathSpec::polyline({p, q}), W0, opts);
        std::tie(Yq, Gq) = screen_basis(q);
      }
      // screen coordinates of the transported frame
      const Matrix coeff = Gq.ldlt().solve(Yq.transpose() * M.metric_at(p + Vector::Unit(m, n + 1) * d) * W);
      Eigen::MatrixXcd Z(k, k);
      for (int a = 0; a < k; ++a) {
        const Vector ea = Gq * E.col(a);
        const Vector jea = Gq * (J * E.col(a));
        for (int b = 0; b < k; ++b) Z(a, b) = {ea.dot(coeff.col(b)), jea.dot(coeff.col(b))};
      }
      const std::complex<double> phase = 1.0 / Z.determinant();
      const std::complex<double> expected = std::polar(1.0, -lambda * d);
      out.phases.push_back(phase);
      out.expected.push_back(expected);
      out.residual = std::max(out.residual, std::abs(phase - expected));
    }
  }
  return out;
}

}  // namespace lorhol
