#include "lorhol/metric.hpp"

#include <cmath>

#include <Eigen/Eigenvalues>
#include <Eigen/LU>

namespace lorhol {

Matrix CurvatureTensor::endomorphism(const Vector& u, const Vector& v) const {
  Matrix out = Matrix::Zero(m_, m_);
  for (int l = 0; l < m_; ++l)
    for (int k = 0; k < m_; ++k) {
      double s = 0.0;
      for (int i = 0; i < m_; ++i) {
        if (u[i] == 0.0) continue;
        for (int j = 0; j < m_; ++j) s += (*this)(l, i, j, k) * u[i] * v[j];
      }
      out(l, k) = s;
    }
  return out;
}

CurvatureTensor CurvatureTensor::lowered(const Matrix& g) const {
  CurvatureTensor out(m_);
  for (int l = 0; l < m_; ++l)
    for (int i = 0; i < m_; ++i)
      for (int j = 0; j < m_; ++j)
        for (int k = 0; k < m_; ++k) {
          double s = 0.0;
          for (int a = 0; a < m_; ++a) s += g(l, a) * (*this)(a, i, j, k);
          out(l, i, j, k) = s;
        }
  return out;
}

double CurvatureTensor::max_abs() const {
  double m = 0.0;
  for (double v : data_) m = std::max(m, std::abs(v));
  return m;
}

const ScalarField& MetricChart::entry(int i, int j) const {
  const int m = dim();
  if (i < 0 || j < 0 || i >= m || j >= m) throw DomainError("metric entry index out of range");
  return entries_[static_cast<std::size_t>(i) * m + j];
}

void MetricChart::set_domain(const Box& box) {
  if (box.dim() != dim()) throw ValidationError("domain box has wrong dimension");
  domain_ = box;
}

void MetricChart::compile() {
  const int m = dim();
  std::vector<ScalarField> outs;
  slots_.clear();
  for (int i = 0; i < m; ++i)
    for (int j = i; j < m; ++j) {
      outs.push_back(entry(i, j));
      slots_.push_back({i, j});
    }
  tape_ = FieldTape(outs);
  if (domain_.dim() != m) domain_ = Box::cube(m, 0.0, 1.0);
}

MetricJet MetricChart::jet(const Point& p, int order) const {
  const int m = dim();
  if (p.size() != m) throw DomainError("point has wrong number of coordinates");
  JetBuffer buf;
  tape_.evaluate(p, order, buf);
  MetricJet out;
  out.g.resize(m, m);
  if (order >= 1) out.dg.assign(m, Matrix::Zero(m, m));
  if (order >= 2) out.d2g.assign(static_cast<std::size_t>(m) * m, Matrix::Zero(m, m));
  for (std::size_t s = 0; s < slots_.size(); ++s) {
    const auto [i, j] = slots_[s];
    const int k = static_cast<int>(s);
    out.g(i, j) = out.g(j, i) = buf.value(k);
    if (order >= 1)
      for (int a = 0; a < m; ++a) out.dg[a](i, j) = out.dg[a](j, i) = buf.grad(k, a);
    if (order >= 2)
      for (int a = 0; a < m; ++a)
        for (int b = a; b < m; ++b) {
          const double h = buf.hess(k, a, b);
          out.d2g[a * m + b](i, j) = out.d2g[a * m + b](j, i) = h;
          out.d2g[b * m + a](i, j) = out.d2g[b * m + a](j, i) = h;
        }
  }
  return out;
}

Matrix MetricChart::metric_at(const Point& p) const { return jet(p, 0).g; }

Matrix MetricChart::inverse_from(const Matrix& g) const {
  const int m = dim();
  if (walker_) {
    // Block inverse of [[0,0,1],[0,G,m],[1,m^T,f]].
    const int n = n_;
    const Matrix G = g.block(1, 1, n, n);
    const Vector mv = g.block(1, n + 1, n, 1);
    const double f = g(n + 1, n + 1);
    Eigen::LLT<Matrix> llt(G);
    if (llt.info() != Eigen::Success) throw NumericalError("screen block of the metric is not positive definite");
    const Matrix H = llt.solve(Matrix::Identity(n, n));
    const Vector Hm = H * mv;
    Matrix inv = Matrix::Zero(m, m);
    inv(0, 0) = mv.dot(Hm) - f;
    inv.block(0, 1, 1, n) = -Hm.transpose();
    inv.block(1, 0, n, 1) = -Hm;
    inv.block(1, 1, n, n) = 0.5 * (H + H.transpose());
    inv(0, n + 1) = inv(n + 1, 0) = 1.0;
    return inv;
  }
  Eigen::FullPivLU<Matrix> lu(g);
  const double scale = std::max(1.0, g.cwiseAbs().maxCoeff());
  if (!lu.isInvertible() || std::abs(lu.determinant()) < 1e-13 * std::pow(scale, m))
    throw NumericalError("metric is singular at the evaluation point");
  Matrix inv = lu.inverse();
  return 0.5 * (inv + inv.transpose());
}

Matrix MetricChart::inverse_at(const Point& p) const { return inverse_from(metric_at(p)); }

std::pair<int, int> MetricChart::signature_at(const Point& p) const {
  const Matrix g = metric_at(p);
  Eigen::SelfAdjointEigenSolver<Matrix> es(g, Eigen::EigenvaluesOnly);
  const Vector& ev = es.eigenvalues();
  const double scale = std::max(1.0, ev.cwiseAbs().maxCoeff());
  int neg = 0, pos = 0;
  for (int i = 0; i < ev.size(); ++i) {
    if (ev[i] < -1e-12 * scale) ++neg;
    else if (ev[i] > 1e-12 * scale) ++pos;
  }
  return {neg, pos};
}

void MetricChart::validate_lorentzian(std::span<const Point> points) const {
  for (const auto& p : points) {
    const auto [neg, pos] = signature_at(p);
    if (neg != 1 || pos != n_ + 1)
      throw ValidationError("metric is not Lorentzian at a probe point: signature (" + std::to_string(neg) + ", " +
                            std::to_string(pos) + ")");
  }
}

namespace {

// lowered[a](i,j) = Gamma_{a,ij}
std::vector<Matrix> lowered_christoffel(const MetricJet& J, int m) {
  std::vector<Matrix> low(m, Matrix::Zero(m, m));
  for (int a = 0; a < m; ++a)
    for (int i = 0; i < m; ++i)
      for (int j = i; j < m; ++j) {
        const double v = 0.5 * (J.dg[i](j, a) + J.dg[j](i, a) - J.dg[a](i, j));
        low[a](i, j) = low[a](j, i) = v;
      }
  return low;
}

Christoffel raise(const Matrix& inv, const std::vector<Matrix>& low, int m) {
  Christoffel gamma(m, Matrix::Zero(m, m));
  for (int k = 0; k < m; ++k)
    for (int a = 0; a < m; ++a) {
      const double c = inv(k, a);
      if (c != 0.0) gamma[k] += c * low[a];
    }
  return gamma;
}

}  // namespace

Christoffel MetricChart::christoffel(const Point& p) const {
  const int m = dim();
  const MetricJet J = jet(p, 1);
  return raise(inverse_from(J.g), lowered_christoffel(J, m), m);
}

Vector MetricChart::geodesic_acceleration(const Point& p, const Vector& v) const {
  const int m = dim();
  const MetricJet J = jet(p, 1);
  // w_l = Gamma_{l,ij} v^i v^j = (d_i g_jl) v^i v^j - 1/2 (d_l g_ij) v^i v^j
  Matrix dv = Matrix::Zero(m, m);  // sum_i v^i d_i g
  for (int i = 0; i < m; ++i)
    if (v[i] != 0.0) dv += v[i] * J.dg[i];
  Vector w = dv * v;
  for (int l = 0; l < m; ++l) w[l] -= 0.5 * v.dot(J.dg[l] * v);
  return -(inverse_from(J.g) * w);
}

Matrix MetricChart::connection_along(const Point& p, const Vector& d) const {
  const int m = dim();
  const MetricJet J = jet(p, 1);
  Matrix dd = Matrix::Zero(m, m);  // sum_i d^i d_i g
  for (int i = 0; i < m; ++i)
    if (d[i] != 0.0) dd += d[i] * J.dg[i];
  // lowered(l, j) = Gamma_{l,ij} d^i = 1/2 (dd(j,l) + (d_j g)(i,l) d^i - (d_l g)(i,j) d^i)
  Matrix low(m, m);
  for (int l = 0; l < m; ++l)
    for (int j = 0; j < m; ++j) low(l, j) = 0.5 * (dd(j, l) + J.dg[j].col(l).dot(d) - J.dg[l].col(j).dot(d));
  return inverse_from(J.g) * low;
}

CurvatureTensor MetricChart::riemann(const Point& p) const {
  const int m = dim();
  const MetricJet J = jet(p, 2);
  const Matrix inv = inverse_from(J.g);
  const std::vector<Matrix> low = lowered_christoffel(J, m);
  const Christoffel gamma = raise(inv, low, m);

  // dgamma[i][l](j,k) = d_i Gamma^l_{jk}
  std::vector<Christoffel> dgamma(m, Christoffel(m, Matrix::Zero(m, m)));
  for (int i = 0; i < m; ++i) {
    const Matrix dinv = -inv * J.dg[i] * inv;
    std::vector<Matrix> dlow(m, Matrix::Zero(m, m));
    for (int a = 0; a < m; ++a)
      for (int j = 0; j < m; ++j)
        for (int k = j; k < m; ++k) {
          const double v =
              0.5 * (J.d2g[i * m + j](k, a) + J.d2g[i * m + k](j, a) - J.d2g[i * m + a](j, k));
          dlow[a](j, k) = dlow[a](k, j) = v;
        }
    for (int l = 0; l < m; ++l)
      for (int a = 0; a < m; ++a) {
        if (dinv(l, a) != 0.0) dgamma[i][l] += dinv(l, a) * low[a];
        if (inv(l, a) != 0.0) dgamma[i][l] += inv(l, a) * dlow[a];
      }
  }

  CurvatureTensor R(m);
  for (int l = 0; l < m; ++l)
    for (int i = 0; i < m; ++i)
      for (int j = 0; j < m; ++j) {
        if (i == j) continue;
        for (int k = 0; k < m; ++k) {
          double v = dgamma[i][l](j, k) - dgamma[j][l](i, k);
          for (int s = 0; s < m; ++s) v += gamma[l](i, s) * gamma[s](j, k) - gamma[l](j, s) * gamma[s](i, k);
          R(l, i, j, k) = v;
        }
      }
  return R;
}

double MetricChart::xi_curvature(const Point& p, int i, int j) const {
  if (!walker_) throw ValidationError("xi_curvature needs a Walker chart");
  const int m = dim();
  if (i < 0 || j < 0 || i >= m || j >= m) throw DomainError("index out of range");
  const Jet fj = walker_->f.jet(p, 2);
  const int z = n_ + 1;
  double v = 0.0;
  if (j == z) v += fj.hessian(i, 0);
  if (i == z) v -= fj.hessian(j, 0);
  return 0.5 * v;
}

MetricChart assemble_walker(int n, const ScalarField& f, const std::vector<ScalarField>& u,
                            const std::vector<std::vector<ScalarField>>& gbase, std::optional<Box> probe_box) {
  if (n < 1) throw ValidationError("Walker charts need screen dimension n >= 1");
  if (static_cast<int>(u.size()) != n) throw ValidationError("expected n coefficients u_i");
  if (static_cast<int>(gbase.size()) != n) throw ValidationError("expected an n x n base metric");
  auto check_dim = [n](const ScalarField& s) {
    if (s.screen_dim() != n) throw ValidationError("coefficient defined for another chart dimension");
  };
  check_dim(f);
  for (const auto& ui : u) {
    check_dim(ui);
    if (ui.depends_on(0)) throw ValidationError("u_i must not depend on x");
  }
  for (int a = 0; a < n; ++a) {
    if (static_cast<int>(gbase[a].size()) != n) throw ValidationError("expected an n x n base metric");
    for (int b = 0; b < n; ++b) {
      check_dim(gbase[a][b]);
      if (gbase[a][b].depends_on(0)) throw ValidationError("base metric must not depend on x");
    }
  }

  const int m = n + 2;
  MetricChart M;
  M.n_ = n;
  M.entries_.assign(static_cast<std::size_t>(m) * m, ScalarField(n));
  auto set = [&](int i, int j, const ScalarField& v) {
    M.entries_[static_cast<std::size_t>(i) * m + j] = v;
    M.entries_[static_cast<std::size_t>(j) * m + i] = v;
  };
  set(0, n + 1, ScalarField::constant(n, 1.0));
  for (int a = 0; a < n; ++a) {
    for (int b = a; b < n; ++b) set(a + 1, b + 1, gbase[a][b]);
    const auto c = u[a].constant_value();
    set(a + 1, n + 1, c && *c == 0.0 ? ScalarField(n) : 0.5 * u[a]);
  }
  set(n + 1, n + 1, f);
  M.walker_ = WalkerMeta{f, u, gbase};
  M.domain_ = probe_box ? *probe_box : Box::cube(m, 0.0, 1.0);
  if (M.domain_.dim() != m) throw ValidationError("probe box has wrong dimension");
  M.compile();

  for (const auto& p : probe_points(M.domain_, 32)) {
    Matrix G(n, n);
    for (int a = 0; a < n; ++a)
      for (int b = 0; b < n; ++b) G(a, b) = gbase[a][b].eval(p);
    if ((G - G.transpose()).cwiseAbs().maxCoeff() > 1e-12 * std::max(1.0, G.cwiseAbs().maxCoeff()))
      throw ValidationError("base metric is not symmetric at a probe point");
    Eigen::SelfAdjointEigenSolver<Matrix> es(G, Eigen::EigenvaluesOnly);
    if (es.eigenvalues().minCoeff() <= 0.0)
      throw ValidationError("base metric is not positive definite at a probe point");
  }
  return M;
}

MetricChart assemble_general(int n, const std::vector<std::vector<ScalarField>>& entries) {
  const int m = n + 2;
  if (n < 0) throw ValidationError("screen dimension must be non-negative");
  if (static_cast<int>(entries.size()) != m) throw ValidationError("expected an (n+2) x (n+2) matrix of entries");
  for (const auto& row : entries)
    if (static_cast<int>(row.size()) != m) throw ValidationError("expected an (n+2) x (n+2) matrix of entries");
  MetricChart M;
  M.n_ = n;
  M.entries_.reserve(static_cast<std::size_t>(m) * m);
  for (int i = 0; i < m; ++i)
    for (int j = 0; j < m; ++j) {
      if (entries[i][j].screen_dim() != n) throw ValidationError("entry defined for another chart dimension");
      if (j < i && !entries[i][j].same_tree(entries[j][i]))
        throw ValidationError("metric entries are not symmetric: (" + std::to_string(i) + ", " + std::to_string(j) + ")");
      M.entries_.push_back(entries[i][j]);
    }
  M.compile();
  return M;
}

}  // namespace lorhol
