#include "lorhol/holonomy.hpp"

#include <cmath>

#include <Eigen/Eigenvalues>
#include <Eigen/LU>

#include "lorhol/linalg.hpp"

namespace lorhol {

Matrix adapted_gram(int n) {
  Matrix eta = Matrix::Zero(n + 2, n + 2);
  eta(0, n + 1) = eta(n + 1, 0) = 1.0;
  eta.block(1, 1, n, n).setIdentity();
  return eta;
}

AdaptedFrame adapted_frame(const MetricChart& M, const Point& p, const std::optional<Matrix>& rotation) {
  if (!M.is_walker()) throw ValidationError("adapted_frame needs a Walker chart");
  const int n = M.screen_dim();
  const int m = n + 2;
  const Matrix g = M.metric_at(p);
  const Matrix G = g.block(1, 1, n, n);
  const Vector mv = g.block(1, n + 1, n, 1);
  const double f = g(n + 1, n + 1);
  Eigen::LLT<Matrix> llt(G);
  if (llt.info() != Eigen::Success) throw ValidationError("screen metric is degenerate at the base point");
  const Vector Hm = llt.solve(mv);

  AdaptedFrame F;
  F.base = p;
  F.vectors = Matrix::Zero(m, m);
  F.vectors(0, 0) = 1.0;
  // Gram-Schmidt of d_y in G: columns of L^{-T}.
  Matrix C = llt.matrixL().transpose().solve(Matrix::Identity(n, n));
  if (rotation) {
    if (rotation->rows() != n || rotation->cols() != n) throw ValidationError("rotation has wrong size");
    if ((rotation->transpose() * *rotation - Matrix::Identity(n, n)).cwiseAbs().maxCoeff() > 1e-10)
      throw ValidationError("rotation is not orthogonal");
    C = C * *rotation;
  }
  F.vectors.block(1, 1, n, n) = C;
  F.vectors(0, n + 1) = 0.5 * (mv.dot(Hm) - f);
  F.vectors.block(1, n + 1, n, 1) = -Hm;
  F.vectors(n + 1, n + 1) = 1.0;
  return F;
}

AdaptedFrame horizontal_frame(const MetricChart& M, const Point& p) {
  if (!M.is_walker()) throw ValidationError("horizontal_frame needs a Walker chart");
  const int n = M.screen_dim();
  const int m = n + 2;
  const Matrix g = M.metric_at(p);
  AdaptedFrame F;
  F.base = p;
  F.vectors = Matrix::Identity(m, m);
  for (int i = 1; i <= n; ++i) F.vectors(0, i) = -g(i, n + 1);
  F.vectors(0, n + 1) = -0.5 * g(n + 1, n + 1);
  return F;
}

namespace {

// Columns: g-orthonormal basis, timelike vectors first; largest entry positive.
Matrix orthonormal_basis(const Matrix& g, Vector& signs) {
  Eigen::SelfAdjointEigenSolver<Matrix> es(g);
  const int m = static_cast<int>(g.rows());
  Matrix B(m, m);
  signs.resize(m);
  for (int k = 0; k < m; ++k) {
    Vector q = es.eigenvectors().col(k);
    Eigen::Index imax;
    q.cwiseAbs().maxCoeff(&imax);
    if (q[imax] < 0) q = -q;
    const double lam = es.eigenvalues()[k];
    if (lam == 0.0) throw NumericalError("metric is degenerate at the base point");
    B.col(k) = q / std::sqrt(std::abs(lam));
    signs[k] = lam < 0 ? -1.0 : 1.0;
  }
  return B;
}

}  // namespace

AdaptedFrame null_frame(const MetricChart& M, const Point& p, const Vector& V) {
  const int m = M.dim();
  const Matrix g = M.metric_at(p);
  if (std::abs(V.dot(g * V)) > 1e-8 * std::max(1.0, V.squaredNorm())) throw ValidationError("V is not null");
  Vector signs;
  const Matrix B = orthonormal_basis(g, signs);
  int best = 0;
  double best_val = 0.0;
  for (int k = 0; k < m; ++k) {
    const double v = std::abs(B.col(k).dot(g * V));
    if (v > best_val) {
      best_val = v;
      best = k;
    }
  }
  if (best_val == 0.0) throw ValidationError("V is zero");
  const Vector w = B.col(best) / B.col(best).dot(g * V);
  const Vector Z = w - 0.5 * w.dot(g * w) * V;

  AdaptedFrame F;
  F.base = p;
  F.vectors = Matrix::Zero(m, m);
  F.vectors.col(0) = V;
  F.vectors.col(m - 1) = Z;
  int col = 1;
  for (int k = 0; k < m && col < m - 1; ++k) {
    Vector u = B.col(k);
    u = u - u.dot(g * Z) * V - u.dot(g * V) * Z;
    for (int c = 1; c < col; ++c) u -= u.dot(g * F.vectors.col(c)) * F.vectors.col(c);
    const double nn = u.dot(g * u);
    if (nn <= 1e-10) continue;
    F.vectors.col(col++) = u / std::sqrt(nn);
  }
  if (col != m - 1) throw NumericalError("could not complete the null frame");
  return F;
}

AdaptedFrame generic_frame(const MetricChart& M, const Point& p) {
  const int m = M.dim();
  const Matrix g = M.metric_at(p);
  Vector signs;
  const Matrix B = orthonormal_basis(g, signs);
  int neg = 0;
  for (int k = 0; k < m; ++k) neg += signs[k] < 0;
  if (neg != 1) throw ValidationError("metric is not Lorentzian at the base point");
  // eigenvalues are sorted ascending, so column 0 is the timelike one
  const Vector T = B.col(0), S = B.col(1);
  AdaptedFrame F;
  F.base = p;
  F.vectors = Matrix::Zero(m, m);
  F.vectors.col(0) = (T + S) / std::sqrt(2.0);
  F.vectors.col(m - 1) = (S - T) / std::sqrt(2.0);
  for (int k = 2; k < m; ++k) F.vectors.col(k - 1) = B.col(k);
  return F;
}

double frame_residual(const MetricChart& M, const AdaptedFrame& F) {
  const Matrix g = M.metric_at(F.base);
  return (F.vectors.transpose() * g * F.vectors - adapted_gram(F.screen_dim())).cwiseAbs().maxCoeff();
}

namespace {

std::vector<Point> sample_points(const MetricChart& M, const Point& p, const SamplingStrategy& s) {
  std::vector<Point> pts{p};
  if (s.lasso_targets > 0) {
    auto targets = probe_points(M.domain().shrink(s.margin), s.lasso_targets, s.seed);
    pts.insert(pts.end(), targets.begin(), targets.end());
  }
  return pts;
}

std::vector<std::pair<int, int>> planes(int m, const SamplingStrategy& s) {
  if (!s.plane_pairs.empty()) return s.plane_pairs;
  std::vector<std::pair<int, int>> out;
  for (int i = 0; i < m; ++i)
    for (int j = i + 1; j < m; ++j) out.push_back({i, j});
  return out;
}

}  // namespace

std::vector<HolonomySample> ambrose_singer_sample(const MetricChart& M, const AdaptedFrame& frame,
                                                  const SamplingStrategy& strategy) {
  const int m = M.dim();
  const Matrix& Fp = frame.vectors;
  const Point& p = frame.base;
  TransportOptions topt;
  topt.tol = strategy.transport_tol;
  std::vector<HolonomySample> out;

  for (const Point& q : sample_points(M, p, strategy)) {
    const bool at_base = (q - p).norm() == 0.0;
    const Matrix Fq = at_base ? Fp : parallel_transport(M, PathSpec::polyline({p, q}), Fp, topt);
    const Matrix Finv = Fq.inverse();
    const CurvatureTensor R = M.riemann(q);
    for (int a = 0; a < m; ++a)
      for (int b = a + 1; b < m; ++b) {
        HolonomySample s;
        s.X = Finv * R.endomorphism(Fq.col(a), Fq.col(b)) * Fq;
        s.kind = "curvature";
        s.point = q;
        s.i = a;
        s.j = b;
        s.norm = s.X.norm();
        s.kept = s.norm > strategy.curvature_floor;
        out.push_back(std::move(s));
      }
  }

  const Box& box = M.domain();
  for (const auto& [i, j] : planes(m, strategy))
    for (double h : strategy.rect_sizes) {
      const PathSpec loop = PathSpec::rectangle(p, i, j, h, h);
      bool inside = true;
      for (const auto& v : loop.vertices) inside = inside && box.contains(v);
      if (!inside) continue;
      const Matrix P = loop_transport(M, loop, Fp, topt);
      HolonomySample s;
      s.kind = "loop";
      s.point = p;
      s.i = i;
      s.j = j;
      if ((P - Matrix::Identity(m, m)).norm() < 0.5) {
        s.X = log_near_identity(P);
        s.norm = s.X.norm();
        s.kept = s.norm > strategy.loop_floor;
      } else {
        s.X = Matrix::Zero(m, m);
      }
      out.push_back(std::move(s));
    }
  return out;
}

ClosureResult lie_closure(const std::vector<Matrix>& elems, double tol_rank, int cap) {
  ClosureResult res;
  if (elems.empty()) {
    res.singular_values.resize(0);
    return res;
  }
  const int rows = static_cast<int>(elems.front().rows());
  const int cols = static_cast<int>(elems.front().cols());
  if (cap < 0) cap = rows * (rows - 1) / 2;
  std::vector<Vector> normed;
  for (const auto& e : elems) {
    if (e.rows() != rows || e.cols() != cols) throw ValidationError("closure elements have different sizes");
    const double nrm = e.norm();
    if (nrm > 0.0 && std::isfinite(nrm)) normed.push_back(flatten(e) / nrm);
  }
  Matrix stack(static_cast<int>(normed.size()), rows * cols);
  for (std::size_t k = 0; k < normed.size(); ++k) stack.row(static_cast<int>(k)) = normed[k].transpose();
  const Matrix B = row_space(stack, tol_rank, &res.singular_values);

  std::vector<Vector> basis;
  for (int k = 0; k < B.rows(); ++k) basis.push_back(B.row(k).transpose());
  if (static_cast<int>(basis.size()) >= cap) {
    basis.resize(cap);
    res.cap_hit = true;
  }

  auto residual = [&](Vector v) {
    for (int pass = 0; pass < 2; ++pass)
      for (const auto& b : basis) v -= v.dot(b) * b;
    return v;
  };

  bool grew = true;
  while (grew && !res.cap_hit) {
    grew = false;
    const std::size_t count = basis.size();
    for (std::size_t i = 0; i < count && !res.cap_hit; ++i)
      for (std::size_t j = i + 1; j < count && !res.cap_hit; ++j) {
        const Matrix c = commutator(unflatten(basis[i], rows, cols), unflatten(basis[j], rows, cols));
        const Vector r = residual(flatten(c));
        const double nr = r.norm();
        if (nr > tol_rank) {
          basis.push_back(r / nr);
          ++res.commutators_added;
          grew = true;
          res.cap_hit = static_cast<int>(basis.size()) >= cap;
        }
      }
  }
  for (const auto& b : basis) res.basis.push_back(unflatten(b, rows, cols));
  return res;
}

std::optional<StabilizerElement> stabilizer_decompose(const Matrix& X, double tol) {
  const int m = static_cast<int>(X.rows());
  const int n = m - 2;
  if (X.cols() != m || n < 0) return std::nullopt;
  const double t = tol * std::max(1.0, X.cwiseAbs().maxCoeff());
  for (int r = 1; r < m; ++r)
    if (std::abs(X(r, 0)) > t) return std::nullopt;
  for (int c = 0; c < m - 1; ++c)
    if (std::abs(X(m - 1, c)) > t) return std::nullopt;
  if (std::abs(X(0, m - 1)) > t) return std::nullopt;
  if (std::abs(X(m - 1, m - 1) + X(0, 0)) > t) return std::nullopt;
  StabilizerElement s;
  s.a = X(0, 0);
  s.A = X.block(1, 1, n, n);
  s.w = X.block(0, 1, 1, n).transpose();
  if ((s.A + s.A.transpose()).cwiseAbs().maxCoeff() > t) return std::nullopt;
  if ((X.block(1, m - 1, n, 1) + s.w).cwiseAbs().maxCoeff() > t) return std::nullopt;
  s.A = 0.5 * (s.A - s.A.transpose());
  return s;
}

std::string to_string(TypeLabel label, int ell) {
  switch (label) {
    case TypeLabel::Type1: return "Type1";
    case TypeLabel::Type2: return "Type2";
    case TypeLabel::Type3: return "Type3";
    case TypeLabel::Type4: return "Type4(" + std::to_string(ell) + ")";
    case TypeLabel::NotReducible: return "NotReducible";
    case TypeLabel::Decomposable: return "Decomposable";
  }
  return "unknown";
}

Classification classify_bbi(const std::vector<Matrix>& basis, int n, double tol) {
  Classification c;
  const int d = static_cast<int>(basis.size());
  const int m = n + 2;
  for (const auto& X : basis) {
    auto s = stabilizer_decompose(X, 1e-8);
    if (!s) {
      c.in_stabilizer = false;
      break;
    }
    c.elements.push_back(*s);
  }
  if (!c.in_stabilizer) {
    c.elements.clear();
    c.label = TypeLabel::NotReducible;
    if (d != m * (m - 1) / 2) c.notes.push_back("elements violate the stabilizer pattern");
    return c;
  }
  if (d == 0) {
    c.label = TypeLabel::Decomposable;
    c.notes.push_back("trivial algebra");
    return c;
  }

  const int na = n * (n - 1) / 2;
  Matrix aA(d, 1 + na);  // row k: (a_k, upper part of A_k)
  Matrix W(d, n);
  for (int k = 0; k < d; ++k) {
    const auto& s = c.elements[k];
    aA(k, 0) = s.a;
    int col = 1;
    for (int i = 0; i < n; ++i)
      for (int j = i + 1; j < n; ++j) aA(k, col++) = s.A(i, j) * std::sqrt(2.0);
    W.row(k) = s.w.transpose();
    c.a_nonzero = c.a_nonzero || std::abs(s.a) > tol;
  }
  const int rank_aA = numerical_rank(aA, tol);
  const int rank_A = na > 0 ? numerical_rank(aA.rightCols(na), tol) : 0;
  c.g_dim = rank_A;

  // Elements with a = 0 and A = 0: coefficient vectors in the left kernel of aA.
  const Matrix K = null_space(aA.transpose(), tol);  // d x (d - rank)
  const Matrix WT = K.transpose() * W;              // translation parts
  const Matrix Tbasis = row_space(WT, tol);          // orthonormal rows in R^n
  c.translation_dim = static_cast<int>(Tbasis.rows());
  const int ell = c.translation_dim;

  if (!c.a_nonzero) {
    if (ell == n) {
      c.label = TypeLabel::Type2;
      return c;
    }
    // complementary w-components must be an epimorphic image of the A-parts
    const Matrix Pc = Matrix::Identity(n, n) - Tbasis.transpose() * Tbasis;
    const int r_c = numerical_rank(W * Pc, tol);
    if (r_c == n - ell && rank_A >= n - ell) {
      c.label = TypeLabel::Type4;
      c.ell = ell;
    } else {
      c.label = TypeLabel::Decomposable;
      c.notes.push_back("translations span a proper subspace without coupling");
    }
    return c;
  }
  if (ell < n) {
    c.label = TypeLabel::Decomposable;
    c.notes.push_back("translations span a proper subspace");
    return c;
  }
  if (rank_aA == rank_A + 1) {
    c.label = TypeLabel::Type1;
  } else {
    c.label = TypeLabel::Type3;
    c.notes.push_back("a-part is a linear function of A");
  }
  return c;
}

namespace {

std::optional<Vector> null_vector_in(const Matrix& K, const Matrix& eta) {
  if (K.cols() == 0) return std::nullopt;
  const Matrix S = K.transpose() * eta * K;
  Eigen::SelfAdjointEigenSolver<Matrix> es(S);
  const Vector& ev = es.eigenvalues();
  for (int i = 0; i < ev.size(); ++i)
    if (std::abs(ev[i]) < 1e-9) return Vector(K * es.eigenvectors().col(i));
  if (ev[0] < 0 && ev[ev.size() - 1] > 0) {
    const Vector u = es.eigenvectors().col(0) / std::sqrt(-ev[0]) +
                     es.eigenvectors().col(ev.size() - 1) / std::sqrt(ev[ev.size() - 1]);
    return Vector(K * u);
  }
  return std::nullopt;
}

bool invariant_line(const std::vector<Matrix>& basis, const Vector& v, double tol) {
  for (const auto& X : basis) {
    const Vector Xv = X * v;
    const Vector perp = Xv - (v.dot(Xv) / v.squaredNorm()) * v;
    if (perp.norm() > tol * std::max(1.0, v.norm())) return false;
  }
  return true;
}

// Invariant null line of an algebra given in frame coordinates with Gram eta.
std::optional<Vector> find_invariant_null_line(const std::vector<Matrix>& basis, const Matrix& eta, double tol) {
  const int m = static_cast<int>(eta.rows());
  Matrix stack(0, m);
  for (const auto& X : basis) {
    stack.conservativeResize(stack.rows() + m, Eigen::NoChange);
    stack.bottomRows(m) = X;
  }
  if (auto v = null_vector_in(null_space(stack, tol), eta); v && invariant_line(basis, *v, 1e-6)) return v;

  Matrix comm(0, m);
  for (std::size_t i = 0; i < basis.size(); ++i)
    for (std::size_t j = i + 1; j < basis.size(); ++j) {
      comm.conservativeResize(comm.rows() + m, Eigen::NoChange);
      comm.bottomRows(m) = commutator(basis[i], basis[j]);
    }
  const Matrix K = null_space(comm, tol);
  if (K.cols() == 0) return std::nullopt;
  std::uint64_t state = 0x5eed;
  Matrix Rc = Matrix::Zero(m, m);
  for (const auto& X : basis) Rc += (uniform01(state) - 0.5) * X;
  const Matrix B = K.transpose() * Rc * K;
  Eigen::EigenSolver<Matrix> es(B);
  for (int i = 0; i < B.rows(); ++i) {
    if (std::abs(es.eigenvalues()[i].imag()) > 1e-9) continue;
    const Vector v = K * es.eigenvectors().col(i).real();
    if (std::abs(v.dot(eta * v)) < 1e-8 * v.squaredNorm() && invariant_line(basis, v, 1e-6)) return v;
  }
  return std::nullopt;
}

}  // namespace

HolonomyReport holonomy_report(const MetricChart& M, const Point& p, const SamplingStrategy& strategy,
                               double tol_rank, const std::optional<Matrix>& rotation) {
  const int n = M.screen_dim();
  const int m = n + 2;
  HolonomyReport rep;
  rep.base = p;
  const AdaptedFrame F = M.is_walker() ? adapted_frame(M, p, rotation) : generic_frame(M, p);
  rep.frame = F.vectors;

  const auto samples = ambrose_singer_sample(M, F, strategy);
  std::vector<Matrix> kept;
  for (const auto& s : samples)
    if (s.kept) kept.push_back(s.X);
  rep.samples_total = static_cast<int>(samples.size());
  rep.samples_kept = static_cast<int>(kept.size());

  const ClosureResult cl = lie_closure(kept, tol_rank);
  rep.basis = cl.basis;
  rep.dim = static_cast<int>(cl.basis.size());
  rep.singular_values = cl.singular_values;
  rep.cap_hit = cl.cap_hit;

  Classification c = classify_bbi(rep.basis, n, tol_rank);
  if (!c.in_stabilizer && rep.dim < m * (m - 1) / 2 && !M.is_walker()) {
    const Matrix eta = adapted_gram(n);
    if (auto v = find_invariant_null_line(rep.basis, eta, 1e-8)) {
      const AdaptedFrame F2 = null_frame(M, p, F.vectors * *v);
      const Matrix T = F.vectors.fullPivLu().solve(F2.vectors);  // F2 = F T
      const Matrix Tinv = T.inverse();
      std::vector<Matrix> moved;
      for (const auto& X : rep.basis) moved.push_back(Tinv * X * T);
      c = classify_bbi(moved, n, tol_rank);
      rep.basis = moved;
      rep.frame = F2.vectors;
      c.notes.push_back("frame re-adapted to a detected invariant null line");
    } else {
      c = Classification{};
      c.label = TypeLabel::Decomposable;
      c.in_stabilizer = false;
      c.notes.push_back("no invariant null line found for a proper subalgebra");
    }
  }
  if (!c.in_stabilizer && rep.dim == m * (m - 1) / 2)
    c.notes.push_back("sampled algebra is all of so(1," + std::to_string(n + 1) + ")");
  rep.in_stabilizer = c.in_stabilizer;
  rep.stab_basis = c.elements;
  rep.screen_algebra_dim = c.g_dim;
  rep.label = c.label;
  rep.ell = c.ell;
  rep.notes = c.notes;
  if (rep.cap_hit) rep.notes.push_back("dimension cap reached during closure");
  return rep;
}

ScreenHolonomy screen_holonomy(const MetricChart& M, const Point& p, const SamplingStrategy& strategy,
                               double tol_rank) {
  if (!M.is_walker()) throw ValidationError("screen_holonomy needs a Walker chart");
  const int n = M.screen_dim();
  const int m = n + 2;
  ScreenHolonomy out;
  const AdaptedFrame F = adapted_frame(M, p);
  const auto samples = ambrose_singer_sample(M, F, strategy);
  std::vector<Matrix> blocks;
  for (const auto& s : samples) {
    const Matrix A = s.X.block(1, 1, n, n);
    const double na = A.norm();
    const double floor = s.kind == "loop" ? strategy.loop_floor : strategy.curvature_floor;
    if (na > floor && na >= 1e-4 * s.norm) blocks.push_back(A);
  }
  const ClosureResult cl = lie_closure(blocks, tol_rank);
  out.basis = cl.basis;
  out.dim = static_cast<int>(cl.basis.size());
  out.singular_values = cl.singular_values;

  for (const Point& q : sample_points(M, p, strategy)) {
    const AdaptedFrame Fq = adapted_frame(M, q);
    const Matrix Finv = Fq.vectors.inverse();
    const CurvatureTensor R = M.riemann(q);
    for (int a = 0; a < m; ++a)
      for (int b = a + 1; b < m; ++b) {
        const Matrix X = Finv * R.endomorphism(Fq.vectors.col(a), Fq.vectors.col(b)) * Fq.vectors;
        out.max_screen_curvature = std::max(out.max_screen_curvature, X.block(1, 1, n, n).cwiseAbs().maxCoeff());
      }
  }
  return out;
}

}  // namespace lorhol
