#include "lorhol/transport.hpp"

#include <cmath>

#include "lorhol/linalg.hpp"

namespace lorhol {

double energy(const MetricChart& M, const Point& p, const Vector& v) { return v.dot(M.metric_at(p) * v); }

Vector geodesic_acceleration(const MetricChart& M, const Point& p, const Vector& v) {
  return M.geodesic_acceleration(p, v);
}

namespace {

void check_state(const MetricChart& M, const GeodesicState& s) {
  if (s.position.size() != M.dim() || s.velocity.size() != M.dim())
    throw DomainError("initial state has wrong dimension");
  if (!s.position.allFinite() || !s.velocity.allFinite()) throw DomainError("initial state is not finite");
}

// Records samples at t0 + k dt (every step when dt == 0).
class SampleRecorder {
 public:
  SampleRecorder(double t0, double dt) : next_(t0), dt_(dt), t0_(t0) {}

  template <class Emit>
  void step(const DenseStep& d, const Vector& y_end, Emit&& emit) {
    if (dt_ <= 0.0) {
      emit(d.t1(), y_end);
      return;
    }
    Vector y;
    while (next_ <= d.t1() + 1e-12 * std::max(1.0, std::abs(next_))) {
      if (next_ > d.t0()) {
        d.at(next_, y);
        emit(next_, y);
        last_ = next_;
      }
      ++k_;
      next_ = t0_ + static_cast<double>(k_) * dt_;
    }
  }

  double last() const { return last_; }

 private:
  double next_;
  double dt_;
  double t0_;
  long k_ = 0;
  double last_ = -INFINITY;
};

}  // namespace

Trajectory geodesic(const MetricChart& M, const GeodesicState& s0, const GeodesicOptions& opts) {
  check_state(M, s0);
  const int m = M.dim();
  Trajectory tr;
  Vector y0(2 * m);
  y0 << s0.position, s0.velocity;
  tr.energy = energy(M, s0.position, s0.velocity);
  const Matrix g0 = M.metric_at(s0.position);
  const double zdot0 = g0.row(0).dot(s0.velocity);

  auto push = [&](double t, const Vector& y) {
    const Point p = y.head(m);
    const Vector v = y.tail(m);
    tr.t.push_back(t);
    tr.position.push_back(p);
    tr.velocity.push_back(v);
    tr.energy_series.push_back(energy(M, p, v));
  };
  push(0.0, y0);

  auto rhs = [&](double, const Vector& y, Vector& dy) {
    dy.resize(2 * m);
    dy.head(m) = y.tail(m);
    dy.tail(m) = M.geodesic_acceleration(y.head(m), y.tail(m));
  };

  SampleRecorder rec(0.0, opts.output_dt);
  auto observer = [&](const DenseStep& d, const Vector& y) {
    const Point p = y.head(m);
    const Vector v = y.tail(m);
    const Matrix g = M.metric_at(p);
    const double e = v.dot(g * v);
    tr.diagnostics.max_energy_drift = std::max(tr.diagnostics.max_energy_drift, std::abs(e - tr.energy));
    tr.diagnostics.z_dot_drift = std::max(tr.diagnostics.z_dot_drift, std::abs(g.row(0).dot(v) - zdot0));
    rec.step(d, y, [&](double t, const Vector& yy) { push(t, yy); });
    if (opts.restrict_to_domain && !M.domain().contains(p)) return false;
    return true;
  };

  OdeOptions o;
  o.rtol = o.atol = opts.tol;
  const OdeResult r = Dopri5::integrate(rhs, 0.0, y0, opts.t_end, o, observer);
  if (tr.t.back() < r.t) push(r.t, r.y);
  tr.diagnostics.termination = r.status;
  tr.diagnostics.steps = r.steps;
  tr.diagnostics.rejected = r.rejected;
  return tr;
}

bool is_reduced_ppwave(const MetricChart& M) {
  if (!M.is_walker()) return false;
  const int n = M.screen_dim();
  for (int a = 1; a <= n; ++a) {
    const auto c = M.entry(a, n + 1).constant_value();
    if (!c || *c != 0.0) return false;
    for (int b = 1; b <= n; ++b) {
      const auto g = M.entry(a, b).constant_value();
      if (!g || *g != (a == b ? 1.0 : 0.0)) return false;
    }
  }
  return !M.entry(n + 1, n + 1).depends_on(0);
}

Trajectory ppwave_reduced(const MetricChart& M, const GeodesicState& s0, const GeodesicOptions& opts) {
  check_state(M, s0);
  if (!is_reduced_ppwave(M))
    throw ValidationError("reduced system needs a Walker chart with u = 0, identity screen metric and x-independent f");
  const int n = M.screen_dim();
  const int m = n + 2;
  const ScalarField& F = M.entry(n + 1, n + 1);
  const double A = s0.velocity[n + 1];
  const double x0 = s0.position[0];
  const double z0 = s0.position[n + 1];
  const double xdot0 = s0.velocity[0];

  Trajectory tr;
  tr.energy = energy(M, s0.position, s0.velocity);
  const double E = tr.energy;

  Point work = s0.position;
  auto full_point = [&](double t, const Vector& y, double x) {
    Point p(m);
    p[0] = x;
    p.segment(1, n) = y.head(n);
    p[n + 1] = z0 + A * t;
    return p;
  };
  // x' from the energy identity E = 2 x' A + |y'|^2 + F A^2
  auto xdot = [&](double t, const Vector& y) {
    if (A == 0.0) return xdot0;
    const Point p = full_point(t, y, x0);
    return (E - y.tail(n).squaredNorm() - A * A * F.eval(p)) / (2.0 * A);
  };

  auto push = [&](double t, const Vector& y, double x) {
    const Point p = full_point(t, y, x);
    Vector v(m);
    v[0] = xdot(t, y);
    v.segment(1, n) = y.tail(n);
    v[n + 1] = A;
    tr.t.push_back(t);
    tr.position.push_back(p);
    tr.velocity.push_back(v);
    tr.energy_series.push_back(energy(M, p, v));
    tr.diagnostics.max_energy_drift = std::max(tr.diagnostics.max_energy_drift, std::abs(tr.energy_series.back() - E));
  };

  Vector y0(2 * n);
  y0 << s0.position.segment(1, n), s0.velocity.segment(1, n);
  push(0.0, y0, x0);

  const double half_a2 = 0.5 * A * A;
  auto rhs = [&](double t, const Vector& y, Vector& dy) {
    dy.resize(2 * n);
    dy.head(n) = y.tail(n);
    if (A == 0.0) {
      dy.tail(n).setZero();
      return;
    }
    work[0] = x0;
    work.segment(1, n) = y.head(n);
    work[n + 1] = z0 + A * t;
    const Jet j = F.jet(work, 1);
    dy.tail(n) = half_a2 * j.gradient.segment(1, n);
  };

  // Trapezoidal quadrature of x' on a fine grid aligned with the output times.
  constexpr double quad_h = 1e-5;
  double x_acc = x0;
  double t_q = 0.0;
  double xd_q = xdot(0.0, y0);
  SampleRecorder rec(0.0, opts.output_dt);
  Vector yq;
  auto advance_to = [&](const DenseStep& d, double t_target) {
    const double span = t_target - t_q;
    if (span <= 0.0) return;
    const int pieces = std::max(1, static_cast<int>(std::ceil(span / quad_h)));
    const double h = span / pieces;
    for (int k = 1; k <= pieces; ++k) {
      const double t = k == pieces ? t_target : t_q + k * h;
      double xd;
      if (A == 0.0) {
        xd = xdot0;
      } else {
        d.at(t, yq);
        xd = xdot(t, yq);
      }
      x_acc += 0.5 * (t - (k == 1 ? t_q : t_q + (k - 1) * h)) * (xd + xd_q);
      xd_q = xd;
    }
    t_q = t_target;
  };

  auto observer = [&](const DenseStep& d, const Vector& y) {
    rec.step(d, y, [&](double t, const Vector& yy) {
      advance_to(d, t);
      push(t, yy, A == 0.0 ? x0 + xdot0 * t : x_acc);
    });
    advance_to(d, d.t1());
    return true;
  };

  OdeOptions o;
  o.rtol = o.atol = opts.tol;
  const OdeResult r = Dopri5::integrate(rhs, 0.0, y0, opts.t_end, o, observer);
  if (tr.t.back() < r.t) push(r.t, r.y, A == 0.0 ? x0 + xdot0 * r.t : x_acc);
  tr.diagnostics.termination = r.status;
  tr.diagnostics.steps = r.steps;
  tr.diagnostics.rejected = r.rejected;
  return tr;
}

PathSpec PathSpec::polyline(std::vector<Point> vertices) {
  if (vertices.size() < 2) throw ValidationError("a path needs at least two vertices");
  for (std::size_t i = 1; i < vertices.size(); ++i)
    if (vertices[i].size() != vertices[0].size()) throw ValidationError("path vertices have different dimensions");
  return PathSpec{std::move(vertices)};
}

PathSpec PathSpec::rectangle(const Point& p, int i, int j, double a, double b) {
  Point q1 = p, q2 = p, q3 = p;
  q1[i] += a;
  q2[i] += a;
  q2[j] += b;
  q3[j] += b;
  return polyline({p, q1, q2, q3, p});
}

PathSpec PathSpec::reversed(const PathSpec& path) {
  return PathSpec{std::vector<Point>(path.vertices.rbegin(), path.vertices.rend())};
}

bool PathSpec::closed(double tol) const {
  return vertices.size() >= 2 && (vertices.front() - vertices.back()).norm() <= tol;
}

Matrix parallel_transport(const MetricChart& M, const PathSpec& path, const Matrix& w0, const TransportOptions& opts) {
  const int m = M.dim();
  if (w0.rows() != m) throw DomainError("transported vectors have wrong dimension");
  const int k = static_cast<int>(w0.cols());
  Matrix w = w0;
  OdeOptions o;
  o.rtol = o.atol = opts.tol;
  for (std::size_t s = 1; s < path.vertices.size(); ++s) {
    const Point a = path.vertices[s - 1];
    const Vector d = path.vertices[s] - a;
    const double L = d.norm();
    if (L == 0.0) continue;
    const Vector u = d / L;
    auto rhs = [&](double t, const Vector& y, Vector& dy) {
      const Matrix C = M.connection_along(a + t * u, u);
      const Eigen::Map<const Matrix> W(y.data(), m, k);
      dy.resize(y.size());
      Eigen::Map<Matrix>(dy.data(), m, k) = -C * W;
    };
    const OdeResult r = Dopri5::integrate(rhs, 0.0, flatten(w), L, o);
    if (r.status != Termination::Completed)
      throw NumericalError(std::string("parallel transport failed: ") + to_string(r.status));
    w = unflatten(r.y, m, k);
  }
  return w;
}

Vector parallel_transport(const MetricChart& M, const PathSpec& path, const Vector& v0, const TransportOptions& opts) {
  return parallel_transport(M, path, Matrix(v0), opts).col(0);
}

Matrix loop_transport(const MetricChart& M, const PathSpec& loop, const Matrix& frame, const TransportOptions& opts) {
  if (!loop.closed(1e-12)) throw ValidationError("loop_transport needs a closed path");
  const Matrix moved = parallel_transport(M, loop, frame, opts);
  return frame.fullPivLu().solve(moved);
}

double sampled_sup_constant(const ScalarField& f, int N) {
  const int n = f.screen_dim();
  const int m = n + 2;
  if (N < 1) throw ValidationError("grid size must be positive");
  double sup_f = 0.0, sup_grad = 0.0;
  std::vector<int> idx(n + 1, 0);
  Point p = Point::Zero(m);
  while (true) {
    for (int a = 0; a <= n; ++a) p[a + 1] = static_cast<double>(idx[a]) / N;
    const Jet j = f.jet(p, 1);
    sup_f = std::max(sup_f, std::abs(j.value));
    sup_grad = std::max(sup_grad, j.gradient.segment(1, n).norm());
    int a = 0;
    while (a <= n && ++idx[a] == N) idx[a++] = 0;
    if (a > n) break;
  }
  return sup_f + sup_grad;
}

std::vector<GeodesicState> random_ensemble(const MetricChart& M, int count, std::uint64_t seed, double speed) {
  std::uint64_t state = seed;
  const Box& box = M.domain();
  std::vector<GeodesicState> out;
  for (int i = 0; i < count; ++i) {
    GeodesicState s{Point(M.dim()), Vector(M.dim())};
    for (int k = 0; k < M.dim(); ++k) s.position[k] = box.lo[k] + uniform01(state) * (box.hi[k] - box.lo[k]);
    for (int k = 0; k < M.dim(); ++k) s.velocity[k] = speed * (2.0 * uniform01(state) - 1.0);
    out.push_back(std::move(s));
  }
  return out;
}

ProbeReport completeness_probe(const MetricChart& M, const std::vector<GeodesicState>& ensemble,
                               const ProbeOptions& opts) {
  ProbeReport rep;
  rep.verdict_applicable = is_reduced_ppwave(M);
  rep.grid_per_dim = opts.grid_per_dim;
  const int n = M.screen_dim();

  if (!rep.verdict_applicable) {
    GeodesicOptions go;
    go.t_end = opts.horizon;
    go.tol = opts.tol;
    go.output_dt = opts.horizon;
    for (const auto& s : ensemble) {
      ProbeEntry e;
      const Trajectory tr = geodesic(M, s, go);
      e.termination = tr.diagnostics.termination;
      e.A = s.velocity[n + 1];
      e.t_reached = tr.t.back();
      for (std::size_t k = 0; k < tr.t.size(); ++k) {
        Vector alpha(2 * n);
        alpha << tr.position[k].segment(1, n), tr.velocity[k].segment(1, n);
        e.max_norm = std::max(e.max_norm, alpha.norm());
      }
      rep.all_completed = rep.all_completed && e.termination == Termination::Completed;
      rep.entries.push_back(e);
    }
    rep.all_within_envelope = false;
    return rep;
  }

  const ScalarField& F = M.entry(n + 1, n + 1);
  rep.C = sampled_sup_constant(opts.periodic_part ? *opts.periodic_part : F, opts.grid_per_dim);

  for (const auto& s : ensemble) {
    check_state(M, s);
    ProbeEntry e;
    const double A = s.velocity[n + 1];
    e.A = A;
    const double K = std::pow(A, 4) / 4.0 * (rep.C * rep.C + 2.0 * rep.C + 1.0);
    const double sqrtK = std::sqrt(K);
    Vector y0(2 * n);
    y0 << s.position.segment(1, n), s.velocity.segment(1, n);
    const double log0 = std::log(y0.norm() + sqrtK);
    e.max_norm = y0.norm();
    e.worst_log_margin = INFINITY;
    const double half_a2 = 0.5 * A * A;
    const double z0 = s.position[n + 1];
    Point work = s.position;
    auto rhs = [&](double t, const Vector& y, Vector& dy) {
      dy.resize(2 * n);
      dy.head(n) = y.tail(n);
      if (A == 0.0) {
        dy.tail(n).setZero();
        return;
      }
      work.segment(1, n) = y.head(n);
      work[n + 1] = z0 + A * t;
      dy.tail(n) = half_a2 * F.jet(work, 1).gradient.segment(1, n);
    };
    auto observer = [&](const DenseStep& d, const Vector& y) {
      const double norm = y.norm();
      e.max_norm = std::max(e.max_norm, norm);
      double margin;
      if (norm + sqrtK == 0.0) {
        margin = INFINITY;
      } else {
        margin = log0 + d.t1() - std::log(norm + sqrtK);
      }
      e.worst_log_margin = std::min(e.worst_log_margin, margin);
      if (margin < -1e-9) e.within_envelope = false;
      return true;
    };
    OdeOptions o;
    o.rtol = o.atol = opts.tol;
    const OdeResult r = Dopri5::integrate(rhs, 0.0, y0, opts.horizon, o, observer);
    e.termination = r.status;
    e.t_reached = r.t;
    rep.all_completed = rep.all_completed && r.status == Termination::Completed;
    rep.all_within_envelope = rep.all_within_envelope && e.within_envelope;
    rep.entries.push_back(e);
  }
  return rep;
}

}  // namespace lorhol
