#pragma once

#include <optional>
#include <vector>

#include "lorhol/metric.hpp"
#include "lorhol/ode.hpp"

namespace lorhol {

struct GeodesicState {
  Point position;
  Vector velocity;
};

struct TrajectoryDiagnostics {
  double max_energy_drift = 0.0;
  double z_dot_drift = 0.0;
  Termination termination = Termination::Completed;
  long steps = 0;
  long rejected = 0;
};

/// Samples at the requested output times (plus t0 and the final time).
struct Trajectory {
  std::vector<double> t;
  std::vector<Point> position;
  std::vector<Vector> velocity;
  std::vector<double> energy_series;
  double energy = 0.0;  // g(v, v) at t0
  TrajectoryDiagnostics diagnostics;
};

struct GeodesicOptions {
  double t_end = 1.0;
  double tol = 1e-10;
  /// Spacing of output samples; 0 records every accepted step.
  double output_dt = 0.0;
  /// Stop with LeftDomain when the path leaves the chart domain.
  bool restrict_to_domain = false;
};

double energy(const MetricChart& M, const Point& p, const Vector& v);

/// -Gamma^k_{ij} v^i v^j.
Vector geodesic_acceleration(const MetricChart& M, const Point& p, const Vector& v);

/// Integrates the geodesic equation x'' + Gamma(x', x') = 0.
Trajectory geodesic(const MetricChart& M, const GeodesicState& s0, const GeodesicOptions& opts);

/// True for Walker charts with u = 0, gbase = identity and x-independent f.
bool is_reduced_ppwave(const MetricChart& M);

/// Reduced pp-wave system: z = z0 + A t, y'' = (A^2/2) grad_y F with F the
/// dz^2 coefficient, and x recovered from the energy by trapezoidal
/// quadrature on the dense output.
Trajectory ppwave_reduced(const MetricChart& M, const GeodesicState& s0, const GeodesicOptions& opts);

/// Piecewise-linear path; each segment is traversed at unit speed.
struct PathSpec {
  std::vector<Point> vertices;

  static PathSpec polyline(std::vector<Point> vertices);
  /// Closed loop p -> p + a e_i -> p + a e_i + b e_j -> p + b e_j -> p.
  static PathSpec rectangle(const Point& p, int i, int j, double a, double b);
  /// Same vertices in reverse order.
  static PathSpec reversed(const PathSpec& path);
  bool closed(double tol = 1e-14) const;
};

struct TransportOptions {
  double tol = 1e-11;
};

/// Transports the columns of w0 along the path; returns the transported columns.
Matrix parallel_transport(const MetricChart& M, const PathSpec& path, const Matrix& w0,
                          const TransportOptions& opts = {});
Vector parallel_transport(const MetricChart& M, const PathSpec& path, const Vector& v0,
                          const TransportOptions& opts = {});

/// Matrix of the transport map around a closed loop in the basis `frame`.
Matrix loop_transport(const MetricChart& M, const PathSpec& loop, const Matrix& frame,
                      const TransportOptions& opts = {});

struct ProbeEntry {
  Termination termination = Termination::Completed;
  double A = 0.0;
  double t_reached = 0.0;
  double max_norm = 0.0;         // max ||(y, y')||
  double worst_log_margin = 0.0;  // min over samples of log envelope - log(||alpha|| + sqrt K)
  bool within_envelope = true;
};

struct ProbeReport {
  bool verdict_applicable = false;  // true only for reduced pp-wave charts
  double C = 0.0;
  int grid_per_dim = 0;
  std::vector<ProbeEntry> entries;
  bool all_completed = true;
  bool all_within_envelope = true;
};

struct ProbeOptions {
  double horizon = 1e3;
  double tol = 1e-8;
  int grid_per_dim = 64;
  /// Periodic part f of F = f + y1 + 1; when absent the bound uses F itself.
  std::optional<ScalarField> periodic_part;
};

/// Integrates each state to the horizon and checks the Gronwall envelope
/// ||alpha(t)|| + sqrt(K) <= (||alpha(0)|| + sqrt(K)) e^t, K = A^4 (C + 1)^2 / 4.
ProbeReport completeness_probe(const MetricChart& M, const std::vector<GeodesicState>& ensemble,
                               const ProbeOptions& opts);

/// Sup of |f| + |grad_y f| over the unit cell in (y, z), sampled on a
/// grid_per_dim^(n+1) grid.
double sampled_sup_constant(const ScalarField& f, int grid_per_dim);

/// Reproducible ensemble: positions uniform in the chart domain, velocity
/// components uniform in [-speed, speed].
std::vector<GeodesicState> random_ensemble(const MetricChart& M, int count, std::uint64_t seed, double speed = 0.5);

}  // namespace lorhol
