#pragma once

#include <functional>

#include "lorhol/expr.hpp"

namespace lorhol {

enum class Termination { Completed, LeftDomain, StepUnderflow };

const char* to_string(Termination t);

struct OdeOptions {
  double rtol = 1e-10;
  double atol = 1e-10;
  double h0 = 0.0;  // 0 selects an initial step automatically
  double hmax = 0.0;  // 0 means unbounded
  long max_steps = 50'000'000;
};

/// Continuous extension over the last accepted step.
class DenseStep {
 public:
  double t0() const noexcept { return t0_; }
  double t1() const noexcept { return t0_ + h_; }
  Vector at(double t) const;
  void at(double t, Vector& out) const;

 private:
  friend class Dopri5;
  double t0_ = 0.0;
  double h_ = 0.0;
  Matrix r_;  // 5 columns of interpolation coefficients
};

struct OdeResult {
  double t = 0.0;
  Vector y;
  Termination status = Termination::Completed;
  long steps = 0;
  long rejected = 0;
};

/// Dormand-Prince 5(4) with PI step-size control and 4th-order dense output.
class Dopri5 {
 public:
  /// dy = rhs(t, y). May throw DomainError/NumericalError, which ends the
  /// integration with LeftDomain.
  using Rhs = std::function<void(double, const Vector&, Vector&)>;
  /// Called after every accepted step; return false to stop (LeftDomain).
  using Observer = std::function<bool(const DenseStep&, const Vector&)>;

  static OdeResult integrate(const Rhs& rhs, double t0, const Vector& y0, double t_end, const OdeOptions& opts,
                             const Observer& observer = {});
};

}  // namespace lorhol
