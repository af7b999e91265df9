#include "lorhol/ode.hpp"

#include <algorithm>
#include <cmath>

namespace lorhol {

const char* to_string(Termination t) {
  switch (t) {
    case Termination::Completed: return "completed";
    case Termination::LeftDomain: return "left_domain";
    case Termination::StepUnderflow: return "step_underflow";
  }
  return "unknown";
}

void DenseStep::at(double t, Vector& out) const {
  const double s = (t - t0_) / h_;
  const double s1 = 1.0 - s;
  out = r_.col(0) + s * (r_.col(1) + s1 * (r_.col(2) + s * (r_.col(3) + s1 * r_.col(4))));
}

Vector DenseStep::at(double t) const {
  Vector out;
  at(t, out);
  return out;
}

namespace {

constexpr double c2 = 0.2, c3 = 0.3, c4 = 0.8, c5 = 8.0 / 9.0;
constexpr double a21 = 0.2;
constexpr double a31 = 3.0 / 40.0, a32 = 9.0 / 40.0;
constexpr double a41 = 44.0 / 45.0, a42 = -56.0 / 15.0, a43 = 32.0 / 9.0;
constexpr double a51 = 19372.0 / 6561.0, a52 = -25360.0 / 2187.0, a53 = 64448.0 / 6561.0, a54 = -212.0 / 729.0;
constexpr double a61 = 9017.0 / 3168.0, a62 = -355.0 / 33.0, a63 = 46732.0 / 5247.0, a64 = 49.0 / 176.0,
                 a65 = -5103.0 / 18656.0;
constexpr double a71 = 35.0 / 384.0, a73 = 500.0 / 1113.0, a74 = 125.0 / 192.0, a75 = -2187.0 / 6784.0,
                 a76 = 11.0 / 84.0;
constexpr double e1 = 71.0 / 57600.0, e3 = -71.0 / 16695.0, e4 = 71.0 / 1920.0, e5 = -17253.0 / 339200.0,
                 e6 = 22.0 / 525.0, e7 = -1.0 / 40.0;
constexpr double d1 = -12715105075.0 / 11282082432.0, d3 = 87487479700.0 / 32700410799.0,
                 d4 = -10690763975.0 / 1880347072.0, d5 = 701980252875.0 / 199316789632.0,
                 d6 = -1453857185.0 / 822651844.0, d7 = 69997945.0 / 29380423.0;

double error_norm(const Vector& err, const Vector& y0, const Vector& y1, const OdeOptions& o) {
  double sum = 0.0;
  for (int i = 0; i < err.size(); ++i) {
    const double sc = o.atol + o.rtol * std::max(std::abs(y0[i]), std::abs(y1[i]));
    const double r = err[i] / sc;
    sum += r * r;
  }
  return std::sqrt(sum / static_cast<double>(std::max<Eigen::Index>(1, err.size())));
}

double initial_step(const Dopri5::Rhs& rhs, double t0, const Vector& y0, const Vector& f0, double dir,
                    const OdeOptions& o) {
  const int n = static_cast<int>(y0.size());
  double dnf = 0.0, dny = 0.0;
  for (int i = 0; i < n; ++i) {
    const double sk = o.atol + o.rtol * std::abs(y0[i]);
    dnf += (f0[i] / sk) * (f0[i] / sk);
    dny += (y0[i] / sk) * (y0[i] / sk);
  }
  double h = (dnf <= 1e-10 || dny <= 1e-10) ? 1e-6 : std::sqrt(dny / dnf) * 0.01;
  if (o.hmax > 0.0) h = std::min(h, o.hmax);
  const Vector y1 = y0 + dir * h * f0;
  Vector f1(n);
  rhs(t0 + dir * h, y1, f1);
  double der2 = 0.0;
  for (int i = 0; i < n; ++i) {
    const double sk = o.atol + o.rtol * std::abs(y0[i]);
    const double d = (f1[i] - f0[i]) / sk;
    der2 += d * d;
  }
  der2 = std::sqrt(der2) / h;
  const double der12 = std::max(std::abs(der2), std::sqrt(dnf));
  const double h1 = der12 <= 1e-15 ? std::max(1e-6, std::abs(h) * 1e-3) : std::pow(0.01 / der12, 0.2);
  h = std::min(100.0 * std::abs(h), h1);
  if (o.hmax > 0.0) h = std::min(h, o.hmax);
  return h;
}

}  // namespace

OdeResult Dopri5::integrate(const Rhs& rhs, double t0, const Vector& y0, double t_end, const OdeOptions& o,
                            const Observer& observer) {
  OdeResult res;
  res.t = t0;
  res.y = y0;
  if (t_end == t0) return res;
  const double dir = t_end > t0 ? 1.0 : -1.0;
  const int n = static_cast<int>(y0.size());

  Vector k1(n), k2(n), k3(n), k4(n), k5(n), k6(n), k7(n), yt(n), y1(n), err(n);
  Vector y = y0;
  double t = t0;
  try {
    rhs(t, y, k1);
  } catch (const DomainError&) {
    res.status = Termination::LeftDomain;
    return res;
  } catch (const NumericalError&) {
    res.status = Termination::LeftDomain;
    return res;
  }

  double h;
  try {
    h = o.h0 > 0.0 ? o.h0 : initial_step(rhs, t, y, k1, dir, o);
  } catch (const Error&) {
    h = 1e-6;
  }

  constexpr double beta = 0.04;
  constexpr double expo1 = 0.2 - beta * 0.75;
  constexpr double facc1 = 1.0 / 0.2;   // 1 / fac1
  constexpr double facc2 = 1.0 / 10.0;  // 1 / fac2
  constexpr double safe = 0.9;
  double facold = 1e-4;
  bool reject = false;
  DenseStep dense;
  dense.r_.resize(n, 5);

  while (true) {
    if (res.steps >= o.max_steps) {
      res.status = Termination::StepUnderflow;
      break;
    }
    if (std::abs(h) <= 10.0 * std::abs(t) * 2.220446049250313e-16 || std::abs(h) < 1e-300) {
      res.status = Termination::StepUnderflow;
      break;
    }
    bool last = false;
    if ((t + 1.01 * dir * h - t_end) * dir >= 0.0) {
      h = std::abs(t_end - t);
      last = true;
    }
    const double hs = dir * h;

    bool failed = false;
    try {
      yt = y + hs * a21 * k1;
      rhs(t + c2 * hs, yt, k2);
      yt = y + hs * (a31 * k1 + a32 * k2);
      rhs(t + c3 * hs, yt, k3);
      yt = y + hs * (a41 * k1 + a42 * k2 + a43 * k3);
      rhs(t + c4 * hs, yt, k4);
      yt = y + hs * (a51 * k1 + a52 * k2 + a53 * k3 + a54 * k4);
      rhs(t + c5 * hs, yt, k5);
      yt = y + hs * (a61 * k1 + a62 * k2 + a63 * k3 + a64 * k4 + a65 * k5);
      rhs(t + hs, yt, k6);
      y1 = y + hs * (a71 * k1 + a73 * k3 + a74 * k4 + a75 * k5 + a76 * k6);
      rhs(t + hs, y1, k7);
    } catch (const Error&) {
      failed = true;
    }
    if (failed || !y1.allFinite() || !k7.allFinite()) {
      h *= 0.25;
      reject = true;
      ++res.rejected;
      continue;
    }

    err = hs * (e1 * k1 + e3 * k3 + e4 * k4 + e5 * k5 + e6 * k6 + e7 * k7);
    const double errn = error_norm(err, y, y1, o);
    const double fac11 = std::pow(std::max(errn, 1e-300), expo1);
    double fac = fac11 / std::pow(facold, beta);
    fac = std::max(facc2, std::min(facc1, fac / safe));
    double hnew = h / fac;

    if (errn <= 1.0) {
      facold = std::max(errn, 1e-4);
      ++res.steps;
      // dense output coefficients
      const Vector ydiff = y1 - y;
      const Vector bspl = hs * k1 - ydiff;
      dense.r_.col(0) = y;
      dense.r_.col(1) = ydiff;
      dense.r_.col(2) = bspl;
      dense.r_.col(3) = ydiff - hs * k7 - bspl;
      dense.r_.col(4) = hs * (d1 * k1 + d3 * k3 + d4 * k4 + d5 * k5 + d6 * k6 + d7 * k7);
      dense.t0_ = t;
      dense.h_ = hs;

      k1 = k7;
      y = y1;
      t = last ? t_end : t + hs;
      if (observer && !observer(dense, y)) {
        res.status = Termination::LeftDomain;
        break;
      }
      if (last) break;
      if (o.hmax > 0.0) hnew = std::min(hnew, o.hmax);
      if (reject) hnew = std::min(hnew, h);
      reject = false;
    } else {
      hnew = h / std::min(facc1, fac11 / safe);
      reject = true;
      ++res.rejected;
    }
    h = hnew;
  }
  res.t = t;
  res.y = y;
  return res;
}

}  // namespace lorhol
