#pragma once

// Adaptive Dormand-Prince 5(4) integrator with Hairer's fourth-order
// continuous extension, sampling the solution on a caller-supplied grid.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <span>

#include "bayesid/errors.hpp"
#include "bayesid/types.hpp"

namespace bayesid {

struct IntegratorOptions {
  double rtol = 1e-9;
  double atol = 1e-9;
  /// 0 selects the initial step automatically.
  double initial_step = 0.0;
  std::size_t max_steps = 50'000'000;
  /// Stop (without throwing) once any |x_k| exceeds this bound. Infinity disables.
  double blowup_threshold = std::numeric_limits<double>::infinity();
};

struct IntegrationResult {
  /// One row per requested output time; rows past `samples` are unset when blown up.
  Matrix states;
  std::size_t samples = 0;
  bool blew_up = false;
  double blowup_time = std::numeric_limits<double>::quiet_NaN();
  std::size_t steps_accepted = 0;
  std::size_t steps_rejected = 0;
};

namespace detail {

struct Dopri5Tableau {
  static constexpr double c2 = 1.0 / 5.0, c3 = 3.0 / 10.0, c4 = 4.0 / 5.0, c5 = 8.0 / 9.0;
  static constexpr double a21 = 1.0 / 5.0;
  static constexpr double a31 = 3.0 / 40.0, a32 = 9.0 / 40.0;
  static constexpr double a41 = 44.0 / 45.0, a42 = -56.0 / 15.0, a43 = 32.0 / 9.0;
  static constexpr double a51 = 19372.0 / 6561.0, a52 = -25360.0 / 2187.0,
                          a53 = 64448.0 / 6561.0, a54 = -212.0 / 729.0;
  static constexpr double a61 = 9017.0 / 3168.0, a62 = -355.0 / 33.0, a63 = 46732.0 / 5247.0,
                          a64 = 49.0 / 176.0, a65 = -5103.0 / 18656.0;
  static constexpr double a71 = 35.0 / 384.0, a73 = 500.0 / 1113.0, a74 = 125.0 / 192.0,
                          a75 = -2187.0 / 6784.0, a76 = 11.0 / 84.0;
  // Fifth-order weights minus embedded fourth-order weights.
  static constexpr double e1 = 71.0 / 57600.0, e3 = -71.0 / 16695.0, e4 = 71.0 / 1920.0,
                          e5 = -17253.0 / 339200.0, e6 = 22.0 / 525.0, e7 = -1.0 / 40.0;
  // Dense output (Hairer, CONTD5).
  static constexpr double d1 = -12715105075.0 / 11282082432.0, d3 = 87487479700.0 / 32700410799.0,
                          d4 = -10690763975.0 / 1880347072.0,
                          d5 = 701980252875.0 / 199316789632.0,
                          d6 = -1453857185.0 / 822651844.0, d7 = 69997945.0 / 29380423.0;
};

inline double scaled_rms(const Vector& err, const Vector& y0, const Vector& y1,
                         const IntegratorOptions& opt) {
  double sum = 0.0;
  for (Eigen::Index i = 0; i < err.size(); ++i) {
    const double sc = opt.atol + opt.rtol * std::max(std::abs(y0[i]), std::abs(y1[i]));
    const double r = err[i] / sc;
    sum += r * r;
  }
  return std::sqrt(sum / static_cast<double>(err.size()));
}

}  // namespace detail

/// Integrates x' = f(x) from `x0` at `times.front()` and returns the state at
/// every entry of `times` (strictly increasing). `f` maps `const Vector&` to Vector.
template <class Rhs>
IntegrationResult integrate_dopri5(Rhs&& f, const Vector& x0, std::span<const double> times,
                                   const IntegratorOptions& opt = {}) {
  using T = detail::Dopri5Tableau;
  if (times.empty()) throw InvalidArgument("integrate_dopri5: empty output grid");
  if (!(opt.rtol > 0.0) || !(opt.atol > 0.0)) {
    throw InvalidArgument("integrate_dopri5: tolerances must be positive");
  }
  for (std::size_t i = 1; i < times.size(); ++i) {
    if (!(times[i] > times[i - 1])) {
      throw InvalidArgument("integrate_dopri5: output times must be strictly increasing");
    }
  }
  if (!x0.allFinite()) throw IntegrationFailure("non-finite initial state", times.front());

  const Eigen::Index n = x0.size();
  IntegrationResult out;
  out.states.setConstant(static_cast<Eigen::Index>(times.size()), n,
                         std::numeric_limits<double>::quiet_NaN());
  out.states.row(0) = x0.transpose();
  out.samples = 1;

  const double t_end = times.back();
  double t = times.front();
  Vector y = x0;
  Vector k1 = f(y);
  if (!k1.allFinite()) throw IntegrationFailure("non-finite derivative", t);
  if (times.size() == 1) return out;

  const double span = t_end - t;
  double h = opt.initial_step;
  if (h <= 0.0) {
    // Hairer's starting-step heuristic.
    Vector sc = (opt.atol + opt.rtol * y.array().abs()).matrix();
    const double d0 = std::sqrt((y.array() / sc.array()).square().mean());
    const double d1 = std::sqrt((k1.array() / sc.array()).square().mean());
    double h0 = (d0 < 1e-5 || d1 < 1e-5) ? 1e-6 : 0.01 * d0 / d1;
    h0 = std::min(h0, span);
    Vector y1 = y + h0 * k1;
    Vector f1 = f(y1);
    const double d2 = std::sqrt(((f1 - k1).array() / sc.array()).square().mean()) / h0;
    const double h1 = std::max(d1, d2) <= 1e-15 ? std::max(1e-6, h0 * 1e-3)
                                                 : std::pow(0.01 / std::max(d1, d2), 1.0 / 5.0);
    h = std::min({100.0 * h0, h1, span});
  }

  std::size_t next = 1;
  Vector k2(n), k3(n), k4(n), k5(n), k6(n), k7(n), y_new(n), err(n), tmp(n);
  double fac_old = 1e-4;  // PI step control memory
  bool last_rejected = false;
  std::size_t steps = 0;
  const double h_min_rel = 16.0 * std::numeric_limits<double>::epsilon();

  while (next < times.size()) {
    if (++steps > opt.max_steps) throw IntegrationFailure("maximum step count exceeded", t);
    if (h < h_min_rel * std::max(1.0, std::abs(t))) {
      throw IntegrationFailure("step size underflow", t);
    }
    bool final_step = false;
    if (t + h >= t_end || t_end - (t + h) < h_min_rel * std::abs(t_end)) {
      h = t_end - t;
      final_step = true;
    }

    tmp = y + h * T::a21 * k1;
    k2 = f(tmp);
    tmp = y + h * (T::a31 * k1 + T::a32 * k2);
    k3 = f(tmp);
    tmp = y + h * (T::a41 * k1 + T::a42 * k2 + T::a43 * k3);
    k4 = f(tmp);
    tmp = y + h * (T::a51 * k1 + T::a52 * k2 + T::a53 * k3 + T::a54 * k4);
    k5 = f(tmp);
    tmp = y + h * (T::a61 * k1 + T::a62 * k2 + T::a63 * k3 + T::a64 * k4 + T::a65 * k5);
    k6 = f(tmp);
    y_new = y + h * (T::a71 * k1 + T::a73 * k3 + T::a74 * k4 + T::a75 * k5 + T::a76 * k6);
    k7 = f(y_new);

    if (!y_new.allFinite() || !k7.allFinite()) {
      // Treat as a failed step; shrink hard and retry.
      h *= 0.1;
      last_rejected = true;
      ++out.steps_rejected;
      continue;
    }

    err = h * (T::e1 * k1 + T::e3 * k3 + T::e4 * k4 + T::e5 * k5 + T::e6 * k6 + T::e7 * k7);
    const double err_norm = detail::scaled_rms(err, y, y_new, opt);

    if (err_norm <= 1.0) {
      const double t_new = final_step ? t_end : t + h;
      const Vector ydiff = y_new - y;
      const Vector bspl = h * k1 - ydiff;
      const Vector r4 = ydiff - h * k7 - bspl;
      const Vector r5 = h * (T::d1 * k1 + T::d3 * k3 + T::d4 * k4 + T::d5 * k5 + T::d6 * k6 +
                             T::d7 * k7);
      while (next < times.size() && times[next] <= t_new) {
        if (times[next] == t_new) {
          out.states.row(static_cast<Eigen::Index>(next)) = y_new.transpose();
        } else {
          const double theta = (times[next] - t) / h;
          const double theta1 = 1.0 - theta;
          out.states.row(static_cast<Eigen::Index>(next)) =
              (y + theta * (ydiff + theta1 * (bspl + theta * (r4 + theta1 * r5)))).transpose();
        }
        const auto row = out.states.row(static_cast<Eigen::Index>(next));
        if (row.cwiseAbs().maxCoeff() > opt.blowup_threshold) {
          out.blew_up = true;
          out.blowup_time = times[next];
          out.samples = next;
          out.states.row(static_cast<Eigen::Index>(next)).setConstant(
              std::numeric_limits<double>::quiet_NaN());
          return out;
        }
        ++next;
        out.samples = next;
      }
      if (y_new.cwiseAbs().maxCoeff() > opt.blowup_threshold) {
        out.blew_up = true;
        out.blowup_time = t_new;
        return out;
      }
      t = t_new;
      y = y_new;
      k1 = k7;
      ++out.steps_accepted;

      // Gustafsson PI controller (as in DOPRI5).
      const double fac11 = std::pow(std::max(err_norm, 1e-10), 0.2 - 0.04);
      double fac = fac11 / std::pow(fac_old, 0.04);
      fac = std::clamp(fac / 0.9, 0.1, 5.0);
      double h_new = h / fac;
      if (last_rejected) h_new = std::min(h_new, h);
      fac_old = std::max(err_norm, 1e-4);
      last_rejected = false;
      h = h_new;
    } else {
      const double fac11 = std::pow(err_norm, 0.2 - 0.04);
      h /= std::min(5.0, fac11 / 0.9);
      last_rejected = true;
      ++out.steps_rejected;
    }
  }
  return out;
}

}  // namespace bayesid
