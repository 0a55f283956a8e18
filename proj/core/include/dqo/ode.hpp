#pragma once

// Explicit Runge-Kutta steppers over Eigen vectors/matrices.
//
// rk4_integrate lands exactly on every requested output time by splitting each
// interval into equal steps no longer than dt. dopri5_integrate is the
// Dormand-Prince 5(4) pair with a PI step controller; output times are
// served from the DOPRI5 continuous extension.

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <span>
#include <stdexcept>
#include <string>

namespace dqo {

class IntegrationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct StepStats {
  long steps = 0;
  long rejected = 0;
  long rhs_evaluations = 0;
};

template <class State>
using Rhs = std::function<void(double t, const State& y, State& dydt)>;

template <class State>
using Observer = std::function<void(double t, const State& y)>;

/// Classical RK4. `times` must be sorted and start at or after t0.
template <class State>
StepStats rk4_integrate(const Rhs<State>& f, State y, double t0, std::span<const double> times,
                        double dt, const Observer<State>& observe) {
  if (!(dt > 0.0)) {
    throw std::invalid_argument("rk4: dt must be > 0");
  }
  StepStats stats;
  State k1 = y, k2 = y, k3 = y, k4 = y, tmp = y;
  double t = t0;
  for (double target : times) {
    const double span = target - t;
    if (span < 0.0) {
      throw std::invalid_argument("rk4: output times must be nondecreasing");
    }
    const long n = span == 0.0 ? 0 : static_cast<long>(std::ceil(span / dt - 1e-12));
    const double h = n > 0 ? span / static_cast<double>(n) : 0.0;
    for (long i = 0; i < n; ++i) {
      const double ti = t + static_cast<double>(i) * h;
      f(ti, y, k1);
      tmp = y + (0.5 * h) * k1;
      f(ti + 0.5 * h, tmp, k2);
      tmp = y + (0.5 * h) * k2;
      f(ti + 0.5 * h, tmp, k3);
      tmp = y + h * k3;
      f(ti + h, tmp, k4);
      y += (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
      stats.rhs_evaluations += 4;
      ++stats.steps;
    }
    t = target;
    observe(t, y);
  }
  return stats;
}

struct AdaptiveOptions {
  double rtol = 1e-8;
  double atol = 1e-10;
  double initial_step = 0.0;  // 0 = automatic
  double min_step = 1e-14;    // relative to the integration span
  long max_steps = 10'000'000;
};

namespace detail {

template <class State>
double error_norm(const State& err, const State& y0, const State& y1, double rtol, double atol) {
  const auto scale = (atol + rtol * y0.array().abs().max(y1.array().abs())).eval();
  const double mean_sq = (err.array().abs() / scale).square().mean();
  return std::sqrt(mean_sq);
}

}  // namespace detail

/// Dormand-Prince 5(4) with PI control; observations at `times` come from the
/// fourth-order continuous extension of each accepted step.
template <class State>
StepStats dopri5_integrate(const Rhs<State>& f, State y, double t0, std::span<const double> times,
                           const AdaptiveOptions& opt, const Observer<State>& observe) {
  if (!(opt.rtol > 0.0) || !(opt.atol > 0.0)) {
    throw std::invalid_argument("dopri5: rtol and atol must be > 0");
  }
  StepStats stats;
  if (times.empty()) {
    return stats;
  }
  const double t_end = times.back();
  std::size_t next = 0;
  while (next < times.size() && times[next] <= t0) {
    observe(times[next], y);
    ++next;
  }
  if (next == times.size()) {
    return stats;
  }

  constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
  constexpr double a21 = 1.0 / 5;
  constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
  constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
  constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561,
                   a54 = -212.0 / 729;
  constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247,
                   a64 = 49.0 / 176, a65 = -5103.0 / 18656;
  constexpr double a71 = 35.0 / 384, a73 = 500.0 / 1113, a74 = 125.0 / 192,
                   a75 = -2187.0 / 6784, a76 = 11.0 / 84;
  constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920,
                   e5 = -17253.0 / 339200, e6 = 22.0 / 525, e7 = -1.0 / 40;
  // Dense output coefficients (Hairer & Wanner, DOPRI5 contd5).
  constexpr double d1 = -12715105075.0 / 11282082432.0, d3 = 87487479700.0 / 32700410799.0,
                   d4 = -10690763975.0 / 1880347072.0, d5 = 701980252875.0 / 199316789632.0,
                   d6 = -1453857185.0 / 822651844.0, d7 = 69997945.0 / 29380423.0;

  State k1 = y, k2 = y, k3 = y, k4 = y, k5 = y, k6 = y, k7 = y, tmp = y, y_new = y, err = y;
  State r1 = y, r2 = y, r3 = y, r4 = y, r5 = y;

  double t = t0;
  const double span = t_end - t0;
  const double h_min = opt.min_step * std::max(1.0, std::abs(span));
  f(t, y, k1);
  ++stats.rhs_evaluations;

  double h = opt.initial_step;
  if (!(h > 0.0)) {
    // Hairer's starting-step heuristic, first stage only.
    const auto sc = (opt.atol + opt.rtol * y.array().abs()).eval();
    const double d0 = std::sqrt((y.array().abs() / sc).square().mean());
    const double dd1 = std::sqrt((k1.array().abs() / sc).square().mean());
    h = (d0 < 1e-5 || dd1 < 1e-5) ? 1e-6 : 0.01 * d0 / dd1;
    h = std::min(h, span);
  }

  constexpr double safety = 0.9, fac_min = 0.2, fac_max = 10.0;
  constexpr double beta = 0.04, alpha = 0.2 - 0.75 * beta;
  double err_old = 1e-4;
  bool last_rejected = false;

  while (next < times.size()) {
    if (stats.steps + stats.rejected >= opt.max_steps) {
      throw IntegrationError("dopri5: exceeded max_steps at t=" + std::to_string(t));
    }
    if (h < h_min) {
      throw IntegrationError("dopri5: step size underflow at t=" + std::to_string(t) +
                             " (h=" + std::to_string(h) + ")");
    }
    const bool final_step = t + h >= t_end;
    if (final_step) {
      h = t_end - t;
    }

    tmp = y + h * a21 * k1;
    f(t + c2 * h, tmp, k2);
    tmp = y + h * (a31 * k1 + a32 * k2);
    f(t + c3 * h, tmp, k3);
    tmp = y + h * (a41 * k1 + a42 * k2 + a43 * k3);
    f(t + c4 * h, tmp, k4);
    tmp = y + h * (a51 * k1 + a52 * k2 + a53 * k3 + a54 * k4);
    f(t + c5 * h, tmp, k5);
    tmp = y + h * (a61 * k1 + a62 * k2 + a63 * k3 + a64 * k4 + a65 * k5);
    f(t + h, tmp, k6);
    y_new = y + h * (a71 * k1 + a73 * k3 + a74 * k4 + a75 * k5 + a76 * k6);
    f(t + h, y_new, k7);
    stats.rhs_evaluations += 6;

    err = h * (e1 * k1 + e3 * k3 + e4 * k4 + e5 * k5 + e6 * k6 + e7 * k7);
    const double en = detail::error_norm(err, y, y_new, opt.rtol, opt.atol);

    if (en <= 1.0) {
      const double t_new = final_step ? t_end : t + h;
      // Continuous extension coefficients for this step.
      r1 = y;
      r2 = y_new - y;
      r3 = h * k1 - r2;
      r4 = r2 - h * k7 - r3;
      r5 = h * (d1 * k1 + d3 * k3 + d4 * k4 + d5 * k5 + d6 * k6 + d7 * k7);
      while (next < times.size() && times[next] <= t_new) {
        const double s = (times[next] - t) / h;
        const double s1 = 1.0 - s;
        if (times[next] == t_new) {
          observe(times[next], y_new);
        } else {
          tmp = r1 + s * (r2 + s1 * (r3 + s * (r4 + s1 * r5)));
          observe(times[next], tmp);
        }
        ++next;
      }
      y = y_new;
      k1 = k7;
      t = t_new;
      ++stats.steps;

      double fac = safety * std::pow(std::max(en, 1e-10), -alpha) * std::pow(err_old, beta);
      fac = std::clamp(fac, fac_min, fac_max);
      if (last_rejected) {
        fac = std::min(fac, 1.0);
      }
      err_old = std::max(en, 1e-4);
      h *= fac;
      last_rejected = false;
    } else {
      const double fac = std::isfinite(en) ? std::max(fac_min, safety * std::pow(en, -alpha)) : fac_min;
      h *= fac;
      ++stats.rejected;
      last_rejected = true;
    }
  }
  return stats;
}

}  // namespace dqo
