#ifndef MIXFILT_TESTS_SUPPORT_HPP
#define MIXFILT_TESTS_SUPPORT_HPP

// Test-side oracles, independent of the library implementation paths they
// check: an extended-precision mixture log-density and finite-difference
// stencils with a step sweep.

#include <cmath>

#include "mixfilt/mean_mixture.hpp"

namespace testsupport {

// Closed-form displays for the symmetric and clutter specializations, written
// out independently of the general-formula implementation.

inline double symmetric_mean_increment_display(double a, double b, double x) {
  const double e1 = std::exp(-0.5 * (x + a) * (x + a));
  const double e2 = std::exp(-0.5 * (x - a) * (x - a));
  const double w = e1 / (e1 + e2);
  return b * ((1.0 - w) * x - w * x - a);
}

inline double symmetric_precision_increment_display(double center, double x) {
  const double e1 = std::exp(-0.5 * (x + center) * (x + center));
  const double e2 = std::exp(-0.5 * (x - center) * (x - center));
  return 1.0 - 4.0 * x * x * e1 * e2 / ((e1 + e2) * (e1 + e2));
}

// Two-term clutter display; the background weight enters the cross term
// through v/sqrt(10), as the expansion of the general formula gives.
inline double clutter_precision_increment_display(double v, double center, double x) {
  const double t1 = (1.0 - v) * std::exp(-0.5 * (x - center) * (x - center));
  const double t2 = v / std::sqrt(10.0) * std::exp(-x * x / 20.0);
  const double d = t1 + t2;
  return t1 / d - (x - center) * (x - center) * t1 * t2 / (d * d);
}

inline double clutter_mean_increment_display(double v, double a, double b, double x) {
  const double t1 = (1.0 - v) * std::exp(-0.5 * (x - a) * (x - a));
  const double t2 = v / std::sqrt(10.0) * std::exp(-x * x / 20.0);
  return b * (t1 / (t1 + t2)) * (x - a);
}

inline long double log_density_ld(const mixfilt::MeanMixtureModel& model, long double mu,
                                  long double x) {
  const long double pi = 3.141592653589793238462643383279503L;
  long double sum = 0.0L;
  for (const auto& c : model.components()) {
    const long double z = (x - static_cast<long double>(c.c) * mu) / c.sigma;
    sum += static_cast<long double>(c.v) / c.sigma * std::exp(-0.5L * z * z);
  }
  return std::log(sum) - 0.5L * std::log(2.0L * pi);
}

// Fourth-order stencils evaluated in long double; the step sweep returns the
// value at the step agreeing best with its neighbour.
template <typename F>
double stencil_derivative(F f, double x) {
  long double best = 0.0L, best_gap = 1e300L, prev = 0.0L;
  bool have_prev = false;
  for (long double h : {1e-2L, 3e-3L, 1e-3L, 3e-4L}) {
    const long double d =
        (f(x - 2 * h) - 8 * f(x - h) + 8 * f(x + h) - f(x + 2 * h)) / (12.0L * h);
    if (have_prev && std::fabs(static_cast<double>(d - prev)) < best_gap) {
      best_gap = std::fabs(static_cast<double>(d - prev));
      best = d;
    }
    prev = d;
    have_prev = true;
  }
  return static_cast<double>(best);
}

template <typename F>
double stencil_second_derivative(F f, double x) {
  long double best = 0.0L, best_gap = 1e300L, prev = 0.0L;
  bool have_prev = false;
  for (long double h : {3e-2L, 1e-2L, 3e-3L, 1e-3L}) {
    const long double d =
        (-f(x - 2 * h) + 16 * f(x - h) - 30 * f(x) + 16 * f(x + h) - f(x + 2 * h)) /
        (12.0L * h * h);
    if (have_prev && std::fabs(static_cast<double>(d - prev)) < best_gap) {
      best_gap = std::fabs(static_cast<double>(d - prev));
      best = d;
    }
    prev = d;
    have_prev = true;
  }
  return static_cast<double>(best);
}

}  // namespace testsupport

#endif
