#include "mixfilt/special_functions.hpp"

#include <cmath>
#include <limits>

namespace mixfilt {

namespace {

constexpr double kHalfLog2Pi = 0.91893853320467274178;  // ln(2*pi)/2

void require_positive(double x, const char* fn) {
  if (!(x > 0.0) || !std::isfinite(x)) {
    throw std::domain_error(std::string(fn) + ": argument must be finite and > 0");
  }
}

// Stirling-series tail of ln Gamma, valid for large x:
//   sum_k B_{2k} / (2k(2k-1) x^{2k-1})
double stirling_tail(double x) {
  const double z = 1.0 / (x * x);
  // B_{2k}/(2k(2k-1)) for k = 6..1, Horner in 1/x^2.
  double s = -691.0 / 360360.0;
  s = s * z + 1.0 / 1188.0;
  s = s * z - 1.0 / 1680.0;
  s = s * z + 1.0 / 1260.0;
  s = s * z - 1.0 / 360.0;
  s = s * z + 1.0 / 12.0;
  return s / x;
}

}  // namespace

double log_gamma(double x) {
  require_positive(x, "log_gamma");
  double shift = 0.0;
  while (x < 10.0) {
    shift -= std::log(x);
    x += 1.0;
  }
  return shift + (x - 0.5) * std::log(x) - x + kHalfLog2Pi + stirling_tail(x);
}

double digamma(double x) {
  require_positive(x, "digamma");
  double acc = 0.0;
  while (x < 10.0) {
    acc -= 1.0 / x;
    x += 1.0;
  }
  // Psi(x) ~ ln x - 1/(2x) - sum_k B_{2k}/(2k x^{2k})
  const double z = 1.0 / (x * x);
  double s = -691.0 / 32760.0;
  s = s * z + 1.0 / 132.0;
  s = s * z - 1.0 / 240.0;
  s = s * z + 1.0 / 252.0;
  s = s * z - 1.0 / 120.0;
  s = s * z + 1.0 / 12.0;
  return acc + std::log(x) - 0.5 / x - s * z;
}

double trigamma(double x) {
  require_positive(x, "trigamma");
  double acc = 0.0;
  while (x < 10.0) {
    acc += 1.0 / (x * x);
    x += 1.0;
  }
  // Psi'(x) ~ 1/x + 1/(2x^2) + sum_k B_{2k}/x^{2k+1}
  const double z = 1.0 / (x * x);
  double s = 691.0 / 2730.0;
  s = s * z - 5.0 / 66.0;
  s = s * z + 1.0 / 30.0;
  s = s * z - 1.0 / 42.0;
  s = s * z + 1.0 / 30.0;
  s = s * z - 1.0 / 6.0;
  return acc + (1.0 + 0.5 / x - s * z) / x;
}

void SolverSettings::validate() const {
  if (max_iterations < 1) throw std::invalid_argument("SolverSettings: max_iterations must be >= 1");
  if (!(tolerance > 0.0)) throw std::invalid_argument("SolverSettings: tolerance must be > 0");
  if (!(damping > 0.0) || damping > 1.0) throw std::invalid_argument("SolverSettings: damping must be in (0,1]");
}

DigammaSolution solve_digamma_system(double r1, double r2,
                                     double initial_a, double initial_b,
                                     const SolverSettings& settings) {
  settings.validate();
  if (!std::isfinite(r1) || !std::isfinite(r2) || r1 >= 0.0 || r2 >= 0.0) {
    throw std::domain_error("solve_digamma_system: targets must be finite and negative");
  }
  // Attainable range is the interior of the convex hull of
  // {(ln t, ln(1-t)) : t in (0,1)}, i.e. exp(r1) + exp(r2) < 1.
  if (std::exp(r1) + std::exp(r2) >= 1.0) {
    throw std::domain_error("solve_digamma_system: targets outside attainable range (exp(r1)+exp(r2) >= 1)");
  }
  if (!(initial_a > 0.0) || !(initial_b > 0.0)) {
    throw std::domain_error("solve_digamma_system: initial guess must be strictly positive");
  }

  double a = initial_a;
  double b = initial_b;
  double f1 = digamma(a) - digamma(a + b) - r1;
  double f2 = digamma(b) - digamma(a + b) - r2;

  DigammaSolution out;
  for (int it = 0; it < settings.max_iterations; ++it) {
    double res = std::fabs(f1) + std::fabs(f2);
    if (res <= settings.tolerance) {
      out.a = a;
      out.b = b;
      out.iterations = it;
      out.residual = res;
      return out;
    }

    const double ts = trigamma(a + b);
    const double j11 = trigamma(a) - ts;
    const double j22 = trigamma(b) - ts;
    const double det = j11 * j22 - ts * ts;
    if (!(std::fabs(det) > 0.0)) {
      throw SolverError("solve_digamma_system: singular Jacobian", res);
    }
    double da = -(j22 * f1 + ts * f2) / det;
    double db = -(ts * f1 + j11 * f2) / det;
    da *= settings.damping;
    db *= settings.damping;

    // Halve the step until the iterate stays inside the positive quadrant.
    double scale = 1.0;
    while (a + scale * da <= 0.0 || b + scale * db <= 0.0) {
      scale *= 0.5;
      if (scale < 1e-300) {
        throw SolverError("solve_digamma_system: step collapsed at the domain boundary", res);
      }
    }
    a += scale * da;
    b += scale * db;
    f1 = digamma(a) - digamma(a + b) - r1;
    f2 = digamma(b) - digamma(a + b) - r2;
  }

  const double res = std::fabs(f1) + std::fabs(f2);
  if (res <= settings.tolerance) {
    out.a = a;
    out.b = b;
    out.iterations = settings.max_iterations;
    out.residual = res;
    return out;
  }
  throw SolverError("solve_digamma_system: no convergence after max_iterations", res);
}

}  // namespace mixfilt
