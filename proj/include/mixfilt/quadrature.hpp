#ifndef MIXFILT_QUADRATURE_HPP
#define MIXFILT_QUADRATURE_HPP

#include <cmath>
#include <functional>
#include <span>
#include <vector>

namespace mixfilt {

struct QuadratureSpec {
  // Integration interval; NaN endpoints mean "derive from the densities".
  double lo = std::nan("");
  double hi = std::nan("");
  double tolerance = 1e-10;  // absolute tolerance target
  int max_depth = 48;
  int initial_subdivisions = 8;

  bool has_interval() const { return !std::isnan(lo) && !std::isnan(hi); }
  void validate() const;
};

struct IntegralResult {
  double value = 0;
  double error_estimate = 0;
  long evaluations = 0;
};

// Adaptive Simpson on [lo, hi].
IntegralResult integrate(const std::function<double(double)>& f, double lo, double hi,
                         const QuadratureSpec& spec = {});

// Same, but the interval is first split at the interior breakpoints (support
// edges of uniform or tabulated densities), so jump discontinuities land on
// panel boundaries.
IntegralResult integrate_piecewise(const std::function<double(double)>& f, double lo, double hi,
                                   std::span<const double> breakpoints,
                                   const QuadratureSpec& spec = {});

}  // namespace mixfilt

#endif
