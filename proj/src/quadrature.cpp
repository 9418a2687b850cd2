#include "mixfilt/quadrature.hpp"

#include <algorithm>
#include <stdexcept>

namespace mixfilt {

namespace {

struct Worker {
  const std::function<double(double)>& f;
  double tol_per_panel;
  int max_depth;
  long evals = 0;
  double error = 0;

  double eval(double x) {
    ++evals;
    const double y = f(x);
    return std::isfinite(y) ? y : 0.0;
  }

  // Classic adaptive Simpson with Richardson correction.  A panel is also
  // accepted once its correction is at relative machine precision, since no
  // amount of splitting improves on that in doubles.
  double recurse(double a, double b, double fa, double fm, double fb, double whole, int depth) {
    const double m = 0.5 * (a + b);
    const double lm = 0.5 * (a + m);
    const double rm = 0.5 * (m + b);
    const double flm = eval(lm);
    const double frm = eval(rm);
    const double h = b - a;
    const double left = h / 12.0 * (fa + 4.0 * flm + fm);
    const double right = h / 12.0 * (fm + 4.0 * frm + fb);
    const double delta = left + right - whole;
    const double floor = 1e-15 * (std::fabs(left) + std::fabs(right));
    if (depth <= 0 || std::fabs(delta) <= 15.0 * std::max(tol_per_panel, floor)) {
      error += std::fabs(delta) / 15.0;
      return left + right + delta / 15.0;
    }
    tol_per_panel *= 0.5;
    const double l = recurse(a, m, fa, flm, fm, left, depth - 1);
    const double r = recurse(m, b, fm, frm, fb, right, depth - 1);
    tol_per_panel *= 2.0;
    return l + r;
  }

  double panel(double a, double b) {
    const double fa = eval(a);
    const double m = 0.5 * (a + b);
    const double fm = eval(m);
    const double fb = eval(b);
    const double whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    return recurse(a, b, fa, fm, fb, whole, max_depth);
  }
};

}  // namespace

void QuadratureSpec::validate() const {
  if (has_interval() && !(lo < hi)) throw std::invalid_argument("QuadratureSpec: lo must be < hi");
  if (!(tolerance > 0.0)) throw std::invalid_argument("QuadratureSpec: tolerance must be > 0");
  if (max_depth < 1 || initial_subdivisions < 1) {
    throw std::invalid_argument("QuadratureSpec: depth and subdivisions must be >= 1");
  }
}

IntegralResult integrate(const std::function<double(double)>& f, double lo, double hi,
                         const QuadratureSpec& spec) {
  spec.validate();
  if (!(lo < hi)) throw std::invalid_argument("integrate: lo must be < hi");
  const int n = spec.initial_subdivisions;
  Worker w{f, spec.tolerance / n, spec.max_depth};
  double total = 0.0;
  for (int i = 0; i < n; ++i) {
    const double a = lo + (hi - lo) * i / n;
    const double b = lo + (hi - lo) * (i + 1) / n;
    total += w.panel(a, b);
  }
  return {total, w.error, w.evals};
}

IntegralResult integrate_piecewise(const std::function<double(double)>& f, double lo, double hi,
                                   std::span<const double> breakpoints,
                                   const QuadratureSpec& spec) {
  std::vector<double> cuts{lo, hi};
  for (double b : breakpoints) {
    if (b > lo && b < hi) cuts.push_back(b);
  }
  std::sort(cuts.begin(), cuts.end());
  cuts.erase(std::unique(cuts.begin(), cuts.end()), cuts.end());

  IntegralResult total;
  for (std::size_t i = 0; i + 1 < cuts.size(); ++i) {
    const IntegralResult part = integrate(f, cuts[i], cuts[i + 1], spec);
    total.value += part.value;
    total.error_estimate += part.error_estimate;
    total.evaluations += part.evaluations;
  }
  return total;
}

}  // namespace mixfilt
