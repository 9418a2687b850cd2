#include "mixfilt/densities.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace mixfilt {

namespace {
constexpr double kLogSqrt2Pi = 0.91893853320467274178;
constexpr double kNegInf = -std::numeric_limits<double>::infinity();
}  // namespace

KnownDensity::KnownDensity(GaussianDensity g) : form_(g) {
  if (!(g.sd > 0.0) || !std::isfinite(g.sd) || !std::isfinite(g.mean)) {
    throw std::invalid_argument("KnownDensity: Gaussian sd must be finite and > 0");
  }
}

KnownDensity::KnownDensity(UniformDensity u) : form_(u) {
  if (!(u.lo < u.hi) || !std::isfinite(u.lo) || !std::isfinite(u.hi)) {
    throw std::invalid_argument("KnownDensity: Uniform needs finite lo < hi");
  }
}

KnownDensity::KnownDensity(TabulatedDensity t) : form_(std::move(t)) {
  const auto& tab = std::get<TabulatedDensity>(form_);
  if (tab.x.size() < 2 || tab.x.size() != tab.y.size()) {
    throw std::invalid_argument("KnownDensity: tabulated form needs matching x/y, size >= 2");
  }
  double integral = 0.0;
  for (std::size_t i = 0; i + 1 < tab.x.size(); ++i) {
    if (!(tab.x[i] < tab.x[i + 1])) {
      throw std::invalid_argument("KnownDensity: tabulated grid must be strictly increasing");
    }
    if (tab.y[i] < 0.0 || tab.y[i + 1] < 0.0) {
      throw std::invalid_argument("KnownDensity: tabulated values must be nonnegative");
    }
    integral += 0.5 * (tab.y[i] + tab.y[i + 1]) * (tab.x[i + 1] - tab.x[i]);
  }
  if (std::fabs(integral - 1.0) > 1e-8) {
    throw std::invalid_argument("KnownDensity: tabulated density must integrate to 1 within 1e-8");
  }
}

double KnownDensity::pdf(double x) const {
  return std::visit(
      [x](const auto& f) -> double {
        using T = std::decay_t<decltype(f)>;
        if constexpr (std::is_same_v<T, GaussianDensity>) {
          const double z = (x - f.mean) / f.sd;
          return std::exp(-0.5 * z * z - std::log(f.sd) - kLogSqrt2Pi);
        } else if constexpr (std::is_same_v<T, UniformDensity>) {
          return (x >= f.lo && x <= f.hi) ? 1.0 / (f.hi - f.lo) : 0.0;
        } else {
          if (x < f.x.front() || x > f.x.back()) return 0.0;
          auto it = std::upper_bound(f.x.begin(), f.x.end(), x);
          if (it == f.x.begin()) return f.y.front();
          if (it == f.x.end()) return f.y.back();
          const std::size_t i = static_cast<std::size_t>(it - f.x.begin()) - 1;
          const double t = (x - f.x[i]) / (f.x[i + 1] - f.x[i]);
          return f.y[i] + t * (f.y[i + 1] - f.y[i]);
        }
      },
      form_);
}

double KnownDensity::log_pdf(double x) const {
  if (const auto* g = std::get_if<GaussianDensity>(&form_)) {
    const double z = (x - g->mean) / g->sd;
    return -0.5 * z * z - std::log(g->sd) - kLogSqrt2Pi;
  }
  const double p = pdf(x);
  return p > 0.0 ? std::log(p) : kNegInf;
}

std::pair<double, double> KnownDensity::quadrature_interval(double sds) const {
  return std::visit(
      [sds](const auto& f) -> std::pair<double, double> {
        using T = std::decay_t<decltype(f)>;
        if constexpr (std::is_same_v<T, GaussianDensity>) {
          return {f.mean - sds * f.sd, f.mean + sds * f.sd};
        } else if constexpr (std::is_same_v<T, UniformDensity>) {
          return {f.lo, f.hi};
        } else {
          return {f.x.front(), f.x.back()};
        }
      },
      form_);
}

std::vector<double> KnownDensity::breakpoints() const {
  return std::visit(
      [](const auto& f) -> std::vector<double> {
        using T = std::decay_t<decltype(f)>;
        if constexpr (std::is_same_v<T, GaussianDensity>) {
          return {};
        } else if constexpr (std::is_same_v<T, UniformDensity>) {
          return {f.lo, f.hi};
        } else {
          return {f.x.front(), f.x.back()};
        }
      },
      form_);
}

double KnownDensity::sample(Rng& rng) const {
  return std::visit(
      [&rng](const auto& f) -> double {
        using T = std::decay_t<decltype(f)>;
        if constexpr (std::is_same_v<T, GaussianDensity>) {
          return f.mean + f.sd * rng.normal();
        } else if constexpr (std::is_same_v<T, UniformDensity>) {
          return f.lo + (f.hi - f.lo) * rng.uniform();
        } else {
          // Inverse CDF of the piecewise-linear density.
          const double u = rng.uniform();
          double acc = 0.0;
          for (std::size_t i = 0; i + 1 < f.x.size(); ++i) {
            const double w = f.x[i + 1] - f.x[i];
            const double cell = 0.5 * (f.y[i] + f.y[i + 1]) * w;
            if (u <= acc + cell || i + 2 == f.x.size()) {
              const double r = (u - acc) / (cell > 0 ? cell : 1.0);
              // Solve the quadratic CDF within the cell; fall back to linear
              // position when the slope is negligible.
              const double y0 = f.y[i], y1 = f.y[i + 1];
              const double slope = (y1 - y0) / w;
              if (std::fabs(slope) < 1e-300) {
                return f.x[i] + r * w;
              }
              const double c = r * 0.5 * (y0 + y1) * w;
              const double disc = y0 * y0 + 2.0 * slope * c;
              const double t = (std::sqrt(std::max(disc, 0.0)) - y0) / slope;
              return f.x[i] + std::clamp(t, 0.0, w);
            }
            acc += cell;
          }
          return f.x.back();
        }
      },
      form_);
}

KnownDensitySet::KnownDensitySet(std::vector<KnownDensity> densities)
    : densities_(std::move(densities)) {
  if (densities_.size() < 2) {
    throw std::invalid_argument("KnownDensitySet: needs at least two densities");
  }
}

}  // namespace mixfilt
