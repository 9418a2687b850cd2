#ifndef MIXFILT_DENSITIES_HPP
#define MIXFILT_DENSITIES_HPP

#include <span>
#include <variant>
#include <vector>

#include "mixfilt/rng.hpp"

namespace mixfilt {

struct GaussianDensity {
  double mean = 0;
  double sd = 1;
};

struct UniformDensity {
  double lo = 0;
  double hi = 1;
};

// Piecewise-linear positive function on [x.front(), x.back()], zero outside.
struct TabulatedDensity {
  std::vector<double> x;
  std::vector<double> y;
};

// One known mixture component, evaluable pointwise.  Construction validates
// the parameterization; tabulated forms must integrate to 1 within 1e-8
// (trapezoid rule, exact for the piecewise-linear interpolant).
class KnownDensity {
 public:
  KnownDensity(GaussianDensity g);       // NOLINT: implicit conversions intended
  KnownDensity(UniformDensity u);        // NOLINT
  KnownDensity(TabulatedDensity t);      // NOLINT

  double pdf(double x) const;
  double log_pdf(double x) const;  // -inf where pdf == 0

  // Interval outside which the density is negligible (exactly zero for
  // bounded forms, beyond `sds` standard deviations for Gaussians).
  std::pair<double, double> quadrature_interval(double sds = 12.0) const;

  // Points where the density is non-smooth; quadrature splits here.
  std::vector<double> breakpoints() const;

  double sample(Rng& rng) const;

  const std::variant<GaussianDensity, UniformDensity, TabulatedDensity>& form() const {
    return form_;
  }

 private:
  std::variant<GaussianDensity, UniformDensity, TabulatedDensity> form_;
};

// The two known component densities of Section-4 style mixtures.
struct KnownDensityPair {
  KnownDensity f1;
  KnownDensity f2;
};

// J >= 2 known component densities.
class KnownDensitySet {
 public:
  explicit KnownDensitySet(std::vector<KnownDensity> densities);

  std::size_t size() const { return densities_.size(); }
  const KnownDensity& operator[](std::size_t j) const { return densities_[j]; }
  std::span<const KnownDensity> densities() const { return densities_; }

 private:
  std::vector<KnownDensity> densities_;
};

}  // namespace mixfilt

#endif
