#ifndef MIXFILT_DIRICHLET_FILTER_HPP
#define MIXFILT_DIRICHLET_FILTER_HPP

#include <cstddef>
#include <stdexcept>
#include <vector>

#include "mixfilt/densities.hpp"

namespace mixfilt {

// Dirichlet approximation Dir(a_1..a_J) for J-cell mixing weights.
struct DirichletState {
  std::vector<double> a;

  double mass() const {
    double s = 0;
    for (double v : a) s += v;
    return s;
  }
  double mean(std::size_t j) const { return a[j] / mass(); }
};

enum class DirichletMatchPolicy {
  kAverageVariance,            // new mass from the averaged variance equations
  kAverageVarianceCovariance,  // averaged over variances and covariance pairs
};

// Raised when the averaged second-moment equation yields a non-positive mass.
class MassMatchingError : public std::runtime_error {
 public:
  MassMatchingError(double avg_lhs_coeff, double avg_rhs, double mass);
  double averaged_lhs_coefficient() const { return avg_lhs_coeff_; }
  double averaged_rhs() const { return avg_rhs_; }
  double mass() const { return mass_; }

 private:
  double avg_lhs_coeff_;
  double avg_rhs_;
  double mass_;
};

// w_j = a_j f_j(x) / sum_k a_k f_k(x), in log space.
std::vector<double> dir_responsibilities(const KnownDensitySet& set, const DirichletState& state,
                                         double x);

// Moment-matched Dirichlet step: means matched exactly for every cell, the new
// mass solves the chosen averaged second-moment equation exactly.
DirichletState dir_pe_update(const KnownDensitySet& set, const DirichletState& state, double x,
                             DirichletMatchPolicy policy = DirichletMatchPolicy::kAverageVariance);

// a_j += w_j.
DirichletState dir_quasi_bayes_update(const KnownDensitySet& set, const DirichletState& state,
                                      double x);

struct CovarianceResidual {
  std::size_t j = 0;
  std::size_t k = 0;
  double value = 0;
};

struct SecondMomentResiduals {
  std::vector<double> variance;              // one per cell
  std::vector<CovarianceResidual> covariance;  // one per unordered pair
};

// Signed residuals of every variance / covariance matching equation when the
// new mass is forced to mass_candidate.  For J = 2 a single mass zeroes all of
// them; for J > 2 generically none does.
SecondMomentResiduals second_moment_residuals(const KnownDensitySet& set,
                                              const DirichletState& state, double x,
                                              double mass_candidate);

struct MassCandidates {
  std::vector<double> exact;        // per-cell solution of its variance equation
  std::vector<double> approximate;  // L + 1 - w_j(1-w_j)/(E_j(1-E_j))
};

// The per-cell new-mass candidates; pairwise-distinct exact entries witness
// that full second-moment matching is impossible for J > 2.
MassCandidates per_component_mass_candidates(const KnownDensitySet& set,
                                             const DirichletState& state, double x);

}  // namespace mixfilt

#endif
