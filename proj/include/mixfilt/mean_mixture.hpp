#ifndef MIXFILT_MEAN_MIXTURE_HPP
#define MIXFILT_MEAN_MIXTURE_HPP

#include <cstdint>
#include <span>
#include <vector>

namespace mixfilt {

// One component of the J-component Gaussian mixture N(c_j * mu, sigma_j^2)
// with known mixing weight v_j; only the shared mean parameter mu is unknown.
struct MeanMixtureComponent {
  double c = 1;      // multiplier on mu
  double sigma = 1;  // component std-dev, > 0
  double v = 1;      // mixing weight, in (0,1]
};

class MeanMixtureModel {
 public:
  explicit MeanMixtureModel(std::vector<MeanMixtureComponent> components);

  std::size_t size() const { return components_.size(); }
  const MeanMixtureComponent& operator[](std::size_t j) const { return components_[j]; }
  std::span<const MeanMixtureComponent> components() const { return components_; }

 private:
  std::vector<MeanMixtureComponent> components_;
};

// Equally weighted mixture of N(-mu, 1) and N(mu, 1).
MeanMixtureModel symmetric_model();

// Mixture of N(mu, 1) and the fixed N(0, 10) background, weights (1-v, v).
MeanMixtureModel clutter_model(double v);

bool is_symmetric_model(const MeanMixtureModel& model);

// Gaussian approximation for mu: mean a, variance b.
struct GaussianState {
  double a = 0;
  double b = 1;
};

// Gaussian state plus the number of updates applied, for the recursions
// whose gain is fixed by the observation count rather than by b.
struct CountedGaussianState {
  GaussianState state;
  std::int64_t n = 0;
};

// One component of the exact one-step posterior mixture for mu.
struct ComponentPosterior {
  double w = 0;   // responsibility
  double m = 0;   // conditional posterior mean
  double s2 = 0;  // conditional posterior variance
};

// ln sum_j v_j N(x; c_j mu, sigma_j^2).
double log_density(const MeanMixtureModel& model, double mu, double x);

// Exact posterior mixture {w_j, m_j, s_j^2} of prior N(a,b) times the
// likelihood of x.  Responsibilities are computed in log space.
std::vector<ComponentPosterior> component_posteriors(const MeanMixtureModel& model,
                                                     const GaussianState& state, double x);

// Exact moment-matched Gaussian update (mixture mean / mixture variance).
GaussianState adf_update(const MeanMixtureModel& model, const GaussianState& state, double x);

// First-order expansion diagnostics of the exact update, O(b) term of A - a
// and the leading term of B^{-1} - b^{-1}.
double asymptotic_mean_increment(const MeanMixtureModel& model, const GaussianState& state,
                                 double x);
double asymptotic_precision_increment(const MeanMixtureModel& model, const GaussianState& state,
                                      double x);

// d/dmu log f(x|mu) and -d^2/dmu^2 log f(x|mu).
double score(const MeanMixtureModel& model, double mu, double x);
double observed_information(const MeanMixtureModel& model, double mu, double x);

// Expected complete-data information given x; also the leading recursive
// variational precision increment.  Never below asymptotic_precision_increment.
double complete_data_precision(const MeanMixtureModel& model, const GaussianState& state,
                               double x);

// Stochastic-approximation recursions for the symmetric two-Gaussian model,
// gain 1/(m+1) where m is the 1-based index of the incoming observation.
CountedGaussianState quasi_bayes_update(const MeanMixtureModel& model,
                                        const CountedGaussianState& cstate, double x);
CountedGaussianState confirmed_update(const CountedGaussianState& cstate, double x, int z);

}  // namespace mixfilt

#endif
