#ifndef MIXFILT_ORACLE_HPP
#define MIXFILT_ORACLE_HPP

#include <functional>
#include <span>
#include <vector>

#include "mixfilt/densities.hpp"
#include "mixfilt/mean_mixture.hpp"
#include "mixfilt/quadrature.hpp"
#include "mixfilt/weight_filter.hpp"

// Ground-truth posteriors and information integrals, by enumeration over
// component allocations or by deterministic quadrature.  Everything here is
// independent of the recursive filters it is used to check.
namespace mixfilt::oracle {

enum class SummaryMethod { kEnumeration, kGrid };

struct PosteriorSummary {
  double mean = 0;
  double variance = 0;
  double log_normalizer = 0;  // ln of the marginal likelihood of the data
  SummaryMethod method = SummaryMethod::kGrid;
};

struct BetaMixtureComponent {
  double weight = 0;
  double a = 0;
  double b = 0;
};

struct ExactBetaPosterior {
  PosteriorSummary summary;
  std::vector<BetaMixtureComponent> mixture;  // all 2^n allocation branches
};

// Exact posterior of the mixing weight by enumeration of the 2^n component
// allocations.  Throws std::invalid_argument when data.size() > limit.
ExactBetaPosterior exact_beta_posterior(const KnownDensityPair& pair, const BetaState& prior,
                                        std::span<const double> data, int limit = 15);

// Quadrature posterior of the mixing weight over (0,1).  The integrand is
// handled in log space with the peak located first, so sharply concentrated
// posteriors are fine.  Requires prior a, b >= 0.5 (endpoint singularities
// beyond that defeat the substitution used here; the enumeration oracle has
// no such restriction).
PosteriorSummary grid_beta_posterior(const KnownDensityPair& pair, const BetaState& prior,
                                     std::span<const double> data, const QuadratureSpec& spec = {});

// Quadrature posterior of the mean parameter over a data-informed interval
// (prior mean +- 10 sd, widened until the tails are negligible).
PosteriorSummary grid_mu_posterior(const MeanMixtureModel& model, const GaussianState& prior,
                                   std::span<const double> data, const QuadratureSpec& spec = {});

// integral of (f1 - f2)^2 / (beta f1 + (1-beta) f2).
double fisher_information_beta(const KnownDensityPair& pair, double beta,
                               const QuadratureSpec& spec = {});

// (1/(beta(1-beta))) * (1 - integral of f1 f2 / (beta f1 + (1-beta) f2)).
double pe_information_beta(const KnownDensityPair& pair, double beta,
                           const QuadratureSpec& spec = {});

// E_x[ observed_information(model, mu, x) ] under f(x|mu).
double fisher_information_mu(const MeanMixtureModel& model, double mu,
                             const QuadratureSpec& spec = {});

struct DivergenceReport {
  double mean_gap = 0;
  double variance_ratio = 1;
};

DivergenceReport divergence(const PosteriorSummary& a, const PosteriorSummary& b);

// KL(pa || pb) of two densities on a shared uniform grid over [lo, hi];
// both are floored at 1e-300 inside the log.
double grid_kl(const std::function<double(double)>& pa, const std::function<double(double)>& pb,
               double lo, double hi, int points = 4096);

// ln Beta(a, b).
double log_beta(double a, double b);

}  // namespace mixfilt::oracle

#endif
