#ifndef MIXFILT_WEIGHT_FILTER_HPP
#define MIXFILT_WEIGHT_FILTER_HPP

#include <optional>
#include <span>
#include <stdexcept>
#include <utility>
#include <vector>

#include "mixfilt/densities.hpp"
#include "mixfilt/special_functions.hpp"

namespace mixfilt {

// Beta approximation Be(a, b) for the unknown first-component weight.
struct BetaState {
  double a = 1;
  double b = 1;

  double mass() const { return a + b; }                 // L
  double mean() const { return a / (a + b); }           // E
  double second_moment() const { return a * (a + 1) / ((a + b) * (a + b + 1)); }
  double variance() const { return mean() * (1.0 - mean()) / (mass() + 1.0); }
};

// Additive contribution of one observation's site factor to (a, b).
struct EpSite {
  double da = 0;
  double db = 0;
};

struct UpdateDiagnostics {
  double w1 = 0;              // first-component responsibility
  double mass_increment = 0;  // L_n - L_{n-1}
  double epsilon = 0;         // w1(1-w1) / (E_n(1-E_n)), with the updated mean
};

// Raised when both component densities vanish at the observation; no update
// rule is defined there.
class DegenerateObservationError : public std::domain_error {
 public:
  explicit DegenerateObservationError(double x)
      : std::domain_error("both component densities are zero at the observation"), x_(x) {}
  double x() const { return x_; }

 private:
  double x_;
};

// a f1(x) / (a f1(x) + b f2(x)), evaluated through log densities.
double responsibility(const KnownDensityPair& pair, const BetaState& state, double x);

// Mean-tracking update: a += w1, b += 1 - w1.
std::pair<BetaState, UpdateDiagnostics> quasi_bayes_update(const KnownDensityPair& pair,
                                                           const BetaState& state, double x);

// Known component label: a += I(z=1), b += I(z=2).
BetaState confirmed_update(const BetaState& state, int z);

// Recursive variational step; responsibilities use exp(digamma) geometric-mean
// weights exp(Psi(a) - Psi(a+b)) f1(x) vs exp(Psi(b) - Psi(a+b)) f2(x).
std::pair<BetaState, UpdateDiagnostics> vb_recursive_update(const KnownDensityPair& pair,
                                                            const BetaState& state, double x);

// Moment-matching update: matches mean and variance of the one-step posterior
// mixture w1 Be(a+1, b) + (1-w1) Be(a, b+1); the variance equation is solved
// exactly for the new mass.
std::pair<BetaState, UpdateDiagnostics> pe_update(const KnownDensityPair& pair,
                                                  const BetaState& state, double x);
std::pair<BetaState, UpdateDiagnostics> pe_update_with_responsibility(const BetaState& state,
                                                                      double w1);

// KL-projection update: matches E[ln beta] and E[ln(1-beta)] of the one-step
// posterior via the digamma system, Newton-initialized at the moment-matching
// solution.
std::pair<BetaState, UpdateDiagnostics> kl_update(const KnownDensityPair& pair,
                                                  const BetaState& state, double x,
                                                  const SolverSettings& settings = {});
std::pair<BetaState, UpdateDiagnostics> kl_update_with_responsibility(
    const BetaState& state, double w1, const SolverSettings& settings = {});

enum class BetaUpdateRule { kMomentMatch, kKl };

struct EpFitResult {
  BetaState state;
  std::vector<EpSite> sites;
  int sweeps_used = 0;
  bool converged = false;
  int cavity_skips = 0;  // site visits skipped to keep the cavity positive
};

// Multi-pass EP with stored site factors.  Each visit removes the site, applies
// the single-observation update to the cavity, and stores the difference back.
// Sweeps stop when the largest hyperparameter change in a sweep drops below
// tolerance or max_sweeps is reached.
EpFitResult ep_fit(const KnownDensityPair& pair, const BetaState& prior,
                   std::span<const double> data, BetaUpdateRule rule, int max_sweeps = 50,
                   double tolerance = 1e-10, const SolverSettings& settings = {});

struct AsymptoticVariances {
  double v_confirmed = 0;    // beta(1-beta)/n
  double v_quasi_bayes = 0;  // same
  double v_variational = 0;  // same
  std::optional<double> v_ml;  // 1 / (n * fisher information); empty when
  std::optional<double> v_pe;  // the pair carries no information on beta
  bool zero_information = false;
};

// Large-n variance scales of the five schemes; the ML and PE entries are
// computed from the information integrals of the oracle module.
AsymptoticVariances asymptotic_variances(const KnownDensityPair& pair, double beta, long n);

}  // namespace mixfilt

#endif
