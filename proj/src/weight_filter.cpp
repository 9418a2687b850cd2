#include "mixfilt/weight_filter.hpp"

#include <algorithm>
#include <cassert>
#include <cmath>
#include <limits>

#include "mixfilt/oracle.hpp"

namespace mixfilt {

namespace {

void check_state(const BetaState& s) {
  if (!(s.a > 0.0) || !(s.b > 0.0) || !std::isfinite(s.a) || !std::isfinite(s.b)) {
    throw std::invalid_argument("BetaState: hyperparameters must be finite and > 0");
  }
}

// w1 from two log-scaled odds terms l1 = ln(a f1), l2 = ln(b f2).
double responsibility_from_logs(double l1, double l2, double x) {
  const bool z1 = l1 == -std::numeric_limits<double>::infinity();
  const bool z2 = l2 == -std::numeric_limits<double>::infinity();
  if (z1 && z2) throw DegenerateObservationError(x);
  if (z1) return 0.0;
  if (z2) return 1.0;
  const double m = std::max(l1, l2);
  const double e1 = std::exp(l1 - m);
  return e1 / (e1 + std::exp(l2 - m));
}

UpdateDiagnostics make_diagnostics(const BetaState& before, const BetaState& after, double w1) {
  UpdateDiagnostics d;
  d.w1 = w1;
  d.mass_increment = after.mass() - before.mass();
  const double e = after.mean();
  d.epsilon = w1 * (1.0 - w1) / (e * (1.0 - e));
  return d;
}

}  // namespace

double responsibility(const KnownDensityPair& pair, const BetaState& state, double x) {
  check_state(state);
  const double l1 = std::log(state.a) + pair.f1.log_pdf(x);
  const double l2 = std::log(state.b) + pair.f2.log_pdf(x);
  return responsibility_from_logs(l1, l2, x);
}

std::pair<BetaState, UpdateDiagnostics> quasi_bayes_update(const KnownDensityPair& pair,
                                                           const BetaState& state, double x) {
  const double w1 = responsibility(pair, state, x);
  const BetaState next{state.a + w1, state.b + (1.0 - w1)};
  return {next, make_diagnostics(state, next, w1)};
}

BetaState confirmed_update(const BetaState& state, int z) {
  check_state(state);
  if (z != 1 && z != 2) throw std::invalid_argument("confirmed_update: label must be 1 or 2");
  return z == 1 ? BetaState{state.a + 1.0, state.b} : BetaState{state.a, state.b + 1.0};
}

std::pair<BetaState, UpdateDiagnostics> vb_recursive_update(const KnownDensityPair& pair,
                                                            const BetaState& state, double x) {
  check_state(state);
  const double psi_ab = digamma(state.a + state.b);
  const double l1 = digamma(state.a) - psi_ab + pair.f1.log_pdf(x);
  const double l2 = digamma(state.b) - psi_ab + pair.f2.log_pdf(x);
  const double w1 = responsibility_from_logs(l1, l2, x);
  const BetaState next{state.a + w1, state.b + (1.0 - w1)};
  return {next, make_diagnostics(state, next, w1)};
}

std::pair<BetaState, UpdateDiagnostics> pe_update_with_responsibility(const BetaState& state,
                                                                      double w1) {
  check_state(state);
  if (!(w1 >= 0.0 && w1 <= 1.0)) {
    throw std::invalid_argument("pe_update: responsibility outside [0,1]");
  }
  const double mass = state.mass();
  const double mean_next = (state.a + w1) / (mass + 1.0);
  assert(mean_next > 0.0 && mean_next < 1.0);
  const double ev = mean_next * (1.0 - mean_next);
  const double spread = w1 * (1.0 - w1);
  // Variance matching, solved exactly for the new mass:
  //   ev/(L'+1) = ev/(L+2) + spread/((L+2)(L+1))
  const double mass_next =
      ev * (mass + 1.0) * (mass + 2.0) / (ev * (mass + 1.0) + spread) - 1.0;
  const BetaState next{mean_next * mass_next, (1.0 - mean_next) * mass_next};
  return {next, make_diagnostics(state, next, w1)};
}

std::pair<BetaState, UpdateDiagnostics> pe_update(const KnownDensityPair& pair,
                                                  const BetaState& state, double x) {
  return pe_update_with_responsibility(state, responsibility(pair, state, x));
}

std::pair<BetaState, UpdateDiagnostics> kl_update_with_responsibility(
    const BetaState& state, double w1, const SolverSettings& settings) {
  check_state(state);
  // Targets are the exact E[ln beta], E[ln(1-beta)] of the one-step posterior
  // mixture w1 Be(a+1,b) + (1-w1) Be(a,b+1).
  const double psi_next = digamma(state.a + state.b + 1.0);
  const double r1 = digamma(state.a) + w1 / state.a - psi_next;
  const double r2 = digamma(state.b) + (1.0 - w1) / state.b - psi_next;
  const BetaState init = pe_update_with_responsibility(state, w1).first;
  const DigammaSolution sol = solve_digamma_system(r1, r2, init.a, init.b, settings);
  const BetaState next{sol.a, sol.b};
  return {next, make_diagnostics(state, next, w1)};
}

std::pair<BetaState, UpdateDiagnostics> kl_update(const KnownDensityPair& pair,
                                                  const BetaState& state, double x,
                                                  const SolverSettings& settings) {
  return kl_update_with_responsibility(state, responsibility(pair, state, x), settings);
}

EpFitResult ep_fit(const KnownDensityPair& pair, const BetaState& prior,
                   std::span<const double> data, BetaUpdateRule rule, int max_sweeps,
                   double tolerance, const SolverSettings& settings) {
  check_state(prior);
  if (max_sweeps < 1) throw std::invalid_argument("ep_fit: max_sweeps must be >= 1");
  if (!(tolerance > 0.0)) throw std::invalid_argument("ep_fit: tolerance must be > 0");

  EpFitResult res;
  res.state = prior;
  res.sites.assign(data.size(), EpSite{});

  for (int sweep = 0; sweep < max_sweeps; ++sweep) {
    double max_change = 0.0;
    for (std::size_t i = 0; i < data.size(); ++i) {
      const BetaState cavity{res.state.a - res.sites[i].da, res.state.b - res.sites[i].db};
      if (!(cavity.a > 0.0) || !(cavity.b > 0.0)) {
        ++res.cavity_skips;
        continue;
      }
      const BetaState updated =
          rule == BetaUpdateRule::kMomentMatch
              ? pe_update(pair, cavity, data[i]).first
              : kl_update(pair, cavity, data[i], settings).first;
      max_change = std::max({max_change, std::fabs(updated.a - res.state.a),
                             std::fabs(updated.b - res.state.b)});
      res.sites[i] = EpSite{updated.a - cavity.a, updated.b - cavity.b};
      res.state = updated;
    }
    res.sweeps_used = sweep + 1;
    if (max_change < tolerance) {
      res.converged = true;
      break;
    }
  }
  return res;
}

AsymptoticVariances asymptotic_variances(const KnownDensityPair& pair, double beta, long n) {
  if (!(beta > 0.0) || !(beta < 1.0)) {
    throw std::invalid_argument("asymptotic_variances: beta must lie in (0,1)");
  }
  if (n < 1) throw std::invalid_argument("asymptotic_variances: n must be >= 1");

  AsymptoticVariances out;
  const double base = beta * (1.0 - beta) / static_cast<double>(n);
  out.v_confirmed = base;
  out.v_quasi_bayes = base;
  out.v_variational = base;

  const double fisher = oracle::fisher_information_beta(pair, beta);
  const double pe_info = oracle::pe_information_beta(pair, beta);
  // Information of order below ~1e-9 of the complete-data bound means the
  // densities are indistinguishable at quadrature accuracy.
  const double floor = 1e-9 / (beta * (1.0 - beta));
  if (fisher <= floor || pe_info <= floor) {
    out.zero_information = true;
    return out;
  }
  out.v_ml = 1.0 / (static_cast<double>(n) * fisher);
  out.v_pe = 1.0 / (static_cast<double>(n) * pe_info);
  return out;
}

}  // namespace mixfilt
