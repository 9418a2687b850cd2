#include "mixfilt/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "mixfilt/special_functions.hpp"

namespace mixfilt::oracle {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();
constexpr double kActiveDrop = 60.0;  // exp(-60) ~ 9e-27: below integration noise

// Normalized moments of exp(phi(u)) with value map val(u), on [lo, hi].
// phi is scanned first so that sharp or multimodal mass is located before any
// adaptive pass runs; integration is restricted to cells within kActiveDrop
// of the peak.  Tolerances are relative to trapezoid pre-estimates.
struct LogMoments {
  double mean = 0;
  double variance = 0;
  double log_mass = kNegInf;  // ln of the integral of exp(phi)
};

LogMoments moments_of_log_density(const std::function<double(double)>& phi,
                                  const std::function<double(double)>& val, double lo, double hi,
                                  const QuadratureSpec& spec) {
  const int kScan = 1536;
  std::vector<double> u(kScan + 1), p(kScan + 1);
  double peak = kNegInf;
  double peak_u = lo;
  for (int i = 0; i <= kScan; ++i) {
    u[i] = lo + (hi - lo) * i / kScan;
    const double v = phi(u[i]);
    p[i] = std::isnan(v) ? kNegInf : v;
    if (p[i] > peak) {
      peak = p[i];
      peak_u = u[i];
    }
  }
  if (!std::isfinite(peak)) {
    throw std::runtime_error("posterior mass not located: log-density is -inf everywhere");
  }
  const double center = val(peak_u);

  const auto f0 = [&](double x) { return std::exp(phi(x) - peak); };
  const auto f1 = [&](double x) { return (val(x) - center) * std::exp(phi(x) - peak); };
  const auto f2 = [&](double x) {
    const double d = val(x) - center;
    return d * d * std::exp(phi(x) - peak);
  };

  // Trapezoid pre-estimates over active cells set the absolute tolerances.
  double r0 = 0, r1 = 0, r2 = 0;
  for (int i = 0; i < kScan; ++i) {
    if (std::max(p[i], p[i + 1]) <= peak - kActiveDrop) continue;
    const double w = u[i + 1] - u[i];
    const double e0 = 0.5 * (std::exp(p[i] - peak) + std::exp(p[i + 1] - peak));
    const double dmax = std::max(std::fabs(val(u[i]) - center), std::fabs(val(u[i + 1]) - center));
    r0 += w * e0;
    r1 += w * e0 * dmax;
    r2 += w * e0 * dmax * dmax;
  }
  const double floor = 1e-280;

  double m0 = 0, m1 = 0, m2 = 0;
  int i = 0;
  while (i < kScan) {
    if (std::max(p[i], p[i + 1]) <= peak - kActiveDrop) {
      ++i;
      continue;
    }
    int j = i;
    while (j < kScan && std::max(p[j], p[j + 1]) > peak - kActiveDrop) ++j;
    QuadratureSpec panel = spec;
    panel.initial_subdivisions = std::clamp(2 * (j - i), 8, 256);
    panel.tolerance = std::max(r0 * spec.tolerance, floor);
    m0 += integrate(f0, u[i], u[j], panel).value;
    panel.tolerance = std::max(r1 * spec.tolerance, floor);
    m1 += integrate(f1, u[i], u[j], panel).value;
    panel.tolerance = std::max(r2 * spec.tolerance, floor);
    m2 += integrate(f2, u[i], u[j], panel).value;
    i = j;
  }
  if (!(m0 > 0.0)) throw std::runtime_error("posterior normalization vanished");

  LogMoments out;
  const double shift = m1 / m0;
  out.mean = center + shift;
  out.variance = m2 / m0 - shift * shift;
  out.log_mass = peak + std::log(m0);
  return out;
}

std::vector<double> pair_breakpoints(const KnownDensityPair& pair) {
  std::vector<double> bp = pair.f1.breakpoints();
  const auto b2 = pair.f2.breakpoints();
  bp.insert(bp.end(), b2.begin(), b2.end());
  return bp;
}

std::pair<double, double> pair_interval(const KnownDensityPair& pair, const QuadratureSpec& spec) {
  if (spec.has_interval()) return {spec.lo, spec.hi};
  const auto i1 = pair.f1.quadrature_interval();
  const auto i2 = pair.f2.quadrature_interval();
  return {std::min(i1.first, i2.first), std::max(i1.second, i2.second)};
}

}  // namespace

double log_beta(double a, double b) { return log_gamma(a) + log_gamma(b) - log_gamma(a + b); }

ExactBetaPosterior exact_beta_posterior(const KnownDensityPair& pair, const BetaState& prior,
                                        std::span<const double> data, int limit) {
  if (!(prior.a > 0.0) || !(prior.b > 0.0)) {
    throw std::invalid_argument("exact_beta_posterior: prior hyperparameters must be > 0");
  }
  const std::size_t n = data.size();
  if (static_cast<int>(n) > limit) {
    throw std::invalid_argument("exact_beta_posterior: data size exceeds enumeration limit");
  }

  std::vector<double> lf1(n), lf2(n);
  for (std::size_t i = 0; i < n; ++i) {
    lf1[i] = pair.f1.log_pdf(data[i]);
    lf2[i] = pair.f2.log_pdf(data[i]);
    if (lf1[i] == kNegInf && lf2[i] == kNegInf) throw DegenerateObservationError(data[i]);
  }

  const std::size_t count = std::size_t{1} << n;
  std::vector<double> logw(count);
  std::vector<int> ones(count);
  double max_logw = kNegInf;
  for (std::size_t mask = 0; mask < count; ++mask) {
    double lw = 0.0;
    int n1 = 0;
    for (std::size_t i = 0; i < n; ++i) {
      if (mask & (std::size_t{1} << i)) {
        lw += lf2[i];
      } else {
        lw += lf1[i];
        ++n1;
      }
    }
    lw += log_beta(prior.a + n1, prior.b + static_cast<double>(n - n1));
    logw[mask] = lw;
    ones[mask] = n1;
    max_logw = std::max(max_logw, lw);
  }

  ExactBetaPosterior out;
  out.mixture.reserve(count);
  double total = 0.0;
  for (std::size_t mask = 0; mask < count; ++mask) {
    const double w = std::exp(logw[mask] - max_logw);
    total += w;
    out.mixture.push_back({w, prior.a + ones[mask], prior.b + static_cast<double>(n) - ones[mask]});
  }
  double mean = 0.0, second = 0.0;
  for (auto& comp : out.mixture) {
    comp.weight /= total;
    const BetaState c{comp.a, comp.b};
    mean += comp.weight * c.mean();
    second += comp.weight * c.second_moment();
  }
  out.summary.mean = mean;
  out.summary.variance = second - mean * mean;
  out.summary.log_normalizer = max_logw + std::log(total) - log_beta(prior.a, prior.b);
  out.summary.method = SummaryMethod::kEnumeration;
  return out;
}

PosteriorSummary grid_beta_posterior(const KnownDensityPair& pair, const BetaState& prior,
                                     std::span<const double> data, const QuadratureSpec& spec) {
  if (!(prior.a >= 0.5) || !(prior.b >= 0.5)) {
    throw std::invalid_argument(
        "grid_beta_posterior: prior a, b must be >= 0.5 (use the enumeration oracle below that)");
  }
  const std::size_t n = data.size();
  std::vector<double> f1(n), f2(n);
  for (std::size_t i = 0; i < n; ++i) {
    f1[i] = pair.f1.pdf(data[i]);
    f2[i] = pair.f2.pdf(data[i]);
    if (f1[i] == 0.0 && f2[i] == 0.0) throw DegenerateObservationError(data[i]);
  }

  // Substitution beta = sin^2(theta) keeps the endpoint factors integrable.
  const auto val = [](double th) {
    const double s = std::sin(th);
    return s * s;
  };
  const auto phi = [&](double th) {
    const double s = std::sin(th);
    const double c = std::cos(th);
    const double beta = s * s;
    double g = (2.0 * prior.a - 1.0) * std::log(std::max(s, 1e-300)) +
               (2.0 * prior.b - 1.0) * std::log(std::max(c, 1e-300)) + std::log(2.0);
    for (std::size_t i = 0; i < n; ++i) {
      const double like = f2[i] + beta * (f1[i] - f2[i]);
      if (like <= 0.0) return kNegInf;
      g += std::log(like);
    }
    return g;
  };

  QuadratureSpec inner = spec;
  inner.lo = std::nan("");
  inner.hi = std::nan("");
  const LogMoments m =
      moments_of_log_density(phi, val, 0.0, 1.5707963267948966, inner);

  PosteriorSummary out;
  out.mean = m.mean;
  out.variance = m.variance;
  out.log_normalizer = m.log_mass - log_beta(prior.a, prior.b);
  out.method = SummaryMethod::kGrid;
  return out;
}

PosteriorSummary grid_mu_posterior(const MeanMixtureModel& model, const GaussianState& prior,
                                   std::span<const double> data, const QuadratureSpec& spec) {
  if (!(prior.b > 0.0)) throw std::invalid_argument("grid_mu_posterior: prior variance must be > 0");
  const double sd = std::sqrt(prior.b);

  const auto phi = [&](double mu) {
    const double d = mu - prior.a;
    double g = -0.5 * d * d / prior.b - 0.5 * std::log(prior.b) - 0.91893853320467274178;
    for (const double x : data) g += log_density(model, mu, x);
    return g;
  };

  // Widen from +-10 prior sd until both edges are deep in the tails.
  double lo = prior.a - 10.0 * sd;
  double hi = prior.a + 10.0 * sd;
  for (int round = 0; round < 200; ++round) {
    const int kProbe = 256;
    double peak = kNegInf;
    int arg = 0;
    for (int i = 0; i <= kProbe; ++i) {
      const double v = phi(lo + (hi - lo) * i / kProbe);
      if (v > peak) {
        peak = v;
        arg = i;
      }
    }
    const bool lo_hot = phi(lo) > peak - kActiveDrop || arg == 0;
    const bool hi_hot = phi(hi) > peak - kActiveDrop || arg == kProbe;
    if (!lo_hot && !hi_hot) break;
    const double w = hi - lo;
    if (lo_hot) lo -= w;
    if (hi_hot) hi += w;
  }

  const auto val = [](double mu) { return mu; };
  const LogMoments m = moments_of_log_density(phi, val, lo, hi, spec);
  PosteriorSummary out;
  out.mean = m.mean;
  out.variance = m.variance;
  out.log_normalizer = m.log_mass;
  out.method = SummaryMethod::kGrid;
  return out;
}

double fisher_information_beta(const KnownDensityPair& pair, double beta,
                               const QuadratureSpec& spec) {
  if (!(beta > 0.0) || !(beta < 1.0)) {
    throw std::invalid_argument("fisher_information_beta: beta must lie in (0,1)");
  }
  const auto [lo, hi] = pair_interval(pair, spec);
  const auto integrand = [&](double x) {
    const double a = pair.f1.pdf(x);
    const double b = pair.f2.pdf(x);
    const double f = beta * a + (1.0 - beta) * b;
    if (f <= 0.0) return 0.0;
    const double d = a - b;
    return d * d / f;
  };
  return integrate_piecewise(integrand, lo, hi, pair_breakpoints(pair), spec).value;
}

double pe_information_beta(const KnownDensityPair& pair, double beta, const QuadratureSpec& spec) {
  if (!(beta > 0.0) || !(beta < 1.0)) {
    throw std::invalid_argument("pe_information_beta: beta must lie in (0,1)");
  }
  const auto [lo, hi] = pair_interval(pair, spec);
  const auto integrand = [&](double x) {
    const double a = pair.f1.pdf(x);
    const double b = pair.f2.pdf(x);
    const double f = beta * a + (1.0 - beta) * b;
    if (f <= 0.0) return 0.0;
    return a * b / f;
  };
  const double overlap = integrate_piecewise(integrand, lo, hi, pair_breakpoints(pair), spec).value;
  return (1.0 - overlap) / (beta * (1.0 - beta));
}

double fisher_information_mu(const MeanMixtureModel& model, double mu,
                             const QuadratureSpec& spec) {
  double lo = std::numeric_limits<double>::infinity();
  double hi = -std::numeric_limits<double>::infinity();
  if (spec.has_interval()) {
    lo = spec.lo;
    hi = spec.hi;
  } else {
    for (const auto& c : model.components()) {
      lo = std::min(lo, c.c * mu - 12.0 * c.sigma);
      hi = std::max(hi, c.c * mu + 12.0 * c.sigma);
    }
  }
  const auto integrand = [&](double x) {
    return std::exp(log_density(model, mu, x)) * observed_information(model, mu, x);
  };
  return integrate(integrand, lo, hi, spec).value;
}

DivergenceReport divergence(const PosteriorSummary& a, const PosteriorSummary& b) {
  DivergenceReport out;
  out.mean_gap = a.mean - b.mean;
  if (!(b.variance > 0.0)) throw std::invalid_argument("divergence: reference variance must be > 0");
  out.variance_ratio = a.variance / b.variance;
  return out;
}

double grid_kl(const std::function<double(double)>& pa, const std::function<double(double)>& pb,
               double lo, double hi, int points) {
  if (!(lo < hi) || points < 2) throw std::invalid_argument("grid_kl: bad grid");
  const double h = (hi - lo) / (points - 1);
  double kl = 0.0;
  for (int i = 0; i < points; ++i) {
    const double x = lo + i * h;
    const double p = std::max(pa(x), 1e-300);
    const double q = std::max(pb(x), 1e-300);
    const double term = pa(x) > 0.0 ? pa(x) * std::log(p / q) : 0.0;
    kl += (i == 0 || i == points - 1) ? 0.5 * term : term;
  }
  return kl * h;
}

}  // namespace mixfilt::oracle
