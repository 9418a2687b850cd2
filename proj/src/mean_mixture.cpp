#include "mixfilt/mean_mixture.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace mixfilt {

namespace {

constexpr double kLogSqrt2Pi = 0.91893853320467274178;

void check_state(const GaussianState& s) {
  if (!std::isfinite(s.a) || !std::isfinite(s.b) || !(s.b > 0.0)) {
    throw std::invalid_argument("GaussianState: needs finite a and b > 0");
  }
}

// Normalized weights t_j = T_j / sum T_j with
// T_j = (v_j/sigma_j) exp(-(x - mu c_j)^2 / (2 sigma_j^2)),
// computed by max-subtraction in log space.
std::vector<double> evidence_weights(const MeanMixtureModel& model, double mu, double x) {
  const std::size_t J = model.size();
  std::vector<double> logt(J);
  double max_logt = -std::numeric_limits<double>::infinity();
  for (std::size_t j = 0; j < J; ++j) {
    const auto& cj = model[j];
    const double s = (x - cj.c * mu) / cj.sigma;
    logt[j] = std::log(cj.v) - std::log(cj.sigma) - 0.5 * s * s;
    max_logt = std::max(max_logt, logt[j]);
  }
  std::vector<double> t(J);
  double sum = 0.0;
  for (std::size_t j = 0; j < J; ++j) {
    t[j] = std::exp(logt[j] - max_logt);
    sum += t[j];
  }
  for (auto& tj : t) tj /= sum;
  return t;
}

struct IncrementTerms {
  double rr = 0;    // sum t_j R_j^2
  double rrss = 0;  // sum t_j R_j^2 S_j^2
  double rs = 0;    // sum t_j R_j S_j
};

IncrementTerms increment_terms(const MeanMixtureModel& model, double center, double x) {
  const auto t = evidence_weights(model, center, x);
  IncrementTerms out;
  for (std::size_t j = 0; j < model.size(); ++j) {
    const auto& cj = model[j];
    const double r = cj.c / cj.sigma;
    const double s = (x - cj.c * center) / cj.sigma;
    out.rr += t[j] * r * r;
    out.rrss += t[j] * r * r * s * s;
    out.rs += t[j] * r * s;
  }
  return out;
}

}  // namespace

MeanMixtureModel::MeanMixtureModel(std::vector<MeanMixtureComponent> components)
    : components_(std::move(components)) {
  if (components_.empty()) throw std::invalid_argument("MeanMixtureModel: needs J >= 1");
  double total = 0.0;
  for (const auto& c : components_) {
    if (!std::isfinite(c.c) || !std::isfinite(c.sigma) || !std::isfinite(c.v)) {
      throw std::invalid_argument("MeanMixtureModel: non-finite component parameter");
    }
    if (!(c.sigma > 0.0)) throw std::invalid_argument("MeanMixtureModel: sigma_j must be > 0");
    if (!(c.v > 0.0)) throw std::invalid_argument("MeanMixtureModel: v_j must be > 0");
    total += c.v;
  }
  if (std::fabs(total - 1.0) > 1e-12) {
    throw std::invalid_argument("MeanMixtureModel: mixing weights must sum to 1");
  }
}

MeanMixtureModel symmetric_model() {
  return MeanMixtureModel({{-1.0, 1.0, 0.5}, {1.0, 1.0, 0.5}});
}

MeanMixtureModel clutter_model(double v) {
  if (!(v > 0.0) || !(v < 1.0)) {
    throw std::invalid_argument("clutter_model: weight must lie in (0,1)");
  }
  return MeanMixtureModel({{1.0, 1.0, 1.0 - v}, {0.0, std::sqrt(10.0), v}});
}

bool is_symmetric_model(const MeanMixtureModel& model) {
  if (model.size() != 2) return false;
  const auto& c1 = model[0];
  const auto& c2 = model[1];
  return c1.c == -1.0 && c2.c == 1.0 && c1.sigma == 1.0 && c2.sigma == 1.0 && c1.v == 0.5 &&
         c2.v == 0.5;
}

double log_density(const MeanMixtureModel& model, double mu, double x) {
  double max_l = -std::numeric_limits<double>::infinity();
  std::vector<double> l(model.size());
  for (std::size_t j = 0; j < model.size(); ++j) {
    const auto& cj = model[j];
    const double s = (x - cj.c * mu) / cj.sigma;
    l[j] = std::log(cj.v) - std::log(cj.sigma) - kLogSqrt2Pi - 0.5 * s * s;
    max_l = std::max(max_l, l[j]);
  }
  double sum = 0.0;
  for (double lj : l) sum += std::exp(lj - max_l);
  return max_l + std::log(sum);
}

std::vector<ComponentPosterior> component_posteriors(const MeanMixtureModel& model,
                                                     const GaussianState& state, double x) {
  check_state(state);
  const std::size_t J = model.size();
  std::vector<ComponentPosterior> out(J);
  std::vector<double> logw(J);
  double max_logw = -std::numeric_limits<double>::infinity();
  for (std::size_t j = 0; j < J; ++j) {
    const auto& cj = model[j];
    const double prec = 1.0 / state.b + cj.c * cj.c / (cj.sigma * cj.sigma);
    out[j].s2 = 1.0 / prec;
    out[j].m = (state.a / state.b + cj.c * x / (cj.sigma * cj.sigma)) / prec;
    const double d = x - state.a * cj.c;
    logw[j] = std::log(cj.v) - std::log(cj.sigma) - 0.5 * std::log(prec) -
              d * d / (2.0 * (cj.sigma * cj.sigma + state.b * cj.c * cj.c));
    max_logw = std::max(max_logw, logw[j]);
  }
  double sum = 0.0;
  for (std::size_t j = 0; j < J; ++j) {
    out[j].w = std::exp(logw[j] - max_logw);
    sum += out[j].w;
  }
  for (auto& cp : out) cp.w /= sum;
  return out;
}

GaussianState adf_update(const MeanMixtureModel& model, const GaussianState& state, double x) {
  const auto post = component_posteriors(model, state, x);
  double mean = 0.0;
  for (const auto& cp : post) mean += cp.w * cp.m;
  double var = 0.0;
  for (const auto& cp : post) {
    const double d = cp.m - mean;
    var += cp.w * (cp.s2 + d * d);
  }
  return {mean, var};
}

double asymptotic_mean_increment(const MeanMixtureModel& model, const GaussianState& state,
                                 double x) {
  check_state(state);
  return state.b * increment_terms(model, state.a, x).rs;
}

double asymptotic_precision_increment(const MeanMixtureModel& model, const GaussianState& state,
                                      double x) {
  check_state(state);
  const auto t = increment_terms(model, state.a, x);
  return t.rr - t.rrss + t.rs * t.rs;
}

double score(const MeanMixtureModel& model, double mu, double x) {
  return increment_terms(model, mu, x).rs;
}

double observed_information(const MeanMixtureModel& model, double mu, double x) {
  const auto t = increment_terms(model, mu, x);
  return t.rr - t.rrss + t.rs * t.rs;
}

double complete_data_precision(const MeanMixtureModel& model, const GaussianState& state,
                               double x) {
  check_state(state);
  return increment_terms(model, state.a, x).rr;
}

CountedGaussianState quasi_bayes_update(const MeanMixtureModel& model,
                                        const CountedGaussianState& cstate, double x) {
  if (!is_symmetric_model(model)) {
    throw std::invalid_argument("quasi_bayes_update: model must be the symmetric two-Gaussian specialization");
  }
  check_state(cstate.state);
  const double a = cstate.state.a;
  // Responsibility of the N(-a, 1) component, in log space.
  const double l1 = -0.5 * (x + a) * (x + a);
  const double l2 = -0.5 * (x - a) * (x - a);
  const double m = std::max(l1, l2);
  const double w = std::exp(l1 - m) / (std::exp(l1 - m) + std::exp(l2 - m));
  const double gain = 1.0 / static_cast<double>(cstate.n + 2);
  CountedGaussianState out;
  out.state.a = a + gain * ((1.0 - w) * x - w * x - a);
  out.state.b = gain;
  out.n = cstate.n + 1;
  return out;
}

CountedGaussianState confirmed_update(const CountedGaussianState& cstate, double x, int z) {
  if (z != 1 && z != 2) throw std::invalid_argument("confirmed_update: label must be 1 or 2");
  check_state(cstate.state);
  const double signed_x = (z == 1) ? -x : x;
  const double gain = 1.0 / static_cast<double>(cstate.n + 2);
  CountedGaussianState out;
  out.state.a = cstate.state.a + gain * (signed_x - cstate.state.a);
  out.state.b = gain;
  out.n = cstate.n + 1;
  return out;
}

}  // namespace mixfilt
