#include "mixfilt/dirichlet_filter.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "mixfilt/weight_filter.hpp"

namespace mixfilt {

namespace {

void check_state(const KnownDensitySet& set, const DirichletState& state) {
  if (state.a.size() != set.size()) {
    throw std::invalid_argument("DirichletState: dimension must match the density set");
  }
  for (double v : state.a) {
    if (!(v > 0.0) || !std::isfinite(v)) {
      throw std::invalid_argument("DirichletState: entries must be finite and > 0");
    }
  }
}

struct MatchContext {
  std::vector<double> w;       // responsibilities
  std::vector<double> e_next;  // matched means E_jn
  double mass = 0;             // L_{n-1}
};

MatchContext match_context(const KnownDensitySet& set, const DirichletState& state, double x) {
  MatchContext ctx;
  ctx.w = dir_responsibilities(set, state, x);
  ctx.mass = state.mass();
  ctx.e_next.resize(ctx.w.size());
  for (std::size_t j = 0; j < ctx.w.size(); ++j) {
    ctx.e_next[j] = (state.a[j] + ctx.w[j]) / (ctx.mass + 1.0);
  }
  return ctx;
}

// Every second-moment equation has the form coeff/(L_n + 1) = rhs.
struct MomentEquation {
  double coeff = 0;
  double rhs = 0;
};

MomentEquation variance_equation(const MatchContext& ctx, std::size_t j) {
  const double ev = ctx.e_next[j] * (1.0 - ctx.e_next[j]);
  const double spread = ctx.w[j] * (1.0 - ctx.w[j]);
  return {ev, ev / (ctx.mass + 2.0) + spread / ((ctx.mass + 2.0) * (ctx.mass + 1.0))};
}

MomentEquation covariance_equation(const MatchContext& ctx, std::size_t j, std::size_t k) {
  const double ee = -ctx.e_next[j] * ctx.e_next[k];
  const double ww = -ctx.w[j] * ctx.w[k];
  return {ee, ee / (ctx.mass + 2.0) + ww / ((ctx.mass + 2.0) * (ctx.mass + 1.0))};
}

}  // namespace

MassMatchingError::MassMatchingError(double avg_lhs_coeff, double avg_rhs, double mass)
    : std::runtime_error([&] {
        std::ostringstream os;
        os << "averaged second-moment equation gives non-positive mass " << mass
           << " (averaged coefficient " << avg_lhs_coeff << ", averaged rhs " << avg_rhs << ")";
        return os.str();
      }()),
      avg_lhs_coeff_(avg_lhs_coeff),
      avg_rhs_(avg_rhs),
      mass_(mass) {}

std::vector<double> dir_responsibilities(const KnownDensitySet& set, const DirichletState& state,
                                         double x) {
  check_state(set, state);
  const std::size_t J = set.size();
  std::vector<double> logw(J);
  double max_logw = -std::numeric_limits<double>::infinity();
  for (std::size_t j = 0; j < J; ++j) {
    logw[j] = std::log(state.a[j]) + set[j].log_pdf(x);
    max_logw = std::max(max_logw, logw[j]);
  }
  if (max_logw == -std::numeric_limits<double>::infinity()) {
    throw DegenerateObservationError(x);
  }
  std::vector<double> w(J);
  double sum = 0.0;
  for (std::size_t j = 0; j < J; ++j) {
    w[j] = std::exp(logw[j] - max_logw);
    sum += w[j];
  }
  for (auto& wj : w) wj /= sum;
  return w;
}

DirichletState dir_pe_update(const KnownDensitySet& set, const DirichletState& state, double x,
                             DirichletMatchPolicy policy) {
  const MatchContext ctx = match_context(set, state, x);
  const std::size_t J = set.size();

  double coeff = 0.0, rhs = 0.0;
  int count = 0;
  for (std::size_t j = 0; j < J; ++j) {
    const auto eq = variance_equation(ctx, j);
    coeff += eq.coeff;
    rhs += eq.rhs;
    ++count;
  }
  if (policy == DirichletMatchPolicy::kAverageVarianceCovariance) {
    for (std::size_t j = 0; j < J; ++j) {
      for (std::size_t k = j + 1; k < J; ++k) {
        const auto eq = covariance_equation(ctx, j, k);
        coeff += eq.coeff;
        rhs += eq.rhs;
        ++count;
      }
    }
  }
  coeff /= count;
  rhs /= count;

  const double mass_next = coeff / rhs - 1.0;
  if (!(mass_next > 0.0) || !std::isfinite(mass_next)) {
    throw MassMatchingError(coeff, rhs, mass_next);
  }
  DirichletState out;
  out.a.resize(J);
  for (std::size_t j = 0; j < J; ++j) out.a[j] = mass_next * ctx.e_next[j];
  return out;
}

DirichletState dir_quasi_bayes_update(const KnownDensitySet& set, const DirichletState& state,
                                      double x) {
  const auto w = dir_responsibilities(set, state, x);
  DirichletState out = state;
  for (std::size_t j = 0; j < w.size(); ++j) out.a[j] += w[j];
  return out;
}

SecondMomentResiduals second_moment_residuals(const KnownDensitySet& set,
                                              const DirichletState& state, double x,
                                              double mass_candidate) {
  const MatchContext ctx = match_context(set, state, x);
  const std::size_t J = set.size();
  SecondMomentResiduals out;
  out.variance.resize(J);
  for (std::size_t j = 0; j < J; ++j) {
    const auto eq = variance_equation(ctx, j);
    out.variance[j] = eq.coeff / (mass_candidate + 1.0) - eq.rhs;
  }
  for (std::size_t j = 0; j < J; ++j) {
    for (std::size_t k = j + 1; k < J; ++k) {
      const auto eq = covariance_equation(ctx, j, k);
      out.covariance.push_back({j, k, eq.coeff / (mass_candidate + 1.0) - eq.rhs});
    }
  }
  return out;
}

MassCandidates per_component_mass_candidates(const KnownDensitySet& set,
                                             const DirichletState& state, double x) {
  const MatchContext ctx = match_context(set, state, x);
  MassCandidates out;
  out.exact.resize(set.size());
  out.approximate.resize(set.size());
  for (std::size_t j = 0; j < set.size(); ++j) {
    const auto eq = variance_equation(ctx, j);
    out.exact[j] = eq.coeff / eq.rhs - 1.0;
    const double ev = ctx.e_next[j] * (1.0 - ctx.e_next[j]);
    out.approximate[j] = ctx.mass + 1.0 - ctx.w[j] * (1.0 - ctx.w[j]) / ev;
  }
  return out;
}

}  // namespace mixfilt
