#include "mixfilt.h"

#include <algorithm>
#include <cstring>
#include <exception>
#include <new>
#include <string>

#include "json.hpp"
#include "mixfilt/dirichlet_filter.hpp"
#include "mixfilt/harness.hpp"
#include "mixfilt/mean_mixture.hpp"
#include "mixfilt/oracle.hpp"
#include "mixfilt/special_functions.hpp"
#include "mixfilt/weight_filter.hpp"

namespace {

thread_local std::string g_last_error;

int fail(int code, const char* what) {
  g_last_error = what;
  return code;
}

// Maps C++ exceptions from the core onto status codes.
template <typename Fn>
int guarded(Fn&& fn) {
  try {
    return fn();
  } catch (const mixfilt::DegenerateObservationError& e) {
    return fail(MIXFILT_ERR_DEGENERATE, e.what());
  } catch (const mixfilt::SolverError& e) {
    return fail(MIXFILT_ERR_NO_CONVERGENCE, e.what());
  } catch (const mixfilt::MassMatchingError& e) {
    return fail(MIXFILT_ERR_DOMAIN, e.what());
  } catch (const std::domain_error& e) {
    return fail(MIXFILT_ERR_DOMAIN, e.what());
  } catch (const std::invalid_argument& e) {
    return fail(MIXFILT_ERR_INVALID_ARGUMENT, e.what());
  } catch (const nlohmann::json::exception& e) {
    return fail(MIXFILT_ERR_INVALID_ARGUMENT, e.what());
  } catch (const std::bad_alloc&) {
    return fail(MIXFILT_ERR_INTERNAL, "out of memory");
  } catch (const std::exception& e) {
    return fail(MIXFILT_ERR_INTERNAL, e.what());
  } catch (...) {
    return fail(MIXFILT_ERR_INTERNAL, "unknown error");
  }
}

char* copy_string(const std::string& s) {
  char* out = new char[s.size() + 1];
  std::memcpy(out, s.data(), s.size() + 1);
  return out;
}

mixfilt::SolverSettings to_settings(const mixfilt_solver_settings* s) {
  mixfilt::SolverSettings out;
  if (s) {
    out.max_iterations = s->max_iterations;
    out.tolerance = s->tolerance;
    out.damping = s->damping;
  }
  return out;
}

int require(bool ok, const char* what) {
  return ok ? MIXFILT_OK : fail(MIXFILT_ERR_INVALID_ARGUMENT, what);
}

}  // namespace

struct mixfilt_model {
  std::variant<mixfilt::harness::PairModelConfig, mixfilt::harness::SetModelConfig,
               mixfilt::harness::MeanModelConfig>
      model;
};

namespace {

// Reuses the harness config parser so handles accept the exact model schema
// of the experiment files.
mixfilt_model* parse_model(const char* spec_json) {
  nlohmann::json spec = nlohmann::json::parse(spec_json);
  nlohmann::json doc{{"model", std::move(spec)}, {"n", 1}};
  // The true-parameter fields are required by the experiment schema; default
  // them when the caller only wants filter evaluations.
  auto& m = doc["model"];
  if (m.value("type", "") == "known-pair" && !m.contains("beta")) m["beta"] = 0.5;
  if (m.value("type", "") == "mean-mixture" && !m.contains("mu")) m["mu"] = 0.0;
  if (m.value("type", "") == "known-set" && !m.contains("weights")) {
    const std::size_t j = m.at("densities").size();
    m["weights"] = std::vector<double>(j, 1.0 / static_cast<double>(j));
  }
  auto cfg = mixfilt::harness::parse_config(doc);
  return new mixfilt_model{std::move(cfg.model)};
}

const mixfilt::KnownDensityPair* as_pair(const mixfilt_model* m) {
  if (!m) return nullptr;
  const auto* pm = std::get_if<mixfilt::harness::PairModelConfig>(&m->model);
  return pm ? &pm->pair : nullptr;
}

const mixfilt::KnownDensitySet* as_set(const mixfilt_model* m) {
  if (!m) return nullptr;
  const auto* sm = std::get_if<mixfilt::harness::SetModelConfig>(&m->model);
  return sm ? &sm->set : nullptr;
}

const mixfilt::MeanMixtureModel* as_mean(const mixfilt_model* m) {
  if (!m) return nullptr;
  const auto* mm = std::get_if<mixfilt::harness::MeanModelConfig>(&m->model);
  return mm ? &mm->model : nullptr;
}

void fill_diag(mixfilt_update_diag* out, const mixfilt::UpdateDiagnostics& d) {
  if (!out) return;
  out->w1 = d.w1;
  out->mass_increment = d.mass_increment;
  out->epsilon = d.epsilon;
}

}  // namespace

extern "C" {

const char* mixfilt_version(void) { return "0.1.0"; }

const char* mixfilt_last_error(void) { return g_last_error.c_str(); }

void mixfilt_string_free(char* s) { delete[] s; }

int mixfilt_log_gamma(double x, double* out) {
  if (int rc = require(out != nullptr, "out must not be NULL")) return rc;
  return guarded([&]() -> int {
    *out = mixfilt::log_gamma(x);
    return MIXFILT_OK;
  });
}

int mixfilt_digamma(double x, double* out) {
  if (int rc = require(out != nullptr, "out must not be NULL")) return rc;
  return guarded([&]() -> int {
    *out = mixfilt::digamma(x);
    return MIXFILT_OK;
  });
}

int mixfilt_trigamma(double x, double* out) {
  if (int rc = require(out != nullptr, "out must not be NULL")) return rc;
  return guarded([&]() -> int {
    *out = mixfilt::trigamma(x);
    return MIXFILT_OK;
  });
}

int mixfilt_solve_digamma_system(double r1, double r2, double initial_a, double initial_b,
                                 const mixfilt_solver_settings* settings, double* a_out,
                                 double* b_out) {
  if (int rc = require(a_out && b_out, "a_out/b_out must not be NULL")) return rc;
  return guarded([&]() -> int {
    const auto sol = mixfilt::solve_digamma_system(r1, r2, initial_a, initial_b,
                                                   to_settings(settings));
    *a_out = sol.a;
    *b_out = sol.b;
    return MIXFILT_OK;
  });
}

int mixfilt_model_create(const char* spec_json, mixfilt_model** out) {
  if (int rc = require(spec_json && out, "spec_json/out must not be NULL")) return rc;
  return guarded([&]() -> int {
    *out = parse_model(spec_json);
    return MIXFILT_OK;
  });
}

void mixfilt_model_destroy(mixfilt_model* model) { delete model; }

int mixfilt_model_kind(const mixfilt_model* model) {
  if (!model) return fail(MIXFILT_ERR_INVALID_ARGUMENT, "model must not be NULL");
  if (as_pair(model)) return MIXFILT_MODEL_KNOWN_PAIR;
  if (as_set(model)) return MIXFILT_MODEL_KNOWN_SET;
  return MIXFILT_MODEL_MEAN_MIXTURE;
}

int mixfilt_beta_responsibility(const mixfilt_model* model, double a, double b, double x,
                                double* out) {
  const auto* pair = as_pair(model);
  if (int rc = require(pair && out, "needs a known-pair model and non-NULL out")) return rc;
  return guarded([&]() -> int {
    *out = mixfilt::responsibility(*pair, {a, b}, x);
    return MIXFILT_OK;
  });
}

int mixfilt_beta_update(const mixfilt_model* model, int rule, double a, double b, double x,
                        const mixfilt_solver_settings* settings, double* a_out, double* b_out,
                        mixfilt_update_diag* diag) {
  const auto* pair = as_pair(model);
  if (int rc = require(pair && a_out && b_out, "needs a known-pair model and non-NULL outputs")) {
    return rc;
  }
  return guarded([&]() -> int {
    const mixfilt::BetaState state{a, b};
    std::pair<mixfilt::BetaState, mixfilt::UpdateDiagnostics> res;
    switch (rule) {
      case MIXFILT_BETA_QUASI_BAYES: res = mixfilt::quasi_bayes_update(*pair, state, x); break;
      case MIXFILT_BETA_PE: res = mixfilt::pe_update(*pair, state, x); break;
      case MIXFILT_BETA_KL: res = mixfilt::kl_update(*pair, state, x, to_settings(settings)); break;
      case MIXFILT_BETA_VB: res = mixfilt::vb_recursive_update(*pair, state, x); break;
      default: return fail(MIXFILT_ERR_INVALID_ARGUMENT, "unknown beta update rule");
    }
    *a_out = res.first.a;
    *b_out = res.first.b;
    fill_diag(diag, res.second);
    return MIXFILT_OK;
  });
}

int mixfilt_beta_confirmed_update(double a, double b, int z, double* a_out, double* b_out) {
  if (int rc = require(a_out && b_out, "a_out/b_out must not be NULL")) return rc;
  return guarded([&]() -> int {
    const auto next = mixfilt::confirmed_update(mixfilt::BetaState{a, b}, z);
    *a_out = next.a;
    *b_out = next.b;
    return MIXFILT_OK;
  });
}

int mixfilt_ep_fit(const mixfilt_model* model, int rule, double prior_a, double prior_b,
                   const double* xs, size_t n, int max_sweeps, double tolerance, double* a_out,
                   double* b_out, int* sweeps_used, int* converged) {
  const auto* pair = as_pair(model);
  if (int rc = require(pair && xs && a_out && b_out, "needs a known-pair model, data and outputs")) {
    return rc;
  }
  if (rule != MIXFILT_BETA_PE && rule != MIXFILT_BETA_KL) {
    return fail(MIXFILT_ERR_INVALID_ARGUMENT, "ep rule must be MIXFILT_BETA_PE or MIXFILT_BETA_KL");
  }
  return guarded([&]() -> int {
    const auto res = mixfilt::ep_fit(*pair, {prior_a, prior_b}, std::span(xs, n),
                                     rule == MIXFILT_BETA_PE ? mixfilt::BetaUpdateRule::kMomentMatch
                                                             : mixfilt::BetaUpdateRule::kKl,
                                     max_sweeps, tolerance);
    *a_out = res.state.a;
    *b_out = res.state.b;
    if (sweeps_used) *sweeps_used = res.sweeps_used;
    if (converged) *converged = res.converged ? 1 : 0;
    return MIXFILT_OK;
  });
}

int mixfilt_mean_log_density(const mixfilt_model* model, double mu, double x, double* out) {
  const auto* mm = as_mean(model);
  if (int rc = require(mm && out, "needs a mean-mixture model and non-NULL out")) return rc;
  return guarded([&]() -> int {
    *out = mixfilt::log_density(*mm, mu, x);
    return MIXFILT_OK;
  });
}

int mixfilt_mean_adf_update(const mixfilt_model* model, double a, double b, double x,
                            double* a_out, double* b_out) {
  const auto* mm = as_mean(model);
  if (int rc = require(mm && a_out && b_out, "needs a mean-mixture model and non-NULL outputs")) {
    return rc;
  }
  return guarded([&]() -> int {
    const auto next = mixfilt::adf_update(*mm, {a, b}, x);
    *a_out = next.a;
    *b_out = next.b;
    return MIXFILT_OK;
  });
}

int mixfilt_mean_score(const mixfilt_model* model, double mu, double x, double* out) {
  const auto* mm = as_mean(model);
  if (int rc = require(mm && out, "needs a mean-mixture model and non-NULL out")) return rc;
  return guarded([&]() -> int {
    *out = mixfilt::score(*mm, mu, x);
    return MIXFILT_OK;
  });
}

int mixfilt_mean_observed_information(const mixfilt_model* model, double mu, double x,
                                      double* out) {
  const auto* mm = as_mean(model);
  if (int rc = require(mm && out, "needs a mean-mixture model and non-NULL out")) return rc;
  return guarded([&]() -> int {
    *out = mixfilt::observed_information(*mm, mu, x);
    return MIXFILT_OK;
  });
}

int mixfilt_dirichlet_pe_update(const mixfilt_model* model, int policy, const double* alpha,
                                size_t j, double x, double* alpha_out) {
  const auto* set = as_set(model);
  if (int rc = require(set && alpha && alpha_out, "needs a known-set model and non-NULL buffers")) {
    return rc;
  }
  if (j != set->size()) return fail(MIXFILT_ERR_INVALID_ARGUMENT, "alpha length must equal set size");
  const mixfilt::DirichletMatchPolicy pol =
      policy == MIXFILT_DIR_AVG_VARIANCE_COVARIANCE
          ? mixfilt::DirichletMatchPolicy::kAverageVarianceCovariance
          : mixfilt::DirichletMatchPolicy::kAverageVariance;
  if (policy != MIXFILT_DIR_AVG_VARIANCE && policy != MIXFILT_DIR_AVG_VARIANCE_COVARIANCE) {
    return fail(MIXFILT_ERR_INVALID_ARGUMENT, "unknown dirichlet matching policy");
  }
  return guarded([&]() -> int {
    mixfilt::DirichletState state{std::vector<double>(alpha, alpha + j)};
    const auto next = mixfilt::dir_pe_update(*set, state, x, pol);
    std::copy(next.a.begin(), next.a.end(), alpha_out);
    return MIXFILT_OK;
  });
}

int mixfilt_dirichlet_qb_update(const mixfilt_model* model, const double* alpha, size_t j,
                                double x, double* alpha_out) {
  const auto* set = as_set(model);
  if (int rc = require(set && alpha && alpha_out, "needs a known-set model and non-NULL buffers")) {
    return rc;
  }
  if (j != set->size()) return fail(MIXFILT_ERR_INVALID_ARGUMENT, "alpha length must equal set size");
  return guarded([&]() -> int {
    mixfilt::DirichletState state{std::vector<double>(alpha, alpha + j)};
    const auto next = mixfilt::dir_quasi_bayes_update(*set, state, x);
    std::copy(next.a.begin(), next.a.end(), alpha_out);
    return MIXFILT_OK;
  });
}

int mixfilt_fisher_information_beta(const mixfilt_model* model, double beta, double* out) {
  const auto* pair = as_pair(model);
  if (int rc = require(pair && out, "needs a known-pair model and non-NULL out")) return rc;
  return guarded([&]() -> int {
    *out = mixfilt::oracle::fisher_information_beta(*pair, beta);
    return MIXFILT_OK;
  });
}

int mixfilt_pe_information_beta(const mixfilt_model* model, double beta, double* out) {
  const auto* pair = as_pair(model);
  if (int rc = require(pair && out, "needs a known-pair model and non-NULL out")) return rc;
  return guarded([&]() -> int {
    *out = mixfilt::oracle::pe_information_beta(*pair, beta);
    return MIXFILT_OK;
  });
}

int mixfilt_fisher_information_mu(const mixfilt_model* model, double mu, double* out) {
  const auto* mm = as_mean(model);
  if (int rc = require(mm && out, "needs a mean-mixture model and non-NULL out")) return rc;
  return guarded([&]() -> int {
    *out = mixfilt::oracle::fisher_information_mu(*mm, mu);
    return MIXFILT_OK;
  });
}

int mixfilt_simulate_json(const char* config_json, const char* format, char** data_out) {
  if (int rc = require(config_json && data_out, "config_json/data_out must not be NULL")) return rc;
  return guarded([&]() -> int {
    const auto cfg = mixfilt::harness::parse_config(nlohmann::json::parse(config_json));
    const auto fmt = mixfilt::harness::trace_format_from_name(format ? format : "csv");
    *data_out = copy_string(mixfilt::harness::render_simulated(cfg, fmt));
    return MIXFILT_OK;
  });
}

int mixfilt_run_json(const char* config_json, const char* out_dir, const char* format,
                     char** summary_json_out) {
  if (int rc = require(config_json != nullptr, "config_json must not be NULL")) return rc;
  return guarded([&]() -> int {
    const auto cfg = mixfilt::harness::parse_config(nlohmann::json::parse(config_json));
    // Explicit arguments win; the config's "output" block is the fallback.
    const std::string dir = out_dir && *out_dir ? out_dir : cfg.output_dir;
    if (dir.empty()) {
      return fail(MIXFILT_ERR_INVALID_ARGUMENT,
                  "no output directory: pass out_dir or set output.dir in the config");
    }
    const auto fmt = mixfilt::harness::trace_format_from_name(
        format && *format ? format : cfg.output_format);
    const auto summary = mixfilt::harness::run_to_files(cfg, dir, fmt);
    if (summary_json_out) *summary_json_out = copy_string(summary.dump(2));
    return MIXFILT_OK;
  });
}

int mixfilt_oracle_json(const char* config_json, char** report_json_out) {
  if (int rc = require(config_json && report_json_out, "arguments must not be NULL")) return rc;
  return guarded([&]() -> int {
    const auto cfg = mixfilt::harness::parse_config(nlohmann::json::parse(config_json));
    *report_json_out = copy_string(mixfilt::harness::oracle_report(cfg).dump(2));
    return MIXFILT_OK;
  });
}

int mixfilt_check_lemma_json(const char* config_json, char** report_json_out) {
  if (int rc = require(config_json && report_json_out, "arguments must not be NULL")) return rc;
  return guarded([&]() -> int {
    const auto report = mixfilt::harness::check_lemma(nlohmann::json::parse(config_json));
    *report_json_out = copy_string(report.dump(2));
    return MIXFILT_OK;
  });
}

int mixfilt_ep_fit_json(const char* config_json, char** report_json_out) {
  if (int rc = require(config_json && report_json_out, "arguments must not be NULL")) return rc;
  return guarded([&]() -> int {
    const auto cfg = mixfilt::harness::parse_config(nlohmann::json::parse(config_json));
    *report_json_out = copy_string(mixfilt::harness::ep_fit_report(cfg).dump(2));
    return MIXFILT_OK;
  });
}

}  // extern "C"
