#include "mixfilt/harness.hpp"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <limits>
#include <sstream>
#include <stdexcept>

#include "mixfilt/oracle.hpp"

namespace mixfilt::harness {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

std::string fmt_g(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string csv_cell(double v) { return std::isnan(v) ? std::string() : fmt_g(v); }

KnownDensity parse_density(const nlohmann::json& d) {
  const std::string type = d.at("type").get<std::string>();
  if (type == "gaussian") {
    return GaussianDensity{d.at("mean").get<double>(), d.at("sd").get<double>()};
  }
  if (type == "uniform") {
    return UniformDensity{d.at("lo").get<double>(), d.at("hi").get<double>()};
  }
  if (type == "tabulated") {
    return TabulatedDensity{d.at("x").get<std::vector<double>>(),
                            d.at("y").get<std::vector<double>>()};
  }
  throw std::invalid_argument("unknown density type: " + type);
}

struct TraceRow {
  std::string method;
  long n = 0;
  std::vector<double> params;
  double e = kNaN;
  double v = kNaN;
  double l = kNaN;
  double w1 = kNaN;
  double epsilon = kNaN;
  double mass_increment = kNaN;
};

std::string render_csv(const std::vector<TraceRow>& rows, std::size_t param_count) {
  std::ostringstream os;
  os << "method,n";
  if (param_count == 2) {
    os << ",a,b";
  } else {
    for (std::size_t j = 1; j <= param_count; ++j) os << ",a" << j;
  }
  os << ",E,V,L,w1,epsilon,mass_increment\n";
  for (const auto& r : rows) {
    os << r.method << ',' << r.n;
    for (std::size_t j = 0; j < param_count; ++j) {
      os << ',' << (j < r.params.size() ? fmt_g(r.params[j]) : std::string());
    }
    os << ',' << fmt_g(r.e) << ',' << fmt_g(r.v) << ',' << fmt_g(r.l) << ',' << csv_cell(r.w1)
       << ',' << csv_cell(r.epsilon) << ',' << csv_cell(r.mass_increment) << '\n';
  }
  return os.str();
}

nlohmann::json row_to_json(const TraceRow& r) {
  nlohmann::json j{{"method", r.method}, {"n", r.n},     {"params", r.params},
                   {"E", r.e},           {"V", r.v},     {"L", r.l}};
  if (!std::isnan(r.w1)) j["w1"] = r.w1;
  if (!std::isnan(r.epsilon)) j["epsilon"] = r.epsilon;
  if (!std::isnan(r.mass_increment)) j["mass_increment"] = r.mass_increment;
  return j;
}

std::string render_json(const std::vector<TraceRow>& rows) {
  nlohmann::json arr = nlohmann::json::array();
  for (const auto& r : rows) arr.push_back(row_to_json(r));
  return arr.dump(2) + "\n";
}

TraceRow beta_row(const std::string& method, long step, const BetaState& s,
                  const UpdateDiagnostics* diag) {
  TraceRow r;
  r.method = method;
  r.n = step;
  r.params = {s.a, s.b};
  r.e = s.mean();
  r.v = s.variance();
  r.l = s.mass();
  if (diag) {
    r.w1 = diag->w1;
    r.epsilon = diag->epsilon;
    r.mass_increment = diag->mass_increment;
  }
  return r;
}

[[noreturn]] void rethrow_with_context(const std::string& method, long step,
                                       const std::exception& e) {
  throw std::runtime_error("method " + method + ", step " + std::to_string(step) + ": " +
                           e.what());
}

}  // namespace

std::string method_name(Method m) {
  switch (m) {
    case Method::kAdf: return "adf";
    case Method::kQuasiBayes: return "qb";
    case Method::kPe: return "pe";
    case Method::kKl: return "kl";
    case Method::kVb: return "vb";
    case Method::kConfirmed: return "confirmed";
    case Method::kEp: return "ep";
    case Method::kDirichletPe: return "dirichlet-pe";
  }
  throw std::logic_error("unreachable method enum");
}

Method method_from_name(const std::string& name) {
  if (name == "adf") return Method::kAdf;
  if (name == "qb") return Method::kQuasiBayes;
  if (name == "pe") return Method::kPe;
  if (name == "kl") return Method::kKl;
  if (name == "vb") return Method::kVb;
  if (name == "confirmed") return Method::kConfirmed;
  if (name == "ep") return Method::kEp;
  if (name == "dirichlet-pe") return Method::kDirichletPe;
  throw std::invalid_argument("unknown method: " + name);
}

TraceFormat trace_format_from_name(const std::string& name) {
  if (name == "csv") return TraceFormat::kCsv;
  if (name == "json") return TraceFormat::kJson;
  throw std::invalid_argument("unknown trace format: " + name);
}

namespace {

ModelConfig parse_model_config(const nlohmann::json& model) {
  const std::string type = model.at("type").get<std::string>();
  if (type == "known-pair") {
    PairModelConfig pm{{parse_density(model.at("f1")), parse_density(model.at("f2"))},
                       model.at("beta").get<double>()};
    if (!(pm.beta >= 0.0 && pm.beta <= 1.0)) {
      throw std::invalid_argument("config: beta must lie in [0,1]");
    }
    return pm;
  }
  if (type == "known-set") {
    std::vector<KnownDensity> ds;
    for (const auto& d : model.at("densities")) ds.push_back(parse_density(d));
    SetModelConfig sm{KnownDensitySet(std::move(ds)),
                      model.at("weights").get<std::vector<double>>()};
    if (sm.weights.size() != sm.set.size()) {
      throw std::invalid_argument("config: weights must match the number of densities");
    }
    double total = 0;
    for (double w : sm.weights) {
      if (!(w >= 0.0)) throw std::invalid_argument("config: weights must be nonnegative");
      total += w;
    }
    if (std::fabs(total - 1.0) > 1e-12) {
      throw std::invalid_argument("config: weights must sum to 1");
    }
    return sm;
  }
  if (type == "mean-mixture") {
    MeanModelConfig mm = [&] {
      if (model.contains("preset")) {
        const std::string preset = model.at("preset").get<std::string>();
        if (preset == "symmetric") return MeanModelConfig{symmetric_model(), 0.0};
        if (preset == "clutter") {
          return MeanModelConfig{clutter_model(model.value("clutter_weight", 0.5)), 0.0};
        }
        throw std::invalid_argument("unknown mean-mixture preset: " + preset);
      }
      std::vector<MeanMixtureComponent> comps;
      for (const auto& c : model.at("components")) {
        comps.push_back({c.at("c").get<double>(), c.at("sigma").get<double>(),
                         c.at("weight").get<double>()});
      }
      return MeanModelConfig{MeanMixtureModel(std::move(comps)), 0.0};
    }();
    mm.mu = model.at("mu").get<double>();
    return mm;
  }
  throw std::invalid_argument("unknown model type: " + type);
}

}  // namespace

ExperimentConfig parse_config(const nlohmann::json& doc) {
  ExperimentConfig cfg(parse_model_config(doc.at("model")));
  cfg.raw = doc;
  cfg.schema = doc.value("schema", 1);
  if (cfg.schema != 1) throw std::invalid_argument("unsupported config schema version");
  cfg.seed = doc.value("seed", std::uint64_t{0});
  cfg.n = doc.value("n", long{1});
  if (cfg.n < 1) throw std::invalid_argument("config: n must be >= 1");

  if (doc.contains("prior")) {
    const auto& prior = doc.at("prior");
    if (prior.contains("alpha")) {
      cfg.dirichlet_prior = prior.at("alpha").get<std::vector<double>>();
    } else if (prior.contains("mean") || prior.contains("variance")) {
      cfg.gaussian_prior = {prior.at("mean").get<double>(), prior.at("variance").get<double>()};
    } else {
      cfg.beta_prior = {prior.at("a").get<double>(), prior.at("b").get<double>()};
    }
  }
  if (const auto* sm = std::get_if<SetModelConfig>(&cfg.model)) {
    if (cfg.dirichlet_prior.empty()) cfg.dirichlet_prior.assign(sm->set.size(), 1.0);
    if (cfg.dirichlet_prior.size() != sm->set.size()) {
      throw std::invalid_argument("config: prior alpha must match the number of densities");
    }
  }

  if (doc.contains("methods")) {
    for (const auto& m : doc.at("methods")) cfg.methods.push_back(method_from_name(m));
  } else if (std::holds_alternative<PairModelConfig>(cfg.model)) {
    cfg.methods = {Method::kQuasiBayes, Method::kPe, Method::kKl, Method::kVb};
  } else if (std::holds_alternative<MeanModelConfig>(cfg.model)) {
    cfg.methods = {Method::kAdf};
  } else {
    cfg.methods = {Method::kDirichletPe};
  }

  for (Method m : cfg.methods) {
    const bool ok =
        std::visit([&](const auto& mc) {
          using T = std::decay_t<decltype(mc)>;
          if constexpr (std::is_same_v<T, PairModelConfig>) {
            return m == Method::kQuasiBayes || m == Method::kPe || m == Method::kKl ||
                   m == Method::kVb || m == Method::kConfirmed || m == Method::kEp;
          } else if constexpr (std::is_same_v<T, MeanModelConfig>) {
            if (m == Method::kAdf) return true;
            if (m == Method::kQuasiBayes || m == Method::kConfirmed) {
              return is_symmetric_model(mc.model);
            }
            return false;
          } else {
            return m == Method::kDirichletPe || m == Method::kQuasiBayes;
          }
        }, cfg.model);
    if (!ok) {
      throw std::invalid_argument("config: method " + method_name(m) +
                                  " is not compatible with the model");
    }
  }

  if (doc.contains("oracle")) {
    const auto& oc = doc.at("oracle");
    cfg.oracle.grid = oc.value("grid", true);
    cfg.oracle.enumeration_limit = oc.value("enumeration_limit", 0);
    cfg.oracle.information = oc.value("information", true);
  }
  if (doc.contains("ep")) {
    const auto& ec = doc.at("ep");
    cfg.ep.max_sweeps = ec.value("max_sweeps", 50);
    cfg.ep.tolerance = ec.value("tolerance", 1e-10);
    cfg.ep.rule = ec.value("rule", std::string("both"));
    if (cfg.ep.rule != "both" && cfg.ep.rule != "moment-match" && cfg.ep.rule != "kl") {
      throw std::invalid_argument("config: ep.rule must be moment-match, kl or both");
    }
  }
  if (doc.contains("output")) {
    const auto& oc = doc.at("output");
    cfg.output_dir = oc.value("dir", std::string());
    cfg.output_format = oc.value("format", std::string("csv"));
    trace_format_from_name(cfg.output_format);  // validate
  }
  return cfg;
}

ExperimentConfig load_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open config file: " + path);
  nlohmann::json doc;
  in >> doc;
  return parse_config(doc);
}

SimulatedData simulate(const ExperimentConfig& config) {
  Rng rng = Rng::substream(config.seed, 0);
  SimulatedData out;
  out.x.reserve(config.n);
  out.z.reserve(config.n);
  std::visit(
      [&](const auto& mc) {
        using T = std::decay_t<decltype(mc)>;
        if constexpr (std::is_same_v<T, PairModelConfig>) {
          const double w[2] = {mc.beta, 1.0 - mc.beta};
          for (long i = 0; i < config.n; ++i) {
            const std::size_t j = rng.pick(w);
            out.z.push_back(static_cast<int>(j) + 1);
            out.x.push_back((j == 0 ? mc.pair.f1 : mc.pair.f2).sample(rng));
          }
        } else if constexpr (std::is_same_v<T, SetModelConfig>) {
          for (long i = 0; i < config.n; ++i) {
            const std::size_t j = rng.pick(mc.weights);
            out.z.push_back(static_cast<int>(j) + 1);
            out.x.push_back(mc.set[j].sample(rng));
          }
        } else {
          std::vector<double> w;
          for (const auto& c : mc.model.components()) w.push_back(c.v);
          for (long i = 0; i < config.n; ++i) {
            const std::size_t j = rng.pick(w);
            const auto& c = mc.model[j];
            out.z.push_back(static_cast<int>(j) + 1);
            out.x.push_back(c.c * mc.mu + c.sigma * rng.normal());
          }
        }
      },
      config.model);
  return out;
}

std::string simulate_csv(const ExperimentConfig& config) {
  return render_simulated(config, TraceFormat::kCsv);
}

std::string render_simulated(const ExperimentConfig& config, TraceFormat format) {
  const SimulatedData data = simulate(config);
  if (format == TraceFormat::kJson) {
    nlohmann::json rows = nlohmann::json::array();
    for (std::size_t i = 0; i < data.x.size(); ++i) {
      rows.push_back({{"i", i}, {"x", data.x[i]}, {"z", data.z[i]}});
    }
    return rows.dump(2) + "\n";
  }
  std::ostringstream os;
  os << "i,x,z\n";
  for (std::size_t i = 0; i < data.x.size(); ++i) {
    os << i << ',' << fmt_g(data.x[i]) << ',' << data.z[i] << '\n';
  }
  return os.str();
}

namespace {

void run_beta_methods(const ExperimentConfig& config, const PairModelConfig& pm,
                      const SimulatedData& data, std::vector<TraceRow>& rows,
                      nlohmann::json& methods_summary) {
  for (Method m : config.methods) {
    const std::string name = method_name(m);
    if (m == Method::kEp) {
      for (const std::string rule : {"moment-match", "kl"}) {
        if (config.ep.rule != "both" && config.ep.rule != rule) continue;
        const std::string label = "ep-" + rule;
        try {
          const EpFitResult fit = ep_fit(
              pm.pair, config.beta_prior, data.x,
              rule == std::string("moment-match") ? BetaUpdateRule::kMomentMatch
                                                  : BetaUpdateRule::kKl,
              config.ep.max_sweeps, config.ep.tolerance);
          TraceRow r = beta_row(label, fit.sweeps_used, fit.state, nullptr);
          rows.push_back(r);
          methods_summary[label] = {
              {"a", fit.state.a},       {"b", fit.state.b},
              {"E", fit.state.mean()},  {"V", fit.state.variance()},
              {"L", fit.state.mass()},  {"nV", config.n * fit.state.variance()},
              {"sweeps_used", fit.sweeps_used}, {"converged", fit.converged},
              {"cavity_skips", fit.cavity_skips}};
        } catch (const std::exception& e) {
          rethrow_with_context(label, 0, e);
        }
      }
      continue;
    }

    BetaState state = config.beta_prior;
    for (long i = 0; i < config.n; ++i) {
      try {
        if (m == Method::kConfirmed) {
          state = confirmed_update(state, data.z[i]);
          TraceRow r = beta_row(name, i + 1, state, nullptr);
          r.w1 = data.z[i] == 1 ? 1.0 : 0.0;
          r.mass_increment = 1.0;
          rows.push_back(r);
        } else {
          std::pair<BetaState, UpdateDiagnostics> step = [&] {
            switch (m) {
              case Method::kQuasiBayes: return quasi_bayes_update(pm.pair, state, data.x[i]);
              case Method::kPe: return pe_update(pm.pair, state, data.x[i]);
              case Method::kKl: return kl_update(pm.pair, state, data.x[i]);
              case Method::kVb: return vb_recursive_update(pm.pair, state, data.x[i]);
              default: throw std::logic_error("unexpected beta method");
            }
          }();
          state = step.first;
          rows.push_back(beta_row(name, i + 1, state, &step.second));
        }
      } catch (const std::exception& e) {
        rethrow_with_context(name, i + 1, e);
      }
    }
    methods_summary[name] = {{"a", state.a},          {"b", state.b},
                             {"E", state.mean()},     {"V", state.variance()},
                             {"L", state.mass()},     {"nV", config.n * state.variance()}};
  }
}

void run_mean_methods(const ExperimentConfig& config, const MeanModelConfig& mm,
                      const SimulatedData& data, std::vector<TraceRow>& rows,
                      nlohmann::json& methods_summary) {
  for (Method m : config.methods) {
    const std::string name = method_name(m);
    GaussianState state = config.gaussian_prior;
    CountedGaussianState counted{config.gaussian_prior, 0};
    for (long i = 0; i < config.n; ++i) {
      try {
        TraceRow r;
        r.method = name;
        r.n = i + 1;
        if (m == Method::kAdf) {
          const auto post = component_posteriors(mm.model, state, data.x[i]);
          const GaussianState next = adf_update(mm.model, state, data.x[i]);
          r.w1 = post.front().w;
          r.mass_increment = 1.0 / next.b - 1.0 / state.b;
          state = next;
        } else if (m == Method::kQuasiBayes) {
          const CountedGaussianState next = quasi_bayes_update(mm.model, counted, data.x[i]);
          // Plug-in responsibility of the N(-a,1) component (symmetric model).
          r.w1 = 1.0 / (1.0 + std::exp(2.0 * counted.state.a * data.x[i]));
          r.mass_increment = 1.0 / next.state.b - 1.0 / counted.state.b;
          counted = next;
          state = next.state;
        } else {  // confirmed
          const CountedGaussianState next = confirmed_update(counted, data.x[i], data.z[i]);
          r.w1 = data.z[i] == 1 ? 1.0 : 0.0;
          r.mass_increment = 1.0 / next.state.b - 1.0 / counted.state.b;
          counted = next;
          state = next.state;
        }
        r.params = {state.a, state.b};
        r.e = state.a;
        r.v = state.b;
        r.l = 1.0 / state.b;
        rows.push_back(r);
      } catch (const std::exception& e) {
        rethrow_with_context(name, i + 1, e);
      }
    }
    methods_summary[name] = {{"a", state.a}, {"b", state.b},       {"E", state.a},
                             {"V", state.b}, {"L", 1.0 / state.b}, {"nV", config.n * state.b}};
  }
}

void run_dirichlet_methods(const ExperimentConfig& config, const SetModelConfig& sm,
                           const SimulatedData& data, std::vector<TraceRow>& rows,
                           nlohmann::json& methods_summary) {
  for (Method m : config.methods) {
    const std::string name = method_name(m);
    DirichletState state{config.dirichlet_prior};
    for (long i = 0; i < config.n; ++i) {
      try {
        const double mass_before = state.mass();
        const auto w = dir_responsibilities(sm.set, state, data.x[i]);
        state = m == Method::kDirichletPe ? dir_pe_update(sm.set, state, data.x[i])
                                          : dir_quasi_bayes_update(sm.set, state, data.x[i]);
        TraceRow r;
        r.method = name;
        r.n = i + 1;
        r.params = state.a;
        const double mass = state.mass();
        const double e1 = state.a[0] / mass;
        r.e = e1;
        r.v = e1 * (1.0 - e1) / (mass + 1.0);
        r.l = mass;
        r.w1 = w[0];
        r.epsilon = w[0] * (1.0 - w[0]) / (e1 * (1.0 - e1));
        r.mass_increment = mass - mass_before;
        rows.push_back(r);
      } catch (const std::exception& e) {
        rethrow_with_context(name, i + 1, e);
      }
    }
    const double mass = state.mass();
    const double e1 = state.a[0] / mass;
    methods_summary[name] = {{"alpha", state.a},
                             {"E", e1},
                             {"V", e1 * (1.0 - e1) / (mass + 1.0)},
                             {"L", mass}};
  }
}

nlohmann::json oracle_section_pair(const ExperimentConfig& config, const PairModelConfig& pm,
                                   const SimulatedData& data) {
  nlohmann::json oc;
  if (config.oracle.grid) {
    const auto g = oracle::grid_beta_posterior(pm.pair, config.beta_prior, data.x);
    oc["grid"] = {{"mean", g.mean}, {"variance", g.variance}, {"log_normalizer", g.log_normalizer}};
  }
  if (config.oracle.enumeration_limit > 0 &&
      config.n <= config.oracle.enumeration_limit) {
    const auto e =
        oracle::exact_beta_posterior(pm.pair, config.beta_prior, data.x,
                                     config.oracle.enumeration_limit);
    oc["enumeration"] = {{"mean", e.summary.mean},
                         {"variance", e.summary.variance},
                         {"log_normalizer", e.summary.log_normalizer},
                         {"components", e.mixture.size()}};
  }
  if (config.oracle.information && pm.beta > 0.0 && pm.beta < 1.0) {
    const AsymptoticVariances av = asymptotic_variances(pm.pair, pm.beta, config.n);
    nlohmann::json pred{{"v_confirmed", av.v_confirmed},
                        {"v_quasi_bayes", av.v_quasi_bayes},
                        {"v_variational", av.v_variational},
                        {"zero_information", av.zero_information}};
    if (av.v_ml) pred["v_ml"] = *av.v_ml;
    if (av.v_pe) pred["v_pe"] = *av.v_pe;
    oc["predicted"] = pred;
    if (!av.zero_information) {
      oc["fisher_information"] = oracle::fisher_information_beta(pm.pair, pm.beta);
      oc["pe_information"] = oracle::pe_information_beta(pm.pair, pm.beta);
    }
  }
  return oc;
}

nlohmann::json oracle_section_mean(const ExperimentConfig& config, const MeanModelConfig& mm,
                                   const SimulatedData& data) {
  nlohmann::json oc;
  if (config.oracle.grid) {
    const auto g = oracle::grid_mu_posterior(mm.model, config.gaussian_prior, data.x);
    oc["grid"] = {{"mean", g.mean}, {"variance", g.variance}, {"log_normalizer", g.log_normalizer}};
  }
  if (config.oracle.information) {
    const double info = oracle::fisher_information_mu(mm.model, mm.mu);
    oc["fisher_information"] = info;
    if (info > 0.0) oc["predicted"] = {{"v_ml", 1.0 / (config.n * info)}};
  }
  return oc;
}

}  // namespace

RunResult run(const ExperimentConfig& config, TraceFormat format) {
  const SimulatedData data = simulate(config);
  std::vector<TraceRow> rows;
  nlohmann::json methods_summary = nlohmann::json::object();
  nlohmann::json oracle_summary = nlohmann::json::object();
  std::size_t param_count = 2;

  std::visit(
      [&](const auto& mc) {
        using T = std::decay_t<decltype(mc)>;
        if constexpr (std::is_same_v<T, PairModelConfig>) {
          run_beta_methods(config, mc, data, rows, methods_summary);
          oracle_summary = oracle_section_pair(config, mc, data);
        } else if constexpr (std::is_same_v<T, MeanModelConfig>) {
          run_mean_methods(config, mc, data, rows, methods_summary);
          oracle_summary = oracle_section_mean(config, mc, data);
        } else {
          param_count = mc.set.size();
          run_dirichlet_methods(config, mc, data, rows, methods_summary);
        }
      },
      config.model);

  // n * V * I ratios: near 1 when a method attains the information bound.
  if (oracle_summary.contains("fisher_information")) {
    const double info = oracle_summary["fisher_information"].get<double>();
    if (info > 0.0) {
      for (auto& [name, entry] : methods_summary.items()) {
        if (entry.contains("nV")) {
          entry["nV_times_information"] = entry["nV"].get<double>() * info;
        }
      }
    }
  }

  RunResult out;
  out.trace = format == TraceFormat::kCsv ? render_csv(rows, param_count) : render_json(rows);
  out.summary = {{"schema", config.schema},
                 {"seed", config.seed},
                 {"n", config.n},
                 {"config", config.raw},
                 {"methods", methods_summary},
                 {"oracle", oracle_summary}};
  return out;
}

nlohmann::json run_to_files(const ExperimentConfig& config, const std::string& out_dir,
                            TraceFormat format) {
  const RunResult res = run(config, format);
  std::filesystem::create_directories(out_dir);
  const std::string trace_name = format == TraceFormat::kCsv ? "trace.csv" : "trace.json";
  {
    std::ofstream trace(std::filesystem::path(out_dir) / trace_name, std::ios::binary);
    if (!trace) throw std::runtime_error("cannot write trace file in " + out_dir);
    trace << res.trace;
  }
  {
    std::ofstream summary(std::filesystem::path(out_dir) / "summary.json", std::ios::binary);
    if (!summary) throw std::runtime_error("cannot write summary file in " + out_dir);
    summary << res.summary.dump(2) << '\n';
  }
  return res.summary;
}

nlohmann::json check_lemma(const nlohmann::json& doc) {
  std::vector<double> betas;
  if (doc.contains("betas")) {
    betas = doc.at("betas").get<std::vector<double>>();
  } else {
    for (int i = 1; i <= 9; ++i) betas.push_back(0.1 * i);
  }
  std::vector<KnownDensityPair> pairs;
  if (doc.contains("pairs")) {
    for (const auto& p : doc.at("pairs")) {
      pairs.push_back({parse_density(p.at("f1")), parse_density(p.at("f2"))});
    }
  } else {
    pairs.push_back({GaussianDensity{0.0, 1.0}, GaussianDensity{1.0, 1.0}});
    pairs.push_back({GaussianDensity{0.0, 1.0}, GaussianDensity{2.0, 1.5}});
    pairs.push_back({GaussianDensity{-1.0, 0.7}, GaussianDensity{1.0, 1.3}});
  }

  nlohmann::json cases = nlohmann::json::array();
  double max_violation = 0.0;
  for (std::size_t p = 0; p < pairs.size(); ++p) {
    for (double beta : betas) {
      const double lhs = oracle::pe_information_beta(pairs[p], beta);
      const double rhs = oracle::fisher_information_beta(pairs[p], beta);
      const bool exact_zero = std::fabs(lhs) < 1e-9 && std::fabs(rhs) < 1e-9;
      const double violation =
          exact_zero ? 0.0 : std::fabs(lhs - rhs) / std::max(std::fabs(rhs), 1e-12);
      max_violation = std::max(max_violation, violation);
      cases.push_back({{"pair", p},
                       {"beta", beta},
                       {"averaged_mass_route", lhs},
                       {"fisher_route", rhs},
                       {"relative_violation", violation},
                       {"exact_zero", exact_zero}});
    }
  }
  return {{"cases", cases}, {"max_relative_violation", max_violation}};
}

nlohmann::json ep_fit_report(const ExperimentConfig& config) {
  const auto* pm = std::get_if<PairModelConfig>(&config.model);
  if (!pm) throw std::invalid_argument("ep-fit requires a known-pair model");
  const SimulatedData data = simulate(config);

  nlohmann::json rules = nlohmann::json::object();
  for (const std::string rule : {"moment-match", "kl"}) {
    if (config.ep.rule != "both" && config.ep.rule != rule) continue;
    const EpFitResult fit = ep_fit(pm->pair, config.beta_prior, data.x,
                                   rule == std::string("moment-match")
                                       ? BetaUpdateRule::kMomentMatch
                                       : BetaUpdateRule::kKl,
                                   config.ep.max_sweeps, config.ep.tolerance);
    nlohmann::json sites = nlohmann::json::array();
    for (const auto& s : fit.sites) sites.push_back({{"da", s.da}, {"db", s.db}});
    rules[rule] = {{"a", fit.state.a},
                   {"b", fit.state.b},
                   {"E", fit.state.mean()},
                   {"V", fit.state.variance()},
                   {"L", fit.state.mass()},
                   {"sweeps_used", fit.sweeps_used},
                   {"converged", fit.converged},
                   {"cavity_skips", fit.cavity_skips},
                   {"sites", sites}};
  }
  return {{"seed", config.seed}, {"n", config.n}, {"rules", rules}};
}

nlohmann::json oracle_report(const ExperimentConfig& config) {
  const SimulatedData data = simulate(config);
  nlohmann::json out{{"seed", config.seed}, {"n", config.n}};
  std::visit(
      [&](const auto& mc) {
        using T = std::decay_t<decltype(mc)>;
        if constexpr (std::is_same_v<T, PairModelConfig>) {
          out["oracle"] = oracle_section_pair(config, mc, data);
        } else if constexpr (std::is_same_v<T, MeanModelConfig>) {
          out["oracle"] = oracle_section_mean(config, mc, data);
        } else {
          out["oracle"] = nlohmann::json::object();
          out["note"] = "no oracle quantities are defined for the known-set model";
        }
      },
      config.model);
  return out;
}

}  // namespace mixfilt::harness
