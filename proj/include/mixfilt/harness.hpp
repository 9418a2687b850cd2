#ifndef MIXFILT_HARNESS_HPP
#define MIXFILT_HARNESS_HPP

#include <cstdint>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "json.hpp"
#include "mixfilt/densities.hpp"
#include "mixfilt/dirichlet_filter.hpp"
#include "mixfilt/mean_mixture.hpp"
#include "mixfilt/weight_filter.hpp"

// Seeded simulation and experiment orchestration: every requested method is
// run over one simulated observation stream and the per-step states land in a
// trace (CSV or JSON) next to a JSON summary with terminal and oracle values.
namespace mixfilt::harness {

enum class Method { kAdf, kQuasiBayes, kPe, kKl, kVb, kConfirmed, kEp, kDirichletPe };

std::string method_name(Method m);
Method method_from_name(const std::string& name);

struct PairModelConfig {
  KnownDensityPair pair;
  double beta = 0.5;  // true first-component weight
};

struct SetModelConfig {
  KnownDensitySet set;
  std::vector<double> weights;  // true mixing weights
};

struct MeanModelConfig {
  MeanMixtureModel model;
  double mu = 0;  // true mean parameter
};

struct OracleOptions {
  bool grid = true;
  int enumeration_limit = 0;  // 0 disables the enumeration oracle
  bool information = true;
};

struct EpOptions {
  int max_sweeps = 50;
  double tolerance = 1e-10;
  std::string rule = "both";  // moment-match | kl | both
};

using ModelConfig = std::variant<PairModelConfig, SetModelConfig, MeanModelConfig>;

struct ExperimentConfig {
  explicit ExperimentConfig(ModelConfig m) : model(std::move(m)) {}

  int schema = 1;
  std::uint64_t seed = 0;
  long n = 1;
  ModelConfig model;
  BetaState beta_prior{1.0, 1.0};
  GaussianState gaussian_prior{0.0, 1.0};
  std::vector<double> dirichlet_prior;
  std::vector<Method> methods;
  OracleOptions oracle;
  EpOptions ep;
  std::string output_dir;            // optional default for run outputs
  std::string output_format = "csv";
  nlohmann::json raw;  // original document, echoed into the summary
};

ExperimentConfig parse_config(const nlohmann::json& doc);
ExperimentConfig load_config_file(const std::string& path);

struct SimulatedData {
  std::vector<double> x;
  std::vector<int> z;  // 1-based component labels
};

enum class TraceFormat { kCsv, kJson };
TraceFormat trace_format_from_name(const std::string& name);

// Ancestral sampling: component by weight, then a draw from the component.
// Identical config + seed gives identical output on every platform.
SimulatedData simulate(const ExperimentConfig& config);
std::string simulate_csv(const ExperimentConfig& config);
std::string render_simulated(const ExperimentConfig& config, TraceFormat format);

struct RunResult {
  std::string trace;         // rendered in the requested format
  nlohmann::json summary;
};

RunResult run(const ExperimentConfig& config, TraceFormat format = TraceFormat::kCsv);

// Writes <out_dir>/trace.{csv|json} and <out_dir>/summary.json.
nlohmann::json run_to_files(const ExperimentConfig& config, const std::string& out_dir,
                            TraceFormat format = TraceFormat::kCsv);

// Sweeps mixing weights and density pairs, comparing the two information
// routes; reports the per-case values and the maximum relative violation.
nlohmann::json check_lemma(const nlohmann::json& doc);

// Multi-pass EP on one simulated stream, for each configured update rule.
nlohmann::json ep_fit_report(const ExperimentConfig& config);

// Oracle-only view of a config: exact/grid posterior summaries and the
// information integrals, without running any recursive method.
nlohmann::json oracle_report(const ExperimentConfig& config);

}  // namespace mixfilt::harness

#endif
