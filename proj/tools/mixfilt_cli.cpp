// Command-line front end; everything goes through the shared-library C API.

#include <cstdint>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>

#include "CLI11.hpp"
#include "mixfilt.h"

namespace {

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw CLI::ValidationError("--config", "cannot open " + path);
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

// Stderr gets a one-line machine-readable record on failure.
int report_failure(const std::string& command, int status) {
  std::string message = mixfilt_last_error();
  for (auto& c : message) {
    if (c == '"') c = '\'';
    if (c == '\n') c = ' ';
  }
  std::cerr << "{\"error\":{\"command\":\"" << command << "\",\"status\":" << status
            << ",\"message\":\"" << message << "\"}}\n";
  return 1;
}

// Appends a trailing top-level "seed" key; the library-side parser keeps the
// last occurrence of a duplicate key, so the override wins.
std::string with_overrides(std::string config, const std::optional<std::uint64_t>& seed) {
  if (!seed) return config;
  const auto open = config.find('{');
  const auto close = config.find_last_of('}');
  if (open == std::string::npos || close == std::string::npos || close <= open) return config;
  const bool empty_object =
      config.find_first_not_of(" \t\r\n", open + 1) == close;
  std::ostringstream patched;
  patched << config.substr(0, close) << (empty_object ? "" : ",") << "\"seed\":" << *seed << "}"
          << config.substr(close + 1);
  return patched.str();
}

void write_or_print(const std::string& text, const std::string& out_path) {
  if (out_path.empty()) {
    std::cout << text;
    if (!text.empty() && text.back() != '\n') std::cout << '\n';
    return;
  }
  std::ofstream out(out_path, std::ios::binary);
  if (!out) throw CLI::ValidationError("--out", "cannot write " + out_path);
  out << text;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Recursive approximate-Bayes filters for simple mixture models"};
  app.require_subcommand(1);

  std::string config_path;
  std::string out;
  std::string format = "csv";
  std::optional<std::uint64_t> seed;

  auto add_common = [&](CLI::App* cmd, bool needs_config = true) {
    auto* opt = cmd->add_option("--config", config_path, "JSON experiment config");
    if (needs_config) opt->required()->check(CLI::ExistingFile);
    cmd->add_option("--seed", seed, "override the config seed");
    return cmd;
  };

  auto* sim = add_common(app.add_subcommand("simulate", "emit the simulated data stream"));
  sim->add_option("--out", out, "output file (stdout when omitted)");
  sim->add_option("--format", format, "output format")->check(CLI::IsMember({"csv", "json"}));

  auto* run = add_common(app.add_subcommand("run", "run the configured methods and oracles"));
  run->add_option("--out", out, "output directory (falls back to the config's output.dir)");
  auto* run_format =
      run->add_option("--format", format, "trace format")->check(CLI::IsMember({"csv", "json"}));

  auto* orc = add_common(app.add_subcommand("oracle", "oracle-only report for a config"));
  orc->add_option("--out", out, "output file (stdout when omitted)");

  auto* lemma = app.add_subcommand("check-lemma", "compare the two information routes");
  lemma->add_option("--config", config_path, "optional sweep config")->check(CLI::ExistingFile);
  lemma->add_option("--out", out, "output file (stdout when omitted)");

  auto* ep = add_common(app.add_subcommand("ep-fit", "multi-pass EP fit on one stream"));
  ep->add_option("--out", out, "output file (stdout when omitted)");

  CLI11_PARSE(app, argc, argv);

  try {
    if (sim->parsed()) {
      const std::string cfg = with_overrides(read_file(config_path), seed);
      char* data = nullptr;
      if (int rc = mixfilt_simulate_json(cfg.c_str(), format.c_str(), &data)) {
        return report_failure("simulate", rc);
      }
      write_or_print(data, out);
      mixfilt_string_free(data);
    } else if (run->parsed()) {
      const std::string cfg = with_overrides(read_file(config_path), seed);
      char* summary = nullptr;
      const char* fmt = run_format->count() > 0 ? format.c_str() : nullptr;
      if (int rc = mixfilt_run_json(cfg.c_str(), out.c_str(), fmt, &summary)) {
        return report_failure("run", rc);
      }
      std::cout << summary << '\n';
      mixfilt_string_free(summary);
    } else if (orc->parsed()) {
      const std::string cfg = with_overrides(read_file(config_path), seed);
      char* report = nullptr;
      if (int rc = mixfilt_oracle_json(cfg.c_str(), &report)) return report_failure("oracle", rc);
      write_or_print(report, out);
      mixfilt_string_free(report);
    } else if (lemma->parsed()) {
      const std::string cfg = config_path.empty() ? "{}" : read_file(config_path);
      char* report = nullptr;
      if (int rc = mixfilt_check_lemma_json(cfg.c_str(), &report)) {
        return report_failure("check-lemma", rc);
      }
      write_or_print(report, out);
      mixfilt_string_free(report);
    } else if (ep->parsed()) {
      const std::string cfg = with_overrides(read_file(config_path), seed);
      char* report = nullptr;
      if (int rc = mixfilt_ep_fit_json(cfg.c_str(), &report)) return report_failure("ep-fit", rc);
      write_or_print(report, out);
      mixfilt_string_free(report);
    }
  } catch (const CLI::Error& e) {
    return app.exit(e);
  } catch (const std::exception& e) {
    std::cerr << "{\"error\":{\"command\":\"cli\",\"status\":-6,\"message\":\"" << e.what()
              << "\"}}\n";
    return 1;
  }
  return 0;
}
