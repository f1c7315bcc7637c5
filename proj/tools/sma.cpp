// Command-line front end: run, sweep, validate and oracle checks.
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "sma/config.hpp"
#include "sma/driver.hpp"
#include "sma/verification.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

enum ExitCode { kOk = 0, kFailure = 1, kConfigError = 2, kNonConvergence = 3 };

json residuals_of(const sma::StepReport& r) {
  return {{"phi_lambda", r.lambda.residual},
          {"phi_alpha", r.alpha.residual},
          {"phi_pl", r.plastic.residual},
          {"alpha_constraint", r.alpha_constraint},
          {"lambda_iterations", r.lambda.iterations},
          {"alpha_iterations", r.alpha.iterations},
          {"plastic_iterations", r.plastic.iterations},
          {"outer_passes", r.outer_passes}};
}

int report_error(int code, const std::string& message, json increment = nullptr, json residuals = nullptr) {
  const json envelope{{"code", code}, {"message", message}, {"increment", increment}, {"residuals", residuals}};
  std::cerr << envelope.dump() << '\n';
  return code;
}

fs::path default_output(const sma::RunConfig& cfg, const fs::path& config_path) {
  if (!cfg.output.empty()) return config_path.parent_path() / cfg.output;
  return fs::path(config_path).replace_extension(".csv");
}

std::vector<int> parse_counts(const std::string& list) {
  std::vector<int> counts;
  std::istringstream in(list);
  for (std::string item; std::getline(in, item, ',');) {
    std::size_t used = 0;
    const int n = std::stoi(item, &used);
    if (used != item.size() || n <= 0) throw sma::ConfigError("bad increment count '" + item + "'", "increments", 0);
    counts.push_back(n);
  }
  if (counts.empty()) throw sma::ConfigError("no increment counts given", "increments", 0);
  return counts;
}

int cmd_run(const fs::path& config_path, const std::string& output) {
  const sma::RunConfig cfg = sma::load_config(config_path);
  const fs::path out = output.empty() ? default_output(cfg, config_path) : fs::path(output);
  const sma::Trace trace = sma::run_path(cfg);
  sma::write_csv(out, trace);
  std::printf("%s: %zu rows, peak stress %.6g MPa\n", out.string().c_str(), trace.rows.size(), trace.peak_stress());
  return kOk;
}

int cmd_sweep(const fs::path& config_path, const std::string& counts, const std::string& output_dir) {
  const sma::RunConfig cfg = sma::load_config(config_path);
  const sma::SweepResult result = sma::sweep(cfg, parse_counts(counts));
  const fs::path dir = output_dir.empty() ? config_path.parent_path() : fs::path(output_dir);
  if (!dir.empty()) fs::create_directories(dir);
  const std::string stem = config_path.stem().string();

  json summary{{"reference", result.reference}, {"peak_stress", result.peak_stress}, {"levels", json::array()}};
  for (const sma::SweepLevel& level : result.levels) {
    const fs::path out = dir / (stem + "_" + std::to_string(level.increments) + ".csv");
    sma::write_csv(out, level.trace);
    const double rel = result.peak_stress > 0.0 ? level.max_deviation / result.peak_stress : 0.0;
    std::printf("%6d increments  max deviation %.6g MPa  (%.4f %% of peak)  %s\n", level.increments,
                level.max_deviation, 100.0 * rel, out.string().c_str());
    summary["levels"].push_back({{"increments", level.increments},
                                 {"max_deviation", level.max_deviation},
                                 {"relative_to_peak", rel},
                                 {"csv", out.string()}});
  }
  std::ofstream(dir / (stem + "_sweep.json")) << summary.dump(2) << '\n';
  return kOk;
}

int cmd_validate(const fs::path& config_path) {
  const sma::RunConfig cfg = sma::load_config(config_path);
  int increments = 0;
  for (const auto& step : cfg.steps) increments += step.increments;
  std::printf("%s: ok (%zu steps, %d increments)\n", config_path.string().c_str(), cfg.steps.size(), increments);
  return kOk;
}

int cmd_check(std::uint64_t seed, int samples) {
  const sma::OracleReport gradients = sma::fd_gradient_check(samples, seed);
  const sma::OracleReport domain = sma::elastic_domain_check(samples, seed);
  std::cout << json::array({gradients.to_json(), domain.to_json()}).dump(2) << '\n';
  return gradients.pass() && domain.pass() ? kOk : kFailure;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Shape memory alloy material-point driver"};
  app.require_subcommand(1);

  std::string config, output, counts = "200,400,800,1000";
  std::uint64_t seed = 42;
  int samples = 200;

  auto* run = app.add_subcommand("run", "Run a load path and write its CSV trace");
  run->add_option("config", config, "Path configuration")->required()->check(CLI::ExistingFile);
  run->add_option("-o,--output", output, "CSV file (default: config 'output' or <config>.csv)");

  auto* sweep = app.add_subcommand("sweep", "Run a path at several total increment counts");
  sweep->add_option("config", config, "Path configuration")->required()->check(CLI::ExistingFile);
  sweep->add_option("--increments", counts, "Comma-separated total increment counts")->capture_default_str();
  sweep->add_option("-o,--output", output, "Output directory (default: next to the config)");

  auto* validate = app.add_subcommand("validate", "Parse and validate a configuration");
  validate->add_option("config", config, "Path configuration")->required()->check(CLI::ExistingFile);

  auto* check = app.add_subcommand("check-gradients", "Finite-difference and elastic-domain oracles");
  check->add_option("--seed", seed, "Sample seed")->capture_default_str();
  check->add_option("--samples", samples, "Number of sampled states")->capture_default_str()->check(
      CLI::PositiveNumber);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? kOk : kConfigError;
  }

  try {
    if (*run) return cmd_run(config, output);
    if (*sweep) return cmd_sweep(config, counts, output);
    if (*validate) return cmd_validate(config);
    return cmd_check(seed, samples);
  } catch (const sma::ConfigError& e) {
    std::ostringstream msg;
    msg << e.what();
    if (!e.key().empty()) msg << " (key '" << e.key() << "'";
    if (e.line() > 0) msg << (e.key().empty() ? " (" : ", ") << "line " << e.line();
    if (!e.key().empty() || e.line() > 0) msg << ')';
    return report_error(kConfigError, msg.str());
  } catch (const sma::PathError& e) {
    const int code = e.kind() == sma::PathError::Kind::Other ? kFailure : kNonConvergence;
    return report_error(code, e.what(), e.increment(), residuals_of(e.report()));
  } catch (const sma::ConvergenceError& e) {
    return report_error(kNonConvergence, e.what(), nullptr, residuals_of(e.report()));
  } catch (const std::exception& e) {
    return report_error(kFailure, e.what());
  }
}
