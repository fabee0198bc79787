// Command-line front end: run, sweep, preset and validate.

#include "qbeat/errors.hpp"
#include "qbeat/runner.hpp"
#include "qbeat/scenario.hpp"

#include <CLI11.hpp>

#include <iostream>

int main(int argc, char** argv) {
  using namespace qbeat;

  CLI::App app{"Cavity-induced coherence and quantum beats in a four-level cascade atom"};
  app.require_subcommand(1);
  app.set_version_flag("--version", "qbeat 1.0");

  std::string out_dir = ".";
  std::optional<double> tol_rel, tol_abs, kappa_hz;
  std::optional<long> seed;
  unsigned threads = 0;
  app.add_option("--out-dir", out_dir, "Directory for CSV and summary files")->capture_default_str();
  app.add_option("--tol-rel", tol_rel, "Relative integration tolerance (overrides the scenario)");
  app.add_option("--tol-abs", tol_abs, "Absolute integration tolerance (overrides the scenario)");
  app.add_option("--kappa-hz", kappa_hz, "Reference decay rate in Hz; writes the time column in seconds")
      ->check(CLI::PositiveNumber);
  app.add_option("--seed", seed, "Reserved; all computations are deterministic");
  app.add_option("--threads", threads, "Worker threads for sweeps (0: all cores)");

  std::string scenario_path;
  auto* run = app.add_subcommand("run", "Run one scenario");
  run->add_option("scenario", scenario_path, "Scenario JSON file")->required();

  std::string param;
  std::vector<double> values;
  auto* sweep = app.add_subcommand("sweep", "Run a scenario for several values of one parameter");
  sweep->add_option("scenario", scenario_path, "Scenario JSON file")->required();
  sweep->add_option("--param", param, "Parameter name, e.g. Omega or cavity.kappa_a")->required();
  sweep->add_option("--values", values, "Comma-separated values")->required()->delimiter(',');

  std::string preset_name;
  std::optional<double> eta;
  auto* preset = app.add_subcommand("preset", "Reproduce a built-in figure parameter set");
  preset->add_option("name", preset_name, "fig3 or fig4")->required()->check(CLI::IsMember({"fig3", "fig4"}));
  preset->add_option("--eta", eta, "0 or 1 (both when omitted)")->check(CLI::IsMember({0.0, 1.0}));

  std::vector<double> g_values;
  auto* validate = app.add_subcommand("validate", "Compare composite and reduced dynamics over coupling values");
  validate->add_option("scenario", scenario_path, "Scenario JSON file")->required();
  validate->add_option("--g-values", g_values, "Comma-separated coupling magnitudes")->delimiter(',');

  // Global options may follow the subcommand.
  for (auto* sub : {run, sweep, preset, validate}) sub->fallthrough();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitValidation;
  }

  RunOptions opts;
  opts.out_dir = out_dir;
  opts.rel_tol = tol_rel;
  opts.abs_tol = tol_abs;
  opts.kappa_hz = kappa_hz;
  opts.threads = threads;

  try {
    if (*run) return run_scenario(load_scenario(scenario_path), opts, std::cout);
    if (*sweep) return run_sweep(load_scenario(scenario_path), param, values, opts, std::cout);
    if (*preset) return run_preset(preset_name, eta, opts, std::cout);
    if (*validate) return run_validate(load_scenario(scenario_path), g_values, opts, std::cout);
  } catch (const IntegrationError& e) {
    std::cerr << "integration error: " << e.what() << "\n";
    return kExitIntegration;
  } catch (const ValidationError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitValidation;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitValidation;
  }
  return kExitValidation;
}
