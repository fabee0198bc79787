#pragma once

#include "qbeat/analytic.hpp"
#include "qbeat/composite.hpp"
#include "qbeat/scenario.hpp"
#include "qbeat/time_series.hpp"

#include <filesystem>
#include <iosfwd>
#include <limits>
#include <optional>
#include <string>
#include <vector>

namespace qbeat {

enum ExitCode : int {
  kExitOk = 0,
  kExitValidation = 2,
  kExitIntegration = 3,
  kExitAcceptance = 4,
};

struct RunOptions {
  std::filesystem::path out_dir = ".";
  std::optional<double> rel_tol;
  std::optional<double> abs_tol;
  /// Reference decay rate in Hz; when set the time column is written in
  /// seconds. Everything else stays in kappa units.
  std::optional<double> kappa_hz;
  /// Worker threads for sweeps; 0 picks the hardware concurrency.
  unsigned threads = 0;
};

/// One sampled row of atomic observables. `rho_12` is absent for analytic
/// runs, which only produce populations.
struct ObservableRow {
  double t = 0.0;
  double rho_ee = 0.0;
  double rho_11 = 0.0;
  double rho_22 = 0.0;
  double rho_gg = 0.0;
  std::optional<Complex> rho_12;
};

struct BeatReport {
  std::optional<BeatPrediction> predicted;  ///< symmetric tuning only
  std::optional<double> measured_two_f;
  std::string diagnostic;
};

struct RunSummary {
  std::string name;
  ScenarioMode mode = ScenarioMode::kReduced;
  double eta = 1.0;
  RateSet rates;
  BeatReport beat;
  double max_abs_rho_12 = 0.0;
  double min_rho_gg_slope = 0.0;
  double max_trace_error = 0.0;
  double min_eigenvalue = 0.0;
  int samples_written = 0;
  bool complete = true;
  std::optional<std::string> failure;
  std::vector<std::string> warnings;
};

struct RunResult {
  std::vector<ObservableRow> rows;
  RunSummary summary;
};

/// Runs a reduced, composite or analytic scenario in memory. Integration
/// failures are reported through `summary.complete`; validation problems
/// throw.
RunResult simulate(const Scenario& scenario, const RunOptions& opts = {});

/// Frequency of the population beats of a symmetric eta = 1 scenario
/// starting from |e>, measured on a reduced run long enough to hold several
/// beat periods.
BeatReport beat_report(const Scenario& scenario, const IntegratorConfig& cfg);

/// Largest drop rate of rho_gg: min over neighbouring samples of the
/// discrete slope, restricted to [t_from, t_to].
double min_slope(const std::vector<ObservableRow>& rows, double t_from = 0.0,
                 double t_to = std::numeric_limits<double>::infinity());

void write_csv(std::ostream& os, const RunResult& result, std::optional<double> kappa_hz = std::nullopt);
std::string summary_json(const RunSummary& summary);

/// Scenario with the command-line tolerance overrides applied.
Scenario apply_overrides(Scenario scenario, const RunOptions& opts);

/// `run`: writes <name>.csv and <name>.summary.json into opts.out_dir.
int run_scenario(const Scenario& scenario, const RunOptions& opts, std::ostream& log);

/// `sweep`: one run per value, evaluated in parallel and written in value
/// order, plus <name>_<param>_sweep.csv and .summary.json. Failed points
/// are recorded and the sweep carries on.
int run_sweep(const Scenario& base, const std::string& parameter, const std::vector<double>& values,
              const RunOptions& opts, std::ostream& log);

/// `preset`: the built-in Omega family at one eta, or at both when unset.
int run_preset(const std::string& name, std::optional<double> eta, const RunOptions& opts,
               std::ostream& log);

/// `validate`: composite-vs-reduced comparison over the coupling values
/// (scenario.g_values when `g_values` is empty). Writes
/// <name>.validation.json; returns kExitAcceptance if the check fails.
int run_validate(const Scenario& scenario, const std::vector<double>& g_values, const RunOptions& opts,
                 std::ostream& log);

EliminationCase elimination_case(const Scenario& scenario);

}  // namespace qbeat
