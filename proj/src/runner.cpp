#include "qbeat/runner.hpp"

#include "qbeat/errors.hpp"
#include "qbeat/reduced.hpp"

#include <fmt/format.h>
#include <json.hpp>

#include <algorithm>
#include <atomic>
#include <cmath>
#include <fstream>
#include <ostream>
#include <thread>

namespace qbeat {

using ordered_json = nlohmann::ordered_json;

namespace {

Level named_level(const std::string& label) {
  if (label == "1") return Level::kOne;
  if (label == "2") return Level::kTwo;
  if (label == "g") return Level::kG;
  return Level::kE;
}

std::vector<ObservableRow> rows_from(const TimeSeries& ts) {
  std::vector<ObservableRow> rows;
  rows.reserve(ts.size());
  for (size_t i = 0; i < ts.size(); ++i) {
    const AtomObservables o = atom_observables(ts.states[i]);
    rows.push_back({ts.times[i], o.rho_ee, o.rho_11, o.rho_22, o.rho_gg, o.rho_12});
  }
  return rows;
}

ordered_json number_or_null(std::optional<double> v) {
  return v && std::isfinite(*v) ? ordered_json(*v) : ordered_json(nullptr);
}

std::ofstream open_output(const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw ValidationError(fmt::format("cannot write {}", path.string()), "out-dir");
  return out;
}

void write_file(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out = open_output(path);
  out << text;
}

void write_outputs(const RunResult& r, const RunOptions& opts, std::ostream& log) {
  const auto csv = opts.out_dir / (r.summary.name + ".csv");
  const auto summary = opts.out_dir / (r.summary.name + ".summary.json");
  {
    std::ofstream out = open_output(csv);
    write_csv(out, r, opts.kappa_hz);
  }
  write_file(summary, summary_json(r.summary));
  log << fmt::format("{}: wrote {} and {}{}\n", r.summary.name, csv.string(), summary.string(),
                     r.summary.complete ? "" : " (incomplete)");
  for (const auto& w : r.summary.warnings) log << fmt::format("{}: warning: {}\n", r.summary.name, w);
}

int code_for(const std::exception_ptr& e, std::string& message) {
  try {
    std::rethrow_exception(e);
  } catch (const IntegrationError& x) {
    message = x.what();
    return kExitIntegration;
  } catch (const std::exception& x) {
    message = x.what();
    return kExitValidation;
  }
}

}  // namespace

Scenario apply_overrides(Scenario scenario, const RunOptions& opts) {
  if (opts.rel_tol) scenario.integrator.rel_tol = *opts.rel_tol;
  if (opts.abs_tol) scenario.integrator.abs_tol = *opts.abs_tol;
  scenario.integrator.validate();
  return scenario;
}

BeatReport beat_report(const Scenario& s, const IntegratorConfig& cfg) {
  BeatReport report;
  const auto tuning = detect_symmetric(s.couplings, s.levels, s.cavity);
  if (!tuning) {
    report.diagnostic = "not the symmetric tuning; no closed-form prediction";
    return report;
  }
  const SymmetricParams p = SymmetricParams::from_tuning(*tuning);
  report.predicted = beat_frequency(p);
  if (s.eta != 1.0) {
    report.diagnostic = "interference terms off; not measured";
    return report;
  }
  if (s.initial_label != "e") {
    report.diagnostic = "measured only for runs starting in e";
    return report;
  }
  if (p.gamma == 0.0) {
    report.diagnostic = "no decay; not measured";
    return report;
  }

  // The beats of slow doublets can take many decay times to show, so the
  // measurement uses its own window. The small absolute tolerance keeps the
  // exponentially small tail accurate relative to itself.
  IntegratorConfig aux = cfg;
  aux.abs_tol = 1e-250;
  aux.rel_tol = std::min(cfg.rel_tol, 1e-10);
  aux.initial_step = 1e-4 / std::max(1.0, p.gamma);
  double t_end = s.t_end;
  int samples = std::max(s.samples, 2001);
  if (report.predicted->beats) {
    const double period = 2.0 * M_PI / report.predicted->two_f.real();
    t_end = std::max(t_end, 4.0 * period);
    samples = static_cast<int>(std::clamp(std::ceil(64.0 * t_end / period) + 1.0, 2001.0, 400001.0));
    aux.max_step = std::min(aux.max_step, period / 20.0);
    aux.initial_step = std::min(aux.initial_step, period / 1000.0);
  }
  const ReducedModel model(s.couplings, s.levels, s.cavity, 1.0);
  const std::vector<double> grid = uniform_grid(t_end, samples);
  const TimeSeries ts = evolve(model, DensityMatrix::basis_state(kAtomDim, idx(Level::kE)), grid, aux);
  if (!ts.ok()) {
    report.diagnostic = "measurement run failed: " + *ts.failure;
    return report;
  }
  const BeatMeasurement m = measure_beats(ts, Level::kOne, p.gamma);
  report.measured_two_f = m.two_f;
  report.diagnostic = m.two_f ? fmt::format("{} zero crossings over t in [0, {:.6g}]", m.crossings, t_end)
                              : m.diagnostic;
  return report;
}

double min_slope(const std::vector<ObservableRow>& rows, double t_from, double t_to) {
  double lo = std::numeric_limits<double>::infinity();
  for (size_t i = 0; i + 1 < rows.size(); ++i) {
    if (rows[i].t < t_from || rows[i + 1].t > t_to) continue;
    const double dt = rows[i + 1].t - rows[i].t;
    if (dt > 0.0) lo = std::min(lo, (rows[i + 1].rho_gg - rows[i].rho_gg) / dt);
  }
  return lo;
}

RunResult simulate(const Scenario& scenario, const RunOptions& opts) {
  const Scenario s = apply_overrides(scenario, opts);
  RunResult result;
  RunSummary& sum = result.summary;
  sum.name = s.name;
  sum.mode = s.mode;
  sum.eta = s.eta;
  sum.rates = derive_rates(s.couplings, s.levels, s.cavity);

  const std::vector<double> grid = uniform_grid(s.t_end, s.samples);
  std::optional<TimeSeries> series;
  switch (s.mode) {
    case ScenarioMode::kReduced: {
      const ReducedModel model(s.couplings, s.levels, s.cavity, s.eta);
      series = evolve(model, DensityMatrix(s.initial_state), grid, s.integrator, s.rhs_form);
      break;
    }
    case ScenarioMode::kComposite: {
      const CompositeModel model{s.levels, s.cavity, s.couplings, s.n_max_a, s.n_max_b};
      if (s.eta != 1.0) sum.warnings.push_back("eta has no effect on the composite dynamics");
      series = reduced_from_composite(
          evolve_composite(model, vacuum_product_state(model, named_level(s.initial_label)), grid, s.integrator),
          model);
      break;
    }
    case ScenarioMode::kAnalytic: {
      const auto tuning = detect_symmetric(s.couplings, s.levels, s.cavity);
      if (!tuning) throw ValidationError("analytic mode needs the symmetric tuning", "mode");
      const SymmetricParams p = SymmetricParams::from_tuning(*tuning);
      for (double t : grid) {
        const Populations pop = s.eta == 0.0 ? secular_solution(t, SecularParams::from_rates(sum.rates))
                                             : symmetric_solution(t, p);
        result.rows.push_back({t, pop.rho_ee, pop.rho_11, pop.rho_22, pop.rho_gg, std::nullopt});
      }
      break;
    }
    case ScenarioMode::kValidate:
      throw ValidationError("validate scenarios are run with the validate command", "mode");
  }

  if (series) {
    result.rows = rows_from(*series);
    sum.min_eigenvalue = series->diagnostics.min_eigenvalue;
    sum.warnings.insert(sum.warnings.end(), series->diagnostics.warnings.begin(),
                        series->diagnostics.warnings.end());
    if (!series->ok()) {
      sum.complete = false;
      sum.failure = series->failure;
    }
  }
  sum.samples_written = static_cast<int>(result.rows.size());
  for (const auto& r : result.rows) {
    if (r.rho_12) sum.max_abs_rho_12 = std::max(sum.max_abs_rho_12, std::abs(*r.rho_12));
    sum.max_trace_error =
        std::max(sum.max_trace_error, std::abs(r.rho_ee + r.rho_11 + r.rho_22 + r.rho_gg - 1.0));
  }
  sum.min_rho_gg_slope = result.rows.size() > 1 ? min_slope(result.rows) : 0.0;
  if (sum.complete) sum.beat = beat_report(s, s.integrator);
  return result;
}

void write_csv(std::ostream& os, const RunResult& result, std::optional<double> kappa_hz) {
  os << (kappa_hz ? "t_s" : "t") << ",rho_ee,rho_11,rho_22,rho_gg,re_rho_12,im_rho_12,abs_rho_12\n";
  const double scale = kappa_hz ? 1.0 / *kappa_hz : 1.0;
  fmt::memory_buffer buf;
  for (const ObservableRow& r : result.rows) {
    buf.clear();
    fmt::format_to(std::back_inserter(buf), "{:.17g},{:.17g},{:.17g},{:.17g},{:.17g}", r.t * scale, r.rho_ee,
                   r.rho_11, r.rho_22, r.rho_gg);
    if (r.rho_12)
      fmt::format_to(std::back_inserter(buf), ",{:.17g},{:.17g},{:.17g}\n", r.rho_12->real(), r.rho_12->imag(),
                     std::abs(*r.rho_12));
    else
      fmt::format_to(std::back_inserter(buf), ",nan,nan,nan\n");
    os.write(buf.data(), static_cast<std::streamsize>(buf.size()));
  }
  if (!result.summary.complete)
    os << "# INCOMPLETE: " << result.summary.failure.value_or("integration stopped") << "\n";
}

std::string summary_json(const RunSummary& s) {
  const RateSet& r = s.rates;
  auto complex_json = [](Complex z) {
    return ordered_json{{"re", z.real()}, {"im", z.imag()}, {"abs", std::abs(z)}};
  };
  ordered_json j;
  j["name"] = s.name;
  j["mode"] = std::string(to_string(s.mode));
  j["eta"] = s.eta;
  j["complete"] = s.complete;
  j["failure"] = s.failure ? ordered_json(*s.failure) : ordered_json(nullptr);
  j["samples"] = s.samples_written;
  j["rates"] = {{"gamma_1", r.gamma_1},   {"gamma_2", r.gamma_2},   {"gamma_1p", r.gamma_1p},
                {"gamma_2p", r.gamma_2p}, {"delta_1", r.delta_1},   {"delta_2", r.delta_2},
                {"delta_1p", r.delta_1p}, {"delta_2p", r.delta_2p}, {"Omega", r.omega}};
  j["cross"] = {{"upper_source", complex_json(r.cross.upper_source)},
                {"ground_feed", complex_json(r.cross.ground_feed)},
                {"lower_left", complex_json(r.cross.lower_left)},
                {"lower_right", complex_json(r.cross.lower_right)}};
  j["alpha"] = r.alpha ? complex_json(*r.alpha) : ordered_json(nullptr);

  ordered_json beat;
  const auto& pred = s.beat.predicted;
  beat["beats"] = pred ? ordered_json(pred->beats) : ordered_json(nullptr);
  beat["two_f_squared"] = pred ? number_or_null(pred->two_f_squared) : ordered_json(nullptr);
  beat["predicted_two_f"] = pred && pred->beats ? number_or_null(pred->two_f.real()) : ordered_json(nullptr);
  beat["predicted_two_f_imag"] = pred && !pred->beats ? number_or_null(pred->two_f.imag()) : ordered_json(nullptr);
  beat["measured_two_f"] = number_or_null(s.beat.measured_two_f);
  std::optional<double> rel;
  if (pred && pred->beats && s.beat.measured_two_f)
    rel = std::abs(*s.beat.measured_two_f - pred->two_f.real()) / pred->two_f.real();
  beat["relative_error"] = number_or_null(rel);
  beat["diagnostic"] = s.beat.diagnostic;
  j["beat"] = beat;

  j["max_abs_rho_12"] = s.max_abs_rho_12;
  j["min_rho_gg_slope"] = number_or_null(s.min_rho_gg_slope);
  j["max_trace_error"] = s.max_trace_error;
  j["min_eigenvalue"] = s.min_eigenvalue;
  j["warnings"] = s.warnings;
  return j.dump(2) + "\n";
}

int run_scenario(const Scenario& scenario, const RunOptions& opts, std::ostream& log) {
  if (scenario.mode == ScenarioMode::kValidate) return run_validate(scenario, {}, opts, log);
  std::filesystem::create_directories(opts.out_dir);
  RunResult r;
  try {
    r = simulate(scenario, opts);
  } catch (const IntegrationError& e) {
    // Drift beyond tolerance surfaces before any sample is kept.
    r.summary.name = scenario.name;
    r.summary.mode = scenario.mode;
    r.summary.eta = scenario.eta;
    r.summary.complete = false;
    r.summary.failure = e.what();
  }
  write_outputs(r, opts, log);
  if (!r.summary.complete) {
    log << fmt::format("{}: integration failed: {}\n", r.summary.name, *r.summary.failure);
    return kExitIntegration;
  }
  return kExitOk;
}

int run_sweep(const Scenario& base, const std::string& parameter, const std::vector<double>& values,
              const RunOptions& opts, std::ostream& log) {
  if (values.empty()) throw ValidationError("at least one value is required", "values");
  std::filesystem::create_directories(opts.out_dir);
  const std::string short_name = parameter.substr(parameter.rfind('.') + 1);

  struct Point {
    std::optional<RunResult> result;
    std::string error;
    int code = kExitOk;
  };
  std::vector<Point> points(values.size());
  std::vector<std::optional<Scenario>> scenarios(values.size());
  for (size_t i = 0; i < values.size(); ++i) {
    try {
      scenarios[i] = with_parameter(base, parameter, values[i]);
      scenarios[i]->name = fmt::format("{}_{}{}", base.name, short_name, values[i]);
    } catch (...) {
      points[i].code = code_for(std::current_exception(), points[i].error);
    }
  }

  std::atomic<size_t> next{0};
  auto worker = [&] {
    for (size_t i = next++; i < values.size(); i = next++) {
      if (!scenarios[i]) continue;
      try {
        points[i].result = simulate(*scenarios[i], opts);
        if (!points[i].result->summary.complete) {
          points[i].code = kExitIntegration;
          points[i].error = *points[i].result->summary.failure;
        }
      } catch (...) {
        points[i].code = code_for(std::current_exception(), points[i].error);
      }
    }
  };
  const unsigned hw = std::max(1u, std::thread::hardware_concurrency());
  const unsigned n_threads = std::min<unsigned>(opts.threads ? opts.threads : hw, static_cast<unsigned>(values.size()));
  {
    std::vector<std::jthread> pool;
    for (unsigned k = 1; k < n_threads; ++k) pool.emplace_back(worker);
    worker();
  }

  // Single collector, value order.
  const std::string stem = fmt::format("{}_{}_sweep", base.name, short_name);
  std::string table = fmt::format(
      "index,{},status,beats,predicted_two_f,measured_two_f,max_abs_rho_12,min_rho_gg_slope\n", short_name);
  ordered_json combined;
  combined["name"] = base.name;
  combined["parameter"] = parameter;
  combined["points"] = ordered_json::array();
  int worst = kExitOk;
  for (size_t i = 0; i < values.size(); ++i) {
    const Point& p = points[i];
    ordered_json entry;
    entry["index"] = i;
    entry["value"] = values[i];
    const char* status = p.code == kExitOk ? "ok" : p.code == kExitIntegration ? "integration_failure" : "invalid";
    entry["status"] = status;
    if (p.result) {
      write_outputs(*p.result, opts, log);
      const RunSummary& s = p.result->summary;
      entry["name"] = s.name;
      entry["summary"] = ordered_json::parse(summary_json(s));
      const auto& pred = s.beat.predicted;
      table += fmt::format("{},{:.17g},{},{},{},{},{:.17g},{:.17g}\n", i, values[i], status,
                           pred ? (pred->beats ? "true" : "false") : "",
                           pred && pred->beats ? fmt::format("{:.17g}", pred->two_f.real()) : "",
                           s.beat.measured_two_f ? fmt::format("{:.17g}", *s.beat.measured_two_f) : "",
                           s.max_abs_rho_12, s.min_rho_gg_slope);
    } else {
      table += fmt::format("{},{:.17g},{},,,,,\n", i, values[i], status);
    }
    if (!p.error.empty()) {
      entry["error"] = p.error;
      log << fmt::format("{} point {} ({}={}): {}\n", base.name, i, parameter, values[i], p.error);
    }
    combined["points"].push_back(entry);
    if (p.code == kExitIntegration || (p.code != kExitOk && worst == kExitOk)) worst = p.code;
  }
  write_file(opts.out_dir / (stem + ".csv"), table);
  write_file(opts.out_dir / (stem + ".summary.json"), combined.dump(2) + "\n");
  log << fmt::format("{}: wrote {}\n", base.name, (opts.out_dir / (stem + ".summary.json")).string());
  return worst;
}

int run_preset(const std::string& name, std::optional<double> eta, const RunOptions& opts, std::ostream& log) {
  std::vector<double> etas = eta ? std::vector<double>{*eta} : std::vector<double>{0.0, 1.0};
  int worst = kExitOk;
  for (double e : etas) {
    const Preset p = builtin_preset(name, e);
    const int code = run_sweep(p.base, p.parameter, p.values, opts, log);
    if (code == kExitIntegration || (code != kExitOk && worst == kExitOk)) worst = code;
  }
  return worst;
}

EliminationCase elimination_case(const Scenario& s) {
  EliminationCase c;
  c.levels = s.levels;
  c.cavity = s.cavity;
  c.coupling_directions = s.couplings;
  c.n_max_a = s.n_max_a;
  c.n_max_b = s.n_max_b;
  c.samples = s.samples;
  c.window = s.window;
  c.t_end_uncoupled = s.t_end;
  c.integrator = s.integrator;
  c.tolerance = s.tolerance;
  return c;
}

int run_validate(const Scenario& scenario, const std::vector<double>& g_values, const RunOptions& opts,
                 std::ostream& log) {
  const Scenario s = apply_overrides(scenario, opts);
  const std::vector<double>& g = g_values.empty() ? s.g_values : g_values;
  if (g.empty()) throw ValidationError("no coupling values given", "g_values");
  std::filesystem::create_directories(opts.out_dir);

  EliminationReport report;
  try {
    report = validate_elimination(elimination_case(s), g);
  } catch (const IntegrationError& e) {
    log << fmt::format("{}: integration failed: {}\n", s.name, e.what());
    return kExitIntegration;
  }

  ordered_json j;
  j["name"] = s.name;
  j["tolerance"] = s.tolerance;
  j["window"] = s.window;
  j["points"] = ordered_json::array();
  for (const auto& p : report.points) {
    j["points"].push_back({{"g", p.g},
                           {"t_end", p.t_end},
                           {"max_population_deviation", p.max_population_deviation},
                           {"max_coherence_deviation", p.max_coherence_deviation},
                           {"max_coherence", p.max_coherence}});
    log << fmt::format("{}: g={:<8g} t_end={:<10g} population deviation {:.3e}\n", s.name, p.g, p.t_end,
                       p.max_population_deviation);
  }
  j["scaling_exponent"] = report.scaling_exponent;
  j["monotone"] = report.monotone;
  j["within_tolerance"] = report.within_tolerance;
  j["passed"] = report.passed;
  j["notes"] = report.notes;
  const auto path = opts.out_dir / (s.name + ".validation.json");
  write_file(path, j.dump(2) + "\n");
  for (const auto& n : report.notes) log << fmt::format("{}: {}\n", s.name, n);
  log << fmt::format("{}: elimination check {} (wrote {})\n", s.name, report.passed ? "passed" : "FAILED",
                     path.string());
  return report.passed ? kExitOk : kExitAcceptance;
}

}  // namespace qbeat
