// One line per criterion; nonzero exit if any fails.

#include "qbeat/analytic.hpp"
#include "qbeat/atom_field.hpp"
#include "qbeat/composite.hpp"
#include "qbeat/reduced.hpp"
#include "qbeat/runner.hpp"
#include "qbeat/scenario.hpp"

#include <fmt/core.h>

#include <cmath>
#include <functional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

using namespace qbeat;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

int failures = 0;

void report(const char* id, const char* title, const std::function<Outcome()>& check) {
  Outcome o;
  try {
    o = check();
  } catch (const std::exception& e) {
    o = {false, fmt::format("exception: {}", e.what())};
  }
  if (!o.pass) ++failures;
  fmt::print("{} {}: {} ({})\n", o.pass ? "PASS" : "FAIL", id, title, o.detail);
  std::fflush(stdout);
}

Scenario symmetric(double omega, double eta, double t_end = 6.0, int samples = 601) {
  return parse_scenario(fmt::format(R"({{"name": "acc", "symmetric": {{"G": 1, "kappa": 1, "Omega": {}}},
    "eta": {}, "t_end": {}, "samples": {}}})",
                                    omega, eta, t_end, samples),
                        "acceptance");
}

ComplexMatrix random_state(std::mt19937_64& rng) {
  std::normal_distribution<double> N;
  ComplexMatrix a(4, 4);
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 4; ++j) a(i, j) = {N(rng), N(rng)};
  ComplexMatrix rho = a * a.adjoint();
  return rho / rho.trace().real();
}

const std::vector<double> kFigureOmegas{0.0, 0.5, 1.0, 3.0};

}  // namespace

int main() {
  report("AC1", "no doublet coherence without interference", [] {
    double worst = 0.0;
    for (double om : kFigureOmegas) worst = std::max(worst, simulate(symmetric(om, 0.0)).summary.max_abs_rho_12);
    return Outcome{worst <= 1e-10, fmt::format("max |rho_12| = {:.3e}, limit 1e-10", worst)};
  });

  report("AC2", "closed form matches integration", [] {
    double worst = 0.0;
    IntegratorConfig cfg;
    cfg.rel_tol = 1e-11;
    cfg.abs_tol = 1e-13;
    for (double om : kFigureOmegas) {
      const SymmetricTuning t{.g = 1.0, .kappa = 1.0, .omega = om};
      const ReducedModel model(t.couplings(), t.levels(), t.cavity(), 1.0);
      const auto grid = uniform_grid(6.0, 601);
      const TimeSeries ts = evolve(model, DensityMatrix::basis_state(4, 0), grid, cfg);
      if (!ts.ok()) return Outcome{false, fmt::format("integration failed at Omega = {}", om)};
      const SymmetricParams p = SymmetricParams::from_tuning(t);
      for (size_t i = 0; i < grid.size(); ++i) {
        const Populations x = symmetric_solution(grid[i], p);
        const auto& s = ts.states[i];
        worst = std::max({worst, std::abs(x.rho_ee - s(0, 0).real()), std::abs(x.rho_11 - s(1, 1).real()),
                          std::abs(x.rho_22 - s(2, 2).real()), std::abs(x.rho_gg - s(3, 3).real())});
      }
    }
    return Outcome{worst <= 1e-6, fmt::format("max population deviation = {:.3e}, limit 1e-6", worst)};
  });

  report("AC3", "beat frequency", [] {
    std::string detail;
    bool ok = true;
    for (double om : kFigureOmegas) {
      const BeatReport b = simulate(symmetric(om, 1.0)).summary.beat;
      if (!b.predicted) return Outcome{false, "no prediction"};
      if (om == 0.0) {
        const bool quiet = !b.predicted->beats && !b.measured_two_f;
        ok = ok && quiet;
        detail += fmt::format("Omega=0: predicted {}, measured {}; ", b.predicted->beats ? "beats" : "none",
                              b.measured_two_f ? fmt::format("{:.4g}", *b.measured_two_f) : "none");
        continue;
      }
      const double want = b.predicted->two_f.real();
      const double err = b.measured_two_f ? std::abs(*b.measured_two_f - want) / want : INFINITY;
      ok = ok && b.predicted->beats && err <= 0.02;
      detail += fmt::format("Omega={}: 2f {:.6g} vs {:.6g} (rel {:.1e}); ", om,
                            b.measured_two_f.value_or(NAN), want, err);
    }
    detail.resize(detail.size() - 2);
    return Outcome{ok, detail};
  });

  report("AC4", "transient ground-state depletion", [] {
    const double with = min_slope(simulate(symmetric(3.0, 1.0)).rows, 0.2, 3.0);
    const double without = min_slope(simulate(symmetric(3.0, 0.0)).rows, 0.2, 3.0);
    return Outcome{with < -1e-4 && without >= -1e-4,
                   fmt::format("min d rho_gg/dt on [0.2, 3]: eta=1 {:.3e}, eta=0 {:.3e}", with, without)};
  });

  report("AC5", "far-detuned limit", [] {
    const RunResult a = simulate(symmetric(50.0, 1.0, 5.0, 501));
    const RunResult b = simulate(symmetric(50.0, 0.0, 5.0, 501));
    double worst = 0.0;
    for (size_t i = 0; i < a.rows.size(); ++i) {
      const auto& x = a.rows[i];
      const auto& y = b.rows[i];
      worst = std::max({worst, std::abs(x.rho_ee - y.rho_ee), std::abs(x.rho_11 - y.rho_11),
                        std::abs(x.rho_22 - y.rho_22), std::abs(x.rho_gg - y.rho_gg)});
    }
    return Outcome{worst <= 1e-2, fmt::format("max population difference = {:.3e}, limit 1e-2", worst)};
  });

  report("AC6", "cavity elimination", [] {
    const Scenario s = parse_scenario(R"({"name": "elim", "mode": "validate",
      "symmetric": {"G": 1, "kappa": 1, "Omega": 1}, "samples": 401,
      "g_values": [0.2, 0.1, 0.05], "tolerance": 0.02})",
                                      "acceptance");
    const EliminationReport r = validate_elimination(elimination_case(s), s.g_values);
    std::string devs;
    for (const auto& p : r.points) devs += fmt::format("g={} {:.3e}, ", p.g, p.max_population_deviation);
    const double last = r.points.back().max_population_deviation;
    return Outcome{r.monotone && last < 2e-2,
                   fmt::format("{}monotone {}, limit 2e-2", devs, r.monotone ? "yes" : "no")};
  });

  report("AC7", "polarization algebra", [] {
    const double d = 1.0;
    const auto [d1, d2] = sigma_dipoles(d);
    const Complex summed = summed_product(d1, d2, RealVector3::UnitZ());
    const Complex pre = preselected_product(d1, d2, ComplexVector3::UnitX());
    const bool circ = interference_condition(d1, d2);
    const bool par = interference_condition(ComplexVector3::UnitX(), 0.5 * ComplexVector3::UnitX());
    const bool ok = std::abs(summed) <= 1e-12 && std::abs(pre - Complex(-d * d)) <= 1e-12 && !circ && par;
    return Outcome{ok, fmt::format("summed {:.1e}, preselected {:.3g}{:+.3g}i, sigma+- {}, parallel {}",
                                   std::abs(summed), pre.real(), pre.imag(), circ, par)};
  });

  report("AC8", "structural checks", [] {
    std::string detail;
    bool ok = true;

    // trace and Hermiticity along a trajectory
    const SymmetricTuning t{.g = 1.0, .kappa = 1.0, .omega = 1.0};
    const ReducedModel model(t.couplings(), t.levels(), t.cavity(), 1.0);
    IntegratorConfig raw_cfg;
    const MatrixRhs rhs = [&model](double s, const ComplexMatrix& y, ComplexMatrix& dy) {
      dy = rhs_operator_form(s, y, model);
    };
    const Trajectory raw = integrate(rhs, projector(4, 0, 0), uniform_grid(6.0, 601), raw_cfg);
    double tr = 0.0, herm = 0.0;
    for (const auto& s : raw.states) {
      tr = std::max(tr, std::abs(s.trace() - 1.0));
      herm = std::max(herm, max_abs(s - s.adjoint()));
    }
    ok = ok && raw.ok() && tr <= 1e-10 && herm <= 1e-10;
    detail += fmt::format("trace {:.1e}, hermiticity {:.1e}; ", tr, herm);

    // operator vs element form
    std::mt19937_64 rng(20240601);
    std::uniform_real_distribution<double> U(-1.0, 1.0);
    double worst = 0.0;
    for (int k = 0; k < 1000; ++k) {
      const LevelScheme levels{.omega_eg = 200.0 + U(rng), .omega_1g = 100.0 + 3.0 * U(rng),
                               .omega_2g = 100.0 + 3.0 * U(rng)};
      const CavityParams cavity{.omega_a = 100.0 + U(rng), .omega_b = 100.0 + U(rng),
                                .kappa_a = 1.0 + 0.5 * U(rng), .kappa_b = 1.0 + 0.5 * U(rng)};
      const CouplingSet g{Complex(U(rng), U(rng)), Complex(U(rng), U(rng)), Complex(U(rng), U(rng)),
                          Complex(U(rng), U(rng))};
      const ReducedModel m(g, levels, cavity, 0.5 * (1.0 + U(rng)));
      const ComplexMatrix rho = random_state(rng);
      const double s = 6.0 * (1.0 + U(rng)) / 2.0;
      worst = std::max(worst, max_abs(rhs_operator_form(s, rho, m) - rhs_element_form(s, rho, m)));
    }
    ok = ok && worst <= 1e-12;
    detail += fmt::format("forms {:.1e}; ", worst);

    // observed order on a fixed step
    const MatrixRhs lin = [](double s, const ComplexMatrix& y, ComplexMatrix& dy) {
      dy = Complex(-0.5, 2.0) * y;
      dy(0, 0) += std::sin(s);
    };
    ComplexMatrix one(1, 1);
    one(0, 0) = 1.0;
    const std::vector<double> ends{0.0, 4.0};
    IntegratorConfig fine;
    fine.rel_tol = 1e-13;
    fine.abs_tol = 1e-15;
    const Complex ref = integrate(lin, one, ends, fine).states.back()(0, 0);
    auto err = [&](double h) {
      IntegratorConfig c;
      c.rel_tol = 1e3;
      c.abs_tol = 1e3;
      c.max_step = h;
      c.initial_step = h;
      return std::abs(integrate(lin, one, ends, c).states.back()(0, 0) - ref);
    };
    const double order = std::log2(err(0.1) / err(0.05));
    ok = ok && order > 4.5 && order < 5.6;
    detail += fmt::format("order {:.2f}; ", order);

    // byte-identical CSV
    auto csv = [] {
      std::ostringstream os;
      write_csv(os, simulate(symmetric(3.0, 1.0)));
      return os.str();
    };
    const bool same = csv() == csv();
    ok = ok && same;
    detail += fmt::format("rerun identical {}", same);
    return Outcome{ok, detail};
  });

  fmt::print("{} failed\n", failures);
  return failures == 0 ? 0 : 1;
}
