#include "qbeat/time_series.hpp"

#include "qbeat/errors.hpp"

#include <fmt/format.h>

#include <algorithm>

namespace qbeat {

std::vector<double> TimeSeries::population(int k) const {
  std::vector<double> out;
  out.reserve(states.size());
  for (const auto& s : states) out.push_back(s(k, k).real());
  return out;
}

std::vector<Complex> TimeSeries::element(int i, int j) const {
  std::vector<Complex> out;
  out.reserve(states.size());
  for (const auto& s : states) out.push_back(s(i, j));
  return out;
}

TimeSeries to_time_series(Trajectory&& traj, double drift_tol) {
  TimeSeries series;
  series.stats = traj.stats;
  series.failure = std::move(traj.failure);
  series.times.reserve(traj.states.size());
  series.states.reserve(traj.states.size());
  auto& diag = series.diagnostics;
  diag.min_eigenvalue = 1.0;
  for (size_t i = 0; i < traj.states.size(); ++i) {
    const double t = traj.times[i];
    DensityMatrix rho = [&] {
      try {
        return hermitize_and_check(traj.states[i], drift_tol);
      } catch (const IntegrationError& e) {
        throw IntegrationError(fmt::format("t={:.17g}: {}", t, e.what()), t);
      }
    }();
    const double lo = min_eigenvalue(rho.matrix());
    diag.min_eigenvalue = std::min(diag.min_eigenvalue, lo);
    diag.max_drift_correction = std::max(diag.max_drift_correction, rho.drift_correction());
    if (lo < -kPositivityFlag) {
      if (diag.positivity_violations == 0)
        diag.warnings.push_back(
            fmt::format("positivity violated at t={:.6g}: eigenvalue {:.3g}", t, lo));
      ++diag.positivity_violations;
    }
    series.times.push_back(t);
    series.states.push_back(std::move(rho));
  }
  if (series.failure && traj.failure_time > 0.0)
    diag.warnings.push_back(fmt::format("integration stopped at t={:.17g}", traj.failure_time));
  return series;
}

AtomObservables atom_observables(const DensityMatrix& rho) {
  if (rho.dim() != kAtomDim)
    throw DimensionError(fmt::format("atom_observables: expected 4x4 state, got {}", rho.dim()));
  return {
      .rho_ee = rho(idx(Level::kE), idx(Level::kE)).real(),
      .rho_11 = rho(idx(Level::kOne), idx(Level::kOne)).real(),
      .rho_22 = rho(idx(Level::kTwo), idx(Level::kTwo)).real(),
      .rho_gg = rho(idx(Level::kG), idx(Level::kG)).real(),
      .rho_12 = rho(idx(Level::kOne), idx(Level::kTwo)),
  };
}

}  // namespace qbeat
