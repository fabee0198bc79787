#pragma once

#include "qbeat/integrator.hpp"
#include "qbeat/linalg.hpp"

#include <optional>
#include <string>
#include <vector>

namespace qbeat {

/// Largest Hermiticity or trace drift that evolution silently corrects.
inline constexpr double kDriftTolerance = 1e-8;
/// Eigenvalues below -kPositivityFlag are reported as diagnostics.
inline constexpr double kPositivityFlag = 1e-6;

struct SeriesDiagnostics {
  double min_eigenvalue = 0.0;
  double max_drift_correction = 0.0;
  int positivity_violations = 0;
  std::vector<std::string> warnings;
};

/// Sampled density matrices. `failure` is set when integration stopped
/// early; `states` then ends at the last grid point reached.
struct TimeSeries {
  std::vector<double> times;
  std::vector<DensityMatrix> states;
  SeriesDiagnostics diagnostics;
  IntegrationStats stats;
  std::optional<std::string> failure;

  bool ok() const { return !failure.has_value(); }
  size_t size() const { return states.size(); }

  /// Real part of element (k, k) at every sample.
  std::vector<double> population(int k) const;
  /// Element (i, j) at every sample.
  std::vector<Complex> element(int i, int j) const;
};

/// Converts raw integrator output into validated states: each sample is
/// symmetrized and renormalized (throws IntegrationError beyond
/// `drift_tol`) and checked for positivity.
TimeSeries to_time_series(Trajectory&& traj, double drift_tol = kDriftTolerance);

/// Named observables of a 4x4 atomic state.
struct AtomObservables {
  double rho_ee = 0.0;
  double rho_11 = 0.0;
  double rho_22 = 0.0;
  double rho_gg = 0.0;
  Complex rho_12{0.0};
};

AtomObservables atom_observables(const DensityMatrix& rho);

}  // namespace qbeat
