#pragma once

#include "qbeat/linalg.hpp"

#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace qbeat {

struct IntegratorConfig {
  double rel_tol = 1e-9;
  double abs_tol = 1e-12;
  double max_step = 1.0;
  double initial_step = 0.0;  ///< 0 selects a starting step automatically
  long max_steps = 2'000'000;

  void validate() const;
};

/// dY/dt = F(t, Y), written into the third argument.
using MatrixRhs = std::function<void(double t, const ComplexMatrix& y, ComplexMatrix& dydt)>;

struct IntegrationStats {
  long accepted = 0;
  long rejected = 0;
  long rhs_evaluations = 0;
};

/// Samples of a matrix-valued solution. On failure `states` holds every grid
/// point reached before the failure and `failure` describes it.
struct Trajectory {
  std::vector<double> times;
  std::vector<ComplexMatrix> states;
  IntegrationStats stats;
  std::optional<std::string> failure;
  double failure_time = 0.0;

  bool ok() const { return !failure.has_value(); }
};

/// Dormand-Prince 5(4) with proportional step control and fourth-order dense
/// output. Output times are copied from `grid`, which must be non-empty and
/// non-decreasing; the first state is `y0` at grid[0].
Trajectory integrate(const MatrixRhs& rhs, const ComplexMatrix& y0,
                     std::span<const double> grid, const IntegratorConfig& cfg = {});

/// `samples` equally spaced times on [0, t_end], each computed as
/// t_end * i / (samples - 1).
std::vector<double> uniform_grid(double t_end, int samples);

}  // namespace qbeat
