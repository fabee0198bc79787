#include "qbeat/integrator.hpp"

#include "qbeat/errors.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>

namespace qbeat {

namespace {

// Dormand-Prince 5(4) tableau.
constexpr double c2 = 1.0 / 5.0, c3 = 3.0 / 10.0, c4 = 4.0 / 5.0, c5 = 8.0 / 9.0;
constexpr double a21 = 1.0 / 5.0;
constexpr double a31 = 3.0 / 40.0, a32 = 9.0 / 40.0;
constexpr double a41 = 44.0 / 45.0, a42 = -56.0 / 15.0, a43 = 32.0 / 9.0;
constexpr double a51 = 19372.0 / 6561.0, a52 = -25360.0 / 2187.0, a53 = 64448.0 / 6561.0,
                 a54 = -212.0 / 729.0;
constexpr double a61 = 9017.0 / 3168.0, a62 = -355.0 / 33.0, a63 = 46732.0 / 5247.0,
                 a64 = 49.0 / 176.0, a65 = -5103.0 / 18656.0;
constexpr double a71 = 35.0 / 384.0, a73 = 500.0 / 1113.0, a74 = 125.0 / 192.0,
                 a75 = -2187.0 / 6784.0, a76 = 11.0 / 84.0;
constexpr double e1 = 71.0 / 57600.0, e3 = -71.0 / 16695.0, e4 = 71.0 / 1920.0,
                 e5 = -17253.0 / 339200.0, e6 = 22.0 / 525.0, e7 = -1.0 / 40.0;
// Continuous extension (Hairer's contd5).
constexpr double d1 = -12715105075.0 / 11282082432.0, d3 = 87487479700.0 / 32700410799.0,
                 d4 = -10690763975.0 / 1880347072.0, d5 = 701980252875.0 / 199316789632.0,
                 d6 = -1453857185.0 / 822651844.0, d7 = 69997945.0 / 29380423.0;

constexpr double kSafety = 0.9;
constexpr double kMinFactor = 0.2;
constexpr double kMaxFactor = 5.0;

double error_norm(const ComplexMatrix& err, const ComplexMatrix& y0, const ComplexMatrix& y1,
                  const IntegratorConfig& cfg) {
  double worst = 0.0;
  for (Eigen::Index i = 0; i < err.size(); ++i) {
    const double scale =
        cfg.abs_tol + cfg.rel_tol * std::max(std::abs(y0.data()[i]), std::abs(y1.data()[i]));
    worst = std::max(worst, std::abs(err.data()[i]) / scale);
  }
  return worst;
}

double weighted_norm(const ComplexMatrix& v, const ComplexMatrix& y, const IntegratorConfig& cfg) {
  double worst = 0.0;
  for (Eigen::Index i = 0; i < v.size(); ++i)
    worst = std::max(worst, std::abs(v.data()[i]) /
                                (cfg.abs_tol + cfg.rel_tol * std::abs(y.data()[i])));
  return worst;
}

}  // namespace

void IntegratorConfig::validate() const {
  if (!(rel_tol > 0.0)) throw ValidationError("must be positive", "integrator.rel_tol");
  if (!(abs_tol > 0.0)) throw ValidationError("must be positive", "integrator.abs_tol");
  if (!(max_step > 0.0)) throw ValidationError("must be positive", "integrator.max_step");
  if (initial_step < 0.0) throw ValidationError("must be non-negative", "integrator.initial_step");
  if (max_steps <= 0) throw ValidationError("must be positive", "integrator.max_steps");
}

std::vector<double> uniform_grid(double t_end, int samples) {
  if (samples < 2) throw ValidationError("need at least two samples", "samples");
  std::vector<double> grid(static_cast<size_t>(samples));
  for (int i = 0; i < samples; ++i)
    grid[static_cast<size_t>(i)] = t_end * static_cast<double>(i) / static_cast<double>(samples - 1);
  grid.back() = t_end;
  return grid;
}

Trajectory integrate(const MatrixRhs& rhs, const ComplexMatrix& y0, std::span<const double> grid,
                     const IntegratorConfig& cfg) {
  cfg.validate();
  if (grid.empty()) throw ValidationError("time grid is empty", "t_grid");
  if (!std::is_sorted(grid.begin(), grid.end()))
    throw ValidationError("time grid must be ascending", "t_grid");

  Trajectory out;
  out.times.reserve(grid.size());
  out.states.reserve(grid.size());

  double t = grid.front();
  const double t_end = grid.back();
  const double span = t_end - t;

  size_t next = 0;
  while (next < grid.size() && grid[next] == t) {
    out.times.push_back(grid[next]);
    out.states.push_back(y0);
    ++next;
  }
  if (next == grid.size()) return out;

  const auto rows = y0.rows();
  const auto cols = y0.cols();
  ComplexMatrix y = y0, y_new(rows, cols), tmp(rows, cols), err(rows, cols);
  ComplexMatrix k1(rows, cols), k2(rows, cols), k3(rows, cols), k4(rows, cols), k5(rows, cols),
      k6(rows, cols), k7(rows, cols);
  ComplexMatrix rc1, rc2, rc3, rc4, rc5;

  auto eval = [&](double tt, const ComplexMatrix& yy, ComplexMatrix& dy) {
    rhs(tt, yy, dy);
    ++out.stats.rhs_evaluations;
  };

  eval(t, y, k1);

  double h = cfg.initial_step;
  if (h <= 0.0) {
    // Hairer & Wanner's starting step heuristic.
    const double dy0 = weighted_norm(y, y, cfg);
    const double df0 = weighted_norm(k1, y, cfg);
    double h0 = (dy0 < 1e-5 || df0 < 1e-5) ? 1e-6 : 0.01 * dy0 / df0;
    h0 = std::min({h0, cfg.max_step, span});
    tmp = y + h0 * k1;
    eval(t + h0, tmp, k2);
    const double ddf = weighted_norm(k2 - k1, y, cfg) / h0;
    const double dmax = std::max(df0, ddf);
    const double h1 = dmax <= 1e-15 ? std::max(1e-6, h0 * 1e-3) : std::pow(0.01 / dmax, 0.2);
    h = std::min(100.0 * h0, h1);
  }

  const double h_min = 1e-12 * span;
  long steps = 0;
  bool last_rejected = false;

  auto fail = [&](std::string why) {
    out.failure = std::move(why);
    out.failure_time = t;
    return out;
  };

  while (t < t_end) {
    if (steps >= cfg.max_steps)
      return fail(fmt::format("maximum number of steps ({}) exceeded at t={:.17g}", cfg.max_steps, t));
    h = std::min(h, cfg.max_step);
    bool lands = false;
    if (t + h >= t_end || t + 1.01 * h >= t_end) {
      h = t_end - t;
      lands = true;
    }
    if (h < h_min)
      return fail(fmt::format("step size underflow (h={:.3g}) at t={:.17g}", h, t));
    ++steps;

    tmp = y + h * (a21 * k1);
    eval(t + c2 * h, tmp, k2);
    tmp = y + h * (a31 * k1 + a32 * k2);
    eval(t + c3 * h, tmp, k3);
    tmp = y + h * (a41 * k1 + a42 * k2 + a43 * k3);
    eval(t + c4 * h, tmp, k4);
    tmp = y + h * (a51 * k1 + a52 * k2 + a53 * k3 + a54 * k4);
    eval(t + c5 * h, tmp, k5);
    tmp = y + h * (a61 * k1 + a62 * k2 + a63 * k3 + a64 * k4 + a65 * k5);
    const double t_new = lands ? t_end : t + h;
    eval(t_new, tmp, k6);
    y_new = y + h * (a71 * k1 + a73 * k3 + a74 * k4 + a75 * k5 + a76 * k6);
    eval(t_new, y_new, k7);

    err = h * (e1 * k1 + e3 * k3 + e4 * k4 + e5 * k5 + e6 * k6 + e7 * k7);
    const double en = error_norm(err, y, y_new, cfg);

    if (!std::isfinite(en) || en > 1.0) {
      ++out.stats.rejected;
      const double factor =
          std::isfinite(en) ? std::max(kMinFactor, kSafety * std::pow(en, -0.2)) : kMinFactor;
      h *= factor;
      last_rejected = true;
      continue;
    }

    ++out.stats.accepted;
    bool have_dense = false;
    while (next < grid.size() && grid[next] <= t_new) {
      out.times.push_back(grid[next]);
      if (grid[next] == t_new) {
        out.states.push_back(y_new);
      } else {
        if (!have_dense) {
          rc1 = y;
          rc2 = y_new - y;
          rc3 = h * k1 - rc2;
          rc4 = rc2 - h * k7 - rc3;
          rc5 = h * (d1 * k1 + d3 * k3 + d4 * k4 + d5 * k5 + d6 * k6 + d7 * k7);
          have_dense = true;
        }
        const double th = (grid[next] - t) / h;
        const double th1 = 1.0 - th;
        out.states.push_back(rc1 + th * (rc2 + th1 * (rc3 + th * (rc4 + th1 * rc5))));
      }
      ++next;
    }

    t = t_new;
    y.swap(y_new);
    k1.swap(k7);

    double factor = en == 0.0 ? kMaxFactor : kSafety * std::pow(en, -0.2);
    factor = std::clamp(factor, kMinFactor, kMaxFactor);
    if (last_rejected) factor = std::min(factor, 1.0);
    h *= factor;
    last_rejected = false;
  }
  return out;
}

}  // namespace qbeat
