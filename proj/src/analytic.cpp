#include "qbeat/analytic.hpp"

#include "qbeat/errors.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <vector>

namespace qbeat {

namespace {

// (1 - e^{-2 d t}) / d, continuous through d = 0.
double decay_difference(double d, double t) {
  return d == 0.0 ? 2.0 * t : -std::expm1(-2.0 * d * t) / d;
}

// expm1(2 e t) / e, continuous through e = 0.
double growth_difference(double e, double t) {
  return e == 0.0 ? 2.0 * t : std::expm1(2.0 * e * t) / e;
}

double intermediate_secular(double t, double feed, double total_upper, double lower) {
  return feed * std::exp(-2.0 * lower * t) * decay_difference(total_upper - lower, t);
}

double intermediate_printed(double t, double feed, double total_upper, double lower,
                            double total_lower) {
  const double d = total_upper - lower;
  if (d == 0.0) throw std::domain_error("printed secular form is singular when G1+G2 = G'");
  return feed / d * (std::exp(-2.0 * lower * t) - std::exp(-2.0 * total_lower * t));
}

}  // namespace

SecularParams SecularParams::from_rates(const RateSet& r) {
  return {.gamma_1 = r.gamma_1, .gamma_2 = r.gamma_2, .gamma_1p = r.gamma_1p, .gamma_2p = r.gamma_2p};
}

void SecularParams::validate() const {
  if (gamma_1 < 0.0 || gamma_2 < 0.0 || gamma_1p < 0.0 || gamma_2p < 0.0)
    throw ValidationError("decay rates must be non-negative");
}

Populations secular_solution(double t, const SecularParams& p, SecularForm form) {
  p.validate();
  if (t < 0.0) throw ValidationError("time must be non-negative", "t");
  const double upper = p.gamma_1 + p.gamma_2;
  Populations out;
  out.rho_ee = std::exp(-2.0 * upper * t);
  if (form == SecularForm::kOdeConsistent) {
    out.rho_11 = intermediate_secular(t, p.gamma_1, upper, p.gamma_1p);
    out.rho_22 = intermediate_secular(t, p.gamma_2, upper, p.gamma_2p);
  } else {
    const double lower = p.gamma_1p + p.gamma_2p;
    out.rho_11 = intermediate_printed(t, p.gamma_1, upper, p.gamma_1p, lower);
    out.rho_22 = intermediate_printed(t, p.gamma_2, upper, p.gamma_2p, lower);
  }
  out.rho_gg = 1.0 - out.rho_ee - out.rho_11 - out.rho_22;
  return out;
}

SymmetricParams SymmetricParams::from_tuning(double g, double kappa, double omega) {
  SymmetricParams p{.gamma = g * g * kappa / (kappa * kappa + omega * omega),
                    .g = g,
                    .kappa = kappa,
                    .omega = omega};
  p.validate();
  return p;
}

SymmetricParams SymmetricParams::from_tuning(const SymmetricTuning& tuning) {
  return from_tuning(tuning.g, tuning.kappa, tuning.omega);
}

Complex SymmetricParams::alpha() const { return g * g / Complex(kappa, omega); }

double SymmetricParams::delta_p() const { return g * g * omega / (kappa * kappa + omega * omega); }

double SymmetricParams::f_squared() const {
  const double w = delta_p() + omega;
  return w * w - std::norm(alpha());
}

void SymmetricParams::validate() const {
  if (!(kappa > 0.0)) throw ValidationError("kappa must be positive", "kappa");
  if (gamma < 0.0 || !std::isfinite(gamma)) throw ValidationError("decay rate must be non-negative", "gamma");
  const double expected = g * g * kappa / (kappa * kappa + omega * omega);
  if (std::abs(gamma - expected) > 1e-12 * std::max(1.0, expected))
    throw ValidationError(fmt::format("decay rate {} inconsistent with G^2 kappa/(kappa^2+Omega^2) = {}",
                                      gamma, expected),
                          "gamma");
}

double symmetric_intermediate(double t, double gamma, double alpha_sq, double f_sq) {
  const double e = std::exp(-2.0 * gamma * t);
  if (alpha_sq == 0.0) return e * (1.0 - e);

  const double gg = gamma * gamma;
  const double s = f_sq;
  const double near_pole = gg + s;  // vanishes at the removable pole
  const double z = 4.0 * s * t * t;  // (2 f t)^2

  double x;
  if (s < 0.0 && (std::abs(z) >= 1e-3 || near_pole < 0.5 * gg)) {
    // Imaginary f = i phi. Split cosh/sinh into e^{+-2 phi t} and cancel the
    // pole at phi = gamma analytically.
    const double phi = std::sqrt(-s);
    const double eps = gamma - phi;
    const double grow = std::exp(2.0 * eps * t);
    const double phi2 = phi * phi;
    const double ratio =
        -1.0 / phi2 + std::exp(2.0 * phi * t) * eps / (2.0 * phi2 * (gamma + phi)) +
        e * (2.0 * gg * growth_difference(eps, t) - 2.0 * gamma * grow + 0.5 * eps * grow +
             4.0 * gamma - 2.0 * eps) /
            (phi2 * (gamma + phi));
    x = 1.0 - e + alpha_sq * ratio;
  } else {
    // c = cos 2ft, sn = sin(2ft)/f, g = (1 - c)/f^2, all analytic in f^2.
    double c, sn, g;
    if (std::abs(z) < 1e-3) {
      c = 0.0, sn = 0.0, g = 0.0;
      double term = 1.0;  // (-z)^k / (2k)!
      double term_odd = 1.0;  // (-z)^k / (2k+1)!
      for (int k = 0; k < 10; ++k) {
        if (k > 0) {
          term *= -z / ((2.0 * k - 1.0) * (2.0 * k));
          term_odd *= -z / ((2.0 * k) * (2.0 * k + 1.0));
        }
        c += term;
        sn += term_odd;
        // (1 - c)/s = 4 t^2 sum_{k>=1} (-z)^{k-1}/(2k)!
        g += term / ((2.0 * k + 1.0) * (2.0 * k + 2.0));
      }
      sn *= 2.0 * t;
      g *= 4.0 * t * t;
    } else if (s > 0.0) {
      const double f = std::sqrt(s);
      c = std::cos(2.0 * f * t);
      sn = std::sin(2.0 * f * t) / f;
      g = (1.0 - c) / s;
    } else {
      const double phi = std::sqrt(-s);
      c = std::cosh(2.0 * phi * t);
      sn = std::sinh(2.0 * phi * t) / phi;
      g = (1.0 - c) / s;
    }
    if (near_pole == 0.0) throw std::domain_error("symmetric solution undefined for gamma = f = 0");
    const double h = -2.0 * e + gg * g + 1.0 + c - 2.0 * gamma * sn;
    x = 1.0 - e + alpha_sq * h / near_pole;
  }
  return e * x;
}

Populations symmetric_solution(double t, const SymmetricParams& p, SymmetricForm form) {
  p.validate();
  if (t < 0.0) throw ValidationError("time must be non-negative", "t");
  const double a = std::norm(p.alpha());
  const double s = p.f_squared();
  const double gam = p.gamma;
  Populations out;
  out.rho_ee = std::exp(-4.0 * gam * t);
  double rii;
  if (form == SymmetricForm::kExact) {
    rii = symmetric_intermediate(t, gam, a, s);
  } else {
    const double denom = gam * gam + s;
    if (s == 0.0 || denom == 0.0)
      throw std::domain_error("printed symmetric form is singular at f = 0 or gamma^2 + f^2 = 0");
    const Complex f = std::sqrt(Complex(s, 0.0));
    const Complex c = std::cos(2.0 * f * t);
    const Complex sn = std::sin(2.0 * f * t) / f;
    const Complex x = -(1.0 + 2.0 * a / denom) * std::exp(-2.0 * gam * t) + (1.0 + a / s) -
                      (2.0 * a / denom) * ((gam * gam / s - 1.0) * c + 2.0 * gam * sn);
    rii = (std::exp(-2.0 * gam * t) * x).real();
  }
  out.rho_11 = rii;
  out.rho_22 = rii;
  out.rho_gg = 1.0 - out.rho_ee - 2.0 * rii;
  return out;
}

BeatPrediction beat_frequency(const SymmetricParams& p) {
  p.validate();
  const double s = p.f_squared();
  BeatPrediction out;
  out.two_f_squared = 4.0 * s;
  out.two_f = 2.0 * std::sqrt(Complex(s, 0.0));
  out.beats = s > 0.0;
  return out;
}

BeatMeasurement measure_beats(std::span<const double> times, std::span<const double> values,
                              double envelope_rate, const BeatOptions& opts) {
  BeatMeasurement out;
  if (times.size() != values.size())
    throw DimensionError("measure_beats: times and values differ in length");
  const size_t n = times.size();
  if (n < 5) {
    out.diagnostic = "too few samples";
    return out;
  }
  const double h = (times.back() - times.front()) / static_cast<double>(n - 1);
  if (!(h > 0.0)) throw ValidationError("measure_beats: times must increase", "times");
  for (size_t i = 1; i < n; ++i)
    if (std::abs((times[i] - times[i - 1]) - h) > 1e-9 * h)
      throw ValidationError("measure_beats: samples must be uniformly spaced", "times");

  std::vector<double> y(n);
  double ymax = 0.0;
  for (size_t i = 0; i < n; ++i) {
    y[i] = values[i] * std::exp(2.0 * envelope_rate * times[i]);
    ymax = std::max(ymax, std::abs(y[i]));
  }

  const double q = std::exp(-2.0 * envelope_rate * h);
  std::vector<double> z(n - 2);
  double zmax = 0.0;
  for (size_t i = 0; i + 2 < n; ++i) {
    z[i] = (y[i + 2] - y[i + 1]) - q * (y[i + 1] - y[i]);
    zmax = std::max(zmax, std::abs(z[i]));
  }
  if (zmax == 0.0) {
    out.diagnostic = "no oscillatory component";
    return out;
  }

  // Zero crossings with 5% hysteresis.
  const double thr = 0.05 * zmax;
  std::vector<double> crossings;
  int sign = 0;
  size_t last_strong = 0;
  for (size_t i = 0; i < z.size(); ++i) {
    if (std::abs(z[i]) < thr) continue;
    const int s = z[i] > 0.0 ? 1 : -1;
    if (sign != 0 && s != sign) {
      for (size_t k = last_strong; k < i; ++k) {
        if ((z[k] > 0.0) != (z[k + 1] > 0.0)) {
          // z[k] corresponds to times[k + 1]; the offset cancels in spacings.
          crossings.push_back(times[k + 1] + h * z[k] / (z[k] - z[k + 1]));
          break;
        }
      }
    }
    sign = s;
    last_strong = i;
  }
  out.crossings = static_cast<int>(crossings.size());
  if (out.crossings < opts.min_crossings) {
    out.diagnostic = fmt::format("only {} zero crossings", out.crossings);
    return out;
  }

  const double omega =
      M_PI * static_cast<double>(crossings.size() - 1) / (crossings.back() - crossings.front());
  // Amplitude of the beat in y, undoing the filter gain at this frequency.
  const Complex step = std::exp(Complex(0.0, omega * h));
  const double gain = std::abs(step - 1.0) * std::abs(step - q);
  out.relative_amplitude = ymax > 0.0 ? zmax / gain / ymax : 0.0;
  if (out.relative_amplitude < opts.min_relative_amplitude) {
    out.diagnostic = fmt::format("oscillation amplitude {:.3g} below noise floor",
                                 out.relative_amplitude);
    return out;
  }
  out.two_f = omega;
  return out;
}

BeatMeasurement measure_beats(const TimeSeries& series, Level level, double envelope_rate,
                              const BeatOptions& opts) {
  const std::vector<double> pop = series.population(idx(level));
  return measure_beats(series.times, pop, envelope_rate, opts);
}

}  // namespace qbeat
