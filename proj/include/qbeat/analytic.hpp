#pragma once

#include "qbeat/atom_field.hpp"
#include "qbeat/time_series.hpp"

#include <optional>
#include <span>
#include <string>

namespace qbeat {

struct Populations {
  double rho_ee = 0.0;
  double rho_11 = 0.0;
  double rho_22 = 0.0;
  double rho_gg = 0.0;
};

/// Rates of the rate equations left after dropping the rapidly rotating
/// interference terms.
struct SecularParams {
  double gamma_1 = 0.0;
  double gamma_2 = 0.0;
  double gamma_1p = 0.0;
  double gamma_2p = 0.0;

  static SecularParams from_rates(const RateSet& rates);
  void validate() const;
};

enum class SecularForm {
  /// Solves the rate equations exactly; the second exponential decays at
  /// the feeding rate 2(G1 + G2).
  kOdeConsistent,
  /// The commonly quoted form whose second exponential decays at
  /// 2(G1' + G2'). Coincides with kOdeConsistent only when G1+G2 = G1'+G2'.
  kAsPrinted,
};

/// Populations at time t for an atom starting in |e>.
Populations secular_solution(double t, const SecularParams& p,
                             SecularForm form = SecularForm::kOdeConsistent);

/// Symmetric tuning: equal couplings G, kappa_a = kappa_b = kappa, both
/// modes at the centre of the doublet split by 2 Omega.
struct SymmetricParams {
  double gamma = 0.0;
  double g = 0.0;
  double kappa = 1.0;
  double omega = 0.0;

  static SymmetricParams from_tuning(double g, double kappa, double omega);
  static SymmetricParams from_tuning(const SymmetricTuning& tuning);

  /// G G* / (kappa + i Omega)
  Complex alpha() const;
  /// Vacuum shift of level 1 (the negative of that of level 2).
  double delta_p() const;
  /// f^2 = (delta' + Omega)^2 - |alpha|^2; negative when f is imaginary.
  double f_squared() const;
  void validate() const;
};

enum class SymmetricForm {
  /// Exact solution of the symmetric element equations.
  kExact,
  /// Closed form with the oscillatory prefactor 2|alpha|^2/(G^2+f^2) as it
  /// is usually quoted. It does not vanish at t = 0 and is kept only for
  /// comparison. Undefined (throws std::domain_error) where f^2 = 0 or
  /// G^2 + f^2 = 0.
  kAsPrinted,
};

/// Populations for an atom starting in |e> under the symmetric tuning with
/// the interference terms switched on. rho_11 = rho_22.
Populations symmetric_solution(double t, const SymmetricParams& p,
                               SymmetricForm form = SymmetricForm::kExact);

/// Intermediate-level population as a function of the decay rate, |alpha|^2
/// and f^2. Analytic in f^2: the trigonometric terms continue to hyperbolic
/// ones for f^2 < 0 and every removable singularity (f = 0, G^2 + f^2 = 0)
/// is evaluated through its limit.
double symmetric_intermediate(double t, double gamma, double alpha_sq, double f_sq);

struct BeatPrediction {
  double two_f_squared = 0.0;  ///< (2f)^2; negative when f is imaginary
  Complex two_f{0.0};          ///< real, or purely imaginary without beats
  bool beats = false;          ///< (delta' + Omega)^2 > |alpha|^2
};

BeatPrediction beat_frequency(const SymmetricParams& p);

struct BeatMeasurement {
  std::optional<double> two_f;  ///< angular frequency of the beat
  int crossings = 0;
  double relative_amplitude = 0.0;
  std::string diagnostic;
};

struct BeatOptions {
  /// Oscillations whose amplitude relative to the largest scaled value is
  /// below this are treated as numerical noise.
  double min_relative_amplitude = 1e-6;
  /// Fewer zero crossings than this count as no oscillation.
  int min_crossings = 3;
};

/// Estimates the beat frequency of samples p(t) on a uniform grid.
///
/// The signal y = p(t) e^{2 gamma t} is a constant plus a multiple of
/// e^{-2 gamma t} plus the beat. The exact discrete annihilator of the first
/// two, (S - 1)(S - e^{-2 gamma h}) with S the unit shift, leaves a pure
/// sinusoid whose zero crossings are spaced by pi / (2f).
BeatMeasurement measure_beats(std::span<const double> times, std::span<const double> values,
                              double envelope_rate, const BeatOptions& opts = {});

/// Same, reading population `level` from an atomic time series.
BeatMeasurement measure_beats(const TimeSeries& series, Level level, double envelope_rate,
                              const BeatOptions& opts = {});

}  // namespace qbeat
