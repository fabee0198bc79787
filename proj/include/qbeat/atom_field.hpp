#pragma once

#include "qbeat/linalg.hpp"

#include <optional>
#include <utility>

namespace qbeat {

/// Bare atomic level energies relative to |g>, in units of the reference
/// cavity rate. Cascade ordering: e lies above both intermediate levels.
struct LevelScheme {
  double omega_eg = 0.0;
  double omega_1g = 0.0;
  double omega_2g = 0.0;

  /// Half the splitting of the intermediate levels.
  double half_splitting() const { return (omega_1g - omega_2g) / 2.0; }
  void validate() const;
};

struct CavityParams {
  double omega_a = 0.0;
  double omega_b = 0.0;
  double kappa_a = 1.0;
  double kappa_b = 1.0;

  void validate() const;
};

/// Detunings of the two modes from the four atomic transitions.
struct Detunings {
  double upper_1 = 0.0;  ///< omega_e1 - omega_a
  double upper_2 = 0.0;  ///< omega_e2 - omega_a
  double lower_1 = 0.0;  ///< omega_1g - omega_b
  double lower_2 = 0.0;  ///< omega_2g - omega_b
};

Detunings detunings(const LevelScheme& levels, const CavityParams& cavity);

/// Atom-mode coupling constants (vacuum Rabi frequencies, complex).
struct CouplingSet {
  Complex g_1e{0.0};
  Complex g_2e{0.0};
  Complex g_g1{0.0};
  Complex g_g2{0.0};

  void validate() const;
};

/// Transition dipoles, cavity polarizations and the propagation axis.
struct DipoleGeometry {
  ComplexVector3 d_1e = ComplexVector3::Zero();
  ComplexVector3 d_2e = ComplexVector3::Zero();
  ComplexVector3 d_g1 = ComplexVector3::Zero();
  ComplexVector3 d_g2 = ComplexVector3::Zero();
  ComplexVector3 epsilon_a = ComplexVector3::UnitX();
  ComplexVector3 epsilon_b = ComplexVector3::UnitX();
  RealVector3 k_hat = RealVector3::UnitY();

  /// Transversality and unit norm of both polarizations.
  void validate() const;
};

/// Prefactors of the interference terms of the reduced master equation.
/// Each multiplies the element indicated and carries an e^{+-2i Omega t}
/// phase in the interaction picture.
struct CrossCoefficients {
  /// 2 G_1e G_2e* (ka + i W) / ((ka + i D2)(ka - i D1)); feeds rho_12 from rho_ee.
  Complex upper_source{0.0};
  /// 2 G_g1 G_g2* (kb - i W) / ((kb + i D2')(kb - i D1')); feeds rho_gg from rho_12.
  Complex ground_feed{0.0};
  /// G_g1* G_g2 / (kb - i D2'); coefficient of A_12 rho.
  Complex lower_left{0.0};
  /// G_g1* G_g2 / (kb + i D1'); coefficient of rho A_12.
  Complex lower_right{0.0};
};

/// Cavity-induced decay rates, level shifts and interference prefactors.
struct RateSet {
  double gamma_1 = 0.0;   ///< e -> 1
  double gamma_2 = 0.0;   ///< e -> 2
  double gamma_1p = 0.0;  ///< 1 -> g
  double gamma_2p = 0.0;  ///< 2 -> g
  double delta_1 = 0.0;
  double delta_2 = 0.0;
  double delta_1p = 0.0;
  double delta_2p = 0.0;
  double omega = 0.0;  ///< half splitting of the intermediate levels
  CrossCoefficients cross;
  /// G G* / (kappa + i Omega); present only for the fully symmetric tuning.
  std::optional<Complex> alpha;
};

/// Tolerance used to decide whether a configuration is the symmetric one.
inline constexpr double kSymmetryTolerance = 1e-9;

/// Circular dipoles of a j=1 -> j=0 transition for reduced element |d|:
/// first = d_g1 = -|d|(x + iy), second = d_g2 = |d|(x - iy).
std::pair<ComplexVector3, ComplexVector3> sigma_dipoles(double reduced_d);

/// (2 pi omega / V)^{1/2} (d . eps) with the constants folded into `scale`:
/// returns sqrt(scale * mode_omega / volume) * (d . eps).
Complex coupling_constant(const ComplexVector3& dipole,
                          const ComplexVector3& polarization,
                          double mode_omega, double volume,
                          double scale = 1.0);

/// scale * (d1 . eps)(d2* . eps*) for a single pre-selected polarization.
Complex preselected_product(const ComplexVector3& d1, const ComplexVector3& d2,
                            const ComplexVector3& pol, double scale = 1.0);

/// Orthonormal real polarization pair transverse to `k_hat`.
std::pair<RealVector3, RealVector3> transverse_basis(const RealVector3& k_hat);

/// Sum of `preselected_product` over both transverse polarizations.
Complex summed_product(const ComplexVector3& d1, const ComplexVector3& d2,
                       const RealVector3& k_hat, double scale = 1.0);

/// Free-space interference between two decay channels requires
/// d1 . d2* != 0.
bool interference_condition(const ComplexVector3& d1, const ComplexVector3& d2);

/// Couplings from dipoles and polarizations with a common scale factor per
/// mode (the sqrt(2 pi omega / (hbar V)) prefactor).
CouplingSet couplings_from_geometry(const DipoleGeometry& geometry,
                                    double scale_a, double scale_b);

RateSet derive_rates(const CouplingSet& couplings, const LevelScheme& levels,
                     const CavityParams& cavity);

/// Parameters of the symmetric tuning: all |G| equal, kappa_a = kappa_b,
/// both modes at the centre of the intermediate doublet.
struct SymmetricTuning {
  double g = 1.0;
  double kappa = 1.0;
  double omega = 1.0;
  double omega_a = 100.0;
  double omega_b = 100.0;

  LevelScheme levels() const;
  CavityParams cavity() const;
  CouplingSet couplings() const;
};

/// Recognizes the symmetric tuning in a general configuration.
std::optional<SymmetricTuning> detect_symmetric(const CouplingSet& couplings,
                                                const LevelScheme& levels,
                                                const CavityParams& cavity,
                                                double tol = kSymmetryTolerance);

}  // namespace qbeat
