#include "qbeat/atom_field.hpp"

#include "qbeat/errors.hpp"

#include <fmt/format.h>

#include <cmath>

namespace qbeat {

namespace {

// Bilinear (non-conjugating) product a . b.
Complex bilinear(const ComplexVector3& a, const ComplexVector3& b) {
  return a(0) * b(0) + a(1) * b(1) + a(2) * b(2);
}

bool finite(Complex z) { return std::isfinite(z.real()) && std::isfinite(z.imag()); }

bool close(double a, double b, double tol) {
  return std::abs(a - b) <= tol * std::max({1.0, std::abs(a), std::abs(b)});
}

bool close(Complex a, Complex b, double tol) {
  return std::abs(a - b) <= tol * std::max({1.0, std::abs(a), std::abs(b)});
}

}  // namespace

void LevelScheme::validate() const {
  if (!std::isfinite(omega_eg) || !std::isfinite(omega_1g) || !std::isfinite(omega_2g))
    throw ValidationError("level energies must be finite", "levels");
  if (!(omega_eg > omega_1g && omega_eg > omega_2g))
    throw ValidationError("cascade ordering requires omega_eg above omega_1g and omega_2g",
                          "levels.omega_eg");
}

void CavityParams::validate() const {
  if (!std::isfinite(omega_a) || !std::isfinite(omega_b))
    throw ValidationError("mode frequencies must be finite", "cavity");
  if (!(kappa_a > 0.0) || !std::isfinite(kappa_a))
    throw ValidationError("must be positive", "cavity.kappa_a");
  if (!(kappa_b > 0.0) || !std::isfinite(kappa_b))
    throw ValidationError("must be positive", "cavity.kappa_b");
}

void CouplingSet::validate() const {
  if (!finite(g_1e) || !finite(g_2e) || !finite(g_g1) || !finite(g_g2))
    throw ValidationError("coupling constants must be finite", "couplings");
}

void DipoleGeometry::validate() const {
  constexpr double tol = 1e-12;
  const ComplexVector3 k = k_hat.cast<Complex>();
  if (std::abs(k_hat.norm() - 1.0) > tol)
    throw ValidationError("propagation direction must be a unit vector", "dipoles.k_hat");
  for (const auto& [pol, name] : {std::pair{&epsilon_a, "dipoles.epsilon_a"},
                                  std::pair{&epsilon_b, "dipoles.epsilon_b"}}) {
    if (std::abs(pol->norm() - 1.0) > tol)
      throw ValidationError("polarization must have unit norm", name);
    if (std::abs(bilinear(*pol, k)) > tol)
      throw ValidationError("polarization must be transverse to k_hat", name);
  }
}

Detunings detunings(const LevelScheme& levels, const CavityParams& cavity) {
  return {
      .upper_1 = (levels.omega_eg - levels.omega_1g) - cavity.omega_a,
      .upper_2 = (levels.omega_eg - levels.omega_2g) - cavity.omega_a,
      .lower_1 = levels.omega_1g - cavity.omega_b,
      .lower_2 = levels.omega_2g - cavity.omega_b,
  };
}

std::pair<ComplexVector3, ComplexVector3> sigma_dipoles(double reduced_d) {
  if (!(reduced_d > 0.0)) throw ValidationError("reduced dipole must be positive");
  const ComplexVector3 plus(Complex(1.0), kI, Complex(0.0));
  const ComplexVector3 minus(Complex(1.0), -kI, Complex(0.0));
  return {-reduced_d * plus, reduced_d * minus};
}

Complex coupling_constant(const ComplexVector3& dipole, const ComplexVector3& polarization,
                          double mode_omega, double volume, double scale) {
  if (!(volume > 0.0)) throw ValidationError("cavity volume must be positive");
  if (!(mode_omega > 0.0)) throw ValidationError("mode frequency must be positive");
  return std::sqrt(scale * mode_omega / volume) * bilinear(dipole, polarization);
}

Complex preselected_product(const ComplexVector3& d1, const ComplexVector3& d2,
                            const ComplexVector3& pol, double scale) {
  return scale * bilinear(d1, pol) * std::conj(bilinear(d2, pol));
}

std::pair<RealVector3, RealVector3> transverse_basis(const RealVector3& k_hat) {
  if (std::abs(k_hat.norm() - 1.0) > 1e-12)
    throw ValidationError("propagation direction must be a unit vector");
  int axis = 0;
  for (int i = 1; i < 3; ++i)
    if (std::abs(k_hat(i)) < std::abs(k_hat(axis))) axis = i;
  RealVector3 e1 = RealVector3::Unit(axis);
  e1 -= e1.dot(k_hat) * k_hat;
  e1.normalize();
  RealVector3 e2 = k_hat.cross(e1);
  return {e1, e2};
}

Complex summed_product(const ComplexVector3& d1, const ComplexVector3& d2,
                       const RealVector3& k_hat, double scale) {
  const auto [e1, e2] = transverse_basis(k_hat);
  return preselected_product(d1, d2, e1.cast<Complex>(), scale) +
         preselected_product(d1, d2, e2.cast<Complex>(), scale);
}

bool interference_condition(const ComplexVector3& d1, const ComplexVector3& d2) {
  return std::abs(bilinear(d1, d2.conjugate())) > 1e-12;
}

CouplingSet couplings_from_geometry(const DipoleGeometry& geometry, double scale_a,
                                    double scale_b) {
  geometry.validate();
  const double pa = std::sqrt(scale_a);
  const double pb = std::sqrt(scale_b);
  return {
      .g_1e = pa * bilinear(geometry.d_1e, geometry.epsilon_a),
      .g_2e = pa * bilinear(geometry.d_2e, geometry.epsilon_a),
      .g_g1 = pb * bilinear(geometry.d_g1, geometry.epsilon_b),
      .g_g2 = pb * bilinear(geometry.d_g2, geometry.epsilon_b),
  };
}

RateSet derive_rates(const CouplingSet& c, const LevelScheme& levels,
                     const CavityParams& cavity) {
  const Detunings d = detunings(levels, cavity);
  const double ka = cavity.kappa_a;
  const double kb = cavity.kappa_b;
  const double w = levels.half_splitting();

  auto lorentz = [](Complex g, double kappa, double detuning) {
    return std::norm(g) / (kappa * kappa + detuning * detuning);
  };

  RateSet r;
  r.omega = w;
  r.gamma_1 = lorentz(c.g_1e, ka, d.upper_1) * ka;
  r.gamma_2 = lorentz(c.g_2e, ka, d.upper_2) * ka;
  r.gamma_1p = lorentz(c.g_g1, kb, d.lower_1) * kb;
  r.gamma_2p = lorentz(c.g_g2, kb, d.lower_2) * kb;
  r.delta_1 = lorentz(c.g_1e, ka, d.upper_1) * d.upper_1;
  r.delta_2 = lorentz(c.g_2e, ka, d.upper_2) * d.upper_2;
  r.delta_1p = lorentz(c.g_g1, kb, d.lower_1) * d.lower_1;
  r.delta_2p = lorentz(c.g_g2, kb, d.lower_2) * d.lower_2;

  r.cross.upper_source = 2.0 * c.g_1e * std::conj(c.g_2e) * Complex(ka, w) /
                         (Complex(ka, d.upper_2) * Complex(ka, -d.upper_1));
  r.cross.ground_feed = 2.0 * c.g_g1 * std::conj(c.g_g2) * Complex(kb, -w) /
                        (Complex(kb, d.lower_2) * Complex(kb, -d.lower_1));
  r.cross.lower_left = std::conj(c.g_g1) * c.g_g2 / Complex(kb, -d.lower_2);
  r.cross.lower_right = std::conj(c.g_g1) * c.g_g2 / Complex(kb, d.lower_1);

  if (auto sym = detect_symmetric(c, levels, cavity))
    r.alpha = sym->g * sym->g / Complex(sym->kappa, sym->omega);
  return r;
}

LevelScheme SymmetricTuning::levels() const {
  return {.omega_eg = omega_a + omega_b,
          .omega_1g = omega_b + omega,
          .omega_2g = omega_b - omega};
}

CavityParams SymmetricTuning::cavity() const {
  return {.omega_a = omega_a, .omega_b = omega_b, .kappa_a = kappa, .kappa_b = kappa};
}

CouplingSet SymmetricTuning::couplings() const {
  return {.g_1e = g, .g_2e = g, .g_g1 = g, .g_g2 = g};
}

std::optional<SymmetricTuning> detect_symmetric(const CouplingSet& c, const LevelScheme& levels,
                                                const CavityParams& cavity, double tol) {
  const double g = std::abs(c.g_1e);
  if (!close(std::abs(c.g_2e), g, tol) || !close(std::abs(c.g_g1), g, tol) ||
      !close(std::abs(c.g_g2), g, tol))
    return std::nullopt;
  // The upper and lower interference products must carry the same phase.
  if (!close(c.g_1e * std::conj(c.g_2e), std::conj(c.g_g1) * c.g_g2, tol)) return std::nullopt;
  if (!close(cavity.kappa_a, cavity.kappa_b, tol)) return std::nullopt;
  const double w = levels.half_splitting();
  const Detunings d = detunings(levels, cavity);
  if (!close(d.upper_1, -w, tol) || !close(d.upper_2, w, tol) || !close(d.lower_1, w, tol) ||
      !close(d.lower_2, -w, tol))
    return std::nullopt;
  return SymmetricTuning{.g = g,
                         .kappa = cavity.kappa_a,
                         .omega = w,
                         .omega_a = cavity.omega_a,
                         .omega_b = cavity.omega_b};
}

}  // namespace qbeat
