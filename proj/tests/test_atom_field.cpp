#include "qbeat/atom_field.hpp"
#include "qbeat/errors.hpp"

#include <doctest.h>

#include <random>

using namespace qbeat;

namespace {

constexpr double kTight = 1e-12;

bool near(Complex a, Complex b, double tol = kTight) { return std::abs(a - b) <= tol; }

}  // namespace

TEST_CASE("circular dipoles") {
  const auto [d1, d2] = sigma_dipoles(1.0);
  CHECK(near(d1(0), -1.0));
  CHECK(near(d1(1), Complex(0, -1)));
  CHECK(near(d1(2), 0.0));
  CHECK(near(d2(0), 1.0));
  CHECK(near(d2(1), Complex(0, -1)));

  // d1 . d2* written out component by component
  Complex dot = 0.0;
  for (int i = 0; i < 3; ++i) dot += d1(i) * std::conj(d2(i));
  CHECK(std::abs(dot) < kTight);

  const auto [e1, e2] = sigma_dipoles(2.0);
  CHECK((e1 - 2.0 * d1).norm() < kTight);
  CHECK((e2 - 2.0 * d2).norm() < kTight);
}

TEST_CASE("coupling constant") {
  const auto [d1, d2] = sigma_dipoles(1.0);
  const ComplexVector3 x = ComplexVector3::UnitX();
  const ComplexVector3 z = ComplexVector3::UnitZ();
  CHECK(near(coupling_constant(d1, x, 1.0, 1.0), -1.0));
  CHECK(near(coupling_constant(d1, z, 1.0, 1.0), 0.0));
  const Complex g1 = coupling_constant(d2, x, 3.0, 2.0);
  const Complex g2 = coupling_constant(d2, x, 3.0, 4.0);
  CHECK(near(g1 / g2, std::sqrt(2.0)));
  CHECK_THROWS_AS(coupling_constant(d1, x, 1.0, 0.0), ValidationError);
}

TEST_CASE("preselected and summed polarization products") {
  const double d = 1.7;
  const auto [d1, d2] = sigma_dipoles(d);
  const ComplexVector3 x = ComplexVector3::UnitX();
  const ComplexVector3 y = ComplexVector3::UnitY();

  CHECK(near(preselected_product(d1, d2, x), -d * d));
  // y projections: (d1)_y = -i d, (d2)_y = -i d
  const Complex expect_y = Complex(0, -d) * std::conj(Complex(0, -d));
  CHECK(near(preselected_product(d1, d2, y), expect_y));
  CHECK(near(preselected_product(ComplexVector3::Zero(), d2, x), 0.0));

  // Dipoles in the x-y plane are transverse to z.
  CHECK(std::abs(summed_product(d1, d2, RealVector3::UnitZ())) < kTight);
  CHECK(near(summed_product(x, x, RealVector3::UnitZ(), 2.5), 2.5));

  SUBCASE("transverse pair equals the free-space product") {
    std::mt19937_64 rng(11);
    std::normal_distribution<double> N;
    for (int trial = 0; trial < 20; ++trial) {
      RealVector3 k(N(rng), N(rng), N(rng));
      k.normalize();
      const auto [e1, e2] = transverse_basis(k);
      CHECK(std::abs(e1.dot(k)) < kTight);
      CHECK(std::abs(e2.dot(k)) < kTight);
      CHECK(std::abs(e1.dot(e2)) < kTight);
      ComplexVector3 a = Complex(N(rng), N(rng)) * e1.cast<Complex>() + Complex(N(rng), N(rng)) * e2.cast<Complex>();
      ComplexVector3 b = Complex(N(rng), N(rng)) * e1.cast<Complex>() + Complex(N(rng), N(rng)) * e2.cast<Complex>();
      Complex direct = 0.0;
      for (int i = 0; i < 3; ++i) direct += a(i) * std::conj(b(i));
      CHECK(near(summed_product(a, b, k), direct, 1e-11));

      // A second transverse basis, rotated by an arbitrary angle.
      const double th = N(rng);
      const RealVector3 f1 = std::cos(th) * e1 + std::sin(th) * e2;
      const RealVector3 f2 = -std::sin(th) * e1 + std::cos(th) * e2;
      const Complex rotated = preselected_product(a, b, f1.cast<Complex>()) +
                              preselected_product(a, b, f2.cast<Complex>());
      CHECK(near(rotated, summed_product(a, b, k), 1e-11));
    }
  }
}

TEST_CASE("interference condition") {
  const auto [d1, d2] = sigma_dipoles(1.0);
  CHECK_FALSE(interference_condition(d1, d2));
  CHECK(interference_condition(ComplexVector3::UnitX(), 2.0 * ComplexVector3::UnitX()));
  CHECK_FALSE(interference_condition(d1, ComplexVector3::Zero()));
}

TEST_CASE("rates on resonance") {
  const LevelScheme levels{.omega_eg = 200.0, .omega_1g = 100.0, .omega_2g = 100.0};
  const CavityParams cavity{.omega_a = 100.0, .omega_b = 100.0};
  const CouplingSet g{1.0, 1.0, 1.0, 1.0};
  const RateSet r = derive_rates(g, levels, cavity);
  CHECK(r.gamma_1 == doctest::Approx(1.0));
  CHECK(r.gamma_2p == doctest::Approx(1.0));
  CHECK(r.delta_1 == doctest::Approx(0.0));
  CHECK(r.delta_2p == doctest::Approx(0.0));
  REQUIRE(r.alpha.has_value());
  CHECK(near(*r.alpha, 1.0));
}

TEST_CASE("rates for the symmetric figure configuration") {
  const SymmetricTuning tuning{.g = 1.0, .kappa = 1.0, .omega = 1.0};
  const Detunings d = detunings(tuning.levels(), tuning.cavity());
  CHECK(d.upper_1 == doctest::Approx(-1.0));
  CHECK(d.upper_2 == doctest::Approx(1.0));
  CHECK(d.lower_1 == doctest::Approx(1.0));
  CHECK(d.lower_2 == doctest::Approx(-1.0));

  const RateSet r = derive_rates(tuning.couplings(), tuning.levels(), tuning.cavity());
  for (double gam : {r.gamma_1, r.gamma_2, r.gamma_1p, r.gamma_2p}) CHECK(gam == doctest::Approx(0.5));
  CHECK(r.delta_1p == doctest::Approx(0.5));
  CHECK(r.delta_2p == doctest::Approx(-0.5));
  CHECK(r.omega == doctest::Approx(1.0));
  REQUIRE(r.alpha.has_value());
  CHECK(std::norm(*r.alpha) == doctest::Approx(0.5));

  // alpha = G^2/(kappa + i Omega); cross terms reduce to multiples of it.
  const Complex alpha(0.5, -0.5);
  CHECK(near(r.cross.upper_source, 2.0 * alpha));
  CHECK(near(r.cross.ground_feed, 2.0 * std::conj(alpha)));
  CHECK(near(r.cross.lower_left, alpha));
  CHECK(near(r.cross.lower_right, alpha));
  // Trace conservation needs lower_left + lower_right = conj(ground_feed).
  CHECK(near(r.cross.lower_left + r.cross.lower_right, std::conj(r.cross.ground_feed)));
}

TEST_CASE("degenerate symmetric tuning") {
  const SymmetricTuning tuning{.g = 1.3, .kappa = 0.7, .omega = 0.0};
  const RateSet r = derive_rates(tuning.couplings(), tuning.levels(), tuning.cavity());
  CHECK(r.delta_1p == doctest::Approx(0.0));
  CHECK(r.delta_2p == doctest::Approx(0.0));
  REQUIRE(r.alpha.has_value());
  CHECK(near(*r.alpha, 1.3 * 1.3 / 0.7));
}

TEST_CASE("symmetric tuning detection") {
  const SymmetricTuning tuning{.g = 0.8, .kappa = 1.0, .omega = 2.0};
  auto found = detect_symmetric(tuning.couplings(), tuning.levels(), tuning.cavity());
  REQUIRE(found.has_value());
  CHECK(found->omega == doctest::Approx(2.0));
  CHECK(found->g == doctest::Approx(0.8));

  CouplingSet unequal = tuning.couplings();
  unequal.g_g2 = 0.5;
  CHECK_FALSE(detect_symmetric(unequal, tuning.levels(), tuning.cavity()));

  CavityParams shifted = tuning.cavity();
  shifted.omega_b += 0.3;
  CHECK_FALSE(detect_symmetric(tuning.couplings(), tuning.levels(), shifted));
}

TEST_CASE("parameter validation") {
  CHECK_THROWS_AS((LevelScheme{.omega_eg = 1.0, .omega_1g = 2.0, .omega_2g = 0.5}.validate()), ValidationError);
  CHECK_THROWS_AS((CavityParams{.omega_a = 1.0, .omega_b = 1.0, .kappa_a = 0.0}.validate()), ValidationError);
  DipoleGeometry geom;
  geom.epsilon_a = ComplexVector3::UnitY();  // along k_hat
  CHECK_THROWS_AS(geom.validate(), ValidationError);
}

TEST_CASE("couplings from geometry") {
  DipoleGeometry geom;
  const auto [d1, d2] = sigma_dipoles(1.0);
  geom.d_1e = d2;
  geom.d_2e = d1;
  geom.d_g1 = d1;
  geom.d_g2 = d2;
  const CouplingSet c = couplings_from_geometry(geom, 4.0, 1.0);
  CHECK(near(c.g_1e, 2.0));
  CHECK(near(c.g_2e, -2.0));
  CHECK(near(c.g_g1, -1.0));
  CHECK(near(c.g_g2, 1.0));
  CHECK(near(c.g_g1 * std::conj(c.g_g2), preselected_product(d1, d2, geom.epsilon_b)));
}
