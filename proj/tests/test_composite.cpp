#include "qbeat/composite.hpp"
#include "qbeat/errors.hpp"

#include <doctest.h>

#include <random>

using namespace qbeat;

namespace {

CompositeModel figure_model(double g, double omega = 1.0) {
  const SymmetricTuning t{.g = g, .kappa = 1.0, .omega = omega, .omega_a = 20.0, .omega_b = 20.0};
  return {t.levels(), t.cavity(), t.couplings()};
}

ComplexMatrix random_state(int n, std::mt19937_64& rng) {
  std::normal_distribution<double> N;
  ComplexMatrix a(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) a(i, j) = {N(rng), N(rng)};
  ComplexMatrix rho = a * a.adjoint();
  return rho / rho.trace().real();
}

}  // namespace

TEST_CASE("Hamiltonian structure") {
  CompositeModel m = figure_model(0.7);
  m.couplings.g_1e = Complex(0.3, 0.4);
  const ComplexMatrix h = build_hamiltonian(m);
  REQUIRE(h.rows() == 16);
  CHECK(max_abs(h - h.adjoint()) <= 1e-14);
  const Complex elem = h(m.index(Level::kOne, 1, 0), m.index(Level::kE, 0, 0));
  CHECK(std::abs(elem - (-kI * m.couplings.g_1e)) < 1e-15);
  const Complex lower = h(m.index(Level::kG, 0, 1), m.index(Level::kTwo, 0, 0));
  CHECK(std::abs(lower - (-kI * m.couplings.g_g2)) < 1e-15);

  SUBCASE("uncoupled Hamiltonian is diagonal with bare energies") {
    const CompositeModel free = figure_model(0.0);
    const ComplexMatrix h0 = build_hamiltonian(free);
    CHECK(max_abs(h0 - ComplexMatrix(h0.diagonal().asDiagonal())) == 0.0);
    const int k = free.index(Level::kOne, 1, 1);
    CHECK(h0(k, k).real() == doctest::Approx(free.levels.omega_1g + free.cavity.omega_a + free.cavity.omega_b));
  }
}

TEST_CASE("bare energies for larger truncations") {
  CompositeModel m = figure_model(0.0);
  m.n_max_b = 2;
  const ComplexMatrix h0 = build_hamiltonian(m);
  const int k = m.index(Level::kOne, 1, 2);
  CHECK(h0(k, k).real() == doctest::Approx(m.levels.omega_1g + m.cavity.omega_a + 2.0 * m.cavity.omega_b));
}

TEST_CASE("frame generator is conserved") {
  const CompositeModel m = figure_model(0.8, 1.3);
  const ComplexMatrix n = frame_generator(m);
  CHECK(max_abs(commutator(n, build_hamiltonian(m))) < 1e-12);
  // Damping commutes with the rotation: L(U rho U^dag) = U L(rho) U^dag.
  std::mt19937_64 rng(5);
  const ComplexMatrix rho = random_state(16, rng);
  // n is diagonal in the product basis
  const ComplexMatrix u = n.diagonal().unaryExpr([](Complex x) { return std::exp(Complex(0, 0.37) * x); }).asDiagonal();
  const Superoperator l = liouvillian(m);
  CHECK(max_abs(l.apply(u * rho * u.adjoint()) - u * l.apply(rho) * u.adjoint()) < 1e-11);
}

TEST_CASE("Lindblad right-hand side") {
  const CompositeModel m = figure_model(0.5);
  const DensityMatrix ground = vacuum_product_state(m, Level::kG);
  CHECK(max_abs(lindblad_rhs(ground, m)) < 1e-15);

  const CompositeModel free = figure_model(0.0);
  const DensityMatrix photon = DensityMatrix::basis_state(16, free.index(Level::kG, 1, 0));
  const ComplexMatrix d = lindblad_rhs(photon, free);
  const int k = free.index(Level::kG, 1, 0);
  CHECK(d(k, k).real() == doctest::Approx(-2.0 * free.cavity.kappa_a));

  std::mt19937_64 rng(9);
  for (int i = 0; i < 20; ++i) {
    const DensityMatrix rho(random_state(16, rng));
    const ComplexMatrix r = lindblad_rhs(rho, m);
    CHECK(std::abs(r.trace()) < 1e-13);
    CHECK(max_abs(r - r.adjoint()) < 1e-13);
  }
  CHECK_THROWS_AS(lindblad_rhs(DensityMatrix::basis_state(4, 0), m), DimensionError);
}

TEST_CASE("vectorized Liouvillian matches the matrix-free action") {
  const CompositeModel m = figure_model(0.6);
  const Superoperator l = liouvillian(m);
  const ComplexMatrix big = l.matrix();
  REQUIRE(big.rows() == 256);
  std::mt19937_64 rng(3);
  std::normal_distribution<double> N;
  for (int i = 0; i < 5; ++i) {
    ComplexMatrix x(16, 16);  // not Hermitian on purpose
    for (int r = 0; r < 16; ++r)
      for (int c = 0; c < 16; ++c) x(r, c) = {N(rng), N(rng)};
    const Eigen::VectorXcd v = Eigen::Map<const Eigen::VectorXcd>(x.data(), 256);
    const Eigen::VectorXcd lv = big * v;
    const ComplexMatrix y = Eigen::Map<const ComplexMatrix>(lv.data(), 16, 16);
    CHECK(max_abs(y - l.apply(x)) < 1e-11);
  }
}

TEST_CASE("composite evolution") {
  SUBCASE("uncoupled atom is stationary") {
    const CompositeModel m = figure_model(0.0);
    const DensityMatrix rho0 = vacuum_product_state(m, Level::kE);
    const TimeSeries ts = evolve_composite(m, rho0, uniform_grid(5.0, 11));
    REQUIRE(ts.ok());
    for (const auto& s : ts.states) CHECK(max_abs(s.matrix() - rho0.matrix()) < 1e-14);
  }

  SUBCASE("rotating-frame integration equals direct integration") {
    const CompositeModel m = figure_model(0.7, 1.2);
    const DensityMatrix rho0 = vacuum_product_state(m, Level::kE);
    const auto grid = uniform_grid(2.0, 21);
    const TimeSeries fast = evolve_composite(m, rho0, grid);
    const Superoperator l = liouvillian(m);
    IntegratorConfig cfg;
    cfg.rel_tol = 1e-11;
    cfg.abs_tol = 1e-13;
    const MatrixRhs rhs = [&l](double, const ComplexMatrix& y, ComplexMatrix& dy) { dy = l.apply(y); };
    const Trajectory direct = integrate(rhs, rho0.matrix(), grid, cfg);
    REQUIRE(direct.ok());
    for (size_t i = 0; i < grid.size(); ++i) CHECK(max_abs(fast.states[i].matrix() - direct.states[i]) < 1e-7);
  }

  SUBCASE("trace, positivity and excitation number") {
    const CompositeModel m = figure_model(1.0, 1.0);
    const auto grid = uniform_grid(10.0, 201);
    const TimeSeries ts = evolve_composite(m, vacuum_product_state(m, Level::kE), grid);
    REQUIRE(ts.ok());
    const ComplexMatrix n_exc = excitation_number(m);
    double prev = 2.0;
    for (const auto& s : ts.states) {
      CHECK(std::abs(s.trace() - 1.0) < 1e-9);
      const double n = (s.matrix() * n_exc).trace().real();
      CHECK(n <= prev + 1e-9);
      prev = n;
    }
    CHECK(ts.diagnostics.min_eigenvalue > -1e-8);
    CHECK(ts.diagnostics.max_drift_correction < 1e-8);
  }
}

TEST_CASE("reduction to the atom") {
  const CompositeModel m = figure_model(0.5);
  const auto grid = uniform_grid(4.0, 9);
  const TimeSeries full = evolve_composite(m, vacuum_product_state(m, Level::kE), grid);
  const TimeSeries atom = reduced_from_composite(full, m);
  REQUIRE(atom.size() == full.size());
  CHECK(max_abs(atom.states[0].matrix() - projector(4, 0, 0)) == 0.0);
  for (size_t i = 0; i < grid.size(); ++i) {
    const DensityMatrix traced = partial_trace_field(full.states[i], m.dims());
    for (int k = 0; k < 4; ++k) CHECK(atom.states[i](k, k).real() == doctest::Approx(traced(k, k).real()));
    // The phase map keeps moduli.
    CHECK(std::abs(atom.states[i](1, 2)) == doctest::Approx(std::abs(traced(1, 2))));
  }
}

TEST_CASE("elimination check") {
  EliminationCase c;
  const SymmetricTuning t{.g = 1.0, .kappa = 1.0, .omega = 1.0};
  c.levels = t.levels();
  c.cavity = t.cavity();
  c.samples = 201;

  SUBCASE("no coupling") {
    const std::vector<double> g{0.0};
    const EliminationReport r = validate_elimination(c, g);
    REQUIRE(r.points.size() == 1);
    CHECK(r.points[0].max_population_deviation == 0.0);
    CHECK(r.passed);
  }
  SUBCASE("deviation shrinks with the coupling") {
    const std::vector<double> g{0.2, 0.1};
    const EliminationReport r = validate_elimination(c, g);
    REQUIRE(r.points.size() == 2);
    CHECK(r.points[1].max_population_deviation < r.points[0].max_population_deviation);
    CHECK(r.points[1].max_population_deviation < 5e-2);
    CHECK(r.monotone);
    CHECK(r.scaling_exponent > 1.5);
  }
  SUBCASE("bad input") {
    const std::vector<double> neg{-0.1};
    CHECK_THROWS_AS(validate_elimination(c, neg), ValidationError);
    CHECK_THROWS_AS(validate_elimination(c, std::vector<double>{}), ValidationError);
  }
}
