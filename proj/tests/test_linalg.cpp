#include "qbeat/errors.hpp"
#include "qbeat/linalg.hpp"

#include <doctest.h>

#include <random>
#include <sstream>

using namespace qbeat;

namespace {

ComplexMatrix random_state(int n, std::mt19937_64& rng) {
  std::normal_distribution<double> N;
  ComplexMatrix a(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) a(i, j) = {N(rng), N(rng)};
  ComplexMatrix rho = a * a.adjoint();
  return rho / rho.trace().real();
}

}  // namespace

TEST_CASE("density matrix construction checks its invariants") {
  ComplexMatrix m = ComplexMatrix::Zero(2, 2);
  m(0, 0) = 0.5;
  m(1, 1) = 0.5;
  CHECK_NOTHROW(DensityMatrix{m});

  ComplexMatrix skew = m;
  skew(0, 1) = 0.1;
  CHECK_THROWS_AS(DensityMatrix{skew}, ValidationError);

  ComplexMatrix heavy = m * 1.1;
  CHECK_THROWS_AS(DensityMatrix{heavy}, ValidationError);

  ComplexMatrix negative = ComplexMatrix::Zero(2, 2);
  negative(0, 0) = 1.5;
  negative(1, 1) = -0.5;
  CHECK_THROWS_AS(DensityMatrix{negative}, ValidationError);

  CHECK_THROWS_AS(DensityMatrix{ComplexMatrix::Zero(2, 3)}, DimensionError);
}

TEST_CASE("basis and mixed states") {
  const DensityMatrix e = DensityMatrix::basis_state(4, 0);
  CHECK(e(0, 0) == Complex(1.0));
  CHECK(e.purity() == doctest::Approx(1.0));
  const DensityMatrix mixed = DensityMatrix::maximally_mixed(4);
  CHECK(mixed.purity() == doctest::Approx(0.25));
  CHECK(mixed.trace().real() == doctest::Approx(1.0));
}

TEST_CASE("commutator of Pauli matrices") {
  ComplexMatrix sx(2, 2), sy(2, 2), sz(2, 2);
  sx << 0, 1, 1, 0;
  sy << 0, -kI, kI, 0;
  sz << 1, 0, 0, -1;
  CHECK(max_abs(commutator(sx, sy) - 2.0 * kI * sz) < 1e-15);
  CHECK_THROWS_AS(commutator(sx, ComplexMatrix::Identity(3, 3)), DimensionError);
}

TEST_CASE("kron puts the first factor on the slow index") {
  ComplexMatrix a(2, 2), b(2, 2);
  a << 1, 2, 3, 4;
  b << 0, 1, 1, 0;
  const ComplexMatrix k = kron(a, b);
  REQUIRE(k.rows() == 4);
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j)
      for (int p = 0; p < 2; ++p)
        for (int q = 0; q < 2; ++q) CHECK(k(2 * i + p, 2 * j + q) == a(i, j) * b(p, q));
}

TEST_CASE("partial trace matches explicit index summation") {
  std::mt19937_64 rng(7);
  const ProductDims dims{kAtomDim, 3, 2};
  const ComplexMatrix rho = random_state(dims.total(), rng);
  const DensityMatrix reduced = partial_trace_field(DensityMatrix(rho), dims);

  ComplexMatrix expect = ComplexMatrix::Zero(kAtomDim, kAtomDim);
  for (int i = 0; i < kAtomDim; ++i)
    for (int j = 0; j < kAtomDim; ++j)
      for (int na = 0; na < dims.n_a; ++na)
        for (int nb = 0; nb < dims.n_b; ++nb)
          expect(i, j) += rho(i * 6 + na * 2 + nb, j * 6 + na * 2 + nb);
  CHECK(max_abs(reduced.matrix() - expect) < 1e-14);

  SUBCASE("product state returns the atomic factor") {
    const ComplexMatrix atom = random_state(kAtomDim, rng);
    const ComplexMatrix field = random_state(dims.field(), rng);
    CHECK(max_abs(partial_trace_field(DensityMatrix(kron(atom, field)), dims).matrix() - atom) < 1e-14);
  }
  SUBCASE("wrong dimensions") {
    CHECK_THROWS_AS(partial_trace_field(DensityMatrix::maximally_mixed(8), dims), DimensionError);
  }
}

TEST_CASE("hermitize_and_check repairs small drift and rejects large drift") {
  ComplexMatrix m = ComplexMatrix::Zero(2, 2);
  m(0, 0) = 0.6;
  m(1, 1) = 0.4 + 1e-10;
  m(0, 1) = Complex(0.1, 1e-11);
  m(1, 0) = Complex(0.1, 0.0);
  const DensityMatrix fixed = hermitize_and_check(m, 1e-8);
  CHECK(std::abs(fixed.trace() - 1.0) < 1e-15);
  CHECK(max_abs(fixed.matrix() - fixed.matrix().adjoint()) == 0.0);
  CHECK(fixed.drift_correction() > 0.0);

  m(1, 1) = 0.5;
  CHECK_THROWS_AS(hermitize_and_check(m, 1e-8), IntegrationError);
}

TEST_CASE("truncated annihilation operator") {
  const ComplexMatrix a = annihilation(3);
  CHECK(a(0, 1) == Complex(1.0));
  CHECK(a(1, 2).real() == doctest::Approx(std::sqrt(2.0)));
  const ComplexMatrix comm = a * a.adjoint() - a.adjoint() * a;
  CHECK(comm(0, 0).real() == doctest::Approx(1.0));
  CHECK(comm(1, 1).real() == doctest::Approx(1.0));
  CHECK(comm(2, 2).real() == doctest::Approx(-2.0));  // truncation edge
}

TEST_CASE("matrix dump format") {
  ComplexMatrix m(1, 2);
  m << Complex(0.1, -2.0), Complex(0.0, 0.0);
  CHECK(format_matrix(m) == "0.10000000000000001-2j\t0+0j\n");
  std::ostringstream os;
  dump_matrix(os, m);
  CHECK(os.str() == format_matrix(m));
}
