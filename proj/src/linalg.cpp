#include "qbeat/linalg.hpp"

#include "qbeat/errors.hpp"

#include <fmt/format.h>

#include <cmath>
#include <ostream>
#include <sstream>

namespace qbeat {

namespace {

void require_square(const ComplexMatrix& m, const char* what) {
  if (m.rows() != m.cols() || m.rows() == 0)
    throw DimensionError(fmt::format("{}: expected a non-empty square matrix, "
                                     "got {}x{}",
                                     what, m.rows(), m.cols()));
}

bool all_finite(const ComplexMatrix& m) {
  for (Eigen::Index i = 0; i < m.size(); ++i) {
    const Complex z = m.data()[i];
    if (!std::isfinite(z.real()) || !std::isfinite(z.imag())) return false;
  }
  return true;
}

}  // namespace

DensityMatrix::DensityMatrix(ComplexMatrix m, const DensityTolerance& tol)
    : m_(std::move(m)) {
  require_square(m_, "DensityMatrix");
  if (!all_finite(m_)) throw ValidationError("density matrix has non-finite entries");
  const double herm = max_abs(m_ - m_.adjoint());
  if (herm > tol.hermitian)
    throw ValidationError(fmt::format("density matrix not Hermitian (deviation {:.3g})", herm));
  const Complex tr = m_.trace();
  if (std::abs(tr - 1.0) > tol.trace)
    throw ValidationError(fmt::format("density matrix trace {:.17g}{:+.17g}i is not 1",
                                      tr.real(), tr.imag()));
  const double lo = min_eigenvalue(m_);
  if (lo < -tol.positivity)
    throw ValidationError(fmt::format("density matrix not positive (eigenvalue {:.3g})", lo));
}

DensityMatrix DensityMatrix::basis_state(int dim, int k) {
  return DensityMatrix(projector(dim, k, k));
}

DensityMatrix DensityMatrix::maximally_mixed(int dim) {
  return DensityMatrix(ComplexMatrix::Identity(dim, dim) / static_cast<double>(dim));
}

ComplexMatrix commutator(const ComplexMatrix& a, const ComplexMatrix& b) {
  require_square(a, "commutator");
  require_square(b, "commutator");
  if (a.rows() != b.rows())
    throw DimensionError(fmt::format("commutator: dimension mismatch {} vs {}",
                                     a.rows(), b.rows()));
  return a * b - b * a;
}

ComplexMatrix kron(const ComplexMatrix& a, const ComplexMatrix& b) {
  ComplexMatrix out(a.rows() * b.rows(), a.cols() * b.cols());
  for (Eigen::Index i = 0; i < a.rows(); ++i)
    for (Eigen::Index j = 0; j < a.cols(); ++j)
      out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
  return out;
}

DensityMatrix partial_trace_field(const DensityMatrix& rho, const ProductDims& dims) {
  if (dims.atom <= 0 || dims.n_a <= 0 || dims.n_b <= 0)
    throw DimensionError("partial_trace_field: dimensions must be positive");
  if (rho.dim() != dims.total())
    throw DimensionError(fmt::format(
        "partial_trace_field: state dimension {} != {}*{}*{}", rho.dim(),
        dims.atom, dims.n_a, dims.n_b));
  const int nf = dims.field();
  const ComplexMatrix& m = rho.matrix();
  ComplexMatrix out = ComplexMatrix::Zero(dims.atom, dims.atom);
  for (int i = 0; i < dims.atom; ++i)
    for (int j = 0; j < dims.atom; ++j) {
      Complex s = 0.0;
      for (int f = 0; f < nf; ++f) s += m(i * nf + f, j * nf + f);
      out(i, j) = s;
    }
  // Trace and hermiticity are inherited exactly from the input.
  return DensityMatrix(std::move(out), rho.drift_correction(), DensityMatrix::Unchecked{});
}

DensityMatrix hermitize_and_check(const ComplexMatrix& m, double tol) {
  require_square(m, "hermitize_and_check");
  if (!all_finite(m)) throw IntegrationError("state became non-finite");
  const double herm = max_abs(m - m.adjoint()) / 2.0;
  const Complex tr = m.trace();
  const double trace_err = std::abs(tr - 1.0);
  if (herm > tol || trace_err > tol)
    throw IntegrationError(fmt::format(
        "state drifted beyond tolerance {:.3g} (anti-Hermitian {:.3g}, trace error {:.3g})",
        tol, herm, trace_err));
  ComplexMatrix h = (m + m.adjoint()) / 2.0;
  h /= h.trace().real();
  return DensityMatrix(std::move(h), std::max(herm, trace_err), DensityMatrix::Unchecked{});
}

double min_eigenvalue(const ComplexMatrix& m) {
  Eigen::SelfAdjointEigenSolver<ComplexMatrix> es(m, Eigen::EigenvaluesOnly);
  return es.eigenvalues().minCoeff();
}

double max_abs(const ComplexMatrix& m) {
  return m.size() == 0 ? 0.0 : m.cwiseAbs().maxCoeff();
}

ComplexMatrix projector(int dim, int i, int j) {
  ComplexMatrix p = ComplexMatrix::Zero(dim, dim);
  p(i, j) = 1.0;
  return p;
}

ComplexMatrix annihilation(int n_states) {
  ComplexMatrix a = ComplexMatrix::Zero(n_states, n_states);
  for (int n = 1; n < n_states; ++n) a(n - 1, n) = std::sqrt(static_cast<double>(n));
  return a;
}

void dump_matrix(std::ostream& os, const ComplexMatrix& m) {
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    for (Eigen::Index c = 0; c < m.cols(); ++c) {
      if (c) os << '\t';
      os << fmt::format("{:.17g}{:+.17g}j", m(r, c).real(), m(r, c).imag());
    }
    os << '\n';
  }
}

std::string format_matrix(const ComplexMatrix& m) {
  std::ostringstream os;
  dump_matrix(os, m);
  return os.str();
}

}  // namespace qbeat
