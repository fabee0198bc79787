#pragma once

#include <Eigen/Dense>

#include <array>
#include <complex>
#include <iosfwd>
#include <string>

namespace qbeat {

using Complex = std::complex<double>;
using ComplexMatrix = Eigen::MatrixXcd;
using ComplexVector3 = Eigen::Vector3cd;
using RealVector3 = Eigen::Vector3d;

inline constexpr Complex kI{0.0, 1.0};

/// Tolerances applied when a DensityMatrix is constructed.
struct DensityTolerance {
  double hermitian = 1e-12;
  double trace = 1e-10;
  double positivity = 1e-9;
};

/// Atomic basis order used everywhere: e, 1, 2, g.
enum class Level : int { kE = 0, kOne = 1, kTwo = 2, kG = 3 };
inline constexpr int kAtomDim = 4;
inline constexpr int idx(Level l) { return static_cast<int>(l); }

/// Dimensions of an atom (x) mode a (x) mode b product space. `n_a` and
/// `n_b` are the number of Fock states kept per mode (n_max + 1).
struct ProductDims {
  int atom = kAtomDim;
  int n_a = 2;
  int n_b = 2;
  int total() const { return atom * n_a * n_b; }
  int field() const { return n_a * n_b; }
};

/// Unit-trace Hermitian positive semidefinite matrix.
///
/// The checked constructor validates all three properties. States produced
/// by `hermitize_and_check` skip the eigenvalue test; positivity of
/// integrator output is verified at checkpoints with `min_eigenvalue`.
class DensityMatrix {
 public:
  explicit DensityMatrix(ComplexMatrix m, const DensityTolerance& tol = {});

  /// Pure state |k><k| in a space of dimension `dim`.
  static DensityMatrix basis_state(int dim, int k);
  /// Identity / dim.
  static DensityMatrix maximally_mixed(int dim);

  int dim() const { return static_cast<int>(m_.rows()); }
  const ComplexMatrix& matrix() const { return m_; }
  Complex operator()(int r, int c) const { return m_(r, c); }
  Complex trace() const { return m_.trace(); }
  double purity() const { return (m_ * m_).trace().real(); }

  /// Magnitude of the Hermitian/trace correction applied when this state
  /// was produced by `hermitize_and_check`; zero otherwise.
  double drift_correction() const { return correction_; }

 private:
  struct Unchecked {};
  DensityMatrix(ComplexMatrix m, double correction, Unchecked)
      : m_(std::move(m)), correction_(correction) {}

  ComplexMatrix m_;
  double correction_ = 0.0;

  friend DensityMatrix hermitize_and_check(const ComplexMatrix& m, double tol);
  friend DensityMatrix partial_trace_field(const DensityMatrix& rho,
                                           const ProductDims& dims);
};

/// AB - BA. Throws DimensionError unless both are square and equal-sized.
ComplexMatrix commutator(const ComplexMatrix& a, const ComplexMatrix& b);

/// Tensor product; the row index of `a` is the slow one.
ComplexMatrix kron(const ComplexMatrix& a, const ComplexMatrix& b);

/// Traces out both field modes of an atom-major composite state.
DensityMatrix partial_trace_field(const DensityMatrix& rho,
                                  const ProductDims& dims);

/// Symmetrizes `m`, rescales it to unit trace and returns it as a state.
/// Throws IntegrationError if the anti-Hermitian part or the trace error
/// exceeds `tol`.
DensityMatrix hermitize_and_check(const ComplexMatrix& m, double tol);

/// Smallest eigenvalue of the Hermitian matrix.
double min_eigenvalue(const ComplexMatrix& m);

/// max_ij |m_ij|
double max_abs(const ComplexMatrix& m);

/// |i><j| in dimension `dim`.
ComplexMatrix projector(int dim, int i, int j);

/// Truncated bosonic annihilation operator on n_states Fock states.
ComplexMatrix annihilation(int n_states);

/// Debug dump: one row per line, tab-separated "re+imj", 17 significant
/// digits.
void dump_matrix(std::ostream& os, const ComplexMatrix& m);
std::string format_matrix(const ComplexMatrix& m);

}  // namespace qbeat
