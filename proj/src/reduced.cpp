#include "qbeat/reduced.hpp"

#include "qbeat/errors.hpp"

#include <fmt/format.h>

#include <cmath>

namespace qbeat {

namespace {

constexpr int E = idx(Level::kE);
constexpr int L1 = idx(Level::kOne);
constexpr int L2 = idx(Level::kTwo);
constexpr int G = idx(Level::kG);

const ComplexMatrix& proj(int i, int j) {
  static const auto table = [] {
    std::array<ComplexMatrix, kAtomDim * kAtomDim> t;
    for (int a = 0; a < kAtomDim; ++a)
      for (int b = 0; b < kAtomDim; ++b) t[static_cast<size_t>(a * kAtomDim + b)] = projector(kAtomDim, a, b);
    return t;
  }();
  return table[static_cast<size_t>(i * kAtomDim + j)];
}

void require_atomic(const ComplexMatrix& rho) {
  if (rho.rows() != kAtomDim || rho.cols() != kAtomDim)
    throw DimensionError(fmt::format("reduced dynamics expects a 4x4 state, got {}x{}",
                                     rho.rows(), rho.cols()));
}

void require_finite(const ComplexMatrix& m) {
  for (Eigen::Index i = 0; i < m.size(); ++i)
    if (!std::isfinite(m.data()[i].real()) || !std::isfinite(m.data()[i].imag()))
      throw ModelError("reduced master equation produced a non-finite derivative");
}

}  // namespace

ReducedModel::ReducedModel(const CouplingSet& couplings, const LevelScheme& levels,
                           const CavityParams& cavity, double eta)
    : couplings_(couplings), levels_(levels), cavity_(cavity), eta_(eta) {
  couplings_.validate();
  levels_.validate();
  cavity_.validate();
  if (!(eta >= 0.0 && eta <= 1.0)) throw ValidationError("must lie in [0, 1]", "eta");
  rates_ = derive_rates(couplings_, levels_, cavity_);
}

ComplexMatrix rhs_operator_form(double t, const ComplexMatrix& rho, const ReducedModel& model) {
  require_atomic(rho);
  const RateSet& r = model.rates();
  const double eta = model.eta();
  const Complex phase = std::exp(Complex(0.0, 2.0 * r.omega * t));

  const Complex ree = rho(E, E);
  const Complex r11 = rho(L1, L1);
  const Complex r22 = rho(L2, L2);
  const Complex r12 = rho(L1, L2);

  // Vacuum-induced level shifts.
  ComplexMatrix out = -kI * (r.delta_1 + r.delta_2) * commutator(proj(E, E), rho) -
                      kI * commutator(r.delta_1p * proj(L1, L1) + r.delta_2p * proj(L2, L2), rho);

  // Cavity-mediated decay e -> j -> g.
  out -= r.gamma_1 * (proj(E, E) * rho - 2.0 * proj(L1, L1) * ree + rho * proj(E, E));
  out -= r.gamma_1p * (proj(L1, L1) * rho - 2.0 * proj(G, G) * r11 + rho * proj(L1, L1));
  out -= r.gamma_2 * (proj(E, E) * rho - 2.0 * proj(L2, L2) * ree + rho * proj(E, E));
  out -= r.gamma_2p * (proj(L2, L2) * rho - 2.0 * proj(G, G) * r22 + rho * proj(L2, L2));

  if (eta != 0.0) {
    const CrossCoefficients& x = r.cross;
    // Both decays from e share the a-mode reservoir: rho_ee builds rho_12.
    const ComplexMatrix upper = x.upper_source * proj(L1, L2) * ree * phase;
    // Emission on 1 -> g reabsorbed on g -> 2 and vice versa.
    const ComplexMatrix ground = x.ground_feed * proj(G, G) * r12 * std::conj(phase);
    const ComplexMatrix lower =
        phase * (x.lower_left * proj(L1, L2) * rho + x.lower_right * rho * proj(L1, L2));
    out += eta * (upper + upper.adjoint());
    out += eta * (ground + ground.adjoint());
    out -= eta * (lower + lower.adjoint());
  }
  require_finite(out);
  return out;
}

ComplexMatrix rhs_element_form(double t, const ComplexMatrix& rho, const ReducedModel& model) {
  require_atomic(rho);
  const RateSet& r = model.rates();
  const CrossCoefficients& x = r.cross;
  const double eta = model.eta();
  const Complex ph = std::exp(Complex(0.0, 2.0 * r.omega * t));
  const Complex phc = std::conj(ph);

  // Half decay rate and vacuum shift of each level, in basis order.
  const std::array<double, kAtomDim> decay{r.gamma_1 + r.gamma_2, r.gamma_1p, r.gamma_2p, 0.0};
  const std::array<double, kAtomDim> shift{r.delta_1 + r.delta_2, r.delta_1p, r.delta_2p, 0.0};

  ComplexMatrix d(kAtomDim, kAtomDim);
  for (int j = 0; j < kAtomDim; ++j)
    for (int k = 0; k < kAtomDim; ++k)
      d(j, k) = -(decay[j] + decay[k] + kI * (shift[j] - shift[k])) * rho(j, k);

  const Complex ree = rho(E, E);
  d(L1, L1) += 2.0 * r.gamma_1 * ree;
  d(L2, L2) += 2.0 * r.gamma_2 * ree;
  d(G, G) += 2.0 * r.gamma_1p * rho(L1, L1) + 2.0 * r.gamma_2p * rho(L2, L2);

  if (eta != 0.0) {
    const Complex lft = x.lower_left, rgt = x.lower_right;
    const Complex lftc = std::conj(lft), rgtc = std::conj(rgt);

    // Populations of the doublet exchange with its coherence.
    d(L1, L1) -= eta * (lft * rho(L2, L1) * ph + lftc * rho(L1, L2) * phc);
    d(L2, L2) -= eta * (rgt * rho(L2, L1) * ph + rgtc * rho(L1, L2) * phc);

    // Coherence sources: a-mode from rho_ee, b-mode from the doublet.
    d(L1, L2) += eta * x.upper_source * ree * ph;
    d(L1, L2) -= eta * (lft * rho(L2, L2) + rgt * rho(L1, L1)) * ph;
    d(L2, L1) += eta * std::conj(x.upper_source) * ree * phc;
    d(L2, L1) -= eta * (lftc * rho(L2, L2) + rgtc * rho(L1, L1)) * phc;

    // Ground state fed by the doublet coherence.
    d(G, G) += eta * (x.ground_feed * rho(L1, L2) * phc + std::conj(x.ground_feed) * rho(L2, L1) * ph);

    // Coherences of the doublet with e and g are mixed by the b-mode.
    for (int o : {E, G}) {
      d(L1, o) -= eta * lft * rho(L2, o) * ph;
      d(L2, o) -= eta * rgtc * rho(L1, o) * phc;
      d(o, L1) -= eta * lftc * rho(o, L2) * phc;
      d(o, L2) -= eta * rgt * rho(o, L1) * ph;
    }
  }
  require_finite(d);
  return d;
}

TimeSeries evolve(const ReducedModel& model, const DensityMatrix& rho0,
                  std::span<const double> t_grid, const IntegratorConfig& cfg, RhsForm form) {
  if (rho0.dim() != kAtomDim)
    throw DimensionError(fmt::format("evolve: expected a 4x4 initial state, got {}", rho0.dim()));
  if (t_grid.empty() || t_grid.front() != 0.0)
    throw ValidationError("time grid must start at 0", "t_grid");
  MatrixRhs rhs = [&model, form](double t, const ComplexMatrix& y, ComplexMatrix& dy) {
    dy = form == RhsForm::kOperator ? rhs_operator_form(t, y, model)
                                    : rhs_element_form(t, y, model);
  };
  return to_time_series(integrate(rhs, rho0.matrix(), t_grid, cfg));
}

}  // namespace qbeat
