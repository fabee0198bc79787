#include "qbeat/composite.hpp"

#include "qbeat/errors.hpp"
#include "qbeat/reduced.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>

namespace qbeat {

namespace {

std::array<double, kAtomDim> atomic_energies(const LevelScheme& l) {
  return {l.omega_eg, l.omega_1g, l.omega_2g, 0.0};
}

// Applies rho_jk -> rho_jk exp(i (w_j - w_k) t) for a diagonal generator w.
ComplexMatrix rotate(const ComplexMatrix& rho, const Eigen::VectorXd& w, double t) {
  const auto n = rho.rows();
  Eigen::VectorXcd ph(n);
  for (Eigen::Index i = 0; i < n; ++i) ph(i) = std::exp(Complex(0.0, w(i) * t));
  ComplexMatrix out(n, n);
  for (Eigen::Index j = 0; j < n; ++j)
    for (Eigen::Index k = 0; k < n; ++k) out(j, k) = rho(j, k) * ph(j) * std::conj(ph(k));
  return out;
}

}  // namespace

int CompositeModel::index(Level atom, int n_a, int n_b) const {
  const ProductDims d = dims();
  return idx(atom) * d.field() + n_a * d.n_b + n_b;
}

void CompositeModel::validate() const {
  levels.validate();
  cavity.validate();
  couplings.validate();
  if (n_max_a < 1) throw ValidationError("must be at least 1", "n_max_a");
  if (n_max_b < 1) throw ValidationError("must be at least 1", "n_max_b");
}

ComplexMatrix CompositeOperators::atom(Level i, Level j) const {
  return kron(projector(kAtomDim, idx(i), idx(j)),
              ComplexMatrix::Identity(dims.field(), dims.field()));
}

CompositeOperators composite_operators(const CompositeModel& model) {
  model.validate();
  CompositeOperators ops;
  ops.dims = model.dims();
  const ComplexMatrix ia = ComplexMatrix::Identity(ops.dims.n_a, ops.dims.n_a);
  const ComplexMatrix ib = ComplexMatrix::Identity(ops.dims.n_b, ops.dims.n_b);
  const ComplexMatrix i4 = ComplexMatrix::Identity(kAtomDim, kAtomDim);
  ops.a = kron(i4, kron(annihilation(ops.dims.n_a), ib));
  ops.b = kron(i4, kron(ia, annihilation(ops.dims.n_b)));
  ops.n_a = ops.a.adjoint() * ops.a;
  ops.n_b = ops.b.adjoint() * ops.b;
  return ops;
}

ComplexMatrix build_hamiltonian(const CompositeModel& model) {
  const CompositeOperators ops = composite_operators(model);
  const LevelScheme& l = model.levels;
  const CouplingSet& g = model.couplings;
  using enum Level;

  const ComplexMatrix h_atom =
      l.omega_eg * ops.atom(kE, kE) + l.omega_1g * ops.atom(kOne, kOne) + l.omega_2g * ops.atom(kTwo, kTwo);
  const ComplexMatrix h_field = model.cavity.omega_a * ops.n_a + model.cavity.omega_b * ops.n_b;
  const ComplexMatrix emit =
      -kI * (g.g_1e * ops.a.adjoint() * ops.atom(kOne, kE) + g.g_2e * ops.a.adjoint() * ops.atom(kTwo, kE) +
             g.g_g1 * ops.b.adjoint() * ops.atom(kG, kOne) + g.g_g2 * ops.b.adjoint() * ops.atom(kG, kTwo));
  return h_atom + h_field + emit + emit.adjoint();
}

ComplexMatrix frame_generator(const CompositeModel& model) {
  const CompositeOperators ops = composite_operators(model);
  using enum Level;
  const double wa = model.cavity.omega_a;
  const double wb = model.cavity.omega_b;
  return wa * (ops.n_a + ops.atom(kE, kE)) +
         wb * (ops.n_b + ops.atom(kE, kE) + ops.atom(kOne, kOne) + ops.atom(kTwo, kTwo));
}

ComplexMatrix excitation_number(const CompositeModel& model) {
  const CompositeOperators ops = composite_operators(model);
  using enum Level;
  return 2.0 * ops.atom(kE, kE) + ops.atom(kOne, kOne) + ops.atom(kTwo, kTwo) + ops.n_a + ops.n_b;
}

DensityMatrix vacuum_product_state(const CompositeModel& model, Level atom) {
  return DensityMatrix::basis_state(model.dims().total(), model.index(atom, 0, 0));
}

Superoperator::Superoperator(ComplexMatrix hamiltonian,
                             std::vector<std::pair<double, ComplexMatrix>> damped)
    : h_(std::move(hamiltonian)), h_sparse_(h_.sparseView()) {
  for (auto& [kappa, c] : damped) {
    if (c.rows() != h_.rows() || c.cols() != h_.cols())
      throw DimensionError("Superoperator: collapse operator dimension mismatch");
    ComplexMatrix cd = c.adjoint();
    ComplexMatrix cdc = cd * c;
    Sparse c_s = c.sparseView(), cd_s = cd.sparseView(), cdc_s = cdc.sparseView();
    channels_.push_back({kappa, std::move(c), std::move(cd), std::move(cdc), std::move(c_s), std::move(cd_s),
                         std::move(cdc_s)});
  }
}

void Superoperator::apply(const ComplexMatrix& rho, ComplexMatrix& out) const {
  // All operators are sparse; products are taken against the sparse copies.
  out = -kI * (h_sparse_ * rho);
  out += kI * (rho * h_sparse_);
  for (const Channel& ch : channels_) {
    out -= ch.kappa * (ch.cdc_s * rho);
    out -= ch.kappa * (rho * ch.cdc_s);
    const ComplexMatrix cr = ch.c_s * rho;
    out += (2.0 * ch.kappa) * (cr * ch.cd_s);
  }
}

ComplexMatrix Superoperator::apply(const ComplexMatrix& rho) const {
  ComplexMatrix out(rho.rows(), rho.cols());
  apply(rho, out);
  return out;
}

ComplexMatrix Superoperator::matrix() const {
  const auto n = h_.rows();
  const ComplexMatrix id = ComplexMatrix::Identity(n, n);
  // vec(A X B) = (B^T (x) A) vec(X)
  ComplexMatrix m = -kI * kron(id, h_) + kI * kron(h_.transpose(), id);
  for (const Channel& ch : channels_) {
    m += 2.0 * ch.kappa * kron(ch.cd.transpose(), ch.c);
    m -= ch.kappa * (kron(id, ch.cdc) + kron(ch.cdc.transpose(), id));
  }
  return m;
}

Superoperator liouvillian(const CompositeModel& model) {
  const CompositeOperators ops = composite_operators(model);
  return Superoperator(build_hamiltonian(model),
                       {{model.cavity.kappa_a, ops.a}, {model.cavity.kappa_b, ops.b}});
}

Superoperator rotating_liouvillian(const CompositeModel& model) {
  const CompositeOperators ops = composite_operators(model);
  return Superoperator(build_hamiltonian(model) - frame_generator(model),
                       {{model.cavity.kappa_a, ops.a}, {model.cavity.kappa_b, ops.b}});
}

ComplexMatrix lindblad_rhs(const DensityMatrix& rho, const CompositeModel& model) {
  if (rho.dim() != model.dims().total())
    throw DimensionError(fmt::format("lindblad_rhs: state dimension {} does not match model ({})",
                                     rho.dim(), model.dims().total()));
  return liouvillian(model).apply(rho.matrix());
}

TimeSeries evolve_composite(const CompositeModel& model, const DensityMatrix& rho0,
                            std::span<const double> t_grid, const IntegratorConfig& cfg) {
  if (rho0.dim() != model.dims().total())
    throw DimensionError(fmt::format("evolve_composite: state dimension {} does not match model ({})",
                                     rho0.dim(), model.dims().total()));
  if (t_grid.empty() || t_grid.front() != 0.0)
    throw ValidationError("time grid must start at 0", "t_grid");
  const Superoperator lv = rotating_liouvillian(model);
  MatrixRhs rhs = [&lv](double, const ComplexMatrix& y, ComplexMatrix& dy) {
    if (dy.rows() != y.rows() || dy.cols() != y.cols()) dy.resize(y.rows(), y.cols());
    lv.apply(y, dy);
  };
  Trajectory traj = integrate(rhs, rho0.matrix(), t_grid, cfg);

  // rho_S = e^{-iNt} rho_rot e^{iNt}
  const Eigen::VectorXd n = frame_generator(model).diagonal().real();
  for (size_t i = 0; i < traj.states.size(); ++i)
    traj.states[i] = rotate(traj.states[i], -n, traj.times[i]);
  return to_time_series(std::move(traj));
}

TimeSeries reduced_from_composite(const TimeSeries& series, const CompositeModel& model) {
  const ProductDims dims = model.dims();
  const auto w = atomic_energies(model.levels);
  const Eigen::VectorXd energies = Eigen::Map<const Eigen::VectorXd>(w.data(), kAtomDim);
  TimeSeries out;
  out.times = series.times;
  out.stats = series.stats;
  out.failure = series.failure;
  out.diagnostics = series.diagnostics;
  out.states.reserve(series.states.size());
  for (size_t i = 0; i < series.states.size(); ++i) {
    const DensityMatrix atom = partial_trace_field(series.states[i], dims);
    out.states.push_back(hermitize_and_check(rotate(atom.matrix(), energies, series.times[i]),
                                             kDriftTolerance));
  }
  return out;
}

EliminationReport validate_elimination(const EliminationCase& c, std::span<const double> g_values) {
  if (g_values.empty()) throw ValidationError("at least one coupling value is required", "g_values");
  EliminationReport report;

  auto scaled = [](Complex dir, double g) {
    const double m = std::abs(dir);
    return m == 0.0 ? Complex(0.0) : g * dir / m;
  };

  for (double g : g_values) {
    if (!(g >= 0.0) || !std::isfinite(g))
      throw ValidationError("coupling magnitudes must be non-negative", "g_values");
    const CouplingSet couplings{scaled(c.coupling_directions.g_1e, g),
                                scaled(c.coupling_directions.g_2e, g),
                                scaled(c.coupling_directions.g_g1, g),
                                scaled(c.coupling_directions.g_g2, g)};
    if (g > 0.0 && g * g / c.cavity.kappa_a >= 0.1 * c.cavity.kappa_a)
      report.notes.push_back(fmt::format("g={} is outside the bad-cavity regime (g^2/kappa >= 0.1 kappa)", g));

    const double t_end = g > 0.0 ? c.window * c.cavity.kappa_a / (g * g) : c.t_end_uncoupled;
    const std::vector<double> grid = uniform_grid(t_end, c.samples);

    const CompositeModel composite{c.levels, c.cavity, couplings, c.n_max_a, c.n_max_b};
    const TimeSeries full = reduced_from_composite(
        evolve_composite(composite, vacuum_product_state(composite, Level::kE), grid, c.integrator),
        composite);
    const ReducedModel reduced_model(couplings, c.levels, c.cavity, 1.0);
    const TimeSeries reduced =
        evolve(reduced_model, DensityMatrix::basis_state(kAtomDim, idx(Level::kE)), grid, c.integrator);
    if (!full.ok() || !reduced.ok())
      throw IntegrationError(fmt::format("validation run for g={} failed: {}", g,
                                         full.ok() ? *reduced.failure : *full.failure));

    EliminationPoint p{.g = g, .t_end = t_end};
    for (size_t i = 0; i < grid.size(); ++i) {
      const ComplexMatrix diff = full.states[i].matrix() - reduced.states[i].matrix();
      for (int k = 0; k < kAtomDim; ++k)
        p.max_population_deviation = std::max(p.max_population_deviation, std::abs(diff(k, k).real()));
      p.max_coherence_deviation =
          std::max(p.max_coherence_deviation, std::abs(diff(idx(Level::kOne), idx(Level::kTwo))));
      p.max_coherence = std::max(p.max_coherence, std::abs(reduced.states[i](idx(Level::kOne), idx(Level::kTwo))));
    }
    report.points.push_back(p);
  }

  std::vector<EliminationPoint> by_g = report.points;
  std::sort(by_g.begin(), by_g.end(), [](const auto& a, const auto& b) { return a.g > b.g; });
  report.monotone = true;
  for (size_t i = 1; i < by_g.size(); ++i) {
    const double prev = by_g[i - 1].max_population_deviation;
    const double cur = by_g[i].max_population_deviation;
    if (!(cur < prev || (cur == 0.0 && prev == 0.0))) {
      report.monotone = false;
      report.notes.push_back(fmt::format("deviation does not shrink from g={} ({:.3g}) to g={} ({:.3g})",
                                         by_g[i - 1].g, prev, by_g[i].g, cur));
    }
  }

  // Least-squares slope of log(deviation) against log(g).
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  int m = 0;
  for (const auto& p : by_g) {
    if (p.g <= 0.0 || p.max_population_deviation <= 0.0) continue;
    const double x = std::log(p.g), y = std::log(p.max_population_deviation);
    sx += x, sy += y, sxx += x * x, sxy += x * y;
    ++m;
  }
  if (m >= 2) report.scaling_exponent = (m * sxy - sx * sy) / (m * sxx - sx * sx);

  const auto smallest = std::find_if(by_g.rbegin(), by_g.rend(), [](const auto& p) { return p.g > 0.0; });
  report.within_tolerance =
      smallest == by_g.rend() || smallest->max_population_deviation <= c.tolerance;
  if (!report.within_tolerance)
    report.notes.push_back(fmt::format("deviation {:.3g} at g={} exceeds tolerance {:.3g}",
                                       smallest->max_population_deviation, smallest->g, c.tolerance));
  report.passed = report.monotone && report.within_tolerance;
  return report;
}

}  // namespace qbeat
