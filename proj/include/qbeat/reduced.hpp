#pragma once

#include "qbeat/atom_field.hpp"
#include "qbeat/integrator.hpp"
#include "qbeat/time_series.hpp"

#include <span>

namespace qbeat {

/// Atomic master equation obtained after eliminating both cavity modes in
/// the bad-cavity limit, written in the interaction picture. `eta` scales
/// the interference terms (1 keeps them, 0 removes them).
class ReducedModel {
 public:
  ReducedModel(const CouplingSet& couplings, const LevelScheme& levels,
               const CavityParams& cavity, double eta);

  const RateSet& rates() const { return rates_; }
  const CouplingSet& couplings() const { return couplings_; }
  const LevelScheme& levels() const { return levels_; }
  const CavityParams& cavity() const { return cavity_; }
  double eta() const { return eta_; }

 private:
  CouplingSet couplings_;
  LevelScheme levels_;
  CavityParams cavity_;
  double eta_;
  RateSet rates_;
};

/// d rho/dt assembled from projector algebra, term by term.
ComplexMatrix rhs_operator_form(double t, const ComplexMatrix& rho, const ReducedModel& model);

/// d rho/dt assembled element by element.
ComplexMatrix rhs_element_form(double t, const ComplexMatrix& rho, const ReducedModel& model);

enum class RhsForm { kOperator, kElement };

/// Integrates the reduced master equation from `rho0` and samples it on
/// `t_grid` (ascending, starting at 0).
TimeSeries evolve(const ReducedModel& model, const DensityMatrix& rho0,
                  std::span<const double> t_grid, const IntegratorConfig& cfg = {},
                  RhsForm form = RhsForm::kOperator);

}  // namespace qbeat
