#pragma once

#include "qbeat/atom_field.hpp"
#include "qbeat/errors.hpp"
#include "qbeat/integrator.hpp"
#include "qbeat/reduced.hpp"

#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace qbeat {

enum class ScenarioMode { kReduced, kComposite, kAnalytic, kValidate };

std::string_view to_string(ScenarioMode mode);

/// Scenario problem with the location it was found at. `line` is 0 when it
/// cannot be attributed to a line of the source text.
class ScenarioError : public ValidationError {
 public:
  ScenarioError(const std::string& source, int line, const std::string& what, std::string field = {});

  int line() const noexcept { return line_; }

 private:
  int line_;
};

/// A complete, validated parameter bundle.
struct Scenario {
  std::string name;
  ScenarioMode mode = ScenarioMode::kReduced;

  LevelScheme levels;
  CavityParams cavity;
  CouplingSet couplings;
  /// Set when the file used the "symmetric" shorthand.
  std::optional<SymmetricTuning> symmetric;

  double eta = 1.0;
  ComplexMatrix initial_state;
  /// "e", "1", "2", "g" or "matrix".
  std::string initial_label = "e";

  double t_end = 6.0;
  int samples = 601;
  IntegratorConfig integrator;
  RhsForm rhs_form = RhsForm::kOperator;

  int n_max_a = 1;
  int n_max_b = 1;

  // validate mode
  std::vector<double> g_values;
  double tolerance = 2e-2;
  double window = 5.0;

  /// Canonical JSON of the document this scenario came from; used to derive
  /// sweep points.
  std::string document;
};

/// Parses a scenario document. Unknown fields are rejected. Errors are
/// reported as ScenarioError naming `source`, the line and the field path.
Scenario parse_scenario(std::string_view text, std::string_view source = "<scenario>");

Scenario load_scenario(const std::filesystem::path& path);

/// Copy of `base` with one numeric field replaced. `parameter` is a dotted
/// path ("symmetric.Omega", "cavity.kappa_a") or a bare field name, which
/// is looked up at the top level and then in the symmetric, cavity, levels
/// and integrator blocks. Throws ScenarioError if it names no numeric
/// field or more than one.
Scenario with_parameter(const Scenario& base, std::string_view parameter, double value);

/// Names of the built-in presets.
std::vector<std::string> preset_names();

/// Base scenario and swept Omega values of a built-in preset at a given eta.
struct Preset {
  Scenario base;
  std::string parameter;
  std::vector<double> values;
};

Preset builtin_preset(std::string_view name, double eta);

}  // namespace qbeat
