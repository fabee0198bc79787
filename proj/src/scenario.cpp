#include "qbeat/scenario.hpp"

#include <fmt/format.h>
#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

namespace qbeat {

using nlohmann::json;

namespace {

std::vector<std::string> split_path(std::string_view path) {
  std::vector<std::string> out;
  size_t start = 0;
  while (start <= path.size()) {
    const size_t dot = path.find('.', start);
    const size_t end = dot == std::string_view::npos ? path.size() : dot;
    out.emplace_back(path.substr(start, end - start));
    if (dot == std::string_view::npos) break;
    start = dot + 1;
  }
  return out;
}

int line_of_offset(std::string_view text, size_t offset) {
  offset = std::min(offset, text.size());
  return 1 + static_cast<int>(std::count(text.begin(), text.begin() + static_cast<long>(offset), '\n'));
}

// Line of the key that ends `field`, found by walking the quoted keys of the
// path in order. Returns 0 if a segment cannot be found.
int locate_field(std::string_view text, std::string_view field) {
  if (field.empty()) return 0;
  size_t pos = 0;
  for (const std::string& seg : split_path(field)) {
    if (!seg.empty() && std::all_of(seg.begin(), seg.end(), ::isdigit)) continue;
    const std::string quoted = "\"" + seg + "\"";
    size_t hit = pos;
    for (;;) {
      hit = text.find(quoted, hit);
      if (hit == std::string_view::npos) return 0;
      size_t after = hit + quoted.size();
      while (after < text.size() && std::isspace(static_cast<unsigned char>(text[after]))) ++after;
      if (after < text.size() && text[after] == ':') break;
      hit += quoted.size();
    }
    pos = hit;
  }
  return line_of_offset(text, pos);
}

struct Context {
  std::string_view text;
  std::string source;

  [[noreturn]] void fail(const std::string& field, const std::string& what) const {
    throw ScenarioError(source, locate_field(text, field), what, field);
  }
};

std::string join(const std::string& parent, const std::string& key) {
  return parent.empty() ? key : parent + "." + key;
}

void require_object(const Context& ctx, const json& j, const std::string& path) {
  if (!j.is_object()) ctx.fail(path, "expected an object");
}

void check_keys(const Context& ctx, const json& obj, const std::string& path,
                std::initializer_list<std::string_view> allowed) {
  for (const auto& [key, value] : obj.items()) {
    (void)value;
    if (std::find(allowed.begin(), allowed.end(), key) == allowed.end()) {
      std::string list;
      for (auto a : allowed) list += (list.empty() ? "" : ", ") + std::string(a);
      ctx.fail(join(path, key), fmt::format("unknown field (expected one of: {})", list));
    }
  }
}

double get_number(const Context& ctx, const json& obj, const std::string& path, const char* key,
                  std::optional<double> fallback = std::nullopt) {
  const std::string field = join(path, key);
  if (!obj.contains(key)) {
    if (fallback) return *fallback;
    ctx.fail(field, "required field is missing");
  }
  const json& v = obj.at(key);
  if (!v.is_number()) ctx.fail(field, "expected a number");
  return v.get<double>();
}

long get_integer(const Context& ctx, const json& obj, const std::string& path, const char* key,
                 long fallback) {
  const std::string field = join(path, key);
  if (!obj.contains(key)) return fallback;
  const json& v = obj.at(key);
  if (!v.is_number_integer()) ctx.fail(field, "expected an integer");
  return v.get<long>();
}

Complex to_complex(const Context& ctx, const json& v, const std::string& field) {
  if (v.is_number()) return {v.get<double>(), 0.0};
  if (v.is_array() && v.size() == 2 && v[0].is_number() && v[1].is_number())
    return {v[0].get<double>(), v[1].get<double>()};
  ctx.fail(field, "expected a number or a [re, im] pair");
}

ComplexVector3 to_vector(const Context& ctx, const json& v, const std::string& field) {
  if (!v.is_array() || v.size() != 3) ctx.fail(field, "expected a 3-component vector");
  ComplexVector3 out;
  for (int i = 0; i < 3; ++i) out(i) = to_complex(ctx, v[static_cast<size_t>(i)], fmt::format("{}.{}", field, i));
  return out;
}

template <typename F>
void rethrow_at(const Context& ctx, const std::string& fallback_field, F&& f) {
  try {
    f();
  } catch (const ScenarioError&) {
    throw;
  } catch (const ValidationError& e) {
    const std::string field = e.field().empty() ? fallback_field : e.field();
    std::string what = e.what();
    if (!e.field().empty() && what.starts_with(e.field() + ": ")) what.erase(0, e.field().size() + 2);
    ctx.fail(field, what);
  }
}

LevelScheme parse_levels(const Context& ctx, const json& j) {
  require_object(ctx, j, "levels");
  check_keys(ctx, j, "levels", {"omega_eg", "omega_1g", "omega_2g"});
  return {.omega_eg = get_number(ctx, j, "levels", "omega_eg"),
          .omega_1g = get_number(ctx, j, "levels", "omega_1g"),
          .omega_2g = get_number(ctx, j, "levels", "omega_2g")};
}

CavityParams parse_cavity(const Context& ctx, const json& j) {
  require_object(ctx, j, "cavity");
  check_keys(ctx, j, "cavity", {"omega_a", "omega_b", "kappa_a", "kappa_b"});
  return {.omega_a = get_number(ctx, j, "cavity", "omega_a"),
          .omega_b = get_number(ctx, j, "cavity", "omega_b"),
          .kappa_a = get_number(ctx, j, "cavity", "kappa_a", 1.0),
          .kappa_b = get_number(ctx, j, "cavity", "kappa_b", 1.0)};
}

CouplingSet parse_couplings(const Context& ctx, const json& j) {
  require_object(ctx, j, "couplings");
  check_keys(ctx, j, "couplings", {"g_1e", "g_2e", "g_g1", "g_g2"});
  CouplingSet c;
  for (auto [key, dst] : {std::pair{"g_1e", &c.g_1e}, std::pair{"g_2e", &c.g_2e},
                          std::pair{"g_g1", &c.g_g1}, std::pair{"g_g2", &c.g_g2}}) {
    if (!j.contains(key)) ctx.fail(join("couplings", key), "required field is missing");
    *dst = to_complex(ctx, j.at(key), join("couplings", key));
  }
  return c;
}

CouplingSet parse_dipoles(const Context& ctx, const json& j) {
  require_object(ctx, j, "dipoles");
  check_keys(ctx, j, "dipoles",
             {"d_1e", "d_2e", "d_g1", "d_g2", "epsilon_a", "epsilon_b", "k_hat", "scale_a", "scale_b"});
  DipoleGeometry geom;
  for (auto [key, dst] : {std::pair{"d_1e", &geom.d_1e}, std::pair{"d_2e", &geom.d_2e},
                          std::pair{"d_g1", &geom.d_g1}, std::pair{"d_g2", &geom.d_g2}}) {
    if (!j.contains(key)) ctx.fail(join("dipoles", key), "required field is missing");
    *dst = to_vector(ctx, j.at(key), join("dipoles", key));
  }
  if (j.contains("epsilon_a")) geom.epsilon_a = to_vector(ctx, j.at("epsilon_a"), "dipoles.epsilon_a");
  if (j.contains("epsilon_b")) geom.epsilon_b = to_vector(ctx, j.at("epsilon_b"), "dipoles.epsilon_b");
  if (j.contains("k_hat")) {
    const ComplexVector3 k = to_vector(ctx, j.at("k_hat"), "dipoles.k_hat");
    if (k.imag().norm() != 0.0) ctx.fail("dipoles.k_hat", "propagation direction must be real");
    geom.k_hat = k.real();
  }
  const double sa = get_number(ctx, j, "dipoles", "scale_a", 1.0);
  const double sb = get_number(ctx, j, "dipoles", "scale_b", 1.0);
  if (!(sa >= 0.0)) ctx.fail("dipoles.scale_a", "must be non-negative");
  if (!(sb >= 0.0)) ctx.fail("dipoles.scale_b", "must be non-negative");
  CouplingSet out;
  rethrow_at(ctx, "dipoles", [&] {
    geom.validate();
    out = couplings_from_geometry(geom, sa, sb);
  });
  return out;
}

SymmetricTuning parse_symmetric(const Context& ctx, const json& j) {
  require_object(ctx, j, "symmetric");
  check_keys(ctx, j, "symmetric", {"G", "kappa", "Omega", "omega_a", "omega_b"});
  SymmetricTuning s{.g = get_number(ctx, j, "symmetric", "G"),
                    .kappa = get_number(ctx, j, "symmetric", "kappa", 1.0),
                    .omega = get_number(ctx, j, "symmetric", "Omega"),
                    .omega_a = get_number(ctx, j, "symmetric", "omega_a", 100.0),
                    .omega_b = get_number(ctx, j, "symmetric", "omega_b", 100.0)};
  if (!(s.kappa > 0.0)) ctx.fail("symmetric.kappa", "must be positive");
  if (s.g < 0.0) ctx.fail("symmetric.G", "must be non-negative");
  if (s.omega < 0.0) ctx.fail("symmetric.Omega", "must be non-negative");
  if (!(std::abs(s.omega) < s.omega_b)) ctx.fail("symmetric.Omega", "must be smaller than omega_b");
  if (!(s.omega_a > 0.0)) ctx.fail("symmetric.omega_a", "must be positive");
  return s;
}

ComplexMatrix parse_initial_state(const Context& ctx, const json& j, std::string& label) {
  const std::string field = "initial_state";
  if (j.is_string()) {
    label = j.get<std::string>();
    static const std::array<std::pair<std::string_view, Level>, 4> names{
        {{"e", Level::kE}, {"1", Level::kOne}, {"2", Level::kTwo}, {"g", Level::kG}}};
    for (const auto& [n, level] : names)
      if (label == n) return projector(kAtomDim, idx(level), idx(level));
    ctx.fail(field, fmt::format("unknown state \"{}\" (expected e, 1, 2 or g)", label));
  }
  if (!j.is_array() || j.size() != kAtomDim) ctx.fail(field, "expected a state name or a 4x4 matrix");
  ComplexMatrix m(kAtomDim, kAtomDim);
  for (size_t r = 0; r < kAtomDim; ++r) {
    if (!j[r].is_array() || j[r].size() != kAtomDim)
      ctx.fail(fmt::format("{}.{}", field, r), "expected a row of 4 entries");
    for (size_t c = 0; c < kAtomDim; ++c)
      m(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) =
          to_complex(ctx, j[r][c], fmt::format("{}.{}.{}", field, r, c));
  }
  label = "matrix";
  rethrow_at(ctx, field, [&] { DensityMatrix check(m); });
  return m;
}

IntegratorConfig parse_integrator(const Context& ctx, const json& j) {
  require_object(ctx, j, "integrator");
  check_keys(ctx, j, "integrator", {"rel_tol", "abs_tol", "max_step", "initial_step", "max_steps"});
  const IntegratorConfig d;
  IntegratorConfig c{.rel_tol = get_number(ctx, j, "integrator", "rel_tol", d.rel_tol),
                     .abs_tol = get_number(ctx, j, "integrator", "abs_tol", d.abs_tol),
                     .max_step = get_number(ctx, j, "integrator", "max_step", d.max_step),
                     .initial_step = get_number(ctx, j, "integrator", "initial_step", d.initial_step),
                     .max_steps = get_integer(ctx, j, "integrator", "max_steps", d.max_steps)};
  rethrow_at(ctx, "integrator", [&] { c.validate(); });
  return c;
}

Scenario parse_document(const json& doc, const Context& ctx) {
  require_object(ctx, doc, "");
  check_keys(ctx, doc, "",
             {"name", "mode", "symmetric", "levels", "cavity", "couplings", "dipoles", "eta",
              "initial_state", "t_end", "samples", "integrator", "rhs", "n_max_a", "n_max_b",
              "g_values", "tolerance", "window"});
  Scenario s;

  if (!doc.contains("name")) ctx.fail("name", "required field is missing");
  if (!doc["name"].is_string()) ctx.fail("name", "expected a string");
  s.name = doc["name"].get<std::string>();
  if (s.name.empty() || !std::all_of(s.name.begin(), s.name.end(), [](char ch) {
        return std::isalnum(static_cast<unsigned char>(ch)) || ch == '_' || ch == '-' || ch == '.';
      }))
    ctx.fail("name", "must be non-empty and use only letters, digits, '_', '-' and '.'");

  if (doc.contains("mode")) {
    if (!doc["mode"].is_string()) ctx.fail("mode", "expected a string");
    const std::string m = doc["mode"].get<std::string>();
    if (m == "reduced") s.mode = ScenarioMode::kReduced;
    else if (m == "composite") s.mode = ScenarioMode::kComposite;
    else if (m == "analytic") s.mode = ScenarioMode::kAnalytic;
    else if (m == "validate") s.mode = ScenarioMode::kValidate;
    else ctx.fail("mode", fmt::format("unknown mode \"{}\" (expected reduced, composite, analytic or validate)", m));
  }

  const int sources = static_cast<int>(doc.contains("symmetric")) + static_cast<int>(doc.contains("couplings")) +
                      static_cast<int>(doc.contains("dipoles"));
  if (sources != 1) ctx.fail(sources == 0 ? "" : "symmetric", "give exactly one of symmetric, couplings or dipoles");

  if (doc.contains("symmetric")) {
    if (doc.contains("levels")) ctx.fail("levels", "not allowed together with symmetric");
    if (doc.contains("cavity")) ctx.fail("cavity", "not allowed together with symmetric");
    s.symmetric = parse_symmetric(ctx, doc["symmetric"]);
    s.levels = s.symmetric->levels();
    s.cavity = s.symmetric->cavity();
    s.couplings = s.symmetric->couplings();
  } else {
    if (!doc.contains("levels")) ctx.fail("levels", "required field is missing");
    if (!doc.contains("cavity")) ctx.fail("cavity", "required field is missing");
    s.levels = parse_levels(ctx, doc["levels"]);
    s.cavity = parse_cavity(ctx, doc["cavity"]);
    s.couplings = doc.contains("couplings") ? parse_couplings(ctx, doc["couplings"])
                                            : parse_dipoles(ctx, doc["dipoles"]);
  }
  rethrow_at(ctx, "levels", [&] { s.levels.validate(); });
  rethrow_at(ctx, "cavity", [&] { s.cavity.validate(); });
  rethrow_at(ctx, "couplings", [&] { s.couplings.validate(); });

  s.eta = get_number(ctx, doc, "", "eta", 1.0);
  if (!(s.eta >= 0.0 && s.eta <= 1.0)) ctx.fail("eta", "must lie in [0, 1]");

  s.initial_state = projector(kAtomDim, idx(Level::kE), idx(Level::kE));
  if (doc.contains("initial_state")) s.initial_state = parse_initial_state(ctx, doc["initial_state"], s.initial_label);

  s.t_end = get_number(ctx, doc, "", "t_end", 6.0);
  if (!(s.t_end > 0.0)) ctx.fail("t_end", "must be positive");
  const long samples = get_integer(ctx, doc, "", "samples", 601);
  if (samples < 2 || samples > 10'000'000) ctx.fail("samples", "must be at least 2");
  s.samples = static_cast<int>(samples);

  if (doc.contains("integrator")) s.integrator = parse_integrator(ctx, doc["integrator"]);

  if (doc.contains("rhs")) {
    const json& r = doc["rhs"];
    if (r == "operator") s.rhs_form = RhsForm::kOperator;
    else if (r == "element") s.rhs_form = RhsForm::kElement;
    else ctx.fail("rhs", "expected \"operator\" or \"element\"");
  }

  const long na = get_integer(ctx, doc, "", "n_max_a", 1);
  const long nb = get_integer(ctx, doc, "", "n_max_b", 1);
  if (na < 1 || na > 20) ctx.fail("n_max_a", "must lie in [1, 20]");
  if (nb < 1 || nb > 20) ctx.fail("n_max_b", "must lie in [1, 20]");
  s.n_max_a = static_cast<int>(na);
  s.n_max_b = static_cast<int>(nb);

  if (doc.contains("g_values")) {
    const json& g = doc["g_values"];
    if (!g.is_array() || g.empty()) ctx.fail("g_values", "expected a non-empty list of numbers");
    for (size_t i = 0; i < g.size(); ++i) {
      if (!g[i].is_number()) ctx.fail(fmt::format("g_values.{}", i), "expected a number");
      const double v = g[i].get<double>();
      if (!(v >= 0.0)) ctx.fail(fmt::format("g_values.{}", i), "must be non-negative");
      s.g_values.push_back(v);
    }
  }
  s.tolerance = get_number(ctx, doc, "", "tolerance", 2e-2);
  if (!(s.tolerance > 0.0)) ctx.fail("tolerance", "must be positive");
  s.window = get_number(ctx, doc, "", "window", 5.0);
  if (!(s.window > 0.0)) ctx.fail("window", "must be positive");

  if (s.mode == ScenarioMode::kAnalytic) {
    if (!detect_symmetric(s.couplings, s.levels, s.cavity))
      ctx.fail("mode", "analytic mode needs the symmetric tuning");
    if (s.initial_label != "e") ctx.fail("initial_state", "analytic mode starts from e");
    if (s.eta != 0.0 && s.eta != 1.0) ctx.fail("eta", "analytic mode needs eta = 0 or 1");
  }
  if (s.mode == ScenarioMode::kComposite && s.initial_label == "matrix")
    ctx.fail("initial_state", "composite mode needs a named initial state");

  s.document = doc.dump(2);
  return s;
}

json parse_json(std::string_view text, const std::string& source) {
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    const int line = e.byte == 0 ? 0 : line_of_offset(text, e.byte - 1);
    std::string what = e.what();
    // Drop the library's "[json.exception.parse_error.101] " prefix.
    if (const auto p = what.find("] "); p != std::string::npos) what.erase(0, p + 2);
    throw ScenarioError(source, line, what);
  }
}

const std::set<std::string, std::less<>> kTopNumbers{"eta", "t_end", "samples", "tolerance",
                                                      "window", "n_max_a", "n_max_b"};
const std::set<std::string, std::less<>> kIntegerFields{"samples", "n_max_a", "n_max_b", "max_steps"};
const std::vector<std::pair<std::string, std::set<std::string, std::less<>>>> kBlocks{
    {"symmetric", {"G", "kappa", "Omega", "omega_a", "omega_b"}},
    {"cavity", {"omega_a", "omega_b", "kappa_a", "kappa_b"}},
    {"levels", {"omega_eg", "omega_1g", "omega_2g"}},
    {"integrator", {"rel_tol", "abs_tol", "max_step", "initial_step", "max_steps"}},
};

}  // namespace

std::string_view to_string(ScenarioMode mode) {
  switch (mode) {
    case ScenarioMode::kReduced: return "reduced";
    case ScenarioMode::kComposite: return "composite";
    case ScenarioMode::kAnalytic: return "analytic";
    case ScenarioMode::kValidate: return "validate";
  }
  return "?";
}

ScenarioError::ScenarioError(const std::string& source, int line, const std::string& what, std::string field)
    : ValidationError(Preformatted{},
                      fmt::format("{}{}: {}{}", source, line > 0 ? fmt::format(":{}", line) : "",
                                  field.empty() ? "" : field + ": ", what),
                      field),
      line_(line) {}

Scenario parse_scenario(std::string_view text, std::string_view source) {
  const Context ctx{text, std::string(source)};
  return parse_document(parse_json(text, ctx.source), ctx);
}

Scenario load_scenario(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ScenarioError(path.string(), 0, "cannot open file");
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_scenario(buf.str(), path.string());
}

Scenario with_parameter(const Scenario& base, std::string_view parameter, double value) {
  json doc = json::parse(base.document);
  const std::string where = fmt::format("{} [{}={}]", base.name, parameter, value);
  std::vector<std::string> path = split_path(parameter);
  if (path.empty() || std::any_of(path.begin(), path.end(), [](const auto& s) { return s.empty(); }))
    throw ScenarioError(where, 0, "empty parameter name", std::string(parameter));

  if (path.size() == 1) {
    std::vector<std::vector<std::string>> candidates;
    if (kTopNumbers.contains(path[0])) candidates.push_back(path);
    for (const auto& [block, fields] : kBlocks) {
      const bool present = doc.contains(block) || block == "integrator";
      if (present && fields.contains(path[0])) candidates.push_back({block, path[0]});
    }
    if (candidates.empty())
      throw ScenarioError(where, 0, "does not name a numeric field of this scenario", std::string(parameter));
    if (candidates.size() > 1)
      throw ScenarioError(where, 0,
                          fmt::format("is ambiguous; use {}.{} or {}.{}", candidates[0][0],
                                      candidates[0].back(), candidates[1][0], candidates[1].back()),
                          std::string(parameter));
    path = candidates.front();
  } else {
    const auto block = std::find_if(kBlocks.begin(), kBlocks.end(),
                                    [&](const auto& b) { return b.first == path[0]; });
    if (path.size() != 2 || block == kBlocks.end() || !block->second.contains(path[1]))
      throw ScenarioError(where, 0, "does not name a numeric field", std::string(parameter));
  }

  if (kIntegerFields.contains(path.back())) {
    if (value != std::floor(value) || std::abs(value) > 1e15)
      throw ScenarioError(where, 0, "expects an integer value", std::string(parameter));
  }
  json* node = &doc;
  for (size_t i = 0; i + 1 < path.size(); ++i) node = &(*node)[path[i]];
  if (kIntegerFields.contains(path.back()))
    (*node)[path.back()] = static_cast<long>(value);
  else
    (*node)[path.back()] = value;
  const std::string text = doc.dump(2);
  return parse_scenario(text, where);
}

std::vector<std::string> preset_names() { return {"fig3", "fig4"}; }

Preset builtin_preset(std::string_view name, double eta) {
  if (!(eta >= 0.0 && eta <= 1.0)) throw ValidationError("must lie in [0, 1]", "eta");
  std::vector<double> omegas;
  if (name == "fig3") omegas = {1.5, 2.0, 3.0, 5.0};
  else if (name == "fig4") omegas = {0.0, 0.5, 1.0, 3.0};
  else throw ValidationError(fmt::format("unknown preset \"{}\" (expected fig3 or fig4)", name), "preset");

  // G_je = G_gj = kappa, kappa_a = kappa_b = kappa = 1, both modes centred.
  const json doc = {
      {"name", fmt::format("{}_eta{}", name, eta)},
      {"mode", "reduced"},
      {"symmetric", {{"G", 1.0}, {"kappa", 1.0}, {"Omega", omegas.front()}}},
      {"eta", eta},
      {"initial_state", "e"},
      {"t_end", 6.0},
      {"samples", 601},
  };
  return {parse_scenario(doc.dump(2), fmt::format("preset {}", name)), "Omega", omegas};
}

}  // namespace qbeat
