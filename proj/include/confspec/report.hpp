#pragma once

#include <json.hpp>

#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "bound_engine.hpp"
#include "conformal_maps.hpp"
#include "disc_constants.hpp"
#include "eigen_oracle.hpp"
#include "errors.hpp"
#include "mesh.hpp"
#include "regularity.hpp"

namespace confspec {

inline constexpr const char* kToolName = "conf_spectral";
inline constexpr const char* kToolVersion = "1.0.0";
inline constexpr int kSchemaVersion = 1;
inline constexpr const char* kDiscConstantLabel = "closed-form upper bound for B_{r,q}(disc)";

// ---------------------------------------------------------------- map specs

inline ConformalMap map_from_json(const nlohmann::json& j) {
  if (!j.is_object()) fail(ErrorKind::InvalidMapSpec, "map spec must be a JSON object");
  for (const auto& [key, _] : j.items()) {
    if (key != "kind" && key != "coeffs" && key != "exponent" && key != "label") {
      fail(ErrorKind::InvalidMapSpec, "unknown map spec key '" + key + "'");
    }
  }
  if (!j.contains("kind") || !j["kind"].is_string()) fail(ErrorKind::InvalidMapSpec, "map spec needs a string 'kind'");
  const std::string kind = j["kind"];
  const std::string label = j.value("label", std::string{});
  auto relabel = [&](ConformalMap m) {
    if (label.empty()) return m;
    if (m.kind() == MapKind::Polynomial) return ConformalMap::polynomial(m.coeffs(), label);
    if (m.kind() == MapKind::PowerMap) return ConformalMap::power(m.exponent(), label);
    return m;
  };
  if (kind == "identity") return ConformalMap::identity();
  if (kind == "cardioid") return ConformalMap::cardioid();
  if (kind == "koebe") return ConformalMap::koebe();
  if (kind == "polynomial") {
    if (!j.contains("coeffs") || !j["coeffs"].is_array()) fail(ErrorKind::InvalidMapSpec, "polynomial needs 'coeffs'");
    std::vector<cplx> coeffs;
    for (const auto& c : j["coeffs"]) {
      if (c.is_number()) {
        coeffs.emplace_back(c.get<double>(), 0.0);
      } else if (c.is_array() && c.size() == 2 && c[0].is_number() && c[1].is_number()) {
        coeffs.emplace_back(c[0].get<double>(), c[1].get<double>());
      } else {
        fail(ErrorKind::InvalidMapSpec, "coefficients must be numbers or [re, im] pairs");
      }
    }
    return relabel(ConformalMap::polynomial(std::move(coeffs)));
  }
  if (kind == "power") {
    if (!j.contains("exponent") || !j["exponent"].is_number()) fail(ErrorKind::InvalidMapSpec, "power needs 'exponent'");
    return relabel(ConformalMap::power(j["exponent"].get<double>()));
  }
  fail(ErrorKind::InvalidMapSpec, "unknown map kind '" + kind + "'");
}

inline nlohmann::json parse_json_text(const std::string& text, ErrorKind kind) {
  try {
    return nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    fail(kind, std::string("malformed JSON: ") + e.what());
  }
}

/// Accepts a catalog name, an inline JSON object, or a path to a JSON file.
inline ConformalMap parse_map_spec(const std::string& spec) {
  if (spec == "identity" || spec == "cardioid" || spec == "koebe") return map_from_json({{"kind", spec}});
  if (!spec.empty() && spec.front() == '{') return map_from_json(parse_json_text(spec, ErrorKind::InvalidMapSpec));
  std::ifstream in(spec);
  if (!in) fail(ErrorKind::InvalidMapSpec, "'" + spec + "' is neither a catalog map, inline JSON, nor a readable file");
  std::stringstream buf;
  buf << in.rdbuf();
  return map_from_json(parse_json_text(buf.str(), ErrorKind::InvalidMapSpec));
}

// ------------------------------------------------------------------- config

enum class OutputFormat { Json, Csv, Text };

inline std::string_view to_string(OutputFormat f) {
  switch (f) {
    case OutputFormat::Json: return "json";
    case OutputFormat::Csv: return "csv";
    case OutputFormat::Text: return "text";
  }
  return "json";
}

inline OutputFormat parse_output_format(const std::string& s) {
  if (s == "json") return OutputFormat::Json;
  if (s == "csv") return OutputFormat::Csv;
  if (s == "text") return OutputFormat::Text;
  fail(ErrorKind::InvalidConfig, "output must be one of json, csv, text");
}

struct BoundConfig {
  std::string map = "cardioid";
  double p = 1.8;
  std::optional<double> alpha;
  std::optional<double> r_or_s;
  std::optional<double> diameter;
  int q_grid = 129;
  double tol = 1e-8;
  int oracle_n = 64;
  int restarts = 8;
  OutputFormat output = OutputFormat::Json;
  std::uint64_t seed = 0;  // 0 derives the restart seed from (label, p, n)
};

inline void validate_config(const BoundConfig& c) {
  auto bad = [](const std::string& what) { fail(ErrorKind::InvalidConfig, what); };
  if (!std::isfinite(c.p)) bad("p must be finite");
  if (c.alpha && !std::isfinite(*c.alpha)) bad("alpha must be finite");
  if (c.r_or_s && !std::isfinite(*c.r_or_s)) bad("r_or_s must be finite");
  if (c.diameter && !(*c.diameter > 0.0)) bad("diameter must be positive");
  if (c.q_grid < 3 || c.q_grid > 100000) bad("q_grid must lie in [3, 100000]");
  if (!(c.tol > 0.0 && c.tol < 1e-2)) bad("tol must lie in (0, 1e-2)");
  if (c.oracle_n < 4 || c.oracle_n > 1024) bad("oracle_n must lie in [4, 1024]");
  if (c.restarts < 1 || c.restarts > 1000) bad("restarts must lie in [1, 1000]");
}

/// Overlays keys of a JSON config object; unknown keys are rejected.
inline void apply_config_json(BoundConfig& c, const nlohmann::json& j) {
  if (!j.is_object()) fail(ErrorKind::InvalidConfig, "config must be a JSON object");
  auto number = [&](const std::string& key) {
    if (!j[key].is_number()) fail(ErrorKind::InvalidConfig, "'" + key + "' must be a number");
    return j[key].get<double>();
  };
  auto integer = [&](const std::string& key) {
    if (!j[key].is_number_integer()) fail(ErrorKind::InvalidConfig, "'" + key + "' must be an integer");
    return j[key].get<long long>();
  };
  for (const auto& [key, value] : j.items()) {
    if (key == "map") {
      c.map = value.is_string() ? value.get<std::string>() : value.dump();
    } else if (key == "p") {
      c.p = number(key);
    } else if (key == "alpha") {
      c.alpha = value.is_null() ? std::nullopt : std::optional<double>(number(key));
    } else if (key == "r_or_s") {
      c.r_or_s = value.is_null() ? std::nullopt : std::optional<double>(number(key));
    } else if (key == "diameter") {
      c.diameter = value.is_null() ? std::nullopt : std::optional<double>(number(key));
    } else if (key == "q_grid") {
      c.q_grid = static_cast<int>(integer(key));
    } else if (key == "tol") {
      c.tol = number(key);
    } else if (key == "oracle_n") {
      c.oracle_n = static_cast<int>(integer(key));
    } else if (key == "restarts") {
      c.restarts = static_cast<int>(integer(key));
    } else if (key == "output") {
      if (!value.is_string()) fail(ErrorKind::InvalidConfig, "'output' must be a string");
      c.output = parse_output_format(value.get<std::string>());
    } else if (key == "seed") {
      const long long s = integer(key);
      if (s < 0) fail(ErrorKind::InvalidConfig, "'seed' must be non-negative");
      c.seed = static_cast<std::uint64_t>(s);
    } else {
      fail(ErrorKind::InvalidConfig, "unknown config key '" + key + "'");
    }
  }
}

inline BoundConfig load_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorKind::InvalidConfig, "cannot read config file '" + path + "'");
  std::stringstream buf;
  buf << in.rdbuf();
  BoundConfig c;
  apply_config_json(c, parse_json_text(buf.str(), ErrorKind::InvalidConfig));
  return c;
}

// ------------------------------------------------------------ serialisation

inline std::string format_real(double v) {
  if (!std::isfinite(v)) return "null";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.12e", v);
  return buf;
}

inline std::string json_quote(std::string_view s) { return nlohmann::json(std::string(s)).dump(); }

/// Minimal ordered JSON emitter: keys appear in insertion order and reals use
/// a fixed scientific format, so equal inputs give byte-identical output.
class JsonWriter {
 public:
  JsonWriter& begin_object(std::string_view key = {}) { return open(key, '{'); }
  JsonWriter& end_object() { return close('}'); }
  JsonWriter& begin_array(std::string_view key = {}) { return open(key, '['); }
  JsonWriter& end_array() { return close(']'); }

  JsonWriter& real(std::string_view key, double v) { return raw(key, format_real(v)); }
  JsonWriter& real(std::string_view key, const std::optional<double>& v) {
    return raw(key, v ? format_real(*v) : "null");
  }
  JsonWriter& integer(std::string_view key, long long v) { return raw(key, std::to_string(v)); }
  JsonWriter& boolean(std::string_view key, bool v) { return raw(key, v ? "true" : "false"); }
  JsonWriter& string(std::string_view key, std::string_view v) { return raw(key, json_quote(v)); }
  JsonWriter& null(std::string_view key) { return raw(key, "null"); }

  JsonWriter& raw(std::string_view key, const std::string& text) {
    prefix(key);
    out_ += text;
    return *this;
  }

  std::string str() const { return out_ + "\n"; }

 private:
  JsonWriter& open(std::string_view key, char bracket) {
    prefix(key);
    out_ += bracket;
    first_.push_back(true);
    return *this;
  }
  JsonWriter& close(char bracket) {
    const bool empty = first_.back();
    first_.pop_back();
    if (!empty) newline();
    out_ += bracket;
    return *this;
  }
  void prefix(std::string_view key) {
    if (!first_.empty()) {
      if (!first_.back()) out_ += ',';
      first_.back() = false;
      newline();
    }
    if (!key.empty()) {
      out_ += json_quote(key);
      out_ += ": ";
    }
  }
  void newline() {
    out_ += '\n';
    out_.append(2 * first_.size(), ' ');
  }

  std::string out_;
  std::vector<bool> first_;
};

inline void write_map(JsonWriter& w, const ConformalMap& map) {
  w.begin_object("map");
  switch (map.kind()) {
    case MapKind::Identity: w.string("kind", "identity"); break;
    case MapKind::Cardioid: w.string("kind", "cardioid"); break;
    case MapKind::Koebe: w.string("kind", "koebe"); break;
    case MapKind::Polynomial: {
      w.string("kind", "polynomial");
      w.begin_array("coeffs");
      for (const auto& c : map.coeffs()) {
        w.begin_array().real({}, c.real()).real({}, c.imag()).end_array();
      }
      w.end_array();
      break;
    }
    case MapKind::PowerMap:
      w.string("kind", "power");
      w.real("exponent", map.exponent());
      break;
  }
  w.string("label", map.label());
  w.end_object();
}

inline void write_config(JsonWriter& w, const BoundConfig& c, const ConformalMap& map) {
  w.begin_object("config");
  write_map(w, map);
  w.real("p", c.p);
  w.real("alpha", c.alpha);
  w.real("r_or_s", c.r_or_s);
  w.real("diameter", c.diameter);
  w.integer("q_grid", c.q_grid);
  w.real("tol", c.tol);
  w.integer("oracle_n", c.oracle_n);
  w.integer("restarts", c.restarts);
  w.string("output", to_string(c.output));
  w.integer("seed", static_cast<long long>(c.seed));
  w.end_object();
}

inline void write_header(JsonWriter& w, std::string_view command) {
  w.integer("schema", kSchemaVersion);
  w.string("tool", kToolName);
  w.string("version", kToolVersion);
  w.string("command", command);
}

inline void write_window(JsonWriter& w, const ParameterWindow& win) {
  w.begin_object("window");
  w.real("p", win.p);
  w.real("p_lower", win.p_lower);
  w.real("q_min", win.q_min);
  w.real("q_max", win.q_max);
  w.real("r_min", win.r_min);
  w.real("r_max", win.r_max);
  w.real("s_max", win.s_max);
  w.real("alpha", win.alpha);
  w.real("brennan_alpha0", win.brennan.alpha0);
  w.end_object();
}

inline void write_bound_report(JsonWriter& w, const BoundReport& r) {
  w.string("target", to_string(r.target));
  w.string("disc_constant_label", kDiscConstantLabel);
  if (r.target != BoundTarget::SmoothDomain) {
    write_window(w, r.window);
    w.begin_object("feasible_q").real("lo", r.feasible_q.lo).real("hi", r.feasible_q.hi);
    w.boolean("lo_open", r.feasible_q.lo_open).end_object();
  }
  w.real("best_q", r.best_q);
  w.real("bound_value", r.bound_value);
  const bool eigen = r.target == BoundTarget::EigenvalueBound || r.target == BoundTarget::SmoothDomain;
  w.real("mu_p_lower_bound", eigen ? std::optional<double>(1.0 / r.bound_value) : std::nullopt);
  w.begin_object("factors");
  for (const auto& [name, value] : r.factors) w.real(name, value);
  w.end_object();
  w.begin_array("quadrature_statuses");
  for (auto s : r.quadrature_statuses) w.string({}, to_string(s));
  w.end_array();
  w.integer("objective_evaluations", r.objective_evaluations);
}

inline void write_error(JsonWriter& w, const Error& e) {
  w.begin_object("error").string("kind", to_string(e.kind())).string("message", e.what()).end_object();
}

// ----------------------------------------------------------------- commands

struct CommandResult {
  int exit_code = 0;
  std::string output;   // report document
  std::string message;  // human-readable diagnostic for stderr
};

inline int exit_code_for(ErrorKind k) {
  switch (k) {
    case ErrorKind::ParameterOutOfRange:
    case ErrorKind::DeltaOutOfRange:
    case ErrorKind::InfeasibleParameters:
    case ErrorKind::InvalidConfig:
    case ErrorKind::InvalidMapSpec:
      return 2;
    case ErrorKind::AlphaNotRegular:
    case ErrorKind::AlphaNotRegularForMap:
    case ErrorKind::KNormDivergent:
    case ErrorKind::SupNormUnbounded:
    case ErrorKind::PoleAtBoundary:
    case ErrorKind::NodeSingularity:
      return 3;
    default:
      return 1;
  }
}

inline EngineOptions engine_options(const BoundConfig& c) {
  EngineOptions opt;
  opt.tol = c.tol;
  opt.optimizer.grid_points = c.q_grid;
  return opt;
}

/// Runs the bound matching the config: the eigenvalue bound when only alpha
/// is set, the unweighted constant with (r_or_s = s, alpha), the weighted
/// constant with r_or_s = r alone.
inline BoundReport run_bound(const PowerIntegrator& map, const BoundConfig& c) {
  const EngineOptions opt = engine_options(c);
  if (c.r_or_s && c.alpha) return unweighted_constant(map, c.p, *c.r_or_s, *c.alpha, opt);
  if (c.r_or_s) {
    const ParameterWindow window = make_window(c.p, opt.brennan);
    if (!(*c.r_or_s >= 1.0 && *c.r_or_s <= window.r_max)) {
      fail(ErrorKind::ParameterOutOfRange, "r in [1, r_max = " + detail::fmt(window.r_max) +
                                               "] violated by r = " + detail::fmt(*c.r_or_s));
    }
    return weighted_constant(map, c.p, *c.r_or_s, window, opt);
  }
  if (!c.alpha) fail(ErrorKind::InvalidConfig, "bound needs alpha, r_or_s, or both");
  return eigenvalue_bound(map, c.p, *c.alpha, opt);
}

template <class Body>
CommandResult guarded(std::string_view command, const BoundConfig& c, Body body) {
  CommandResult result;
  try {
    validate_config(c);
    const ConformalMap map = parse_map_spec(c.map);
    body(map, result);
  } catch (const Error& e) {
    result.exit_code = exit_code_for(e.kind());
    result.message = std::string(to_string(e.kind())) + ": " + e.what();
    if (result.output.empty() && c.output == OutputFormat::Json) {
      JsonWriter w;
      w.begin_object();
      write_header(w, command);
      write_error(w, e);
      w.end_object();
      result.output = w.str();
    }
  }
  return result;
}

inline const std::vector<std::string>& sweep_columns() {
  static const std::vector<std::string> cols = {
      "map", "p", "alpha", "status", "best_q", "bound_value", "mu_p_lower_bound", "p_lower", "q_max", "r_max",
      "s_max", "q_lo", "q_hi", "alpha_integral_status", "k_integral_status"};
  return cols;
}

inline std::string csv_header() {
  std::string out;
  for (const auto& c : sweep_columns()) out += (out.empty() ? "" : ",") + c;
  return out + "\n";
}

inline std::string csv_quote(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string q = "\"";
  for (char ch : s) q += ch == '"' ? std::string("\"\"") : std::string(1, ch);
  return q + "\"";
}

/// One sweep row; errors become a status column instead of aborting.
inline std::string csv_row(const PowerIntegrator& integrator, const BoundConfig& c) {
  std::vector<std::string> cells(sweep_columns().size());
  cells[0] = csv_quote(integrator.map().label());
  cells[1] = format_real(c.p);
  cells[2] = c.alpha ? format_real(*c.alpha) : "";
  try {
    const BoundReport r = run_bound(integrator, c);
    cells[3] = "ok";
    cells[4] = format_real(r.best_q);
    cells[5] = format_real(r.bound_value);
    cells[6] = r.target == BoundTarget::EigenvalueBound ? format_real(1.0 / r.bound_value) : "";
    cells[7] = format_real(r.window.p_lower);
    cells[8] = format_real(r.window.q_max);
    cells[9] = format_real(r.window.r_max);
    cells[10] = r.window.s_max ? format_real(*r.window.s_max) : "";
    cells[11] = format_real(r.feasible_q.lo);
    cells[12] = format_real(r.feasible_q.hi);
    if (r.quadrature_statuses.size() == 2) {
      cells[13] = std::string(to_string(r.quadrature_statuses[0]));
      cells[14] = std::string(to_string(r.quadrature_statuses[1]));
    } else if (r.quadrature_statuses.size() == 1) {
      cells[14] = std::string(to_string(r.quadrature_statuses[0]));
    }
  } catch (const Error& e) {
    cells[3] = std::string(to_string(e.kind()));
    try {
      const ParameterWindow w = make_window(c.p, BrennanRange{}, c.alpha);
      cells[7] = format_real(w.p_lower);
      cells[8] = format_real(w.q_max);
      cells[9] = format_real(w.r_max);
      cells[10] = w.s_max ? format_real(*w.s_max) : "";
    } catch (const Error&) {
    }
  }
  std::string line;
  for (std::size_t i = 0; i < cells.size(); ++i) line += (i ? "," : "") + cells[i];
  return line + "\n";
}

inline CommandResult cmd_bound(const BoundConfig& c) {
  return guarded("bound", c, [&](const ConformalMap& map, CommandResult& result) {
    const PowerIntegrator integrator(map);
    const BoundReport r = run_bound(integrator, c);
    std::optional<double> convex;
    if (c.diameter) convex = convex_comparison_bound(c.p, *c.diameter);
    if (c.output == OutputFormat::Csv) {
      result.output = csv_header() + csv_row(integrator, c);
      return;
    }
    if (c.output == OutputFormat::Text) {
      std::ostringstream os;
      os << "target: " << to_string(r.target) << "\nmap: " << map.label() << "\np: " << format_real(r.p)
         << "\nbest_q: " << format_real(r.best_q) << "\nbound_value: " << format_real(r.bound_value) << "\n";
      if (r.target == BoundTarget::EigenvalueBound) os << "mu_p_lower_bound: " << format_real(1.0 / r.bound_value) << "\n";
      for (const auto& [name, value] : r.factors) os << "factor." << name << ": " << format_real(value) << "\n";
      os << "disc constant: " << kDiscConstantLabel << "\n";
      if (convex) os << "convex_comparison (convex domains only): " << format_real(*convex) << "\n";
      result.output = os.str();
      return;
    }
    JsonWriter w;
    w.begin_object();
    write_header(w, "bound");
    write_config(w, c, map);
    write_bound_report(w, r);
    if (convex) {
      w.begin_object("convex_comparison");
      w.real("diameter", *c.diameter).real("pi_p", pi_p(c.p)).real("value", *convex);
      w.string("note", "(pi_p/d)^p, valid only for convex domains").end_object();
    } else {
      w.null("convex_comparison");
    }
    w.end_object();
    result.output = w.str();
  });
}

inline CommandResult cmd_regularity(const BoundConfig& c, double tol_alpha = 0.01) {
  return guarded("regularity", c, [&](const ConformalMap& map, CommandResult& result) {
    const RegularityProfile prof = estimate_alpha_max(map, tol_alpha, c.tol);
    const std::string alpha_text =
        prof.alpha_max_estimate ? format_real(*prof.alpha_max_estimate) : ">= " + format_real(kAlphaProbeCap);
    if (c.output != OutputFormat::Json) {
      std::ostringstream os;
      if (c.output == OutputFormat::Csv) {
        os << "alpha,status,value,levels\n";
        for (const auto& [a, r] : prof.probe_log) {
          os << format_real(a) << "," << to_string(r.status) << "," << format_real(r.value) << ","
             << r.refinement_levels_used << "\n";
        }
      } else {
        os << "map: " << map.label() << "\nalpha_max: " << alpha_text
           << "\nconformal_regular: " << (prof.is_conformal_regular ? "true" : "false") << "\n";
      }
      result.output = os.str();
      return;
    }
    JsonWriter w;
    w.begin_object();
    write_header(w, "regularity");
    write_config(w, c, map);
    w.real("alpha_max", prof.alpha_max_estimate);
    w.string("alpha_max_text", alpha_text);
    w.real("bracket_lo", prof.bracket_lo).real("bracket_hi", prof.bracket_hi);
    w.boolean("is_conformal_regular", prof.is_conformal_regular);
    w.begin_array("probe_log");
    for (const auto& [a, r] : prof.probe_log) {
      w.begin_object().real("alpha", a).string("status", to_string(r.status)).real("value", r.value);
      w.real("abs_error_estimate", r.abs_error_estimate).integer("levels", r.refinement_levels_used).end_object();
    }
    w.end_array();
    w.end_object();
    result.output = w.str();
  });
}

/// Validation; when mesh_off is non-empty the oracle mesh is written there.
inline CommandResult cmd_validate(const BoundConfig& c, const std::string& mesh_off = {}) {
  return guarded("validate", c, [&](const ConformalMap& map, CommandResult& result) {
    ValidationOptions opt;
    opt.engine = engine_options(c);
    opt.rayleigh.restarts = c.restarts;
    opt.rayleigh.seed = c.seed;
    if (c.p != 2.0 && !c.alpha) fail(ErrorKind::InvalidConfig, "validate needs alpha unless p = 2");
    const ValidationVerdict v = validate_bound(map, c.p, c.alpha.value_or(0.0), c.oracle_n, opt);
    if (!mesh_off.empty()) {
      std::ofstream os(mesh_off);
      if (!os) fail(ErrorKind::InvalidConfig, "cannot write mesh file '" + mesh_off + "'");
      write_off(build_mesh(map, c.oracle_n), os);
    }
    result.exit_code = v.pass ? 0 : 4;
    if (!v.pass) {
      result.message = "FAIL: lower bound " + format_real(v.lower_bound) + " exceeds oracle " +
                       format_real(v.upper_approx) + " beyond the margin";
    }
    if (c.output != OutputFormat::Json) {
      std::ostringstream os;
      os << (v.pass ? "PASS" : "FAIL") << " lower=" << format_real(v.lower_bound)
         << " upper=" << format_real(v.upper_approx) << " margin=" << format_real(v.margin) << "\n";
      result.output = os.str();
      return;
    }
    JsonWriter w;
    w.begin_object();
    write_header(w, "validate");
    write_config(w, c, map);
    w.string("verdict", v.pass ? "PASS" : "FAIL");
    w.real("lower_bound", v.lower_bound);
    w.real("upper_approx", v.upper_approx);
    w.real("margin", v.margin);
    w.begin_object("bound");
    write_bound_report(w, v.bound);
    w.end_object();
    w.begin_object("oracle");
    w.real("p", v.oracle.p).real("value", v.oracle.value);
    w.real("constraint_residual", v.oracle.constraint_residual);
    w.real("gradient_residual", v.oracle.gradient_residual);
    w.real("mesh_size", v.oracle.mesh_size).integer("vertices", v.oracle.coefficients.size());
    w.integer("restart_index", v.oracle.restart_index).end_object();
    w.end_object();
    result.output = w.str();
  });
}

/// Inclusive range "lo:hi:step" or a single value; lo > hi gives no points.
inline std::vector<double> parse_range(const std::string& text) {
  std::vector<double> parts;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ':')) {
    try {
      std::size_t used = 0;
      parts.push_back(std::stod(item, &used));
      if (used != item.size()) throw std::invalid_argument(item);
    } catch (const std::exception&) {
      fail(ErrorKind::InvalidConfig, "bad range '" + text + "'");
    }
  }
  if (parts.size() == 1) return parts;
  if (parts.size() != 3 || !(parts[2] > 0.0)) fail(ErrorKind::InvalidConfig, "range must be lo:hi:step with step > 0");
  std::vector<double> out;
  const double lo = parts[0];
  const double hi = parts[1];
  const double step = parts[2];
  if (lo > hi) return out;
  const auto count = static_cast<long long>(std::floor((hi - lo) / step + 1e-9));
  if (count > 100000) fail(ErrorKind::InvalidConfig, "range has too many points");
  for (long long i = 0; i <= count; ++i) out.push_back(lo + static_cast<double>(i) * step);
  return out;
}

/// CSV over the p x alpha grid; alpha_range may be empty (no alpha).
inline CommandResult cmd_sweep(const BoundConfig& c, const std::string& p_range, const std::string& alpha_range) {
  BoundConfig base = c;
  base.output = OutputFormat::Csv;
  return guarded("sweep", base, [&](const ConformalMap& map, CommandResult& result) {
    const std::vector<double> ps = parse_range(p_range);
    std::vector<std::optional<double>> alphas;
    if (alpha_range.empty()) {
      alphas.push_back(c.alpha);
    } else {
      for (double a : parse_range(alpha_range)) alphas.emplace_back(a);
    }
    const PowerIntegrator integrator(map);
    std::string out = csv_header();
    for (double p : ps) {
      for (const auto& a : alphas) {
        BoundConfig point = base;
        point.p = p;
        point.alpha = a;
        out += csv_row(integrator, point);
      }
    }
    result.output = out;
  });
}

}  // namespace confspec
