#pragma once

// Run configuration: JSON schema, validation with field-path errors and a
// lossless round trip. A manifest written by a run is itself accepted as a
// configuration, which reproduces that run.

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdint>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include <json.hpp>

#include "slerho/cft.hpp"
#include "slerho/errors.hpp"

namespace slerho {

inline constexpr int kSchemaVersion = 1;

enum class Command : std::uint8_t { weights, simulate, trace, lpp, martingale, virasoro_check, strip_compare };

inline const std::vector<std::pair<Command, std::string>>& command_names() {
  static const std::vector<std::pair<Command, std::string>> names{
      {Command::weights, "weights"},     {Command::simulate, "simulate"},
      {Command::trace, "trace"},         {Command::lpp, "lpp"},
      {Command::martingale, "martingale"}, {Command::virasoro_check, "virasoro-check"},
      {Command::strip_compare, "strip-compare"}};
  return names;
}

inline std::string to_string(Command c) {
  for (const auto& [k, n] : command_names()) {
    if (k == c) return n;
  }
  return "?";
}

inline std::optional<Command> command_from_string(const std::string& s) {
  for (const auto& [k, n] : command_names()) {
    if (n == s) return k;
  }
  return std::nullopt;
}

struct Numerics {
  double dt = 1e-3;      ///< base step (capacity time; strip time for strip commands)
  double guard = 1e-4;   ///< relative collision/swallow guard
  double horizon = 1.0;
  double L = 30.0;       ///< strip exit level
  double rel_tol = 1e-10;
  std::optional<double> tip_offset;  ///< default 2 sqrt(dt)
  double fd_step = 1e-6;
  int max_halvings = 20;
  double split_point = 1.0;
  bool exact_rational = true;

  double effective_tip_offset() const { return tip_offset ? *tip_offset : 2.0 * std::sqrt(dt); }
  bool operator==(const Numerics&) const = default;
};

struct MonteCarlo {
  std::uint64_t n_paths = 1000;
  std::vector<double> slice_times;
  std::optional<std::uint64_t> seed;
  double threshold = 3.5;
  std::string stop_policy = "freeze";
  bool operator==(const MonteCarlo&) const = default;
};

struct Observe {
  std::vector<std::complex<double>> points;
  std::string coordinates = "strip";  ///< strip or halfplane
  std::vector<double> sample_times;
  bool operator==(const Observe&) const = default;
};

struct Output {
  std::string directory = "out";
  std::vector<std::string> formats{"csv", "json", "svg"};

  bool wants(const std::string& f) const { return std::find(formats.begin(), formats.end(), f) != formats.end(); }
  bool operator==(const Output&) const = default;
};

struct RngSpec {
  std::string generator = "philox4x32-10";
  std::string normal = "box-muller";
  bool operator==(const RngSpec&) const = default;
};

struct RunConfig {
  int schema_version = kSchemaVersion;
  Command command = Command::simulate;
  SleParams params;
  Numerics numerics;
  MonteCarlo mc;
  Observe observe;
  Output output;
  RngSpec rng;

  bool operator==(const RunConfig& o) const {
    return schema_version == o.schema_version && command == o.command && params.kappa == o.params.kappa &&
           params.rho == o.params.rho && params.x == o.params.x && params.xi0 == o.params.xi0 &&
           numerics == o.numerics && mc == o.mc && observe == o.observe && output == o.output && rng == o.rng;
  }
};

namespace detail {

using ojson = nlohmann::ordered_json;

inline void reject_unknown(const ojson& obj, const std::string& path, std::initializer_list<const char*> known) {
  if (!obj.is_object()) throw ConfigError(path.empty() ? "<root>" : path, "expected an object");
  for (auto it = obj.begin(); it != obj.end(); ++it) {
    const bool ok = std::any_of(known.begin(), known.end(), [&](const char* k) { return it.key() == k; });
    if (!ok) throw ConfigError(path.empty() ? it.key() : path + "." + it.key(), "unknown key");
  }
}

inline double get_real(const ojson& v, const std::string& path) {
  if (!v.is_number()) throw ConfigError(path, "expected a number");
  const double d = v.get<double>();
  if (!std::isfinite(d)) throw ConfigError(path, "must be finite");
  return d;
}

inline double get_real_in(const ojson& v, const std::string& path, double lo, double hi, bool lo_open = true) {
  const double d = get_real(v, path);
  const bool above = lo_open ? d > lo : d >= lo;
  if (!above || d > hi) {
    throw ConfigError(path, "value " + std::to_string(d) + " outside " + (lo_open ? "(" : "[") +
                                std::to_string(lo) + ", " + std::to_string(hi) + "]");
  }
  return d;
}

inline std::uint64_t get_uint(const ojson& v, const std::string& path) {
  if (!v.is_number_integer() || (v.is_number_integer() && !v.is_number_unsigned() && v.get<std::int64_t>() < 0)) {
    throw ConfigError(path, "expected a nonnegative integer");
  }
  return v.get<std::uint64_t>();
}

inline std::vector<double> get_reals(const ojson& v, const std::string& path) {
  if (!v.is_array()) throw ConfigError(path, "expected an array of numbers");
  std::vector<double> out;
  for (std::size_t i = 0; i < v.size(); ++i) out.push_back(get_real(v[i], path + "[" + std::to_string(i) + "]"));
  return out;
}

inline std::vector<double> get_times(const ojson& v, const std::string& path) {
  auto t = get_reals(v, path);
  for (std::size_t i = 0; i < t.size(); ++i) {
    if (t[i] < 0.0) throw ConfigError(path + "[" + std::to_string(i) + "]", "times must be nonnegative");
    if (i && t[i] < t[i - 1]) throw ConfigError(path, "times must be sorted ascending");
  }
  return t;
}

inline std::string get_choice(const ojson& v, const std::string& path, std::initializer_list<const char*> allowed) {
  if (!v.is_string()) throw ConfigError(path, "expected a string");
  const auto s = v.get<std::string>();
  for (const char* a : allowed) {
    if (s == a) return s;
  }
  std::string msg = "must be one of";
  for (const char* a : allowed) msg += std::string(" ") + a;
  throw ConfigError(path, msg);
}

}  // namespace detail

/// Parses and validates a configuration (or a manifest carrying one).
inline RunConfig parse_config(const nlohmann::ordered_json& doc) {
  using detail::ojson;
  if (!doc.is_object()) throw ConfigError("<root>", "expected a JSON object");
  if (doc.contains("kind") && doc["kind"] == "manifest") {
    if (!doc.contains("config")) throw ConfigError("config", "manifest without a config echo");
    return parse_config(doc["config"]);
  }
  detail::reject_unknown(doc, "", {"schema_version", "command", "params", "numerics", "mc", "observe", "output", "rng"});
  RunConfig cfg;
  if (doc.contains("schema_version")) {
    const auto v = detail::get_uint(doc["schema_version"], "schema_version");
    if (v != kSchemaVersion) throw ConfigError("schema_version", "unsupported version " + std::to_string(v));
  }
  if (doc.contains("command")) {
    if (!doc["command"].is_string()) throw ConfigError("command", "expected a string");
    const auto c = command_from_string(doc["command"].get<std::string>());
    if (!c) throw ConfigError("command", "unknown command '" + doc["command"].get<std::string>() + "'");
    cfg.command = *c;
  }

  if (!doc.contains("params")) throw ConfigError("params", "required section missing");
  {
    const ojson& p = doc["params"];
    detail::reject_unknown(p, "params", {"kappa", "rho", "x", "xi0"});
    if (!p.contains("kappa")) throw ConfigError("params.kappa", "required");
    cfg.params.kappa = detail::get_real_in(p["kappa"], "params.kappa", 0.0, 1e3);
    if (p.contains("rho")) cfg.params.rho = detail::get_reals(p["rho"], "params.rho");
    if (p.contains("x")) cfg.params.x = detail::get_reals(p["x"], "params.x");
    if (p.contains("xi0")) cfg.params.xi0 = detail::get_real(p["xi0"], "params.xi0");
    if (cfg.params.rho.size() != cfg.params.x.size()) {
      throw ConfigError("params.rho/params.x", "length mismatch: params.rho has " +
                                                   std::to_string(cfg.params.rho.size()) + " entries, params.x has " +
                                                   std::to_string(cfg.params.x.size()));
    }
    try {
      cfg.params.validate();
    } catch (const DomainError& e) {
      throw ConfigError("params", e.what());
    }
  }

  if (doc.contains("numerics")) {
    const ojson& n = doc["numerics"];
    detail::reject_unknown(n, "numerics", {"dt", "guard", "horizon", "L", "rel_tol", "tip_offset", "fd_step",
                                           "max_halvings", "split_point", "exact_rational"});
    auto& o = cfg.numerics;
    if (n.contains("dt")) o.dt = detail::get_real_in(n["dt"], "numerics.dt", 0.0, 1.0);
    if (n.contains("guard")) o.guard = detail::get_real_in(n["guard"], "numerics.guard", 0.0, 0.5);
    if (n.contains("horizon")) o.horizon = detail::get_real_in(n["horizon"], "numerics.horizon", 0.0, 1e6);
    if (n.contains("L")) o.L = detail::get_real_in(n["L"], "numerics.L", 0.0, 700.0);
    if (n.contains("rel_tol")) o.rel_tol = detail::get_real_in(n["rel_tol"], "numerics.rel_tol", 1e-15, 1e-2, false);
    if (n.contains("tip_offset")) o.tip_offset = detail::get_real_in(n["tip_offset"], "numerics.tip_offset", 0.0, 1e3);
    if (n.contains("fd_step")) o.fd_step = detail::get_real_in(n["fd_step"], "numerics.fd_step", 0.0, 1.0);
    if (n.contains("max_halvings")) {
      const auto m = detail::get_uint(n["max_halvings"], "numerics.max_halvings");
      if (m > 60) throw ConfigError("numerics.max_halvings", "must be at most 60");
      o.max_halvings = static_cast<int>(m);
    }
    if (n.contains("split_point")) o.split_point = detail::get_real_in(n["split_point"], "numerics.split_point", 0.0, 10.0);
    if (n.contains("exact_rational")) {
      if (!n["exact_rational"].is_boolean()) throw ConfigError("numerics.exact_rational", "expected a boolean");
      o.exact_rational = n["exact_rational"].get<bool>();
    }
  }

  if (doc.contains("mc")) {
    const ojson& m = doc["mc"];
    detail::reject_unknown(m, "mc", {"n_paths", "slice_times", "seed", "threshold", "stop_policy"});
    if (m.contains("n_paths")) {
      cfg.mc.n_paths = detail::get_uint(m["n_paths"], "mc.n_paths");
      if (cfg.mc.n_paths < 1 || cfg.mc.n_paths > 100000000) throw ConfigError("mc.n_paths", "must be in [1, 1e8]");
    }
    if (m.contains("slice_times")) cfg.mc.slice_times = detail::get_times(m["slice_times"], "mc.slice_times");
    if (m.contains("seed")) cfg.mc.seed = detail::get_uint(m["seed"], "mc.seed");
    if (m.contains("threshold")) cfg.mc.threshold = detail::get_real_in(m["threshold"], "mc.threshold", 0.0, 1e3);
    if (m.contains("stop_policy")) cfg.mc.stop_policy = detail::get_choice(m["stop_policy"], "mc.stop_policy", {"freeze", "exclude"});
  }

  if (doc.contains("observe")) {
    const ojson& ob = doc["observe"];
    detail::reject_unknown(ob, "observe", {"points", "coordinates", "sample_times"});
    if (ob.contains("points")) {
      const ojson& pts = ob["points"];
      if (!pts.is_array()) throw ConfigError("observe.points", "expected an array of [re, im] pairs");
      for (std::size_t i = 0; i < pts.size(); ++i) {
        const std::string path = "observe.points[" + std::to_string(i) + "]";
        if (!pts[i].is_array() || pts[i].size() != 2) throw ConfigError(path, "expected [re, im]");
        cfg.observe.points.emplace_back(detail::get_real(pts[i][0], path + "[0]"),
                                        detail::get_real(pts[i][1], path + "[1]"));
      }
    }
    if (ob.contains("coordinates")) {
      cfg.observe.coordinates = detail::get_choice(ob["coordinates"], "observe.coordinates", {"strip", "halfplane"});
    }
    if (ob.contains("sample_times")) cfg.observe.sample_times = detail::get_times(ob["sample_times"], "observe.sample_times");
  }

  if (doc.contains("output")) {
    const ojson& o = doc["output"];
    detail::reject_unknown(o, "output", {"directory", "formats"});
    if (o.contains("directory")) {
      if (!o["directory"].is_string() || o["directory"].get<std::string>().empty()) {
        throw ConfigError("output.directory", "expected a nonempty string");
      }
      cfg.output.directory = o["directory"].get<std::string>();
    }
    if (o.contains("formats")) {
      if (!o["formats"].is_array()) throw ConfigError("output.formats", "expected an array");
      cfg.output.formats.clear();
      std::set<std::string> seen;
      for (std::size_t i = 0; i < o["formats"].size(); ++i) {
        const auto f = detail::get_choice(o["formats"][i], "output.formats[" + std::to_string(i) + "]", {"csv", "json", "svg"});
        if (!seen.insert(f).second) throw ConfigError("output.formats", "duplicate format " + f);
        cfg.output.formats.push_back(f);
      }
    }
  }

  if (doc.contains("rng")) {
    const ojson& r = doc["rng"];
    detail::reject_unknown(r, "rng", {"generator", "normal"});
    if (r.contains("generator")) cfg.rng.generator = detail::get_choice(r["generator"], "rng.generator", {"philox4x32-10"});
    if (r.contains("normal")) cfg.rng.normal = detail::get_choice(r["normal"], "rng.normal", {"box-muller"});
  }
  return cfg;
}

inline RunConfig parse_config(const std::string& text) {
  nlohmann::ordered_json doc;
  try {
    doc = nlohmann::ordered_json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw ConfigError("<root>", std::string("malformed JSON: ") + e.what());
  }
  return parse_config(doc);
}

/// Full configuration with every default spelled out.
inline RunConfig parse_config(const char* text) { return parse_config(std::string(text)); }

inline nlohmann::ordered_json to_json(const RunConfig& c) {
  nlohmann::ordered_json j;
  j["schema_version"] = c.schema_version;
  j["command"] = to_string(c.command);
  j["params"] = {{"kappa", c.params.kappa}, {"rho", c.params.rho}, {"x", c.params.x}, {"xi0", c.params.xi0}};
  auto& n = j["numerics"];
  n["dt"] = c.numerics.dt;
  n["guard"] = c.numerics.guard;
  n["horizon"] = c.numerics.horizon;
  n["L"] = c.numerics.L;
  n["rel_tol"] = c.numerics.rel_tol;
  if (c.numerics.tip_offset) n["tip_offset"] = *c.numerics.tip_offset;
  n["fd_step"] = c.numerics.fd_step;
  n["max_halvings"] = c.numerics.max_halvings;
  n["split_point"] = c.numerics.split_point;
  n["exact_rational"] = c.numerics.exact_rational;
  auto& m = j["mc"];
  m["n_paths"] = c.mc.n_paths;
  m["slice_times"] = c.mc.slice_times;
  if (c.mc.seed) m["seed"] = *c.mc.seed;
  m["threshold"] = c.mc.threshold;
  m["stop_policy"] = c.mc.stop_policy;
  auto pts = nlohmann::ordered_json::array();
  for (auto p : c.observe.points) pts.push_back({p.real(), p.imag()});
  j["observe"] = {{"points", pts}, {"coordinates", c.observe.coordinates}, {"sample_times", c.observe.sample_times}};
  j["output"] = {{"directory", c.output.directory}, {"formats", c.output.formats}};
  j["rng"] = {{"generator", c.rng.generator}, {"normal", c.rng.normal}};
  return j;
}

inline std::string serialize_config(const RunConfig& c) { return to_json(c).dump(2); }

}  // namespace slerho
