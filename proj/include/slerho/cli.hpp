#pragma once

// The seven batch commands behind the sle-rho tool. Each writes its artifacts
// plus manifest.json into the output directory; the exit status is 0 when every
// in-run verdict passes, 1 when a verdict fails and 2 when the run is refused.

#include <chrono>
#include <cmath>
#include <filesystem>
#include <iostream>
#include <numbers>
#include <ostream>
#include <string>
#include <vector>

#include "slerho/cft.hpp"
#include "slerho/chordal.hpp"
#include "slerho/config.hpp"
#include "slerho/consistency.hpp"
#include "slerho/io.hpp"
#include "slerho/observables.hpp"
#include "slerho/strip.hpp"
#include "slerho/virasoro.hpp"

namespace slerho::cli {

struct Artifact {
  std::string file;
  std::string hash;
};

struct RunOutcome {
  int exit_code = 0;
  bool verdict = true;
  json manifest;
  json result;
};

namespace detail {

class Writer {
 public:
  Writer(const RunConfig& cfg) : cfg_(cfg), dir_(cfg.output.directory) {
    std::filesystem::create_directories(dir_);
  }

  void emit(const std::string& format, const std::string& name, const std::string& content) {
    if (!cfg_.output.wants(format)) return;
    write_file(dir_ / name, content);
    artifacts_.push_back({name, git_blob_hash(content)});
  }
  void csv(const std::string& name, const CsvWriter& w) { emit("csv", name, w.str()); }
  void json_doc(const std::string& name, const json& j) { emit("json", name, j.dump(2) + "\n"); }
  void svg(const std::string& name, const std::string& s) { emit("svg", name, s); }

  const std::vector<Artifact>& artifacts() const { return artifacts_; }
  const std::filesystem::path& dir() const { return dir_; }

 private:
  const RunConfig& cfg_;
  std::filesystem::path dir_;
  std::vector<Artifact> artifacts_;
};

inline std::vector<double> default_times(double horizon, int count) {
  std::vector<double> t;
  for (int k = 0; k < count; ++k) t.push_back(horizon * k / (count - 1));
  return t;
}

inline ChordalConfig chordal_config(const RunConfig& c) {
  return {c.numerics.dt, c.numerics.horizon, c.numerics.guard, c.numerics.max_halvings};
}

inline StripConfig strip_config(const RunConfig& c) {
  return {c.numerics.dt, c.numerics.horizon, c.numerics.guard, c.numerics.L, c.numerics.max_halvings};
}

inline QuadratureSpec quadrature_spec(const RunConfig& c) {
  if (c.params.size() != 1) {
    throw DomainError("the F integral is defined for exactly one marked point (got " +
                      std::to_string(c.params.size()) + ")");
  }
  if (!(c.params.kappa > 4.0)) {
    throw DomainError("quadrature window requires kappa > 4 (got kappa = " + format_double(c.params.kappa) + ")");
  }
  QuadratureSpec spec{c.params.kappa, c.params.rho[0], c.numerics.rel_tol, c.numerics.split_point};
  spec.validate();
  return spec;
}

/// Observation points in strip coordinates.
inline std::vector<complex> strip_points(const RunConfig& c, std::vector<complex> fallback) {
  std::vector<complex> pts = c.observe.points.empty() ? std::move(fallback) : c.observe.points;
  if (c.observe.coordinates == "halfplane") {
    if (c.params.size() == 0) throw DomainError("halfplane points need the marked point x_1");
    for (auto& p : pts) p = map_to_strip(p, c.params.x[0], c.params.xi0);
  }
  return pts;
}

inline std::uint64_t seed_of(const RunConfig& c) {
  if (!c.mc.seed) throw StateError("run: the seed must be resolved before running");
  return *c.mc.seed;
}

// --- commands ---------------------------------------------------------------

inline bool cmd_weights(const RunConfig& c, Writer& w, json& result, std::ostream& log) {
  const auto& p = c.params;
  const double kappa = p.kappa;
  const auto ledger = charge_ledger(p);
  const auto bc = free_field_bc(p);
  const double rinf = rho_infinity(p);
  std::vector<double> rhos(p.rho);
  rhos.push_back(rinf);

  bool ok = std::abs(ledger.total()) < 1e-12;
  json points = json::array();
  CsvWriter csv({"label", "x", "rho", "delta", "charge", "weight_from_charge", "angle"});
  for (std::size_t j = 0; j < rhos.size(); ++j) {
    const bool inf = j == p.size();
    const std::string label = inf ? "inf" : "x" + std::to_string(j + 1);
    const double delta = delta_from_rho(rhos[j], kappa);
    const double from_charge = weight_from_charge(ledger.boundary[j], kappa);
    ok = ok && std::abs(from_charge - delta) < 1e-12;
    points.push_back({{"label", label},
                      {"x", inf ? json("inf") : json(p.x[j])},
                      {"rho", rhos[j]},
                      {"delta", delta},
                      {"charge", ledger.boundary[j]},
                      {"weight_from_charge", from_charge},
                      {"angle", bc.angles[j]}});
    csv.row(std::vector<std::string>{label, inf ? "inf" : format_double(p.x[j]), format_double(rhos[j]),
                                     format_double(delta), format_double(ledger.boundary[j]),
                                     format_double(from_charge), format_double(bc.angles[j])});
    log << label << ": rho = " << format_double(rhos[j]) << ", delta = " << format_double(delta)
        << ", angle = " << format_double(bc.angles[j]) << "\n";
  }
  const auto table = weight_table(kappa, 3, 3);
  result["central_charge"] = central_charge(kappa);
  result["rho_infinity"] = rinf;
  result["h_12"] = kac_weight(1, 2, kappa);
  result["h_21"] = kac_weight(2, 1, kappa);
  result["kac_table"] = table.h;
  result["points"] = points;
  result["ledger"] = {{"background", ledger.background},
                      {"interface", ledger.interface},
                      {"boundary", ledger.boundary},
                      {"sum", ledger.total()}};
  result["total_angle"] = bc.total_angle;
  log << "c = " << format_double(central_charge(kappa)) << ", rho_inf = " << format_double(rinf)
      << ", ledger sum = " << format_double(ledger.total()) << "\n";
  w.csv("weights.csv", csv);
  w.json_doc("weights.json", result);
  return ok;
}

inline bool cmd_simulate(const RunConfig& c, Writer& w, json& result, std::ostream& log, unsigned threads) {
  const auto cc = chordal_config(c);
  const std::uint64_t seed = seed_of(c);
  const std::size_t n = c.mc.n_paths, m = c.params.size();
  std::vector<ChordalState> finals(n);
  std::string dump;
  parallel_for(n, threads, [&](std::size_t i) {
    if (i == 0) {
      std::vector<std::string> header{"step", "t", "xi"};
      for (std::size_t j = 0; j < m; ++j) header.push_back("X_" + std::to_string(j + 1));
      for (std::size_t j = 0; j < m; ++j) header.push_back("Xprime_" + std::to_string(j + 1));
      CsvWriter pw(header);
      std::size_t step = 0;
      auto obs = [&](const ChordalState& s) {
        std::vector<double> row{double(step++), s.t, s.xi};
        row.insert(row.end(), s.X.begin(), s.X.end());
        row.insert(row.end(), s.Xprime.begin(), s.Xprime.end());
        pw.row(row);
      };
      finals[i] = run_path(c.params, cc, seed, i, SleDrift{c.params.rho}, obs).state;
      dump = pw.str();
    } else {
      finals[i] = run_path(c.params, cc, seed, i, SleDrift{c.params.rho}).state;
    }
  });
  std::vector<std::string> header{"path", "t_end", "xi_end", "stopped", "reason"};
  for (std::size_t j = 0; j < m; ++j) header.push_back("X_" + std::to_string(j + 1));
  CsvWriter csv(header);
  std::size_t collisions = 0, failures = 0;
  double mean_t = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const auto& s = finals[i];
    const char* reason = s.reason == StopReason::collision ? "collision"
                         : s.reason == StopReason::drift_failure ? "drift_failure" : "none";
    collisions += s.reason == StopReason::collision;
    failures += s.reason == StopReason::drift_failure;
    mean_t += s.t / double(n);
    std::vector<std::string> row{std::to_string(i), format_double(s.t), format_double(s.xi),
                                 s.stopped ? "1" : "0", reason};
    for (double x : s.X) row.push_back(format_double(x));
    csv.row(row);
  }
  result["n_paths"] = n;
  result["collisions"] = collisions;
  result["drift_failures"] = failures;
  result["mean_t_end"] = mean_t;
  log << "simulated " << n << " paths: " << collisions << " collisions, " << failures << " drift failures\n";
  w.csv("paths.csv", csv);
  w.emit("csv", "path_0.csv", dump);
  w.json_doc("simulate.json", result);
  return failures == 0;
}

inline bool cmd_trace(const RunConfig& c, Writer& w, json& result, std::ostream& log) {
  const auto run = run_path(c.params, chordal_config(c), seed_of(c), 0, SleDrift{c.params.rho});
  const double T = run.path.duration();
  std::vector<double> times = c.observe.sample_times;
  if (times.empty()) times = default_times(T, 201);
  for (double& t : times) t = std::min(t, T);
  const double tip = c.numerics.effective_tip_offset();
  const auto trace = trace_points(run.path, times, tip);
  CsvWriter csv({"t", "re_gamma", "im_gamma"});
  PlotSeries curve{"trace", {}, {}, {}};
  for (std::size_t k = 0; k < trace.times.size(); ++k) {
    csv.row(std::vector<double>{trace.times[k], trace.points[k].real(), trace.points[k].imag()});
    curve.x.push_back(trace.points[k].real());
    curve.y.push_back(trace.points[k].imag());
  }
  double scale = std::max(1.0, std::abs(c.params.xi0));
  for (double x : c.params.x) scale = std::max(scale, std::abs(x));
  const complex iy(0.0, 1e3 * scale);
  const complex g = flow_point(run.path, iy).back();
  const complex expect = 2.0 * T / iy;
  const double cap_err = T > 0.0 ? std::abs((g - iy) - expect) / std::abs(expect) : 0.0;
  result["duration"] = T;
  result["stopped"] = run.state.stopped;
  result["tip_offset"] = tip;
  result["capacity_rel_error"] = cap_err;
  log << "trace: " << trace.points.size() << " points to t = " << format_double(T)
      << ", capacity rel. error " << format_double(cap_err) << "\n";
  w.csv("trace.csv", csv);
  w.json_doc("trace.json", result);
  w.svg("trace.svg", svg_plot("trace", "Re", {curve}, true));
  return cap_err < 1e-3;
}

inline bool cmd_lpp(const RunConfig& c, Writer& w, json& result, std::ostream& log, unsigned threads) {
  const QuadratureSpec spec = quadrature_spec(c);
  const FIntegral f(spec);
  std::vector<complex> fallback;
  for (int x = -2; x <= 2; ++x) fallback.emplace_back(x, 0.5 * std::numbers::pi);
  const auto pts = strip_points(c, fallback);
  const auto counts = left_passage_mc(c.params, pts, strip_config(c), c.mc.n_paths, seed_of(c), threads);
  bool ok = true;
  CsvWriter csv({"re_w", "im_w", "p_left", "p_right", "p_swallowed", "mc_left", "mc_left_se", "mc_swallowed",
                 "mc_undecided", "z_score"});
  json rows = json::array();
  PlotSeries analytic{"p_left", {}, {}, {}}, mc{"MC left", {}, {}, {}};
  for (std::size_t k = 0; k < pts.size(); ++k) {
    const double pl = p_left(pts[k], f), pr = p_right(pts[k], f);
    const auto& n = counts[k];
    const double se = n.left_se();
    const double z = se > 0.0 ? (n.left_fraction() - pl) / se : (n.left_fraction() == pl ? 0.0 : INFINITY);
    ok = ok && std::abs(z) <= 3.0;
    csv.row(std::vector<double>{pts[k].real(), pts[k].imag(), pl, pr, std::max(0.0, 1.0 - pl - pr),
                                n.left_fraction(), se, n.swallowed_fraction(), n.undecided_fraction(), z});
    json row = to_json(n);
    row["w"] = to_json(pts[k]);
    row["p_left"] = pl;
    row["p_right"] = pr;
    row["p_swallowed"] = std::max(0.0, 1.0 - pl - pr);
    row["z_score"] = json_number(z);
    rows.push_back(row);
    analytic.x.push_back(pts[k].real());
    analytic.y.push_back(pl);
    mc.x.push_back(pts[k].real());
    mc.y.push_back(n.left_fraction());
    mc.err.push_back(3.0 * se);
    log << "w = (" << format_double(pts[k].real()) << ", " << format_double(pts[k].imag()) << "): p_left "
        << format_double(pl) << ", MC " << format_double(n.left_fraction()) << " +- " << format_double(se)
        << ", swallowed " << format_double(n.swallowed_fraction()) << "\n";
  }
  result["F_infinity"] = to_json(f.infinity());
  result["points"] = rows;
  result["verdict"] = ok ? "pass" : "fail";
  w.csv("lpp.csv", csv);
  w.json_doc("lpp.json", result);
  w.svg("lpp.svg", svg_plot("left passage", "Re w", {analytic, mc}));
  return ok;
}

inline bool cmd_martingale(const RunConfig& c, Writer& w, json& result, std::ostream& log, unsigned threads) {
  const QuadratureSpec spec = quadrature_spec(c);
  const FIntegral f(spec);
  const auto pts = strip_points(c, {complex(0.0, 0.5 * std::numbers::pi)});
  if (pts.empty()) throw DomainError("martingale: no observation point");
  const complex w0 = pts.front();
  std::vector<double> slices = c.mc.slice_times;
  if (slices.empty()) slices = default_times(c.numerics.horizon, 6);
  MartingaleOptions opt;
  opt.threshold = c.mc.threshold;
  opt.policy = c.mc.stop_policy == "exclude" ? StopPolicy::exclude : StopPolicy::freeze;
  opt.threads = threads;
  const auto sc = strip_config(c);
  const auto rep = martingale_check(f_observables(f), c.params, std::span<const complex>(&w0, 1), sc, slices,
                                    c.mc.n_paths, seed_of(c), opt);
  const std::vector<NamedObservable<StripState>> raw{
      {"ReH", [](const StripState& s) { return s.h[0].real(); }},
      {"ImH", [](const StripState& s) { return s.h[0].imag(); }}};
  const auto control = martingale_check(raw, c.params, std::span<const complex>(&w0, 1), sc, slices,
                                        c.mc.n_paths, seed_of(c), opt);
  result["w"] = to_json(w0);
  result["report"] = to_json(rep);
  result["negative_control"] = to_json(control);
  CsvWriter csv({"observable", "slice", "s", "mean", "std_error", "deviation"});
  std::vector<PlotSeries> plots;
  for (const auto* r : {&rep, &control}) {
    for (const auto& s : r->series) {
      for (std::size_t k = 0; k < slices.size(); ++k) {
        csv.row(std::vector<std::string>{s.name, std::to_string(k), format_double(slices[k]),
                                         format_double(s.means[k]), format_double(s.std_errors[k]),
                                         format_double(s.deviations[k])});
      }
      if (r == &rep) plots.push_back({s.name, slices, s.means, s.std_errors});
    }
  }
  log << "martingale: max deviation " << format_double(rep.max_deviation) << " (threshold "
      << format_double(rep.threshold) << "), control " << format_double(control.max_deviation) << "\n";
  w.csv("martingale.csv", csv);
  w.json_doc("martingale.json", result);
  w.svg("martingale.svg", svg_plot("E F(h_s(w)) +- SE", "s", plots));
  return rep.verdict;
}

inline bool cmd_virasoro(const RunConfig& c, Writer& w, json& result, std::ostream& log) {
  const double kappa = c.params.kappa;
  const auto rep = null_vector_residual(kappa, c.numerics.exact_rational);
  const double c_k = central_charge(kappa), h = kac_weight(1, 2, kappa);
  json levels = json::array();
  for (int level = 0; level <= 4; ++level) {
    const auto v = verma_level(c_k, h, level);
    json basis = json::array();
    for (const auto& p : v.basis) basis.push_back(p);
    json g = json::array();
    for (const auto& row : v.gram) g.push_back(json_numbers(row));
    levels.push_back({{"level", level}, {"basis", basis}, {"gram", g}, {"det", determinant(v.gram)}});
  }
  const double h_generic = h + 0.5;
  const double det_generic = determinant(gram_matrix<double>(c_k, h_generic, 2));
  result["null_vector"] = to_json(rep);
  result["levels"] = levels;
  result["negative_control"] = {{"h", h_generic}, {"det", det_generic}};
  const auto table = weight_table(kappa, 3, 3);
  result["kac_table"] = table.h;
  const bool ok = rep.residual < 1e-10 && rep.det_relative < 1e-10;
  log << "virasoro-check kappa = " << format_double(kappa) << ": residual " << format_double(rep.residual)
      << ", |det|/|G|^2 " << format_double(rep.det_relative) << (rep.exact ? " (exact)" : " (double)") << "\n";
  CsvWriter csv({"r", "s", "h"});
  for (int r = 1; r <= 3; ++r) {
    for (int s = 1; s <= 3; ++s) {
      csv.row(std::vector<double>{double(r), double(s), table.h[r - 1][s - 1]});
    }
  }
  w.csv("kac_table.csv", csv);
  w.json_doc("virasoro.json", result);
  return ok;
}

inline bool cmd_strip_compare(const RunConfig& c, Writer& w, json& result, std::ostream& log, unsigned threads) {
  if (c.params.size() == 0) throw DomainError("strip-compare needs the marked point x_1");
  const double x1 = c.params.x[0], xi0 = c.params.xi0;
  complex z = complex(x1, xi0 - x1);  // strip point i pi/2
  if (!c.observe.points.empty()) {
    z = c.observe.coordinates == "strip" ? map_from_strip(c.observe.points[0], x1, xi0) : c.observe.points[0];
  }
  const auto res = strip_compare(c.params, z, chordal_config(c), c.mc.n_paths, seed_of(c), 1e-6, c.numerics.L,
                                 0.25, threads);
  CsvWriter csv({"path", "max_deviation", "steps_compared", "ended_early"});
  for (std::size_t i = 0; i < res.paths.size(); ++i) {
    const auto& p = res.paths[i];
    csv.row(std::vector<double>{double(i), p.max_deviation, double(p.steps_compared), p.ended_early ? 1.0 : 0.0});
  }
  // Direct strip run of the same point, for inspection.
  const complex w0 = map_to_strip(z, x1, xi0);
  CsvWriter dump({"s", "eta", "re_h_1", "im_h_1"});
  run_strip(c.params, std::span<const complex>(&w0, 1), strip_config(c), seed_of(c), 0,
            [&](const StripState& s) { dump.row(std::vector<double>{s.s, s.eta, s.h[0].real(), s.h[0].imag()}); });
  const bool ok = res.ratio < kStripChordalC;
  result["z"] = to_json(z);
  result["dt"] = res.dt;
  result["max_deviation"] = res.max_deviation;
  result["ratio"] = res.ratio;
  result["C"] = kStripChordalC;
  result["verdict"] = ok ? "pass" : "fail";
  log << "strip-compare: max deviation " << format_double(res.max_deviation) << " = "
      << format_double(res.ratio) << " sqrt(dt), bound " << format_double(kStripChordalC) << "\n";
  w.csv("strip_compare.csv", csv);
  w.csv("strip_path_0.csv", dump);
  w.json_doc("strip_compare.json", result);
  return ok;
}

}  // namespace detail

/// Executes cfg (seed already resolved). Exceptions propagate to the caller.
inline RunOutcome run(const RunConfig& cfg, unsigned threads, std::ostream& log) {
  const auto start = std::chrono::steady_clock::now();
  detail::Writer w(cfg);
  json result;
  bool ok = false;
  switch (cfg.command) {
    case Command::weights: ok = detail::cmd_weights(cfg, w, result, log); break;
    case Command::simulate: ok = detail::cmd_simulate(cfg, w, result, log, threads); break;
    case Command::trace: ok = detail::cmd_trace(cfg, w, result, log); break;
    case Command::lpp: ok = detail::cmd_lpp(cfg, w, result, log, threads); break;
    case Command::martingale: ok = detail::cmd_martingale(cfg, w, result, log, threads); break;
    case Command::virasoro_check: ok = detail::cmd_virasoro(cfg, w, result, log); break;
    case Command::strip_compare: ok = detail::cmd_strip_compare(cfg, w, result, log, threads); break;
  }
  const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  const std::string canonical = serialize_config(cfg);
  json m;
  m["schema_version"] = kSchemaVersion;
  m["kind"] = "manifest";
  m["command"] = to_string(cfg.command);
  m["seed"] = detail::seed_of(cfg);
  m["input_hash"] = git_blob_hash(canonical);
  m["wall_time_s"] = wall;
  m["threads"] = threads;
  m["verdict"] = ok ? "pass" : "fail";
  json arts = json::array();
  for (const auto& a : w.artifacts()) arts.push_back({{"file", a.file}, {"hash", a.hash}});
  m["artifacts"] = arts;
  m["config"] = to_json(cfg);
  write_file(w.dir() / "manifest.json", m.dump(2) + "\n");
  log << "verdict: " << (ok ? "pass" : "fail") << "\n";
  return {ok ? 0 : 1, ok, m, result};
}

/// Machine-readable failure report for refused runs.
inline json failure_report(const std::exception& e) {
  json j;
  j["schema_version"] = kSchemaVersion;
  j["kind"] = "failure";
  std::string type = "error";
  if (const auto* ce = dynamic_cast<const ConfigError*>(&e)) {
    type = "config";
    j["field"] = ce->path();
  } else if (dynamic_cast<const DomainError*>(&e)) {
    type = "domain";
  } else if (dynamic_cast<const QuadratureError*>(&e)) {
    type = "quadrature";
  } else if (dynamic_cast<const BranchError*>(&e)) {
    type = "branch";
  }
  j["error_type"] = type;
  j["message"] = e.what();
  return j;
}

}  // namespace slerho::cli
