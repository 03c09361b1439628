#pragma once

// Output helpers: CSV with round-trip precision, JSON conversion of reports,
// SVG band plots and git-style content hashes.

#include <openssl/evp.h>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <limits>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "slerho/errors.hpp"
#include "slerho/observables.hpp"
#include "slerho/virasoro.hpp"

namespace slerho {

using json = nlohmann::ordered_json;

/// Shortest text that reads back to the same double (17 significant digits).
inline std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

class CsvWriter {
 public:
  explicit CsvWriter(std::vector<std::string> header) : columns_(header.size()) { row(header); }

  void row(const std::vector<std::string>& cells) {
    if (cells.size() != columns_) throw DomainError("CsvWriter: row width mismatch");
    for (std::size_t i = 0; i < cells.size(); ++i) {
      if (i) out_ << ',';
      out_ << cells[i];
    }
    out_ << '\n';
  }

  void row(const std::vector<double>& values) {
    std::vector<std::string> cells;
    cells.reserve(values.size());
    for (double v : values) cells.push_back(format_double(v));
    row(cells);
  }

  std::string str() const { return out_.str(); }

 private:
  std::size_t columns_;
  std::ostringstream out_;
};

/// git hash-object: SHA-1 over "blob <size>\0<content>", lowercase hex.
inline std::string git_blob_hash(std::string_view content) {
  const std::string header = "blob " + std::to_string(content.size()) + '\0';
  EVP_MD_CTX* ctx = EVP_MD_CTX_new();
  if (!ctx) throw std::runtime_error("git_blob_hash: EVP context allocation failed");
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  const bool ok = EVP_DigestInit_ex(ctx, EVP_sha1(), nullptr) == 1 &&
                  EVP_DigestUpdate(ctx, header.data(), header.size()) == 1 &&
                  EVP_DigestUpdate(ctx, content.data(), content.size()) == 1 &&
                  EVP_DigestFinal_ex(ctx, digest, &len) == 1;
  EVP_MD_CTX_free(ctx);
  if (!ok) throw std::runtime_error("git_blob_hash: SHA-1 failed");
  std::ostringstream hex;
  for (unsigned int i = 0; i < len; ++i) {
    hex << std::hex << std::setw(2) << std::setfill('0') << static_cast<int>(digest[i]);
  }
  return hex.str();
}

inline std::string read_file(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read " + p.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline void write_file(const std::filesystem::path& p, std::string_view content) {
  std::ofstream out(p, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + p.string());
  out.write(content.data(), static_cast<std::streamsize>(content.size()));
  if (!out) throw std::runtime_error("write failed for " + p.string());
}

/// JSON number, with non-finite values as strings so the document stays valid.
inline json json_number(double v) {
  if (std::isfinite(v)) return v;
  return format_double(v);
}

inline json json_numbers(const std::vector<double>& v) {
  json a = json::array();
  for (double x : v) a.push_back(json_number(x));
  return a;
}

inline json to_json(complex z) { return json::array({json_number(z.real()), json_number(z.imag())}); }

inline json to_json(const MartingaleReport& r) {
  json j;
  j["slice_times"] = json_numbers(r.slice_times);
  j["n_paths"] = r.n_paths;
  j["seed"] = r.seed;
  j["threshold"] = r.threshold;
  j["policy"] = to_string(r.policy);
  j["contributing"] = r.contributing;
  j["frozen"] = r.frozen;
  json series = json::array();
  for (const auto& s : r.series) {
    json e;
    e["name"] = s.name;
    e["means"] = json_numbers(s.means);
    e["std_errors"] = json_numbers(s.std_errors);
    e["deviations"] = json_numbers(s.deviations);
    e["max_deviation"] = json_number(s.max_deviation);
    e["pass"] = s.pass;
    series.push_back(e);
  }
  j["series"] = series;
  j["max_deviation"] = json_number(r.max_deviation);
  j["verdict"] = r.verdict ? "pass" : "fail";
  j["note"] = r.note;
  return j;
}

inline json to_json(const NullVectorReport& r) {
  json j;
  j["kappa"] = r.kappa;
  j["c"] = r.c;
  j["h"] = r.h;
  j["exact_rational"] = r.exact;
  j["basis"] = json::array({"L_-2", "L_-1^2"});
  json g = json::array();
  for (const auto& row : r.gram) g.push_back(json_numbers(row));
  j["gram"] = g;
  j["vector"] = json_numbers(r.vector);
  j["residual"] = r.residual;
  j["gv_norm"] = r.gv_norm;
  j["det"] = r.det;
  j["det_relative"] = r.det_relative;
  return j;
}

inline json to_json(const SideCounts& c) {
  return {{"n", c.n},
          {"left", c.left},
          {"right", c.right},
          {"swallowed", c.swallowed},
          {"undecided", c.undecided},
          {"left_fraction", c.left_fraction()},
          {"left_se", c.left_se()},
          {"swallowed_fraction", c.swallowed_fraction()}};
}

struct PlotSeries {
  std::string name;
  std::vector<double> x;
  std::vector<double> y;
  std::vector<double> err;  ///< half-width of the band; empty for a bare line
};

/// Line chart with optional shaded +-err bands, one color per series.
inline std::string svg_plot(const std::string& title, const std::string& xlabel,
                            const std::vector<PlotSeries>& series, bool equal_aspect = false) {
  constexpr double W = 640, H = 420, ml = 60, mr = 20, mt = 36, mb = 46;
  double x0 = std::numeric_limits<double>::infinity(), x1 = -x0, y0 = x0, y1 = -x0;
  for (const auto& s : series) {
    for (std::size_t i = 0; i < s.x.size(); ++i) {
      const double e = s.err.empty() ? 0.0 : s.err[i];
      if (!std::isfinite(s.x[i]) || !std::isfinite(s.y[i])) continue;
      x0 = std::min(x0, s.x[i]);
      x1 = std::max(x1, s.x[i]);
      y0 = std::min(y0, s.y[i] - e);
      y1 = std::max(y1, s.y[i] + e);
    }
  }
  if (!std::isfinite(x0)) x0 = 0, x1 = 1, y0 = 0, y1 = 1;
  if (x1 == x0) x1 = x0 + 1;
  if (y1 == y0) y0 -= 0.5, y1 += 0.5;
  const double pad = 0.05 * (y1 - y0);
  y0 -= pad;
  y1 += pad;
  if (equal_aspect) {
    const double sx = (x1 - x0) / (W - ml - mr), sy = (y1 - y0) / (H - mt - mb);
    if (sx > sy) {
      const double mid = 0.5 * (y0 + y1), half = 0.5 * sx * (H - mt - mb);
      y0 = mid - half;
      y1 = mid + half;
    } else {
      const double mid = 0.5 * (x0 + x1), half = 0.5 * sy * (W - ml - mr);
      x0 = mid - half;
      x1 = mid + half;
    }
  }
  auto px = [&](double x) { return ml + (x - x0) / (x1 - x0) * (W - ml - mr); };
  auto py = [&](double y) { return H - mb - (y - y0) / (y1 - y0) * (H - mt - mb); };
  static const char* colors[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#17becf"};

  std::ostringstream o;
  o << std::setprecision(6);
  o << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << W << "\" height=\"" << H
    << "\" font-family=\"sans-serif\" font-size=\"12\">\n";
  o << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  o << "<text x=\"" << W / 2 << "\" y=\"22\" text-anchor=\"middle\" font-size=\"14\">" << title << "</text>\n";
  o << "<rect x=\"" << ml << "\" y=\"" << mt << "\" width=\"" << W - ml - mr << "\" height=\"" << H - mt - mb
    << "\" fill=\"none\" stroke=\"#444\"/>\n";
  for (int t = 0; t <= 4; ++t) {
    const double xv = x0 + (x1 - x0) * t / 4.0, yv = y0 + (y1 - y0) * t / 4.0;
    o << "<text x=\"" << px(xv) << "\" y=\"" << H - mb + 16 << "\" text-anchor=\"middle\">" << xv << "</text>\n";
    o << "<text x=\"" << ml - 6 << "\" y=\"" << py(yv) + 4 << "\" text-anchor=\"end\">" << yv << "</text>\n";
  }
  o << "<text x=\"" << W / 2 << "\" y=\"" << H - 10 << "\" text-anchor=\"middle\">" << xlabel << "</text>\n";
  for (std::size_t k = 0; k < series.size(); ++k) {
    const auto& s = series[k];
    const char* col = colors[k % 6];
    if (!s.err.empty()) {
      o << "<polygon fill=\"" << col << "\" fill-opacity=\"0.2\" stroke=\"none\" points=\"";
      for (std::size_t i = 0; i < s.x.size(); ++i) o << px(s.x[i]) << ',' << py(s.y[i] + s.err[i]) << ' ';
      for (std::size_t i = s.x.size(); i-- > 0;) o << px(s.x[i]) << ',' << py(s.y[i] - s.err[i]) << ' ';
      o << "\"/>\n";
    }
    o << "<polyline fill=\"none\" stroke=\"" << col << "\" stroke-width=\"1.5\" points=\"";
    for (std::size_t i = 0; i < s.x.size(); ++i) {
      if (std::isfinite(s.x[i]) && std::isfinite(s.y[i])) o << px(s.x[i]) << ',' << py(s.y[i]) << ' ';
    }
    o << "\"/>\n";
    o << "<text x=\"" << ml + 8 << "\" y=\"" << mt + 16 + 14 * k << "\" fill=\"" << col << "\">" << s.name
      << "</text>\n";
  }
  o << "</svg>\n";
  return o.str();
}

}  // namespace slerho
