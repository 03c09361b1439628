#pragma once

// The strip martingale F, left/right passage probabilities, side
// classification of interior points and the Monte Carlo martingale harness.
//
//   G(u) = sinh(u/2)^(-4/kappa) exp((6 - kappa + 2 rho) u / kappa),
//   F(w) = int_{-inf}^{w} G(u) du,   P^l(w) = 1 - Im F(w) / Im F(+inf).
//
// The power sinh(u/2)^(-4/kappa) uses arg sinh(u/2) in [0, pi]: positive on
// u > 0, continuous on the closed strip minus 0, and e^{-4 pi i/kappa} times
// positive on u < 0.

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdint>
#include <functional>
#include <limits>
#include <numbers>
#include <span>
#include <string>
#include <vector>

#include "slerho/chordal.hpp"
#include "slerho/cft.hpp"
#include "slerho/errors.hpp"
#include "slerho/parallel.hpp"
#include "slerho/quadrature.hpp"
#include "slerho/strip.hpp"

namespace slerho {

enum class SinhBranch : std::uint8_t { arg_0_pi };

struct QuadratureSpec {
  double kappa = 6.0;
  double rho = 0.0;
  double rel_tol = 1e-10;
  double split_point = 1.0;  ///< radius of the disc around 0 handled by the singular ray rule
  SinhBranch branch = SinhBranch::arg_0_pi;

  /// Finiteness window: kappa > 4 and (kappa - 8)/2 < rho < (kappa - 4)/2.
  void validate() const {
    if (!(kappa > 4.0) || !std::isfinite(kappa)) {
      throw DomainError("QuadratureSpec: the F integral needs kappa > 4 (got " + std::to_string(kappa) + ")");
    }
    if (!(rho > 0.5 * (kappa - 8.0) && rho < 0.5 * (kappa - 4.0))) {
      throw DomainError("QuadratureSpec: rho outside the window ((kappa-8)/2, (kappa-4)/2)");
    }
    if (!(rel_tol > 0.0)) throw DomainError("QuadratureSpec: rel_tol must be positive");
    if (!(split_point > 0.0)) throw DomainError("QuadratureSpec: split_point must be positive");
  }

  double beta() const noexcept { return 4.0 / kappa; }
  double exponent() const noexcept { return (6.0 - kappa + 2.0 * rho) / kappa; }
};

inline constexpr double kIntegrandFloor = 1e-200;
inline constexpr double kStripTol = 1e-12;

namespace detail {

/// log sinh(u/2) with arg in [0, pi], for u in the closed strip.
inline complex log_sinh_half(complex u) {
  const double x = u.real();
  const double y = u.imag();
  const double pi = std::numbers::pi;
  if (x > 20.0) {
    return complex(0.5 * x - std::numbers::ln2, 0.5 * y) + std::log(1.0 - std::exp(-u));
  }
  if (x < -20.0) {
    return complex(-0.5 * x - std::numbers::ln2, pi - 0.5 * y) + std::log(1.0 - std::exp(u));
  }
  const double sx = std::sinh(0.5 * x), sy = std::sin(0.5 * y);
  const double re = std::sinh(0.5 * x) * std::cos(0.5 * y);
  const double im = std::cosh(0.5 * x) * sy;
  return {0.5 * std::log(sx * sx + sy * sy), std::atan2(std::abs(im), re)};
}

inline complex log_integrand(complex u, double beta, double c) {
  return -beta * log_sinh_half(u) + c * u;
}

inline void require_in_strip(complex u, const char* who) {
  if (!(u.imag() >= -kStripTol && u.imag() <= std::numbers::pi + kStripTol) || std::isnan(u.real())) {
    throw DomainError(std::string(who) + ": point outside the closed strip 0 <= Im <= pi");
  }
}

}  // namespace detail

/// G(u) on the fixed branch.
inline complex integrand(complex u, const QuadratureSpec& spec) {
  detail::require_in_strip(u, "integrand");
  if (std::abs(u) < kIntegrandFloor) throw DomainError("integrand: u is at the singularity 0");
  return std::exp(detail::log_integrand(u, spec.beta(), spec.exponent()));
}

/// F and its complement F(+inf) - F on the closed strip. Construction
/// validates the window and computes F(0) and F(+inf) - F(0) along the real
/// axis; later evaluations reuse them. Thread-safe after construction.
class FIntegral {
 public:
  explicit FIntegral(const QuadratureSpec& spec) : spec_(spec) {
    spec_.validate();
    beta_ = spec_.beta();
    c_ = spec_.exponent();
    opt_.rel_tol = spec_.rel_tol;
    opt_.abs_tol = 0.0;
    const double r0 = spec_.split_point;
    f0_ = -tail(complex(-r0, 0.0), -1.0) - ray(complex(-r0, 0.0));
    fc0_ = ray(complex(r0, 0.0)) + tail(complex(r0, 0.0), 1.0);
    finf_ = f0_ + fc0_;
    opt_.abs_tol = 1e-2 * spec_.rel_tol * (std::abs(f0_) + std::abs(fc0_));
  }

  const QuadratureSpec& spec() const noexcept { return spec_; }

  complex at_zero() const noexcept { return f0_; }
  complex infinity() const noexcept { return finf_; }

  /// F(+inf) by integrating the whole line Im u = pi/2; independent of the
  /// real-axis scheme used for infinity().
  complex infinity_midline() const {
    const complex a(0.0, 0.5 * std::numbers::pi);
    return tail(a, 1.0) - tail(a, -1.0);
  }

  /// F(w); w.real() = -inf or +inf give 0 and F(+inf).
  complex value(complex w) const {
    if (std::isinf(w.real())) return w.real() < 0.0 ? complex(0.0) : finf_;
    detail::require_in_strip(w, "F_value");
    if (std::abs(w) <= spec_.split_point) return f0_ + ray(w);
    if (w.real() > 0.0) return finf_ - complement(w);
    const complex mid(w.real(), 0.5 * std::numbers::pi);
    return -tail(mid, -1.0) + segment(mid, w);
  }

  /// F(+inf) - F(w), computed without cancellation for Re w > 0.
  complex complement(complex w) const {
    if (std::isinf(w.real())) return w.real() < 0.0 ? finf_ : complex(0.0);
    detail::require_in_strip(w, "F_value");
    if (std::abs(w) <= spec_.split_point) return fc0_ - ray(w);
    if (w.real() <= 0.0) return finf_ - value(w);
    const complex mid(w.real(), 0.5 * std::numbers::pi);
    return segment(w, mid) + tail(mid, 1.0);
  }

  /// Straight-line integral of G from a to b; the segment must avoid 0.
  complex segment(complex a, complex b) const {
    if (a == b) return 0.0;
    const complex d = b - a;
    auto f = [&](double t) { return std::exp(detail::log_integrand(a + t * d, beta_, c_)); };
    return integrate_gk(f, 0.0, 1.0, opt_).value * d;
  }

  /// Raw probability-like ratios, before clamping.
  double left_ratio(complex w) const { return complement(w).imag() / finf_.imag(); }
  double right_ratio(complex w) const {
    const complex rot = std::polar(1.0, std::numbers::pi * beta_);
    return 1.0 - (rot * complement(w)).imag() / (rot * finf_).imag();
  }

 private:
  /// int_0^b G by u = b s^(1/(1-beta)), which removes the |u|^(-beta) singularity.
  complex ray(complex b) const {
    if (b == complex(0.0)) return 0.0;
    const double p = 1.0 / (1.0 - beta_);
    const complex log_b(std::log(std::abs(b)), std::atan2(std::abs(b.imag()), b.real()));
    auto phi = [&](double s) {
      const complex u = b * std::pow(s, p);
      complex log_phi;
      if (std::abs(u) < 1e-8) {
        log_phi = beta_ * std::numbers::ln2 - beta_ * u * u / 24.0 + c_ * u;
      } else {
        const complex log_u(std::log(std::abs(u)), std::atan2(std::abs(u.imag()), u.real()));
        log_phi = detail::log_integrand(u, beta_, c_) + beta_ * log_u;
      }
      return std::exp(log_phi);
    };
    const complex scale = std::exp((1.0 - beta_) * log_b) * p;
    return integrate_gk(phi, 0.0, 1.0, opt_).value * scale;
  }

  /// int from a to a + dir * inf along the horizontal line through a.
  complex tail(complex a, double dir) const {
    auto f = [&](double tau) {
      const double one_minus = 1.0 - tau;
      const complex u = a + dir * tau / one_minus;
      return std::exp(detail::log_integrand(u, beta_, c_)) / (one_minus * one_minus);
    };
    return integrate_gk(f, 0.0, 1.0, opt_).value * dir;
  }

  QuadratureSpec spec_;
  double beta_ = 0.0;
  double c_ = 0.0;
  QuadOptions opt_;
  complex f0_, fc0_, finf_;
};

inline complex F_value(complex w, const QuadratureSpec& spec) { return FIntegral(spec).value(w); }

inline complex F_value_infinity(const QuadratureSpec& spec) { return FIntegral(spec).infinity(); }

inline constexpr double kProbabilitySlack = 1e-9;

namespace detail {
inline double clamp_probability(double p, const char* who) {
  if (!(p >= -kProbabilitySlack && p <= 1.0 + kProbabilitySlack)) {
    throw QuadratureError(std::string(who) + ": value " + std::to_string(p) + " outside [0, 1]");
  }
  return std::clamp(p, 0.0, 1.0);
}
}  // namespace detail

inline double p_left(complex w, const FIntegral& f) {
  return detail::clamp_probability(f.left_ratio(w), "p_left");
}
inline double p_left(complex w, const QuadratureSpec& spec) { return p_left(w, FIntegral(spec)); }

/// Probability of ending right of the curve: the same construction with the
/// roles of -inf and +inf exchanged, which rotates F by e^{4 pi i/kappa}.
inline double p_right(complex w, const FIntegral& f) {
  return detail::clamp_probability(f.right_ratio(w), "p_right");
}
inline double p_right(complex w, const QuadratureSpec& spec) { return p_right(w, FIntegral(spec)); }

/// Mass that is neither left nor right, i.e. the swallowing probability.
inline double p_swallowed(complex w, const FIntegral& f) {
  return std::max(0.0, 1.0 - p_left(w, f) - p_right(w, f));
}

/// kappa = 4 limit of P^l: evaluated at 4 + eps/2 and 4 + eps and
/// extrapolated linearly in eps to 0.
inline double p_left_kappa4(complex w, double rho, double eps = 1e-3, double rel_tol = 1e-10) {
  if (!(eps > 0.0)) throw DomainError("p_left_kappa4: eps must be positive");
  const QuadratureSpec near{4.0 + 0.5 * eps, rho, rel_tol};
  const QuadratureSpec far{4.0 + eps, rho, rel_tol};
  const double p = 2.0 * FIntegral(near).left_ratio(w) - FIntegral(far).left_ratio(w);
  return detail::clamp_probability(p, "p_left_kappa4");
}

// --- ODE residual -----------------------------------------------------------

struct FSamples {
  complex u0;
  complex h;
  std::vector<complex> values;  ///< F(u0 + k h)
};

/// F on a uniform grid. Consecutive values differ by short segment
/// integrals, so finite differences see quadrature noise at rounding level.
inline FSamples sample_F(const FIntegral& f, complex u0, complex h, std::size_t count) {
  if (count == 0) throw DomainError("sample_F: empty grid");
  FSamples out{u0, h, {}};
  out.values.reserve(count);
  out.values.push_back(f.value(u0));
  for (std::size_t k = 1; k < count; ++k) {
    const complex a = u0 + static_cast<double>(k - 1) * h;
    out.values.push_back(out.values.back() + f.segment(a, a + h));
  }
  return out;
}

struct OdeResidual {
  double max_residual = 0.0;
  double richardson_gap = 0.0;  ///< max |residual(h) - residual(extrapolated)|
  complex worst_u;
};

/// max over the grid interior of |((kappa-6-2rho)/2 + coth(u/2)) F' + (kappa/2) F''|,
/// with F', F'' from central differences at spacings h and 2h combined by
/// Richardson extrapolation.
inline OdeResidual martingale_ode_residual(const FSamples& samples, const QuadratureSpec& spec) {
  const auto& F = samples.values;
  if (F.size() < 5) throw DomainError("martingale_ode_residual: need at least 5 samples");
  if (samples.h == complex(0.0)) throw DomainError("martingale_ode_residual: zero spacing");
  const double a = 0.5 * (spec.kappa - 6.0 - 2.0 * spec.rho);
  const complex h = samples.h;
  OdeResidual out;
  for (std::size_t k = 2; k + 2 < F.size(); ++k) {
    const complex u = samples.u0 + static_cast<double>(k) * h;
    const complex d1h = (F[k + 1] - F[k - 1]) / (2.0 * h);
    const complex d1w = (F[k + 2] - F[k - 2]) / (4.0 * h);
    const complex d2h = (F[k + 1] - 2.0 * F[k] + F[k - 1]) / (h * h);
    const complex d2w = (F[k + 2] - 2.0 * F[k] + F[k - 2]) / (4.0 * h * h);
    const complex d1 = (4.0 * d1h - d1w) / 3.0;
    const complex d2 = (4.0 * d2h - d2w) / 3.0;
    const complex drift = a + coth_half(u);
    const double r = std::abs(drift * d1 + 0.5 * spec.kappa * d2);
    const double r_plain = std::abs(drift * d1h + 0.5 * spec.kappa * d2h);
    if (r > out.max_residual) {
      out.max_residual = r;
      out.worst_u = u;
    }
    out.richardson_gap = std::max(out.richardson_gap, std::abs(r_plain - r));
  }
  return out;
}

// --- side classification ----------------------------------------------------

enum class Side : std::uint8_t { left, right, swallowed, undecided };

inline const char* to_string(Side s) noexcept {
  switch (s) {
    case Side::left: return "left";
    case Side::right: return "right";
    case Side::swallowed: return "swallowed";
    default: return "undecided";
  }
}

inline Side side_from_status(PointStatus p) noexcept {
  switch (p) {
    case PointStatus::left: return Side::left;
    case PointStatus::right: return Side::right;
    case PointStatus::swallowed: return Side::swallowed;
    default: return Side::undecided;
  }
}

/// Runs the strip dynamics for one strip point until it exits at -L, +L or
/// the guard around 0. Undecided when the horizon or the step limit comes first.
inline Side classify_side(const SleParams& params, complex w, std::uint64_t seed, std::uint64_t stream,
                          const StripConfig& config) {
  const StripState st = run_strip(params, std::span<const complex>(&w, 1), config, seed, stream);
  return side_from_status(st.status[0]);
}

/// Same for a point z of the upper half-plane, pushed through the strip map.
inline Side classify_side_halfplane(const SleParams& params, complex z, std::uint64_t seed,
                                    std::uint64_t stream, const StripConfig& config) {
  if (params.size() == 0) throw DomainError("classify_side: needs the marked point x_1");
  return classify_side(params, map_to_strip(z, params.x[0], params.xi0), seed, stream, config);
}

struct SideCounts {
  std::size_t n = 0, left = 0, right = 0, swallowed = 0, undecided = 0;

  double left_fraction() const { return n ? double(left) / double(n) : 0.0; }
  double right_fraction() const { return n ? double(right) / double(n) : 0.0; }
  double swallowed_fraction() const { return n ? double(swallowed) / double(n) : 0.0; }
  double undecided_fraction() const { return n ? double(undecided) / double(n) : 0.0; }
  /// Binomial standard error of left_fraction.
  double left_se() const {
    const double p = left_fraction();
    return n ? std::sqrt(p * (1.0 - p) / double(n)) : 0.0;
  }
  /// Left frequency among paths that decided left or right.
  double left_given_decided() const {
    const std::size_t d = left + right;
    return d ? double(left) / double(d) : 0.0;
  }
  double left_given_decided_se() const {
    const std::size_t d = left + right;
    const double p = left_given_decided();
    return d ? std::sqrt(p * (1.0 - p) / double(d)) : 0.0;
  }
};

/// Left-passage ensemble: each path tracks all points at once; path i uses
/// stream i. Swallowed and undecided points count as not-left.
inline std::vector<SideCounts> left_passage_mc(const SleParams& params, std::span<const complex> w,
                                               const StripConfig& config, std::size_t n_paths,
                                               std::uint64_t seed, unsigned threads = default_threads()) {
  const std::size_t m = w.size();
  std::vector<PointStatus> outcome(n_paths * m, PointStatus::alive);
  parallel_for(n_paths, threads, [&](std::size_t i) {
    const StripState st = run_strip(params, w, config, seed, i);
    std::copy(st.status.begin(), st.status.end(), outcome.begin() + static_cast<std::ptrdiff_t>(i * m));
  });
  std::vector<SideCounts> counts(m);
  for (std::size_t i = 0; i < n_paths; ++i) {
    for (std::size_t k = 0; k < m; ++k) {
      auto& c = counts[k];
      ++c.n;
      switch (side_from_status(outcome[i * m + k])) {
        case Side::left: ++c.left; break;
        case Side::right: ++c.right; break;
        case Side::swallowed: ++c.swallowed; break;
        default: ++c.undecided; break;
      }
    }
  }
  return counts;
}

// --- martingale harness -----------------------------------------------------

enum class StopPolicy : std::uint8_t { freeze, exclude };

inline const char* to_string(StopPolicy p) noexcept {
  return p == StopPolicy::freeze ? "freeze" : "exclude";
}

template <class State>
struct NamedObservable {
  std::string name;
  std::function<double(const State&)> fn;
};

struct MartingaleOptions {
  double threshold = 3.5;
  StopPolicy policy = StopPolicy::freeze;
  unsigned threads = default_threads();
};

struct MartingaleSeries {
  std::string name;
  std::vector<double> means;
  std::vector<double> std_errors;  ///< SE of mean(O_s - O_0); 0 when the increment is 0 on every path
  std::vector<double> deviations;  ///< |mean_s - mean_0| / SE; 0 when both vanish, inf when only SE does
  double max_deviation = 0.0;
  bool pass = true;
};

struct MartingaleReport {
  std::vector<double> slice_times;
  std::size_t n_paths = 0;
  std::uint64_t seed = 0;
  double threshold = 3.5;
  StopPolicy policy = StopPolicy::freeze;
  std::vector<std::size_t> contributing;  ///< paths used at each slice
  std::vector<std::size_t> frozen;        ///< paths that had stopped before each slice
  std::vector<MartingaleSeries> series;
  bool verdict = true;
  double max_deviation = 0.0;
  std::string note;

  const MartingaleSeries& at(const std::string& name) const {
    for (const auto& s : series) {
      if (s.name == name) return s;
    }
    throw DomainError("MartingaleReport: no observable named " + name);
  }
};

inline double state_time(const StripState& s) noexcept { return s.s; }
inline double state_time(const ChordalState& s) noexcept { return s.t; }

namespace detail {

inline bool reached(double t, double slice) noexcept {
  return t >= slice - 1e-12 * std::max(1.0, std::abs(slice));
}

/// Records every observable at the first state with time >= each slice.
template <class State>
struct SliceRecorder {
  std::span<const double> slices;
  const std::vector<NamedObservable<State>>* obs;
  double* out;          ///< [slice][observable]
  std::uint8_t* fresh;  ///< 1 when recorded on time, 0 when frozen
  std::size_t next = 0;

  void record(const State& st, std::size_t k) {
    for (std::size_t j = 0; j < obs->size(); ++j) out[k * obs->size() + j] = (*obs)[j].fn(st);
  }
  void operator()(const State& st) {
    while (next < slices.size() && reached(state_time(st), slices[next])) {
      record(st, next);
      fresh[next] = 1;
      ++next;
    }
  }
  void finish(const State& last) {
    for (; next < slices.size(); ++next) {
      record(last, next);
      fresh[next] = 0;
    }
  }
};

template <class State, class RunOne>
MartingaleReport martingale_harness(RunOne&& run_one, const std::vector<NamedObservable<State>>& obs,
                                    std::span<const double> slice_times, std::size_t n_paths,
                                    std::uint64_t seed, const MartingaleOptions& options) {
  if (obs.empty()) throw DomainError("martingale_check: no observables");
  if (slice_times.empty()) throw DomainError("martingale_check: no slice times");
  if (!std::is_sorted(slice_times.begin(), slice_times.end()) || slice_times.front() < 0.0) {
    throw DomainError("martingale_check: slice times must be nonnegative and sorted");
  }
  const std::size_t ns = slice_times.size(), no = obs.size();
  std::vector<double> values(n_paths * ns * no, 0.0);
  std::vector<std::uint8_t> fresh(n_paths * ns, 0);
  std::vector<double> initial(n_paths * no, 0.0);
  parallel_for(n_paths, options.threads, [&](std::size_t i) {
    SliceRecorder<State> rec{slice_times, &obs, values.data() + i * ns * no, fresh.data() + i * ns};
    double* init = initial.data() + i * no;
    bool first = true;
    auto observer = [&](const State& st) {
      if (first) {
        for (std::size_t j = 0; j < no; ++j) init[j] = obs[j].fn(st);
        first = false;
      }
      rec(st);
    };
    const State last = run_one(seed, static_cast<std::uint64_t>(i), observer);
    rec.finish(last);
  });

  MartingaleReport rep;
  rep.slice_times.assign(slice_times.begin(), slice_times.end());
  rep.n_paths = n_paths;
  rep.seed = seed;
  rep.threshold = options.threshold;
  rep.policy = options.policy;
  rep.contributing.assign(ns, 0);
  rep.frozen.assign(ns, 0);
  for (std::size_t i = 0; i < n_paths; ++i) {
    for (std::size_t k = 0; k < ns; ++k) {
      if (!fresh[i * ns + k]) ++rep.frozen[k];
    }
  }
  auto used = [&](std::size_t i, std::size_t k) {
    return options.policy == StopPolicy::freeze || fresh[i * ns + k];
  };
  for (std::size_t j = 0; j < no; ++j) {
    MartingaleSeries s;
    s.name = obs[j].name;
    for (std::size_t k = 0; k < ns; ++k) {
      std::size_t n = 0;
      double sum = 0.0, inc_sum = 0.0;
      for (std::size_t i = 0; i < n_paths; ++i) {
        if (!used(i, k)) continue;
        ++n;
        sum += values[(i * ns + k) * no + j];
        inc_sum += values[(i * ns + k) * no + j] - initial[i * no + j];
      }
      if (j == 0) rep.contributing[k] = n;
      const double mean = n ? sum / double(n) : std::numeric_limits<double>::quiet_NaN();
      const double inc_mean = n ? inc_sum / double(n) : 0.0;
      double ss = 0.0;
      for (std::size_t i = 0; i < n_paths; ++i) {
        if (!used(i, k)) continue;
        const double d = values[(i * ns + k) * no + j] - initial[i * no + j] - inc_mean;
        ss += d * d;
      }
      const double se = n > 1 ? std::sqrt(ss / double(n - 1) / double(n)) : 0.0;
      double dev = 0.0;
      if (se > 0.0) {
        dev = std::abs(inc_mean) / se;
      } else if (inc_mean != 0.0) {
        dev = std::numeric_limits<double>::infinity();
      }
      s.means.push_back(mean);
      s.std_errors.push_back(se);
      s.deviations.push_back(dev);
      s.max_deviation = std::max(s.max_deviation, dev);
    }
    s.pass = s.max_deviation < options.threshold;
    rep.verdict = rep.verdict && s.pass;
    rep.max_deviation = std::max(rep.max_deviation, s.max_deviation);
    rep.series.push_back(std::move(s));
  }
  rep.note = "per-slice threshold " + std::to_string(options.threshold) + " on " + std::to_string(ns * no) +
             " comparisons without multiplicity correction; stopped paths policy: " +
             to_string(options.policy);
  return rep;
}

}  // namespace detail

/// Ensemble means of strip observables at the slice times (strip time s).
inline MartingaleReport martingale_check(const std::vector<NamedObservable<StripState>>& observables,
                                         const SleParams& params, std::span<const complex> w,
                                         const StripConfig& config, std::span<const double> slice_times,
                                         std::size_t n_paths, std::uint64_t seed,
                                         const MartingaleOptions& options = {}) {
  if (!slice_times.empty() && slice_times.back() > config.horizon) {
    throw DomainError("martingale_check: slice time beyond the horizon");
  }
  auto run_one = [&](std::uint64_t sd, std::uint64_t stream, auto& observer) {
    return run_strip(params, w, config, sd, stream, observer);
  };
  return detail::martingale_harness<StripState>(run_one, observables, slice_times, n_paths, seed, options);
}

/// Ensemble means of chordal observables at the slice times (capacity time t).
inline MartingaleReport martingale_check(const std::vector<NamedObservable<ChordalState>>& observables,
                                         const SleParams& params, const ChordalConfig& config,
                                         std::span<const double> slice_times, std::size_t n_paths,
                                         std::uint64_t seed, const MartingaleOptions& options = {}) {
  if (!slice_times.empty() && slice_times.back() > config.horizon) {
    throw DomainError("martingale_check: slice time beyond the horizon");
  }
  auto run_one = [&](std::uint64_t sd, std::uint64_t stream, auto& observer) {
    return run_path(params, config, sd, stream, SleDrift{params.rho}, observer).state;
  };
  return detail::martingale_harness<ChordalState>(run_one, observables, slice_times, n_paths, seed, options);
}

/// Re F(h_s(w_k)) and Im F(h_s(w_k)) for the tracked point k.
inline std::vector<NamedObservable<StripState>> f_observables(const FIntegral& f, std::size_t k = 0) {
  auto at = [&f, k](const StripState& st) { return f.value(st.h.at(k)); };
  return {{"ReF", [at](const StripState& st) { return at(st).real(); }},
          {"ImF", [at](const StripState& st) { return at(st).imag(); }}};
}

}  // namespace slerho
