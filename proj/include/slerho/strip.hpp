#pragma once

// SLE(kappa; rho) in the strip S = {0 < Im w < pi}.
//
// m(z) = log((z - x_1)/(xi_0 - x_1)) sends x_1, xi_0, infinity to -inf, 0,
// +inf. Tracked values h_s(w) are normalized so the tip sits at 0, and after
// the time change dt = (xi_t - g_t(x_1))^2 ds they obey
//
//   dh = -sqrt(kappa) dB_s + [C_s + coth(h/2)] ds,
//   C_s = (kappa - 6 - sum rho)/2 + sum_j (rho_j/2) coth(h(x~_j)/2),
//
// with x~_1 = -inf. The strip driving eta obeys d eta = sqrt(kappa) dB_s - C_s ds.

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdint>
#include <limits>
#include <numbers>
#include <span>
#include <vector>

#include "slerho/chordal.hpp"
#include "slerho/cft.hpp"
#include "slerho/errors.hpp"
#include "slerho/rng.hpp"

namespace slerho {

/// Real number or one of the two ends of the strip. Infinite values are
/// kept symbolic and only ever enter through coth(+-inf/2) = +-1.
class ExtendedReal {
 public:
  enum class Kind : std::uint8_t { finite, neg_inf, pos_inf };

  constexpr ExtendedReal() = default;
  static constexpr ExtendedReal finite(double v) { return ExtendedReal(Kind::finite, v); }
  static constexpr ExtendedReal neg_infinity() { return ExtendedReal(Kind::neg_inf, 0.0); }
  static constexpr ExtendedReal pos_infinity() { return ExtendedReal(Kind::pos_inf, 0.0); }

  constexpr Kind kind() const noexcept { return kind_; }
  constexpr bool is_finite() const noexcept { return kind_ == Kind::finite; }
  constexpr double value() const noexcept {
    switch (kind_) {
      case Kind::neg_inf: return -std::numeric_limits<double>::infinity();
      case Kind::pos_inf: return std::numeric_limits<double>::infinity();
      default: return value_;
    }
  }

 private:
  constexpr ExtendedReal(Kind k, double v) : kind_(k), value_(v) {}
  Kind kind_ = Kind::finite;
  double value_ = 0.0;
};

/// coth(u/2), written as (sinh x - i sin y) / (2 (sinh^2(x/2) + sin^2(y/2)))
/// so the denominator has no cancellation near u = 0.
inline complex coth_half(complex u) {
  const double x = u.real(), y = u.imag();
  if (x > 40.0) return {1.0, -2.0 * std::sin(y) * std::exp(-x)};
  if (x < -40.0) return {-1.0, -2.0 * std::sin(y) * std::exp(x)};
  const double sx = std::sinh(0.5 * x), sy = std::sin(0.5 * y);
  const double denom = 2.0 * (sx * sx + sy * sy);
  return {std::sinh(x) / denom, -std::sin(y) / denom};
}

inline double coth_half(double x) { return 1.0 / std::tanh(0.5 * x); }

/// A marked boundary point in strip coordinates. Points of the half-plane
/// boundary left of x_1 land on the upper edge Im = pi, where
/// coth((x + i pi)/2) = tanh(x/2).
struct StripMarked {
  ExtendedReal re;
  bool upper = false;

  double coth_half() const noexcept {
    switch (re.kind()) {
      case ExtendedReal::Kind::neg_inf: return -1.0;
      case ExtendedReal::Kind::pos_inf: return 1.0;
      default: return upper ? std::tanh(0.5 * re.value()) : slerho::coth_half(re.value());
    }
  }
};

/// m(z) = -log((xi0 - x1)/(z - x1)), principal branch (H -> S). Requires x1 < xi0.
inline complex map_to_strip(complex z, double x1, double xi0 = 0.0, double branch_tol = 1e-9) {
  if (!(x1 < xi0)) throw DomainError("map_to_strip: requires x1 < xi0");
  if (z.imag() < 0.0) throw DomainError("map_to_strip: z must be in the closed upper half-plane");
  if (z == complex(x1, 0.0)) throw DomainError("map_to_strip: z = x1 maps to -infinity");
  const complex d = z - x1;
  // arg in [0, pi]: a real point left of x1 must land on the upper edge.
  const complex w(std::log(std::abs(d) / (xi0 - x1)), std::atan2(std::abs(d.imag()), d.real()));
  if (w.imag() < -branch_tol || w.imag() > std::numbers::pi + branch_tol) {
    throw BranchError("map_to_strip: image left the closed strip");
  }
  return w;
}

inline complex map_from_strip(complex w, double x1, double xi0 = 0.0) {
  return x1 + (xi0 - x1) * std::exp(w);
}

/// Strip image of a marked real point; x = x1 gives -infinity.
inline StripMarked marked_to_strip(double x, double x1, double xi0 = 0.0) {
  if (x == x1) return {ExtendedReal::neg_infinity(), false};
  const complex w = map_to_strip(complex(x, 0.0), x1, xi0);
  return {ExtendedReal::finite(w.real()), x < x1};
}

enum class PointStatus : std::uint8_t { alive, swallowed, left, right };

struct StripState {
  double s = 0.0;
  double eta = 0.0;
  std::vector<complex> h;              ///< h_s(w) for observation points
  std::vector<PointStatus> status;     ///< frozen once not alive
  std::vector<StripMarked> tilde_x;    ///< h_s(m(x_j)); entry 0 is x_1 = -inf
  bool stopped = false;

  bool all_resolved() const noexcept {
    return std::none_of(status.begin(), status.end(),
                        [](PointStatus p) { return p == PointStatus::alive; });
  }
};

struct StripConfig {
  double ds = 1e-3;
  double horizon = 1.0;     ///< in strip time s
  double guard_rel = 1e-4;  ///< guard = guard_rel * initial min |h|
  double exit_L = 30.0;     ///< |Re h| > L counts as escaped to +-infinity
  int max_halvings = 20;
};

namespace detail {
inline void require_strip_params(const SleParams& params) {
  params.validate();
  if (params.size() == 0) throw DomainError("strip dynamics need at least one marked point x_1");
  if (!(params.x[0] < params.xi0)) throw DomainError("strip dynamics require x_1 < xi0");
}
}  // namespace detail

/// Initial strip state for observation points given in strip coordinates.
inline StripState strip_initial_state(const SleParams& params, std::span<const complex> w) {
  detail::require_strip_params(params);
  StripState st;
  for (complex p : w) {
    if (p.imag() < 0.0 || p.imag() > std::numbers::pi) {
      throw DomainError("strip observation point outside the closed strip");
    }
    st.h.push_back(p);
    st.status.push_back(PointStatus::alive);
  }
  st.tilde_x.push_back({ExtendedReal::neg_infinity(), false});
  for (std::size_t j = 1; j < params.size(); ++j) {
    st.tilde_x.push_back(marked_to_strip(params.x[j], params.x[0], params.xi0));
  }
  return st;
}

/// Constant part of the strip drift; also equals the drift of -eta.
inline double strip_drift_constant(const SleParams& params, const StripState& st) {
  double c = 0.5 * rho_infinity(params);
  for (std::size_t j = 0; j < params.size(); ++j) c += 0.5 * params.rho[j] * st.tilde_x[j].coth_half();
  return c;
}

inline double strip_absolute_guard(const StripState& st, double guard_rel) {
  double m = std::numeric_limits<double>::infinity();
  for (complex p : st.h) m = std::min(m, std::abs(p));
  for (const auto& x : st.tilde_x) {
    if (x.re.is_finite() && !x.upper) m = std::min(m, std::abs(x.re.value()));
  }
  return std::isfinite(m) && m > 0.0 ? guard_rel * m : guard_rel;
}

/// One Euler-Maruyama step of every live tracked value. Rejected (state
/// unchanged) when a point would leave the closed strip, a real point would
/// jump across 0, or a marked point with rho != 0 would reach the guard.
/// Points reaching the guard or |Re h| > L are frozen with their label.
inline StepOutcome strip_step(const SleParams& params, StripState& st, double dB, double ds,
                              double guard, double exit_L) {
  if (st.stopped) throw StateError("strip_step: state is stopped");
  const double c = strip_drift_constant(params, st);
  const double noise = -std::sqrt(params.kappa) * dB;
  const double pi = std::numbers::pi;

  thread_local std::vector<complex> h_new;
  thread_local std::vector<double> x_new;
  h_new.assign(st.h.begin(), st.h.end());
  x_new.assign(st.tilde_x.size(), 0.0);

  for (std::size_t k = 0; k < st.h.size(); ++k) {
    if (st.status[k] != PointStatus::alive) continue;
    const complex h = st.h[k];
    complex hn = h + noise + (c + coth_half(h)) * ds;
    if (h.imag() == 0.0) {
      hn.imag(0.0);
      if ((h.real() > 0.0) != (hn.real() > 0.0)) return StepOutcome::rejected;
    } else if (h.imag() == pi) {
      hn.imag(pi);
    } else if (hn.imag() < 0.0 || hn.imag() > pi) {
      return StepOutcome::rejected;
    }
    h_new[k] = hn;
  }
  for (std::size_t j = 1; j < st.tilde_x.size(); ++j) {
    const auto& m = st.tilde_x[j];
    if (!m.re.is_finite()) continue;
    const double x = m.re.value();
    const double xn = x + noise + (c + m.coth_half()) * ds;
    if (!m.upper && params.rho[j] != 0.0) {
      if ((x > 0.0) != (xn > 0.0) || std::abs(xn) <= guard) return StepOutcome::rejected;
    }
    x_new[j] = xn;
  }

  for (std::size_t k = 0; k < st.h.size(); ++k) {
    if (st.status[k] != PointStatus::alive) continue;
    st.h[k] = h_new[k];
    if (std::abs(h_new[k]) <= guard) {
      st.status[k] = PointStatus::swallowed;
    } else if (h_new[k].real() < -exit_L) {
      st.status[k] = PointStatus::left;
    } else if (h_new[k].real() > exit_L) {
      st.status[k] = PointStatus::right;
    }
  }
  for (std::size_t j = 1; j < st.tilde_x.size(); ++j) {
    auto& m = st.tilde_x[j];
    if (!m.re.is_finite()) continue;
    const double xn = x_new[j];
    if (xn < -exit_L) {
      m.re = ExtendedReal::neg_infinity();
    } else if (xn > exit_L) {
      m.re = ExtendedReal::pos_infinity();
    } else if (!m.upper && params.rho[j] == 0.0 && ((m.re.value() > 0.0) != (xn > 0.0))) {
      m.re = ExtendedReal::finite(0.0);  // swallowed boundary point, stays at the tip
    } else {
      m.re = ExtendedReal::finite(xn);
    }
  }
  st.eta += std::sqrt(params.kappa) * dB - c * ds;
  st.s += ds;
  return StepOutcome::accepted;
}

namespace detail {
inline double strip_adaptive_ds(const SleParams& params, const StripState& st, double ds) {
  double m2 = std::numeric_limits<double>::infinity();
  for (std::size_t k = 0; k < st.h.size(); ++k) {
    if (st.status[k] == PointStatus::alive) m2 = std::min(m2, std::norm(st.h[k]));
  }
  for (std::size_t j = 1; j < st.tilde_x.size(); ++j) {
    const auto& m = st.tilde_x[j];
    if (m.re.is_finite() && !m.upper && params.rho[j] != 0.0) {
      m2 = std::min(m2, m.re.value() * m.re.value());
    }
  }
  return ds * std::min(1.0, m2 / 4.0);
}
}  // namespace detail

/// Simulates the strip dynamics until every observation point is resolved,
/// the path stops, or s reaches the horizon. Step control and the Brownian
/// bridge retry mirror run_path. `observer` sees the initial state and every
/// accepted state.
template <class Observer = NoObserver>
StripState run_strip(const SleParams& params, std::span<const complex> w, const StripConfig& config,
                     std::uint64_t seed, std::uint64_t stream, Observer&& observer = {}) {
  if (!(config.ds > 0.0) || !(config.horizon > 0.0)) {
    throw DomainError("run_strip: ds and horizon must be positive");
  }
  StripState st = strip_initial_state(params, w);
  const double guard = strip_absolute_guard(st, config.guard_rel);
  for (std::size_t k = 0; k < st.h.size(); ++k) {
    if (std::abs(st.h[k]) <= guard) st.status[k] = PointStatus::swallowed;
  }
  PathRng rng(seed, stream);
  observer(std::as_const(st));

  struct Segment {
    double ds;
    double dB;
    int depth;
  };
  std::vector<Segment> pending;
  StripState trial;
  while (st.s < config.horizon && !st.all_resolved()) {
    if (pending.empty()) {
      const double h = std::min(detail::strip_adaptive_ds(params, st, config.ds), config.horizon - st.s);
      if (!(h > 0.0)) break;
      pending.push_back({h, std::sqrt(h) * rng.normal(), 0});
    }
    const Segment seg = pending.back();
    pending.pop_back();
    trial = st;
    if (strip_step(params, trial, seg.dB, seg.ds, guard, config.exit_L) == StepOutcome::accepted) {
      std::swap(st, trial);
      observer(std::as_const(st));
      continue;
    }
    if (seg.depth >= config.max_halvings) {
      // Unresolved points stay alive and are reported as undecided.
      st.stopped = true;
      break;
    }
    const double half = 0.5 * seg.ds;
    const double first = 0.5 * seg.dB + std::sqrt(0.5 * half) * rng.normal();
    pending.push_back({half, seg.dB - first, seg.depth + 1});
    pending.push_back({half, first, seg.depth + 1});
  }
  return st;
}

/// Drives the strip dynamics with externally supplied increments (ds_k, dB_k),
/// without step control. Stops at the first rejected step; the returned
/// count is the number of increments applied.
template <class Observer = NoObserver>
std::size_t strip_replay(const SleParams& params, StripState& st, std::span<const double> ds,
                         std::span<const double> dB, double guard, double exit_L,
                         Observer&& observer = {}) {
  if (ds.size() != dB.size()) throw DomainError("strip_replay: ds and dB length mismatch");
  for (std::size_t k = 0; k < ds.size(); ++k) {
    if (strip_step(params, st, dB[k], ds[k], guard, exit_L) != StepOutcome::accepted) return k;
    observer(std::as_const(st));
  }
  return ds.size();
}

struct TimeChange {
  std::vector<double> t;
  std::vector<double> s;
};

/// s(t) = int_0^t du / (xi_u - g_u(x_1))^2 by the trapezoidal rule on the
/// recorded grid.
inline TimeChange time_change(const DrivingPath& path, const SleParams& params) {
  if (params.size() == 0) throw DomainError("time_change: needs a marked point x_1");
  const std::vector<double> X1 = flow_real_point(path, params.x[0]);
  TimeChange tc;
  tc.t = path.times;
  tc.s.reserve(path.times.size());
  tc.s.push_back(0.0);
  const double side = params.xi0 - params.x[0];
  auto inv_sq = [&](std::size_t k) {
    const double a = path.xi_values[k] - X1[k];
    if (a == 0.0 || (a > 0.0) != (side > 0.0)) {
      throw DomainError("time_change: x_1 swallowed along the path");
    }
    return 1.0 / (a * a);
  };
  double prev = inv_sq(0);
  for (std::size_t k = 0; k < path.steps(); ++k) {
    const double next = inv_sq(k + 1);
    tc.s.push_back(tc.s.back() + 0.5 * (path.times[k + 1] - path.times[k]) * (prev + next));
    prev = next;
  }
  return tc;
}

/// Strip coordinate of a half-plane point from chordal data:
/// h_t(w) = log((g_t(z) - g_t(x_1)) / (xi_t - g_t(x_1))).
inline complex strip_value_from_chordal(complex gz, double xi, double X1) {
  const complex d = gz - X1;
  const complex q(std::log(std::abs(d) / (xi - X1)), std::atan2(std::abs(d.imag()), d.real()));
  return q;
}

}  // namespace slerho
