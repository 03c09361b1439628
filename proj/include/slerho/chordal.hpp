#pragma once

// Chordal SLE(kappa; rho) in the upper half-plane.
//
// Each step is operator-split: the driving value takes an Euler-Maruyama
// step, then every tracked point is advanced by the exact Loewner flow for
// driving frozen at the new value (a vertical slit map), which composes
// exactly when the driving is constant. Step k of a DrivingPath covers
// [times[k], times[k+1]] with driving xi_values[k+1].

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdint>
#include <functional>
#include <limits>
#include <span>
#include <vector>

#include "slerho/cft.hpp"
#include "slerho/errors.hpp"
#include "slerho/rng.hpp"

namespace slerho {

using complex = std::complex<double>;

enum class StopReason : std::uint8_t {
  none,            ///< still running, or ran to the horizon
  collision,       ///< xi met some g_t(x_j) with rho_j != 0 (tau reached)
  drift_failure,   ///< drift provider kept returning non-finite values
};

struct ChordalState {
  double t = 0.0;
  double xi = 0.0;
  std::vector<double> X;       ///< g_t(x_j)
  std::vector<double> Xprime;  ///< g_t'(x_j)
  std::vector<std::uint8_t> alive;
  bool stopped = false;
  StopReason reason = StopReason::none;
};

struct DrivingPath {
  double dt = 0.0;  ///< base step
  std::vector<double> times{0.0};
  std::vector<double> xi_values;
  std::vector<double> dB;

  std::size_t steps() const noexcept { return dB.size(); }
  double duration() const noexcept { return times.back(); }
};

struct TracePath {
  std::vector<double> times;
  std::vector<complex> points;
};

struct ChordalConfig {
  double dt = 1e-3;
  double horizon = 1.0;
  double guard_rel = 1e-4;  ///< guard = guard_rel * initial min |xi0 - x_j|
  int max_halvings = 20;
};

inline ChordalState initial_state(const SleParams& params) {
  params.validate();
  ChordalState s;
  s.xi = params.xi0;
  s.X = params.x;
  s.Xprime.assign(params.size(), 1.0);
  s.alive.assign(params.size(), 1);
  return s;
}

/// Absolute collision guard for a run: guard_rel times the smallest initial
/// distance from the start point to a marked point (guard_rel alone if n = 0).
inline double absolute_guard(const SleParams& params, double guard_rel) {
  double dmin = std::numeric_limits<double>::infinity();
  for (double x : params.x) dmin = std::min(dmin, std::abs(x - params.xi0));
  return std::isfinite(dmin) ? guard_rel * dmin : guard_rel;
}

/// Default drift provider: sum of rho_j / (xi - X_j) over alive points.
struct SleDrift {
  std::span<const double> rho;

  double operator()(double xi, const ChordalState& s) const noexcept {
    double f = 0.0;
    for (std::size_t j = 0; j < rho.size(); ++j) {
      if (s.alive[j] && rho[j] != 0.0) f += rho[j] / (xi - s.X[j]);
    }
    return f;
  }
};

/// Zero drift: plain chordal SLE(kappa).
struct NoDrift {
  double operator()(double, const ChordalState&) const noexcept { return 0.0; }
};

/// Drift kappa * d/dxi log D by central differences, for an arbitrary
/// user-supplied conformal block log D(xi, X). Evaluation failures come back
/// as NaN, which the stepper treats as a rejected step.
template <class LogD>
auto generalized_drift_provider(LogD logD, double fd_step, double kappa) {
  if (!(fd_step > 0.0)) throw DomainError("generalized_drift_provider: fd_step must be positive");
  detail::require_kappa(kappa);
  return [logD = std::move(logD), fd_step, kappa](double xi, const ChordalState& s) -> double {
    try {
      const double up = logD(xi + fd_step, std::span<const double>(s.X));
      const double down = logD(xi - fd_step, std::span<const double>(s.X));
      return kappa * (up - down) / (2.0 * fd_step);
    } catch (const std::exception&) {
      return std::numeric_limits<double>::quiet_NaN();
    }
  };
}

/// Exact Loewner flow of a complex point over time h with driving frozen at
/// xi: xi + sqrt((z - xi)^2 + 4h), root taken in the closed upper half-plane.
inline complex slit_forward(complex z, double xi, double h) {
  const complex d = z - xi;
  complex r = std::sqrt(d * d + 4.0 * h);
  if (r.imag() < 0.0) r = -r;
  return xi + r;
}

/// Real-axis version; the image stays on the same side of xi.
inline double slit_forward(double x, double xi, double h) {
  const double d = x - xi;
  const double r = std::sqrt(d * d + 4.0 * h);
  return d >= 0.0 ? xi + r : xi - r;
}

/// Inverse slit map xi + sqrt((w - xi)^2 - 4h), root in the closed upper half-plane.
inline complex slit_inverse(complex w, double xi, double h) {
  const complex d = w - xi;
  complex r = std::sqrt(d * d - 4.0 * h);
  if (r.imag() < 0.0) r = -r;
  return xi + r;
}

/// Advance alive marked points over dt with the driving frozen at state.xi.
/// Points already within `guard` of xi are marked swallowed instead; returns
/// true if that happened to any point.
inline bool ode_advance(ChordalState& state, double dt, double guard = 0.0) {
  if (state.stopped) throw StateError("ode_advance: state is stopped");
  bool swallowed = false;
  for (std::size_t j = 0; j < state.X.size(); ++j) {
    if (!state.alive[j]) continue;
    const double d = state.X[j] - state.xi;
    if (std::abs(d) <= guard) {
      state.alive[j] = 0;
      swallowed = true;
      continue;
    }
    const double r = std::sqrt(d * d + 4.0 * dt);
    state.X[j] = d >= 0.0 ? state.xi + r : state.xi - r;
    state.Xprime[j] *= std::abs(d) / r;
  }
  state.t += dt;
  return swallowed;
}

enum class StepOutcome : std::uint8_t { accepted, rejected };

namespace detail {

// One operator-split step ending exactly at t_next. The step length actually
// used is t_next - state.t, so replaying stored times is bit-exact.
template <class Drift>
StepOutcome step_to(const SleParams& params, ChordalState& state, double dB, double t_next,
                    const Drift& drift, double guard) {
  if (state.stopped) throw StateError("sde_step: state is stopped");
  const double h = t_next - state.t;
  const double f = drift(state.xi, state);
  if (!std::isfinite(f)) return StepOutcome::rejected;
  const double xi_new = state.xi + std::sqrt(params.kappa) * dB + f * h;
  if (!std::isfinite(xi_new)) return StepOutcome::rejected;

  for (std::size_t j = 0; j < state.X.size(); ++j) {
    if (!state.alive[j] || params.rho[j] == 0.0) continue;
    const double before = state.X[j] - state.xi;
    const double after = state.X[j] - xi_new;
    if ((before > 0.0) != (after > 0.0) || std::abs(after) <= guard) return StepOutcome::rejected;
  }
  for (std::size_t j = 0; j < state.X.size(); ++j) {
    // rho_j = 0 points do not feed the drift; crossing them just swallows them.
    if (!state.alive[j] || params.rho[j] != 0.0) continue;
    const double before = state.X[j] - state.xi;
    const double after = state.X[j] - xi_new;
    if ((before > 0.0) != (after > 0.0)) state.alive[j] = 0;
  }
  state.xi = xi_new;
  ode_advance(state, h, guard);
  state.t = t_next;
  return StepOutcome::accepted;
}

inline double adaptive_dt(const SleParams& params, const ChordalState& state, double dt) {
  double d2 = std::numeric_limits<double>::infinity();
  for (std::size_t j = 0; j < state.X.size(); ++j) {
    if (!state.alive[j] || params.rho[j] == 0.0) continue;
    const double d = state.xi - state.X[j];
    d2 = std::min(d2, d * d);
  }
  return dt * std::min(1.0, d2 / 4.0);
}

}  // namespace detail

/// Euler-Maruyama step of the driving process followed by the exact slit
/// advance of the marked points. On rejection the state is left unchanged
/// and the caller must retry with a shorter step.
template <class Drift>
StepOutcome sde_step(const SleParams& params, ChordalState& state, double dB, double dt,
                     const Drift& drift, double guard) {
  if (!(dt > 0.0)) throw DomainError("sde_step: dt must be positive");
  ChordalState trial = state;
  const auto out = detail::step_to(params, trial, dB, state.t + dt, drift, guard);
  if (out == StepOutcome::accepted) state = std::move(trial);
  return out;
}

inline StepOutcome sde_step(const SleParams& params, ChordalState& state, double dB, double dt,
                            double guard) {
  return sde_step(params, state, dB, dt, SleDrift{params.rho}, guard);
}

struct ChordalRun {
  ChordalState state;
  DrivingPath path;
};

struct NoObserver {
  template <class State>
  void operator()(const State&) const noexcept {}
};

/// Simulates one path up to min(horizon, tau_guard). Deterministic in
/// (params, config, seed, stream). A step that crosses the guard is split
/// at its Brownian-bridge midpoint and retried, at most max_halvings deep;
/// after that the path is stopped. `observer` sees the initial state and the
/// state after every accepted step.
template <class Drift = SleDrift, class Observer = NoObserver>
ChordalRun run_path(const SleParams& params, const ChordalConfig& config, std::uint64_t seed,
                    std::uint64_t stream, const Drift& drift, Observer&& observer = {}) {
  if (!(config.horizon > 0.0)) throw DomainError("run_path: horizon must be positive");
  if (!(config.dt > 0.0)) throw DomainError("run_path: dt must be positive");
  ChordalRun run;
  run.state = initial_state(params);
  run.path.dt = config.dt;
  run.path.xi_values.push_back(run.state.xi);
  const double guard = absolute_guard(params, config.guard_rel);
  PathRng rng(seed, stream);
  observer(std::as_const(run.state));

  struct Segment {
    double dt;
    double dB;
    int depth;
  };
  std::vector<Segment> pending;
  ChordalState trial;
  while (run.state.t < config.horizon) {
    if (pending.empty()) {
      const double h =
          std::min(detail::adaptive_dt(params, run.state, config.dt), config.horizon - run.state.t);
      if (!(h > 0.0)) break;
      pending.push_back({h, std::sqrt(h) * rng.normal(), 0});
    }
    const Segment seg = pending.back();
    pending.pop_back();
    trial = run.state;
    const double t_next = run.state.t + seg.dt;
    if (detail::step_to(params, trial, seg.dB, t_next, drift, guard) == StepOutcome::accepted) {
      std::swap(run.state, trial);
      run.path.times.push_back(run.state.t);
      run.path.xi_values.push_back(run.state.xi);
      run.path.dB.push_back(seg.dB);
      observer(std::as_const(run.state));
      continue;
    }
    if (seg.depth >= config.max_halvings) {
      run.state.stopped = true;
      run.state.reason = std::isfinite(drift(run.state.xi, run.state)) ? StopReason::collision
                                                                       : StopReason::drift_failure;
      break;
    }
    const double half = 0.5 * seg.dt;
    const double first = 0.5 * seg.dB + std::sqrt(0.5 * half) * rng.normal();
    pending.push_back({half, seg.dB - first, seg.depth + 1});
    pending.push_back({half, first, seg.depth + 1});
  }
  return run;
}

template <class Observer = NoObserver>
ChordalRun run_path(const SleParams& params, const ChordalConfig& config, std::uint64_t seed,
                    Observer&& observer = {}) {
  return run_path(params, config, seed, 0, SleDrift{params.rho}, std::forward<Observer>(observer));
}

/// Replays the recorded increments through the stepper. Reproduces the
/// recorded driving values bit-for-bit under the same params and guard.
template <class Drift = SleDrift, class Observer = NoObserver>
ChordalState replay_path(const SleParams& params, const DrivingPath& path, double guard_rel,
                         const Drift& drift, Observer&& observer = {}) {
  ChordalState state = initial_state(params);
  const double guard = absolute_guard(params, guard_rel);
  observer(std::as_const(state));
  for (std::size_t k = 0; k < path.steps(); ++k) {
    if (detail::step_to(params, state, path.dB[k], path.times[k + 1], drift, guard) !=
        StepOutcome::accepted) {
      throw StateError("replay_path: recorded step rejected on replay");
    }
    observer(std::as_const(state));
  }
  return state;
}

/// g_t(z) at every recorded time, driven by the stored path.
inline std::vector<complex> flow_point(const DrivingPath& path, complex z) {
  std::vector<complex> images;
  images.reserve(path.times.size());
  images.push_back(z);
  for (std::size_t k = 0; k < path.steps(); ++k) {
    z = slit_forward(z, path.xi_values[k + 1], path.times[k + 1] - path.times[k]);
    images.push_back(z);
  }
  return images;
}

/// Image of a real boundary point; stays on its side of the driving.
inline std::vector<double> flow_real_point(const DrivingPath& path, double x) {
  std::vector<double> images;
  images.reserve(path.times.size());
  images.push_back(x);
  for (std::size_t k = 0; k < path.steps(); ++k) {
    x = slit_forward(x, path.xi_values[k + 1], path.times[k + 1] - path.times[k]);
    images.push_back(x);
  }
  return images;
}

/// Estimates gamma_t at the grid time at or just below each sample time by
/// pulling the near-tip point xi_t + i*tip_offset back through the inverse
/// slit maps.
inline TracePath trace_points(const DrivingPath& path, std::span<const double> sample_times,
                              double tip_offset, double branch_tol = 1e-12) {
  if (!(tip_offset > 0.0)) throw DomainError("trace_points: tip_offset must be positive");
  TracePath trace;
  for (double ts : sample_times) {
    if (ts < 0.0 || ts > path.duration() * (1.0 + 1e-12)) {
      throw DomainError("trace_points: sample time outside the path duration");
    }
    auto it = std::upper_bound(path.times.begin(), path.times.end(), ts);
    const auto K = static_cast<std::size_t>(std::distance(path.times.begin(), it)) - 1;
    trace.times.push_back(path.times[K]);
    if (K == 0) {
      trace.points.emplace_back(path.xi_values[0], 0.0);
      continue;
    }
    complex w(path.xi_values[K], tip_offset);
    for (std::size_t k = K; k-- > 0;) {
      w = slit_inverse(w, path.xi_values[k + 1], path.times[k + 1] - path.times[k]);
      if (w.imag() < -branch_tol) throw BranchError("trace_points: left the upper half-plane");
    }
    trace.points.push_back(w);
  }
  return trace;
}

struct SwallowResult {
  bool swallowed = false;
  double tau = std::numeric_limits<double>::infinity();  ///< swallowing time when swallowed
  complex image;                                          ///< last computed g_t(z)
};

/// Flows z under the recorded path and reports the first recorded time with
/// |g_t(z) - xi_t| <= guard. Real points are also swallowed when the driving
/// jumps across them. K_t membership is tau <= t.
inline SwallowResult swallow_classify(const DrivingPath& path, complex z, double guard) {
  SwallowResult out;
  const bool real_point = z.imag() == 0.0;
  if (z.imag() < 0.0) throw DomainError("swallow_classify: z must be in the closed upper half-plane");
  if (std::abs(z - path.xi_values[0]) <= guard) {
    out.swallowed = true;
    out.tau = 0.0;
    out.image = z;
    return out;
  }
  for (std::size_t k = 0; k < path.steps(); ++k) {
    const double xi_new = path.xi_values[k + 1];
    const double h = path.times[k + 1] - path.times[k];
    if (real_point) {
      const double before = z.real() - path.xi_values[k];
      const double after = z.real() - xi_new;
      if ((before > 0.0) != (after > 0.0)) {
        out.swallowed = true;
        out.tau = path.times[k + 1];
        out.image = z;
        return out;
      }
      z = slit_forward(z.real(), xi_new, h);
    } else {
      z = slit_forward(z, xi_new, h);
    }
    if (std::abs(z - xi_new) <= guard) {
      out.swallowed = true;
      out.tau = path.times[k + 1];
      out.image = z;
      return out;
    }
  }
  out.image = z;
  return out;
}

}  // namespace slerho
