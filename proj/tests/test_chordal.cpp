#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "slerho/chordal.hpp"

using namespace slerho;

namespace {

// Driving path frozen at xi = 0 on an arbitrary grid.
DrivingPath zero_path(const std::vector<double>& times) {
  DrivingPath p;
  p.dt = times.size() > 1 ? times[1] - times[0] : 0.0;
  p.times = times;
  p.xi_values.assign(times.size(), 0.0);
  p.dB.assign(times.size() - 1, 0.0);
  return p;
}

std::vector<double> uniform_grid(double T, std::size_t n) {
  std::vector<double> t;
  for (std::size_t k = 0; k <= n; ++k) t.push_back(T * double(k) / double(n));
  return t;
}

}  // namespace

TEST(SlitMap, RealPointConstantDriving) {
  ChordalState s = initial_state({2.0, {0.0}, {1.0}, 0.0});
  for (int k = 0; k < 1000; ++k) ode_advance(s, 1e-3);
  EXPECT_NEAR(s.X[0], std::sqrt(1.0 + 4.0), 1e-12);
  // g_t'(1) = 1 / sqrt(1 + 4t) for constant driving.
  EXPECT_NEAR(s.Xprime[0], 1.0 / std::sqrt(5.0), 1e-12);
}

TEST(SlitMap, DerivativeFactorTendsToOne) {
  ChordalState s = initial_state({2.0, {0.0}, {0.7}, 0.0});
  ode_advance(s, 1e-14);
  EXPECT_NEAR(s.Xprime[0], 1.0, 1e-12);
}

TEST(SlitMap, InteriorPointClosedForm) {
  const complex z(0.0, 1.0);
  const complex g = slit_forward(z, 0.0, 1.0);
  EXPECT_NEAR(std::abs(g - std::sqrt(z * z + 4.0)), 0.0, 1e-12);
  EXPECT_NEAR(g.real(), std::sqrt(3.0), 1e-12);
  EXPECT_NEAR(slit_inverse(g, 0.0, 1.0).imag(), 1.0, 1e-12);
}

TEST(SlitMap, ComposesExactlyAcrossPartitions) {
  std::mt19937_64 gen(5);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const double T = 0.8;
  for (int trial = 0; trial < 20; ++trial) {
    std::vector<double> times{0.0};
    while (times.back() < T) times.push_back(std::min(T, times.back() + 0.05 * u(gen) + 1e-6));
    const auto path = zero_path(times);
    for (complex z : {complex(0.3, 0.2), complex(-2.0, 0.01), complex(0.0, 5.0)}) {
      complex exact = std::sqrt(z * z + 4.0 * T);
      if (exact.imag() < 0.0) exact = -exact;  // the branch mapping H to H
      const complex got = flow_point(path, z).back();
      EXPECT_LT(std::abs(got - exact) / std::abs(exact), 1e-12);
    }
  }
}

TEST(SdeStep, NoDriftIncrementIsSqrtKappaDB) {
  const SleParams p{3.0, {}, {}, 0.25};
  ChordalState s = initial_state(p);
  ASSERT_EQ(sde_step(p, s, 0.01, 1e-3, NoDrift{}, 0.0), StepOutcome::accepted);
  EXPECT_DOUBLE_EQ(s.xi, 0.25 + std::sqrt(3.0) * 0.01);
  EXPECT_DOUBLE_EQ(s.t, 1e-3);
}

TEST(SdeStep, RejectsCrossingAndStoppedStates) {
  const SleParams p{4.0, {2.0}, {0.01}, 0.0};
  ChordalState s = initial_state(p);
  const ChordalState before = s;
  EXPECT_EQ(sde_step(p, s, 0.5, 1e-3, 1e-6), StepOutcome::rejected);
  EXPECT_EQ(s.xi, before.xi);
  EXPECT_EQ(s.t, before.t);
  s.stopped = true;
  EXPECT_THROW(sde_step(p, s, 0.0, 1e-3, 1e-6), StateError);
  EXPECT_THROW(ode_advance(s, 1e-3), StateError);
}

// dB = 0, one marked point: d = xi - X obeys d' = (rho + 2)/d, so
// d^2 = d0^2 + 2 (rho + 2) t and xi = xi0 + rho/(rho + 2) (d - d0).
TEST(SdeStep, DeterministicDriftMatchesReference) {
  const double rho = 1.0, x1 = -1.0, T = 0.5, dt = 1e-7;
  const SleParams p{2.0, {rho}, {x1}, 0.0};
  ChordalState s = initial_state(p);
  const auto n = static_cast<int>(std::llround(T / dt));
  for (int k = 0; k < n; ++k) {
    ASSERT_EQ(sde_step(p, s, 0.0, dt, 0.0), StepOutcome::accepted);
  }
  const double d = std::sqrt(1.0 + 2.0 * (rho + 2.0) * T);
  const double xi_exact = rho / (rho + 2.0) * (d - 1.0);

  // Independent RK4 integration of (xi, X).
  double xi = 0.0, X = x1;
  const double H = 1e-4;
  for (int k = 0; k < static_cast<int>(T / H + 0.5); ++k) {
    auto f = [&](double a, double b) { return std::pair{rho / (a - b), 2.0 / (b - a)}; };
    auto [k1a, k1b] = f(xi, X);
    auto [k2a, k2b] = f(xi + 0.5 * H * k1a, X + 0.5 * H * k1b);
    auto [k3a, k3b] = f(xi + 0.5 * H * k2a, X + 0.5 * H * k2b);
    auto [k4a, k4b] = f(xi + H * k3a, X + H * k3b);
    xi += H / 6 * (k1a + 2 * k2a + 2 * k3a + k4a);
    X += H / 6 * (k1b + 2 * k2b + 2 * k3b + k4b);
  }
  EXPECT_NEAR(xi, xi_exact, 1e-12);
  EXPECT_LT(std::abs(s.xi - xi) / std::abs(xi), 1e-6);
  EXPECT_LT(std::abs(s.X[0] - X) / std::abs(X), 1e-6);
}

TEST(RunPath, PlainChordalRunsToHorizon) {
  const SleParams p{6.0, {}, {}, 0.0};
  for (std::uint64_t i = 0; i < 20; ++i) {
    const auto run = run_path(p, {1e-3, 0.7, 1e-4, 20}, 11, i, NoDrift{});
    EXPECT_FALSE(run.state.stopped);
    EXPECT_DOUBLE_EQ(run.path.duration(), 0.7);
  }
}

TEST(RunPath, PathInvariantsAndDeterminism) {
  const SleParams p{6.0, {0.5, -1.0}, {-1.0, 2.0}, 0.0};
  const ChordalConfig cfg{1e-3, 1.0, 1e-4, 20};
  const auto a = run_path(p, cfg, 99, 3, SleDrift{p.rho});
  const auto b = run_path(p, cfg, 99, 3, SleDrift{p.rho});
  EXPECT_EQ(a.path.times, b.path.times);
  EXPECT_EQ(a.path.xi_values, b.path.xi_values);
  EXPECT_EQ(a.path.dB, b.path.dB);
  const auto& path = a.path;
  EXPECT_EQ(path.times.front(), 0.0);
  EXPECT_EQ(path.xi_values.size(), path.times.size());
  EXPECT_EQ(path.dB.size() + 1, path.times.size());
  EXPECT_TRUE(std::is_sorted(path.times.begin(), path.times.end()));

  // Replaying the increments reproduces the driving bit for bit.
  std::vector<double> xs;
  std::vector<double> prime_prev(p.size(), 1.0);
  const auto replayed = replay_path(p, path, cfg.guard_rel, SleDrift{p.rho}, [&](const ChordalState& s) {
    xs.push_back(s.xi);
    for (std::size_t j = 0; j < p.size(); ++j) {
      if (!s.alive[j]) continue;
      EXPECT_GT(s.Xprime[j], 0.0);
      EXPECT_LE(s.Xprime[j], prime_prev[j]);
      EXPECT_GT(std::abs(s.xi - s.X[j]), 0.0);
      prime_prev[j] = s.Xprime[j];
    }
  });
  EXPECT_EQ(xs, path.xi_values);
  EXPECT_EQ(replayed.xi, a.state.xi);
}

TEST(RunPath, AttractiveDriftStopsEarly) {
  const SleParams p{6.0, {-3.0}, {0.1}, 0.0};
  int stopped = 0;
  const int n = 200;
  for (int i = 0; i < n; ++i) {
    const auto run = run_path(p, {1e-3, 1.0, 1e-4, 20}, 5, static_cast<std::uint64_t>(i), SleDrift{p.rho});
    if (run.state.stopped) {
      ++stopped;
      EXPECT_EQ(run.state.reason, StopReason::collision);
      EXPECT_LT(run.state.t, 1.0);
    }
  }
  // Regression statistic: essentially every path hits x_1 well before t = 1.
  EXPECT_GE(stopped, 195);
}

TEST(RunPath, BrownianScalingIsPathwise) {
  // With the same normals, (lambda^2 dt, lambda^2 T) gives lambda * xi.
  // Powers of two keep both time grids exact.
  const double lambda = 2.0, dt = 1.0 / 1024.0;
  const SleParams p{2.5, {}, {}, 0.0};
  const auto a = run_path(p, {dt, 0.5, 1e-4, 20}, 8, 0, NoDrift{});
  const auto b = run_path(p, {lambda * lambda * dt, lambda * lambda * 0.5, 1e-4, 20}, 8, 0, NoDrift{});
  ASSERT_EQ(a.path.xi_values.size(), b.path.xi_values.size());
  for (std::size_t k = 0; k < a.path.xi_values.size(); k += 50) {
    EXPECT_NEAR(b.path.xi_values[k], lambda * a.path.xi_values[k], 1e-12);
  }
  const auto sa = swallow_classify(a.path, complex(0.2, 0.3), 1e-3);
  const auto sb = swallow_classify(b.path, lambda * complex(0.2, 0.3), lambda * 1e-3);
  EXPECT_EQ(sa.swallowed, sb.swallowed);
}

TEST(RunPath, CapacityGrowsAsTwoT) {
  const SleParams p{4.0, {0.5}, {-1.0}, 0.0};
  const auto run = run_path(p, {1e-3, 1.0, 1e-4, 20}, 21, 0, SleDrift{p.rho});
  const double T = run.path.duration();
  const complex iy(0.0, 1e4);
  const complex g = flow_point(run.path, iy).back();
  const complex expect = 2.0 * T / iy;
  EXPECT_LT(std::abs((g - iy) - expect) / std::abs(expect), 1e-3);
}

TEST(Trace, ZeroDrivingIsVerticalSlit) {
  const auto path = zero_path(uniform_grid(1.0, 1000));
  const std::vector<double> ts{0.0, 0.25, 1.0};
  const auto tr = trace_points(path, ts, 1e-9);
  EXPECT_EQ(tr.points[0], complex(0.0, 0.0));
  EXPECT_NEAR(std::abs(tr.points[1] - complex(0.0, 2.0 * std::sqrt(0.25))), 0.0, 1e-6);
  EXPECT_NEAR(std::abs(tr.points[2] - complex(0.0, 2.0)), 0.0, 1e-6);
  EXPECT_THROW(trace_points(path, std::vector<double>{1.5}, 1e-3), DomainError);
  EXPECT_THROW(trace_points(path, ts, 0.0), DomainError);
}

TEST(Trace, ForwardConsistency) {
  const SleParams p{3.0, {}, {}, 0.0};
  const double dt = 1e-3;
  const auto run = run_path(p, {dt, 1.0, 1e-4, 20}, 17, 0, NoDrift{});
  const double tip = 2.0 * std::sqrt(dt);
  const std::vector<double> ts{0.1, 0.5, 1.0};
  const auto tr = trace_points(run.path, ts, tip);
  for (std::size_t i = 0; i < ts.size(); ++i) {
    EXPECT_GE(tr.points[i].imag(), 0.0);
    const auto K = static_cast<std::size_t>(
        std::distance(run.path.times.begin(),
                      std::upper_bound(run.path.times.begin(), run.path.times.end(), ts[i])) - 1);
    complex z = tr.points[i];
    for (std::size_t k = 0; k < K; ++k) {
      z = slit_forward(z, run.path.xi_values[k + 1], run.path.times[k + 1] - run.path.times[k]);
    }
    // Frozen regression bound C = 2 on |g_t(gamma_t) - xi_t| / (tip + dt).
    EXPECT_LT(std::abs(z - run.path.xi_values[K]), 2.0 * (tip + dt));
  }
}

TEST(Swallow, ImaginaryPointUnderZeroDriving) {
  // g_t(i a) = sqrt(4t - a^2) hits 0 at tau = a^2 / 4.
  const double a = 0.01, dt = 1e-7;
  auto times = uniform_grid(1e-4, 1000);
  for (int k = 1; k <= 100; ++k) times.push_back(1e-4 + 0.1 * k);  // coarse tail to t = 10
  const auto path = zero_path(times);
  const double guard = 1e-4;
  const auto r = swallow_classify(path, complex(0.0, a), guard);
  ASSERT_TRUE(r.swallowed);
  EXPECT_NEAR(r.tau, a * a / 4.0, dt + guard * guard / 4.0);
  EXPECT_FALSE(swallow_classify(path, complex(50.0, 50.0), guard).swallowed);
}

TEST(Swallow, SimplePhaseSwallowsAlmostNothing) {
  const SleParams p{3.0, {}, {}, 0.0};
  const std::vector<complex> pts{{0.3, 0.4}, {-0.5, 0.2}, {0.1, 1.0}, {0.8, 0.1}};
  auto fraction = [&](double guard) {
    int sw = 0, total = 0;
    for (std::uint64_t i = 0; i < 200; ++i) {
      const auto run = run_path(p, {1e-3, 1.0, 1e-4, 20}, 31, i, NoDrift{});
      for (complex z : pts) {
        sw += swallow_classify(run.path, z, guard).swallowed;
        ++total;
      }
    }
    return double(sw) / total;
  };
  const double coarse = fraction(1e-2), fine = fraction(1e-6);
  EXPECT_LE(fine, coarse);
  EXPECT_LT(fine, 0.01);
}

TEST(GeneralizedDrift, MatchesClosedForms) {
  const SleParams p{6.0, {0.8, -1.3, 2.0}, {-1.0, 0.7, 2.5}, 0.0};
  ChordalState s = initial_state(p);
  auto logD = [&](double xi, std::span<const double> X) { return log_correlator_D(xi, X, p.rho, p.kappa); };
  const auto drift = generalized_drift_provider(logD, 1e-6, p.kappa);
  for (double xi : {0.0, 0.3, -0.4}) {
    s.xi = xi;
    const double f = drift_f(xi, s.X, p.rho);
    EXPECT_LT(std::abs(drift(xi, s) - f) / std::max(1.0, std::abs(f)), 1e-6);
  }
  const auto zero = generalized_drift_provider([](double, std::span<const double>) { return 4.2; }, 1e-6, 6.0);
  EXPECT_EQ(zero(0.1, s), 0.0);
  const double rho = 0.9, x1 = -0.6, kappa = 2.0;
  const auto single = generalized_drift_provider(
      [&](double xi, std::span<const double>) { return rho / kappa * std::log(std::abs(x1 - xi)); }, 1e-6, kappa);
  EXPECT_NEAR(single(0.2, s), rho / (0.2 - x1), 1e-6);
  // Failures surface as NaN, which the stepper rejects.
  const auto failing = generalized_drift_provider(
      [](double, std::span<const double>) -> double { throw DomainError("bad"); }, 1e-6, 6.0);
  EXPECT_TRUE(std::isnan(failing(0.0, s)));
  ChordalState t = initial_state(p);
  EXPECT_EQ(sde_step(p, t, 0.0, 1e-3, failing, 0.0), StepOutcome::rejected);
}
