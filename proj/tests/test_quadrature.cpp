#include <gtest/gtest.h>

#include <cmath>
#include <complex>
#include <numbers>

#include "slerho/quadrature.hpp"

using namespace slerho;

TEST(GaussKronrod, PolynomialsExact) {
  // Both rules are exact through degree 13, so the error estimate vanishes.
  const auto r = integrate_gk([](double x) { return std::pow(x, 12) - 3 * x * x + 1; }, -1.0, 2.0);
  const double exact = (std::pow(2.0, 13) + 1.0) / 13.0 - (8.0 + 1.0) + 3.0;
  EXPECT_NEAR(r.value, exact, 1e-13 * std::abs(exact));
  EXPECT_EQ(r.intervals, 1);
  const auto high = integrate_gk([](double x) { return std::pow(x, 20); }, -1.0, 2.0);
  EXPECT_NEAR(high.value, (std::pow(2.0, 21) + 1.0) / 21.0, 1e-10 * high.value);
}

TEST(GaussKronrod, SmoothAndPeaked) {
  const auto a = integrate_gk([](double x) { return std::exp(-x) * std::cos(5 * x); }, 0.0, 10.0);
  const double exact = (1.0 - std::exp(-10.0) * (std::cos(50.0) - 5 * std::sin(50.0))) / 26.0;
  EXPECT_NEAR(a.value, exact, 1e-12);
  const auto b = integrate_gk([](double x) { return 1e-3 / (x * x + 1e-6); }, -1.0, 1.0);
  EXPECT_NEAR(b.value, 2.0 * std::atan(1e3), 1e-9);
  EXPECT_GT(b.intervals, 1);
}

TEST(GaussKronrod, ComplexIntegrand) {
  using C = std::complex<double>;
  const auto r = integrate_gk([](double t) { return std::exp(C(0.0, t)); }, 0.0, std::numbers::pi);
  EXPECT_NEAR(std::abs(r.value - C(0.0, 2.0)), 0.0, 1e-13);
}

TEST(GaussKronrod, IntegrableEndpointSingularity) {
  const auto r = integrate_gk([](double x) { return 1.0 / std::sqrt(x); }, 0.0, 1.0, {1e-8, 1e-300, 4000});
  EXPECT_NEAR(r.value, 2.0, 1e-7);
}

TEST(GaussKronrod, ReversedAndEmptyIntervals) {
  auto f = [](double x) { return x * x; };
  EXPECT_NEAR(integrate_gk(f, 1.0, 0.0).value, -1.0 / 3.0, 1e-15);
  EXPECT_EQ(integrate_gk(f, 0.5, 0.5).value, 0.0);
}

TEST(GaussKronrod, FailsLoudly) {
  EXPECT_THROW(integrate_gk([](double x) { return 1.0 / x; }, 0.0, 1.0, {1e-12, 1e-300, 200}), QuadratureError);
  EXPECT_THROW(integrate_gk([](double) { return std::nan(""); }, 0.0, 1.0), QuadratureError);
}
