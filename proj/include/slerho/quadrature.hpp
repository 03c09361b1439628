#pragma once

// Globally adaptive 7/15-point Gauss-Kronrod quadrature on a finite real
// parameter interval, for real- or complex-valued integrands.

#include <array>
#include <cmath>
#include <complex>
#include <queue>
#include <string>
#include <vector>

#include "slerho/errors.hpp"

namespace slerho {

template <class T>
struct QuadResult {
  T value{};
  double error = 0.0;
  int intervals = 0;
};

struct QuadOptions {
  double rel_tol = 1e-10;
  double abs_tol = 1e-300;
  int max_intervals = 4000;
};

namespace detail {

inline constexpr std::array<double, 8> kKronrodNodes = {
    0.991455371120812639206854697526329, 0.949107912342758524526189684047851,
    0.864864423359769072789712788640926, 0.741531185599394439863864773280788,
    0.586087235467691130294144845693013, 0.405845151377397166906606412076961,
    0.207784955007898467600689403773245, 0.000000000000000000000000000000000};

inline constexpr std::array<double, 8> kKronrodWeights = {
    0.022935322010529224963732008058970, 0.063092092629978553290700663189204,
    0.104790010322250183839876322541518, 0.140653259715525918745189590510238,
    0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
    0.204432940075298892414161999234649, 0.209482141084727828012999174891714};

// Gauss weights for the Kronrod nodes with odd index (1, 3, 5, 7).
inline constexpr std::array<double, 4> kGaussWeights = {
    0.129484966168869693270611432679082, 0.279705391489276667901467771423780,
    0.381830050505118944950369775488975, 0.417959183673469387755102040816327};

template <class T>
double magnitude(const T& v) {
  return std::abs(v);
}

template <class F>
auto gk15(const F& f, double a, double b) {
  using T = decltype(f(a));
  const double center = 0.5 * (a + b);
  const double half = 0.5 * (b - a);
  const T fc = f(center);
  T kronrod = fc * kKronrodWeights[7];
  T gauss = fc * kGaussWeights[3];
  for (int i = 0; i < 7; ++i) {
    const double dx = half * kKronrodNodes[i];
    const T pair = f(center - dx) + f(center + dx);
    kronrod += pair * kKronrodWeights[i];
    if (i % 2 == 1) gauss += pair * kGaussWeights[i / 2];
  }
  struct Out {
    T value;
    double error;
  };
  return Out{kronrod * half, magnitude(T((kronrod - gauss) * half))};
}

}  // namespace detail

/// Integrates f over [a, b]; throws QuadratureError if the tolerance
/// max(abs_tol, rel_tol * |I|) is not met within max_intervals subintervals.
template <class F>
auto integrate_gk(const F& f, double a, double b, const QuadOptions& opt = {}) {
  using T = decltype(f(a));
  struct Interval {
    double a, b;
    T value;
    double error;
    bool operator<(const Interval& o) const { return error < o.error; }
  };
  std::priority_queue<Interval> heap;
  auto first = detail::gk15(f, a, b);
  heap.push({a, b, first.value, first.error});
  T total = first.value;
  double total_error = first.error;
  int count = 1;
  while (!(total_error <= std::max(opt.abs_tol, opt.rel_tol * detail::magnitude(total)))) {
    if (!std::isfinite(total_error)) throw QuadratureError("integrate_gk: non-finite integrand");
    if (count >= opt.max_intervals) {
      throw QuadratureError("integrate_gk: tolerance not met (estimated error " +
                            std::to_string(total_error) + ")");
    }
    Interval worst = heap.top();
    heap.pop();
    const double mid = 0.5 * (worst.a + worst.b);
    auto left = detail::gk15(f, worst.a, mid);
    auto right = detail::gk15(f, mid, worst.b);
    total += left.value + right.value - worst.value;
    total_error += left.error + right.error - worst.error;
    heap.push({worst.a, mid, left.value, left.error});
    heap.push({mid, worst.b, right.value, right.error});
    ++count;
  }
  // Re-sum to shed the drift from incremental updates.
  T sum{};
  double err = 0.0;
  while (!heap.empty()) {
    sum += heap.top().value;
    err += heap.top().error;
    heap.pop();
  }
  return QuadResult<T>{sum, err, count};
}

}  // namespace slerho
