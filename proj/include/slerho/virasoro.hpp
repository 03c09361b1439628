#pragma once

// Verma module V(c, h) at low level: PBW basis L_{-a1} ... L_{-ak}|h> with
// a1 >= ... >= ak >= 1, the Virasoro action by commutation, and the Shapovalov
// (Gram) form. Scalars are templated so the same code runs in double and in
// exact rationals.

#include <boost/multiprecision/cpp_int.hpp>

#include <cmath>
#include <cstdint>
#include <map>
#include <optional>
#include <stdexcept>
#include <type_traits>
#include <vector>

#include "slerho/cft.hpp"
#include "slerho/errors.hpp"

namespace slerho {

using Rational = boost::multiprecision::cpp_rational;
using Partition = std::vector<int>;  ///< non-increasing positive parts

/// Partitions of n in reverse-lexicographic order, e.g. 4: [4], [3,1], [2,2], [2,1,1], [1,1,1,1].
inline std::vector<Partition> partitions(int n) {
  if (n < 0) throw DomainError("partitions: negative level");
  std::vector<Partition> out;
  Partition cur;
  auto rec = [&](auto&& self, int remaining, int max_part) -> void {
    if (remaining == 0) {
      out.push_back(cur);
      return;
    }
    for (int p = std::min(remaining, max_part); p >= 1; --p) {
      cur.push_back(p);
      self(self, remaining - p, p);
      cur.pop_back();
    }
  };
  rec(rec, n, n);
  return out;
}

template <class T>
using VermaVector = std::map<Partition, T>;

namespace detail {

template <class T>
void axpy(VermaVector<T>& acc, const T& a, const VermaVector<T>& v) {
  for (const auto& [k, x] : v) {
    T& slot = acc[k];
    slot += a * x;
    if (slot == T(0)) acc.erase(k);
  }
}

template <class T>
int level_of(const Partition& p) {
  int n = 0;
  for (int a : p) n += a;
  return n;
}

}  // namespace detail

/// L_m applied to a single PBW monomial, normal ordered.
template <class T>
VermaVector<T> apply_L(int m, const Partition& mono, const T& c, const T& h);

/// L_m applied to a vector.
template <class T>
VermaVector<T> apply_L(int m, const VermaVector<T>& v, const T& c, const T& h) {
  VermaVector<T> out;
  for (const auto& [mono, coeff] : v) detail::axpy(out, coeff, apply_L<T>(m, mono, c, h));
  return out;
}

template <class T>
VermaVector<T> apply_L(int m, const Partition& mono, const T& c, const T& h) {
  VermaVector<T> out;
  if (m == 0) {
    out[mono] = h + T(detail::level_of<T>(mono));
    return out;
  }
  if (mono.empty()) {
    if (m < 0) out[Partition{-m}] = T(1);
    return out;
  }
  const int a1 = mono.front();
  const Partition rest(mono.begin() + 1, mono.end());
  if (m < 0) {
    const int p = -m;
    if (p >= a1) {
      Partition longer{p};
      longer.insert(longer.end(), mono.begin(), mono.end());
      out[longer] = T(1);
      return out;
    }
    // L_{-p} L_{-a1} = L_{-a1} L_{-p} + (a1 - p) L_{-(p+a1)}
    detail::axpy(out, T(1), apply_L<T>(-a1, apply_L<T>(-p, rest, c, h), c, h));
    detail::axpy(out, T(a1 - p), apply_L<T>(-(p + a1), rest, c, h));
    return out;
  }
  // L_m L_{-a1} = L_{-a1} L_m + (m + a1) L_{m-a1} + (c/12)(m^3 - m) delta_{m,a1}
  detail::axpy(out, T(1), apply_L<T>(-a1, apply_L<T>(m, rest, c, h), c, h));
  detail::axpy(out, T(m + a1), apply_L<T>(m - a1, rest, c, h));
  if (m == a1) {
    VermaVector<T> r;
    r[rest] = T(1);
    detail::axpy(out, c * T(m * m * m - m) / T(12), r);
  }
  return out;
}

template <class T>
using Matrix = std::vector<std::vector<T>>;

/// <h| L_{lam_k} ... L_{lam_1} L_{-mu_1} ... |h> over the reverse-lex basis of the level.
template <class T>
Matrix<T> gram_matrix(const T& c, const T& h, int level) {
  if (level < 0 || level > 4) throw DomainError("gram_matrix: level must be in [0, 4]");
  const auto basis = partitions(level);
  const std::size_t n = basis.size();
  Matrix<T> g(n, std::vector<T>(n, T(0)));
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      VermaVector<T> v;
      v[basis[j]] = T(1);
      for (int a : basis[i]) v = apply_L<T>(a, v, c, h);
      const auto it = v.find(Partition{});
      g[i][j] = it == v.end() ? T(0) : it->second;
    }
  }
  return g;
}

/// Determinant by Gaussian elimination (partial pivoting in floating point,
/// first nonzero pivot for exact types).
template <class T>
T determinant(Matrix<T> a) {
  const std::size_t n = a.size();
  T det(1);
  for (std::size_t col = 0; col < n; ++col) {
    std::size_t piv = col;
    if constexpr (std::is_floating_point_v<T>) {
      for (std::size_t r = col + 1; r < n; ++r) {
        if (std::abs(a[r][col]) > std::abs(a[piv][col])) piv = r;
      }
    } else {
      while (piv < n && a[piv][col] == T(0)) ++piv;
      if (piv == n) return T(0);
    }
    if (a[piv][col] == T(0)) return T(0);
    if (piv != col) {
      std::swap(a[piv], a[col]);
      det = -det;
    }
    det *= a[col][col];
    for (std::size_t r = col + 1; r < n; ++r) {
      const T f = a[r][col] / a[col][col];
      for (std::size_t k = col; k < n; ++k) a[r][k] -= f * a[col][k];
    }
  }
  return det;
}

struct VermaLevel {
  double c = 0.0;
  double h = 0.0;
  int level = 0;
  std::vector<Partition> basis;
  Matrix<double> gram;
};

inline VermaLevel verma_level(double c, double h, int level) {
  return {c, h, level, partitions(level), gram_matrix<double>(c, h, level)};
}

/// p/q with q <= max_den and |x - p/q| <= tol * max(1, |x|), from the
/// continued-fraction convergents of x.
inline std::optional<Rational> recover_rational(double x, long max_den = 1000, double tol = 1e-13) {
  if (!std::isfinite(x)) return std::nullopt;
  using boost::multiprecision::cpp_int;
  cpp_int p0 = 0, q0 = 1, p1 = 1, q1 = 0;
  double r = x;
  for (int iter = 0; iter < 64; ++iter) {
    const double a = std::floor(r);
    if (std::abs(a) > 1e15) return std::nullopt;
    const cpp_int ai(static_cast<long long>(a));
    const cpp_int p2 = ai * p1 + p0, q2 = ai * q1 + q0;
    if (q2 > max_den) return std::nullopt;
    const Rational cand(p2, q2);
    if (std::abs(x - cand.convert_to<double>()) <= tol * std::max(1.0, std::abs(x))) return cand;
    p0 = p1;
    q0 = q1;
    p1 = p2;
    q1 = q2;
    const double frac = r - a;
    if (frac == 0.0) return std::nullopt;
    r = 1.0 / frac;
  }
  return std::nullopt;
}

template <class T>
T central_charge_t(const T& kappa) {
  return (T(6) - kappa) * (T(3) * kappa - T(8)) / (T(2) * kappa);
}

template <class T>
T h12_t(const T& kappa) {
  return (T(6) - kappa) / (T(2) * kappa);
}

/// sqrt|v^T G v| for a level-2 coefficient vector in the basis [L_{-2}, L_{-1}^2].
template <class T>
T quadratic_form(const Matrix<T>& g, const std::vector<T>& v) {
  T s(0);
  for (std::size_t i = 0; i < v.size(); ++i) {
    for (std::size_t j = 0; j < v.size(); ++j) s += v[i] * g[i][j] * v[j];
  }
  return s;
}

inline double form_residual(const Matrix<double>& g, const std::vector<double>& v) {
  return std::sqrt(std::abs(quadratic_form(g, v)));
}

struct NullVectorReport {
  double kappa = 0.0;
  double c = 0.0;
  double h = 0.0;
  bool exact = false;  ///< computed in rationals
  Matrix<double> gram;
  std::vector<double> vector;  ///< (-2, kappa/2)
  double residual = 0.0;       ///< sqrt|v^T G v|
  double gv_norm = 0.0;        ///< |G v|
  double det = 0.0;
  double det_relative = 0.0;   ///< |det| / |G|_F^2
};

namespace detail {
template <class T>
NullVectorReport null_vector_report(const T& kappa) {
  const T c = central_charge_t(kappa);
  const T h = h12_t(kappa);
  const Matrix<T> g = gram_matrix<T>(c, h, 2);
  const std::vector<T> v{T(-2), kappa / T(2)};
  NullVectorReport rep;
  auto to_d = [](const T& x) {
    if constexpr (std::is_floating_point_v<T>) {
      return x;
    } else {
      return x.template convert_to<double>();
    }
  };
  rep.kappa = to_d(kappa);
  rep.c = to_d(c);
  rep.h = to_d(h);
  rep.exact = !std::is_floating_point_v<T>;
  double fro = 0.0, gv2 = 0.0;
  for (std::size_t i = 0; i < 2; ++i) {
    std::vector<double> row;
    T gv(0);
    for (std::size_t j = 0; j < 2; ++j) {
      row.push_back(to_d(g[i][j]));
      fro += row.back() * row.back();
      gv += g[i][j] * v[j];
    }
    gv2 += to_d(gv) * to_d(gv);
    rep.gram.push_back(row);
  }
  rep.vector = {to_d(v[0]), to_d(v[1])};
  rep.residual = std::sqrt(std::abs(to_d(quadratic_form(g, v))));
  rep.gv_norm = std::sqrt(gv2);
  rep.det = to_d(determinant(g));
  rep.det_relative = fro > 0.0 ? std::abs(rep.det) / fro : std::abs(rep.det);
  return rep;
}
}  // namespace detail

/// Checks (-2 L_{-2} + (kappa/2) L_{-1}^2)|h_{1,2}> against the level-2 Gram
/// form at c(kappa). Uses exact rationals when kappa is a ratio with
/// denominator <= 1000 and `exact_rational` is set.
inline NullVectorReport null_vector_residual(double kappa, bool exact_rational = true) {
  if (!(kappa > 0.0) || !std::isfinite(kappa)) throw DomainError("null_vector_residual: kappa must be positive");
  if (exact_rational) {
    if (auto q = recover_rational(kappa)) return detail::null_vector_report<Rational>(*q);
  }
  return detail::null_vector_report<double>(kappa);
}

struct WeightTable {
  double kappa = 0.0;
  int r_max = 0, s_max = 0;
  std::vector<std::vector<double>> h;  ///< h[r-1][s-1]
};

inline WeightTable weight_table(double kappa, int r_max, int s_max) {
  if (r_max < 1 || s_max < 1 || r_max > 6 || s_max > 6) {
    throw DomainError("weight_table: bounds must be in [1, 6]");
  }
  WeightTable t{kappa, r_max, s_max, {}};
  for (int r = 1; r <= r_max; ++r) {
    std::vector<double> row;
    for (int s = 1; s <= s_max; ++s) row.push_back(kac_weight(r, s, kappa));
    t.h.push_back(std::move(row));
  }
  return t;
}

}  // namespace slerho
