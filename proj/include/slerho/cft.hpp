#pragma once

// Closed-form Coulomb-gas / boundary CFT arithmetic for SLE(kappa; rho).
//
// Conventions: the interface is created at xi by a weight h_{1,2} field,
// marked boundary points x_j carry rho_j, and the point at infinity carries
// rho_inf = kappa - 6 - sum(rho). Everything here is a pure function.

#include <algorithm>
#include <cmath>
#include <numbers>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "slerho/errors.hpp"

namespace slerho {

/// Full problem instance: kappa, the rho weights, their marked points and the start point.
struct SleParams {
  double kappa = 6.0;
  std::vector<double> rho;
  std::vector<double> x;
  double xi0 = 0.0;

  std::size_t size() const noexcept { return rho.size(); }

  /// Throws DomainError when an invariant is broken.
  void validate() const {
    if (!(kappa > 0.0) || !std::isfinite(kappa)) {
      throw DomainError("SleParams: kappa must be a positive finite number");
    }
    if (rho.size() != x.size()) {
      throw DomainError("SleParams: rho and x must have equal length (rho has " +
                        std::to_string(rho.size()) + ", x has " + std::to_string(x.size()) + ")");
    }
    if (!std::isfinite(xi0)) throw DomainError("SleParams: xi0 must be finite");
    for (std::size_t j = 0; j < x.size(); ++j) {
      if (!std::isfinite(x[j]) || !std::isfinite(rho[j])) {
        throw DomainError("SleParams: x and rho entries must be finite");
      }
      if (x[j] == xi0) throw DomainError("SleParams: marked point coincides with xi0");
      for (std::size_t k = 0; k < j; ++k) {
        if (x[k] == x[j]) throw DomainError("SleParams: marked points must be pairwise distinct");
      }
    }
  }
};

namespace detail {
inline void require_kappa(double kappa) {
  if (!(kappa > 0.0) || !std::isfinite(kappa)) throw DomainError("kappa must be positive");
}
}  // namespace detail

/// c(kappa) = (6 - kappa)(3 kappa - 8) / (2 kappa).
inline double central_charge(double kappa) {
  detail::require_kappa(kappa);
  return (6.0 - kappa) * (3.0 * kappa - 8.0) / (2.0 * kappa);
}

/// Kac weight h_{r,s} in the SLE labeling; h_{1,2} = (6 - kappa)/(2 kappa).
inline double kac_weight(int r, int s, double kappa) {
  detail::require_kappa(kappa);
  if (r < 1 || s < 1) throw DomainError("kac_weight: r and s must be positive integers");
  const double rr = r, ss = s;
  return (kappa * kappa * (rr * rr - 1.0) - 8.0 * kappa * (rr * ss - 1.0) + 16.0 * (ss * ss - 1.0)) /
         (16.0 * kappa);
}

/// Boundary weight of the operator carrying drift weight rho.
inline double delta_from_rho(double rho, double kappa) {
  detail::require_kappa(kappa);
  return rho * (rho + 4.0 - kappa) / (4.0 * kappa);
}

/// Effective weight at infinity, kappa - 6 - sum(rho).
inline double rho_infinity(const SleParams& params) {
  double sum = 0.0;
  for (double r : params.rho) sum += r;
  return params.kappa - 6.0 - sum;
}

/// Coulomb-gas charge of a vertex operator with drift weight rho.
inline double charge_from_rho(double rho, double kappa) {
  detail::require_kappa(kappa);
  return rho / (2.0 * std::sqrt(kappa));
}

struct ChargeLedger {
  double background = 0.0;       ///< -2 alpha_0 = (4 - kappa) / (2 sqrt(kappa))
  double interface = 0.0;        ///< alpha_{1,2} = 1 / sqrt(kappa)
  std::vector<double> boundary;  ///< alpha_j for j = 1..n, then the entry for infinity

  double total() const noexcept {
    double sum = background + interface;
    for (double a : boundary) sum += a;
    return sum;
  }
};

inline ChargeLedger charge_ledger(const SleParams& params) {
  detail::require_kappa(params.kappa);
  const double sk = std::sqrt(params.kappa);
  ChargeLedger ledger;
  ledger.background = (4.0 - params.kappa) / (2.0 * sk);
  ledger.interface = 1.0 / sk;
  ledger.boundary.reserve(params.size() + 1);
  for (double r : params.rho) ledger.boundary.push_back(r / (2.0 * sk));
  ledger.boundary.push_back(rho_infinity(params) / (2.0 * sk));
  return ledger;
}

/// Vertex-operator weight alpha^2 - 2 alpha_0 alpha, with -2 alpha_0 = (4 - kappa)/(2 sqrt(kappa)).
inline double weight_from_charge(double alpha, double kappa) {
  detail::require_kappa(kappa);
  const double minus_two_alpha0 = (4.0 - kappa) / (2.0 * std::sqrt(kappa));
  return alpha * alpha + minus_two_alpha0 * alpha;
}

namespace detail {

// Floor below which two points count as coincident: rel * (largest pairwise distance).
inline double coincidence_floor(double xi, std::span<const double> x, double rel) {
  double scale = 0.0;
  for (std::size_t j = 0; j < x.size(); ++j) {
    scale = std::max(scale, std::abs(x[j] - xi));
    for (std::size_t k = 0; k < j; ++k) scale = std::max(scale, std::abs(x[k] - x[j]));
  }
  return rel * scale;
}

}  // namespace detail

inline constexpr double kDefaultCoincideRel = 1e-12;

/// log of the screening-free Coulomb-gas correlator
///   prod_j |x_j - xi|^{rho_j/kappa} prod_{j<k} |x_k - x_j|^{rho_j rho_k / (2 kappa)}.
/// Only differences in xi are meaningful; the overall constant is arbitrary.
inline double log_correlator_D(double xi, std::span<const double> x, std::span<const double> rho,
                               double kappa, double coincide_rel = kDefaultCoincideRel) {
  detail::require_kappa(kappa);
  if (x.size() != rho.size()) throw DomainError("log_correlator_D: rho and x length mismatch");
  const double floor = detail::coincidence_floor(xi, x, coincide_rel);
  double sum = 0.0;
  for (std::size_t j = 0; j < x.size(); ++j) {
    const double d = std::abs(x[j] - xi);
    if (d <= floor) throw CoincidentPointError("log_correlator_D: x_j coincides with xi");
    sum += rho[j] / kappa * std::log(d);
    for (std::size_t k = j + 1; k < x.size(); ++k) {
      const double dk = std::abs(x[k] - x[j]);
      if (dk <= floor) throw CoincidentPointError("log_correlator_D: coincident marked points");
      sum += rho[j] * rho[k] / (2.0 * kappa) * std::log(dk);
    }
  }
  return sum;
}

inline double log_correlator_D(double xi, const SleParams& params,
                               double coincide_rel = kDefaultCoincideRel) {
  return log_correlator_D(xi, params.x, params.rho, params.kappa, coincide_rel);
}

/// SLE(kappa; rho) drift sum_j rho_j / (xi - x_j).
inline double drift_f(double xi, std::span<const double> x, std::span<const double> rho,
                      double coincide_rel = kDefaultCoincideRel) {
  if (x.size() != rho.size()) throw DomainError("drift_f: rho and x length mismatch");
  const double floor = detail::coincidence_floor(xi, x, coincide_rel);
  double f = 0.0;
  for (std::size_t j = 0; j < x.size(); ++j) {
    const double d = xi - x[j];
    if (std::abs(d) <= floor) throw CoincidentPointError("drift_f: x_j coincides with xi");
    f += rho[j] / d;
  }
  return f;
}

inline double drift_f(double xi, const SleParams& params,
                      double coincide_rel = kDefaultCoincideRel) {
  return drift_f(xi, params.x, params.rho, coincide_rel);
}

/// Free-boson boundary data. Entries are for x_1..x_n followed by infinity.
struct FreeFieldBC {
  double coupling_g = 0.25;
  double critical_jump = 1.0;  ///< lambda* = 1/sqrt(4 g)
  std::vector<double> weights;
  /// Jump sizes lambda_j = sqrt(delta_j / g) >= 0; empty where delta_j < 0
  /// (no real free-field jump produces that weight).
  std::vector<std::optional<double>> jumps;
  std::vector<double> angles;  ///< (pi/2) rho_j, radians
  double total_angle = 0.0;
};

inline FreeFieldBC free_field_bc(const SleParams& params, double coupling_g = 0.25) {
  detail::require_kappa(params.kappa);
  if (!(coupling_g > 0.0)) throw DomainError("free_field_bc: coupling g must be positive");
  FreeFieldBC bc;
  bc.coupling_g = coupling_g;
  bc.critical_jump = 1.0 / std::sqrt(4.0 * coupling_g);
  std::vector<double> all_rho(params.rho);
  all_rho.push_back(rho_infinity(params));
  for (double r : all_rho) {
    const double delta = delta_from_rho(r, params.kappa);
    bc.weights.push_back(delta);
    if (delta >= 0.0) {
      bc.jumps.emplace_back(std::sqrt(delta / coupling_g));
    } else {
      bc.jumps.emplace_back(std::nullopt);
    }
    bc.angles.push_back(0.5 * std::numbers::pi * r);
    bc.total_angle += 0.5 * std::numbers::pi * r;
  }
  return bc;
}

}  // namespace slerho
