// Library tour: weights, the level-2 null vector, left-passage probabilities
// and a short strip ensemble, all at kappa = 6, rho = 0.5, x_1 = -1.

#include <cstdio>
#include <numbers>

#include "slerho/slerho.hpp"

int main() {
  using namespace slerho;
  const SleParams params{6.0, {0.5}, {-1.0}, 0.0};

  std::printf("c = %g, h_12 = %g, rho_inf = %g, ledger sum = %.3g\n", central_charge(params.kappa),
              kac_weight(1, 2, params.kappa), rho_infinity(params), charge_ledger(params).total());

  const auto nv = null_vector_residual(params.kappa);
  std::printf("null vector residual %g, det %g (%s)\n", nv.residual, nv.det, nv.exact ? "exact" : "double");

  const FIntegral f({params.kappa, params.rho[0]});
  const complex finf = f.infinity();
  std::printf("F(+inf) = %.12f %+.12fi\n", finf.real(), finf.imag());

  std::vector<complex> pts;
  for (int x = -2; x <= 2; ++x) pts.emplace_back(x, 0.5 * std::numbers::pi);
  const auto counts = left_passage_mc(params, pts, {1e-3, 1e4, 1e-8, 40.0, 20}, 200, 1);
  for (std::size_t k = 0; k < pts.size(); ++k) {
    std::printf("w = %+.0f + i pi/2: p_left %.4f  MC %.3f +- %.3f  swallowed %.3f (analytic %.4f)\n",
                pts[k].real(), p_left(pts[k], f), counts[k].left_fraction(), counts[k].left_se(),
                counts[k].swallowed_fraction(), p_swallowed(pts[k], f));
  }
}
