#include <gtest/gtest.h>

#include <boost/math/tools/roots.hpp>
#include <cmath>
#include <random>

#include "slerho/virasoro.hpp"

using namespace slerho;

namespace {

// Independent oracle: <h| L_{w_1} ... L_{w_n} |h> for a word of modes,
// evaluated by commuting the rightmost positive mode to the right.
template <class T>
T vacuum_word(std::vector<int> w, const T& c, const T& h) {
  if (w.empty()) return T(1);
  if (w.back() > 0 || w.front() < 0) return T(0);
  if (w.back() == 0) {
    w.pop_back();
    return h * vacuum_word(w, c, h);
  }
  std::size_t i = w.size();
  for (std::size_t k = w.size(); k-- > 0;) {
    if (w[k] > 0) {
      i = k;
      break;
    }
  }
  if (i == w.size()) {
    // No positive modes: nonzero only if every mode is L_0.
    for (int m : w) {
      if (m != 0) return T(0);
    }
    T out(1);
    for (std::size_t k = 0; k < w.size(); ++k) out *= h;
    return out;
  }
  const int a = w[i], b = w[i + 1];
  std::vector<int> swapped = w;
  std::swap(swapped[i], swapped[i + 1]);
  std::vector<int> merged(w.begin(), w.begin() + static_cast<std::ptrdiff_t>(i));
  merged.push_back(a + b);
  merged.insert(merged.end(), w.begin() + static_cast<std::ptrdiff_t>(i) + 2, w.end());
  T out = vacuum_word(swapped, c, h) + T(a - b) * vacuum_word(merged, c, h);
  if (a + b == 0) {
    std::vector<int> dropped(w.begin(), w.begin() + static_cast<std::ptrdiff_t>(i));
    dropped.insert(dropped.end(), w.begin() + static_cast<std::ptrdiff_t>(i) + 2, w.end());
    out += c * T(a * a * a - a) / T(12) * vacuum_word(dropped, c, h);
  }
  return out;
}

template <class T>
Matrix<T> gram_oracle(const T& c, const T& h, int level) {
  const auto basis = partitions(level);
  Matrix<T> g(basis.size(), std::vector<T>(basis.size()));
  for (std::size_t i = 0; i < basis.size(); ++i) {
    for (std::size_t j = 0; j < basis.size(); ++j) {
      std::vector<int> w(basis[i].rbegin(), basis[i].rend());
      for (int m : basis[j]) w.push_back(-m);
      g[i][j] = vacuum_word(w, c, h);
    }
  }
  return g;
}

int partition_count(int n) { return static_cast<int>(partitions(n).size()); }

// Kac determinant up to an h-independent constant.
double kac_product(double kappa, double h, int level) {
  double prod = 1.0;
  for (int r = 1; r <= level; ++r) {
    for (int s = 1; r * s <= level; ++s) prod *= std::pow(h - kac_weight(r, s, kappa), partition_count(level - r * s));
  }
  return prod;
}

}  // namespace

TEST(Partitions, CountsAndOrder) {
  EXPECT_EQ(partitions(0), std::vector<Partition>{Partition{}});
  const std::vector<int> p{1, 1, 2, 3, 5, 7, 11};
  for (int n = 0; n <= 6; ++n) EXPECT_EQ(partition_count(n), p[static_cast<std::size_t>(n)]);
  EXPECT_EQ(partitions(3), (std::vector<Partition>{{3}, {2, 1}, {1, 1, 1}}));
  EXPECT_EQ(partitions(4), (std::vector<Partition>{{4}, {3, 1}, {2, 2}, {2, 1, 1}, {1, 1, 1, 1}}));
}

TEST(Gram, LowLevels) {
  const Rational c(7, 3), h(2, 5);
  EXPECT_EQ(gram_matrix<Rational>(c, h, 0), (Matrix<Rational>{{Rational(1)}}));
  EXPECT_EQ(gram_matrix<Rational>(c, h, 1), (Matrix<Rational>{{2 * h}}));
  const auto g = gram_matrix<Rational>(c, h, 2);
  EXPECT_EQ(g[0][0], 4 * h + c / 2);
  EXPECT_EQ(g[0][1], 6 * h);
  EXPECT_EQ(g[1][1], 4 * h * (2 * h + 1));
  EXPECT_EQ(determinant(g), 2 * h * (16 * h * h + 2 * h * (c - 5) + c));
  EXPECT_THROW(gram_matrix<double>(1.0, 1.0, 5), DomainError);
}

TEST(Gram, MatchesWordOracleExactly) {
  std::mt19937_64 gen(11);
  std::uniform_int_distribution<int> num(-40, 40), den(1, 9);
  for (int trial = 0; trial < 5; ++trial) {
    const Rational c(num(gen), den(gen)), h(num(gen), den(gen));
    for (int level = 0; level <= 4; ++level) EXPECT_EQ(gram_matrix<Rational>(c, h, level), gram_oracle(c, h, level));
  }
}

TEST(Gram, SymmetricAndPositiveForLargeC) {
  for (int level = 1; level <= 4; ++level) {
    const auto g = gram_matrix<Rational>(Rational(2), Rational(3, 10), level);
    for (std::size_t i = 0; i < g.size(); ++i) {
      for (std::size_t j = 0; j < g.size(); ++j) EXPECT_EQ(g[i][j], g[j][i]);
      // Leading principal minors positive.
      Matrix<Rational> minor(i + 1, std::vector<Rational>(i + 1));
      for (std::size_t a = 0; a <= i; ++a) {
        for (std::size_t b = 0; b <= i; ++b) minor[a][b] = g[a][b];
      }
      EXPECT_GT(determinant(minor), 0);
    }
  }
}

TEST(Gram, KacDeterminantAtLevelsThreeAndFour) {
  for (double kappa : {2.5, 5.0, 7.0}) {
    const double c = central_charge(kappa);
    for (int level = 3; level <= 4; ++level) {
      const double h0 = 0.37;
      const double ref = determinant(gram_matrix<double>(c, h0, level)) / kac_product(kappa, h0, level);
      for (double h : {-0.9, 0.11, 1.3, 2.7}) {
        const double ratio = determinant(gram_matrix<double>(c, h, level)) / kac_product(kappa, h, level);
        EXPECT_NEAR(ratio / ref, 1.0, 1e-9) << kappa << " level " << level << " h " << h;
      }
    }
  }
}

TEST(Gram, LevelTwoZerosAtKacWeights) {
  for (double kappa : {3.0, 5.0, 8.0}) {
    const double c = central_charge(kappa);
    auto det2 = [&](double h) { return determinant(gram_matrix<double>(c, h, 2)) / (2.0 * h); };
    for (double target : {kac_weight(1, 2, kappa), kac_weight(2, 1, kappa)}) {
      std::uintmax_t iters = 200;
      const auto [lo, hi] = boost::math::tools::toms748_solve(
          det2, target - 0.05, target + 0.05, boost::math::tools::eps_tolerance<double>(50), iters);
      EXPECT_NEAR(0.5 * (lo + hi), target, 1e-8);
    }
  }
}

TEST(NullVector, ExactAtRationalKappa) {
  for (double kappa : {2.0, 8.0 / 3.0, 3.0, 4.0, 6.0, 8.0, 5.3}) {
    const auto rep = null_vector_residual(kappa);
    EXPECT_TRUE(rep.exact);
    EXPECT_EQ(rep.residual, 0.0) << kappa;
    EXPECT_EQ(rep.det, 0.0);
    EXPECT_EQ(rep.gv_norm, 0.0);
  }
}

TEST(NullVector, FloatingPointPath) {
  for (double kappa : {6.0, std::sqrt(2.0) + 3.0, std::numbers::pi}) {
    const auto rep = null_vector_residual(kappa, false);
    EXPECT_FALSE(rep.exact);
    EXPECT_LT(rep.residual, 1e-7);
    EXPECT_LT(rep.det_relative, 1e-10);
    EXPECT_LT(rep.gv_norm, 1e-10 * std::max(1.0, std::abs(rep.gram[1][1])));
  }
  EXPECT_THROW(null_vector_residual(0.0), DomainError);
}

TEST(NullVector, NegativeControlAwayFromKacWeight) {
  const double kappa = 6.0, c = central_charge(kappa);
  const auto g = gram_matrix<double>(c, kac_weight(1, 2, kappa) + 0.1, 2);
  const std::vector<double> v{-2.0, kappa / 2};
  EXPECT_GT(form_residual(g, v), 0.1);
  EXPECT_GT(std::abs(determinant(g)), 1e-3);
}

TEST(NullVector, ResidualIsHomogeneous) {
  const auto g = gram_matrix<double>(0.7, 0.45, 2);
  const std::vector<double> v{-2.0, 1.3};
  for (double lambda : {-3.0, 0.5, 10.0}) {
    const std::vector<double> scaled{lambda * v[0], lambda * v[1]};
    EXPECT_NEAR(form_residual(g, scaled), std::abs(lambda) * form_residual(g, v), 1e-12 * std::abs(lambda));
  }
}

TEST(RecoverRational, Examples) {
  EXPECT_EQ(*recover_rational(8.0 / 3.0), Rational(8, 3));
  EXPECT_EQ(*recover_rational(5.3), Rational(53, 10));
  EXPECT_EQ(*recover_rational(-0.125), Rational(-1, 8));
  EXPECT_FALSE(recover_rational(std::numbers::pi).has_value());
  EXPECT_FALSE(recover_rational(std::nan("")).has_value());
}

TEST(WeightTable, MatchesKacWeights) {
  const auto t = weight_table(4.0, 3, 4);
  ASSERT_EQ(t.h.size(), 3u);
  ASSERT_EQ(t.h[0].size(), 4u);
  EXPECT_EQ(t.h[0][0], 0.0);
  EXPECT_DOUBLE_EQ(t.h[0][1], 0.25);
  for (int r = 1; r <= 3; ++r) {
    for (int s = 1; s <= 4; ++s) EXPECT_EQ(t.h[r - 1][s - 1], kac_weight(r, s, 4.0));
  }
  EXPECT_THROW(weight_table(4.0, 0, 2), DomainError);
  EXPECT_THROW(weight_table(4.0, 2, 7), DomainError);
}
