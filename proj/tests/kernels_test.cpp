#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "expect_error.hpp"
#include "kmax/kernels.hpp"
#include "test_util.hpp"

namespace kmax {
namespace {

using testing::random_sample;
using testing::to_dataset;
using testing::to_points;

GroupedDataset scalars(std::vector<double> v, std::vector<std::size_t> sizes) {
  return GroupedDataset::continuous(PointSet(1, std::move(v)), sizes);
}

TEST(KernelEval, GaussianAtZeroDistance) {
  const std::vector<double> x = {0.3, -1.2};
  EXPECT_EQ(kernel_eval(KernelSpec::gaussian(1.0), x, x), 1.0);
}

TEST(KernelEval, EnergyScalars) {
  const std::vector<double> x = {0.0}, y = {1.0};
  EXPECT_DOUBLE_EQ(kernel_eval(KernelSpec::energy_distance(), x, y), 0.0);
}

TEST(KernelEval, ChiSquare) {
  const auto k = KernelSpec::chi_square({0.5, 0.5});
  EXPECT_EQ(kernel_eval(k, 1, 1), 2.0);
  EXPECT_EQ(kernel_eval(k, 1, 2), 0.0);
  EXPECT_KMAX_ERROR(kernel_eval(k, 3, 1), ErrorCode::kDiscreteOutOfRange);
}

TEST(KernelEval, LinearDotProduct) {
  const std::vector<double> x = {3.0, 4.0};
  EXPECT_EQ(kernel_eval(KernelSpec::linear(), x, x), 25.0);
}

TEST(KernelEval, DomainMismatch) {
  const std::vector<double> x = {1.0};
  EXPECT_KMAX_ERROR(kernel_eval(KernelSpec::chi_square_uniform(2), x, x), ErrorCode::kDomainMismatch);
  EXPECT_KMAX_ERROR(kernel_eval(KernelSpec::linear(), 1, 1), ErrorCode::kDomainMismatch);
  EXPECT_KMAX_ERROR(gram_matrix(KernelSpec::chi_square_uniform(2), scalars({1, 2}, {1, 1})),
                    ErrorCode::kDomainMismatch);
  const auto disc = GroupedDataset::discrete({1, 2}, 2, std::vector<std::size_t>{1, 1});
  EXPECT_KMAX_ERROR(gram_matrix(KernelSpec::energy_distance(), disc), ErrorCode::kDomainMismatch);
}

TEST(KernelEval, UnresolvedBandwidth) {
  const std::vector<double> x = {1.0};
  EXPECT_KMAX_ERROR(kernel_eval(KernelSpec::gaussian_median(), x, x), ErrorCode::kInvalidArgument);
}

TEST(KernelSpecValidation, Invariants) {
  EXPECT_KMAX_ERROR(KernelSpec::gaussian(0.0), ErrorCode::kInvalidArgument);
  EXPECT_KMAX_ERROR(KernelSpec::gaussian(-1.0), ErrorCode::kInvalidArgument);
  EXPECT_KMAX_ERROR(KernelSpec::chi_square({0.5, 0.6}), ErrorCode::kInvalidSimplex);
  EXPECT_KMAX_ERROR(KernelSpec::chi_square({1.0, 0.0}), ErrorCode::kInvalidSimplex);
  auto k = KernelSpec::linear();
  k.bound_B = -1.0;
  EXPECT_KMAX_ERROR(validate(k), ErrorCode::kInvalidArgument);
}

TEST(KernelEval, SymmetricForEveryFamily) {
  std::mt19937_64 rng(11);
  std::uniform_int_distribution<int> lvl(1, 4);
  const auto chi = KernelSpec::chi_square({0.1, 0.2, 0.3, 0.4});
  for (int rep = 0; rep < 200; ++rep) {
    const auto s = random_sample(rng, 2, 1 + rep % 6);
    for (const auto& spec : {KernelSpec::gaussian(0.7), KernelSpec::energy_distance(), KernelSpec::linear()}) {
      EXPECT_EQ(kernel_eval(spec, s[0], s[1]), kernel_eval(spec, s[1], s[0]));
    }
    const int a = lvl(rng), b = lvl(rng);
    EXPECT_EQ(kernel_eval(chi, a, b), kernel_eval(chi, b, a));
  }
}

TEST(MedianHeuristic, HandEnumeration) {
  EXPECT_DOUBLE_EQ(median_heuristic(scalars({0, 1, 2}, {2, 1})), 1.0);
  // Pairs {1, 4, 9, 1, 4, 1}: sorted 1,1,1,4,4,9, even count, middle mean 2.5.
  EXPECT_DOUBLE_EQ(median_heuristic(scalars({0, 1, 2, 3}, {2, 2})), 2.5);
}

TEST(MedianHeuristic, MatchesSortOracle) {
  std::mt19937_64 rng(5);
  for (int rep = 0; rep < 30; ++rep) {
    const auto s = random_sample(rng, 3 + rep, 1 + rep % 4);
    EXPECT_DOUBLE_EQ(median_heuristic(to_points(s)), testing::ref_median_sqdist(s));
  }
}

TEST(MedianHeuristic, TranslationScalingAndPermutation) {
  std::mt19937_64 rng(9);
  auto s = random_sample(rng, 15, 3);
  const double base = median_heuristic(to_points(s));
  auto shifted = s;
  for (auto& p : shifted) for (auto& v : p) v += 4.25;
  EXPECT_NEAR(median_heuristic(to_points(shifted)), base, 1e-9 * base);
  auto scaled = s;
  for (auto& p : scaled) for (auto& v : p) v *= 3.0;
  EXPECT_NEAR(median_heuristic(to_points(scaled)), 9.0 * base, 1e-9 * base);
  auto shuffled = s;
  std::shuffle(shuffled.begin(), shuffled.end(), rng);
  EXPECT_EQ(median_heuristic(to_points(shuffled)), base);
}

TEST(MedianHeuristic, Degenerate) {
  EXPECT_KMAX_ERROR(median_heuristic(scalars({2, 2, 2}, {1, 2})), ErrorCode::kAllPointsIdentical);
  // Four copies of 0 and one 1: six zero pairs out of ten.
  EXPECT_DOUBLE_EQ(median_heuristic(scalars({0, 0, 0, 0, 1}, {2, 3})), 1.0);
}

TEST(GramMatrix, LinearOnSmallGrid) {
  const auto g = gram_matrix(KernelSpec::linear(), scalars({0, 1, 2}, {1, 2}));
  const double expect[3][3] = {{0, 0, 0}, {0, 1, 2}, {0, 2, 4}};
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) EXPECT_EQ(g(i, j), expect[i][j]);
}

TEST(GramMatrix, Singleton) {
  const auto g = gram_matrix(KernelSpec::linear(), PointSet(2, {3, 4}));
  ASSERT_EQ(g.size(), 1u);
  EXPECT_EQ(g(0, 0), 25.0);
}

TEST(GramMatrix, GaussianRangeAndSymmetry) {
  std::mt19937_64 rng(3);
  const auto ds = to_dataset({random_sample(rng, 12, 4), random_sample(rng, 9, 4, 1.0)});
  const auto g = gram_matrix(KernelSpec::gaussian_median(), ds);
  ASSERT_TRUE(g.kernel() && g.kernel()->bandwidth);
  EXPECT_DOUBLE_EQ(*g.kernel()->bandwidth, median_heuristic(ds));
  for (std::size_t i = 0; i < g.size(); ++i) {
    EXPECT_EQ(g(i, i), 1.0);
    for (std::size_t j = 0; j < g.size(); ++j) {
      EXPECT_GT(g(i, j), 0.0);
      EXPECT_LE(g(i, j), 1.0);
      EXPECT_EQ(g(i, j), g(j, i));
    }
  }
}

TEST(GramMatrix, EnergyDiagonalIsNorm) {
  std::mt19937_64 rng(4);
  const auto s = random_sample(rng, 10, 3);
  const auto g = gram_matrix(KernelSpec::energy_distance(), to_points(s));
  for (std::size_t i = 0; i < s.size(); ++i) EXPECT_NEAR(g(i, i), testing::ref_norm(s[i]), 1e-12);
}

TEST(GramMatrix, MatchesKernelEval) {
  std::mt19937_64 rng(8);
  const auto s = random_sample(rng, 8, 2);
  for (auto fam : {KernelFamily::kGaussian, KernelFamily::kEnergyDistance, KernelFamily::kLinear}) {
    KernelSpec spec;
    spec.family = fam;
    if (fam == KernelFamily::kGaussian) spec.bandwidth = 1.3;
    const auto g = gram_matrix(spec, to_points(s));
    for (std::size_t i = 0; i < s.size(); ++i)
      for (std::size_t j = 0; j < s.size(); ++j)
        EXPECT_NEAR(g(i, j), testing::ref_kernel(fam, 1.3, s[i], s[j]), 1e-12);
  }
}

TEST(GramMatrix, ChiSquareNeedsCoveringSimplex) {
  const auto disc = GroupedDataset::discrete({1, 3, 2}, 3, std::vector<std::size_t>{1, 2});
  EXPECT_KMAX_ERROR(gram_matrix(KernelSpec::chi_square_uniform(2), disc), ErrorCode::kDiscreteOutOfRange);
  const auto g = gram_matrix(KernelSpec::chi_square({0.5, 0.25, 0.25}), disc);
  EXPECT_EQ(g(0, 0), 2.0);
  EXPECT_EQ(g(1, 1), 4.0);
  EXPECT_EQ(g(1, 2), 0.0);
}

TEST(TildeH, Examples) {
  const auto lin = gram_matrix(KernelSpec::linear(), PointSet(1, {1, 2}));
  EXPECT_EQ(tilde_h(lin, 0, 0), 0.0);
  EXPECT_EQ(tilde_h(lin, 0, 1), 1.0);
  const auto en = gram_matrix(KernelSpec::energy_distance(), PointSet(1, {0, 3}));
  EXPECT_DOUBLE_EQ(tilde_h(en, 0, 1), 3.0);
  EXPECT_KMAX_ERROR(tilde_h(en, 0, 2), ErrorCode::kIndexOutOfRange);
}

TEST(TildeH, EnergyIsEuclideanDistance) {
  std::mt19937_64 rng(21);
  for (int rep = 0; rep < 20; ++rep) {
    const auto s = random_sample(rng, 6, 1 + rep % 5, 0.0, 3.0);
    const auto g = gram_matrix(KernelSpec::energy_distance(), to_points(s));
    for (std::size_t i = 0; i < s.size(); ++i)
      for (std::size_t j = 0; j < s.size(); ++j) {
        const double d = std::sqrt(testing::ref_sqdist(s[i], s[j]));
        EXPECT_TRUE(testing::rel_close(tilde_h(g, i, j), d, 1e-9)) << tilde_h(g, i, j) << " vs " << d;
      }
  }
}

TEST(TildeH, ClampNeverHidesLargeNegatives) {
  std::mt19937_64 rng(22);
  const auto s = random_sample(rng, 30, 3);
  const auto g = gram_matrix(KernelSpec::gaussian(2.0), to_points(s));
  for (std::size_t i = 0; i < s.size(); ++i)
    for (std::size_t j = 0; j < s.size(); ++j) EXPECT_GT(g(i, i) + g(j, j) - 2 * g(i, j), -1e-12);
}

}  // namespace
}  // namespace kmax
