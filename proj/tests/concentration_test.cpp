#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "expect_error.hpp"
#include "kmax/concentration.hpp"
#include "kmax/permutation.hpp"
#include "kmax/statistics.hpp"
#include "test_util.hpp"

namespace kmax {
namespace {

using testing::random_sample;
using testing::to_dataset;

const std::vector<std::size_t> kFiftyFifty = {50, 50};

GroupedDataset scalars(std::vector<double> v, std::vector<std::size_t> sizes) {
  return GroupedDataset::continuous(PointSet(1, std::move(v)), sizes);
}

/// sigma_K^2 written out: sort all ordered-pair distances and average the top block per pair.
double ref_sigma_K2(const GramMatrix& g, const std::vector<std::size_t>& sizes) {
  std::vector<double> v;
  for (std::size_t i = 0; i < g.size(); ++i)
    for (std::size_t j = 0; j < g.size(); ++j)
      if (i != j) v.push_back(std::max(0.0, g(i, i) + g(j, j) - 2 * g(i, j)));
  std::sort(v.rbegin(), v.rend());
  double best = 0.0;
  for (std::size_t k = 0; k < sizes.size(); ++k)
    for (std::size_t l = k + 1; l < sizes.size(); ++l) {
      const std::size_t m = sizes[k] + sizes[l], T = m * (m - 1);
      long double s = 0;
      for (std::size_t t = 0; t < T; ++t) s += v[t];
      best = std::max(best, static_cast<double>(s / T));
    }
  return best;
}

TEST(SigmaHat2, Examples) {
  EXPECT_EQ(sigma_hat2(gram_matrix(KernelSpec::linear(), PointSet(1, {3, 3, 3}))), 0.0);
  EXPECT_DOUBLE_EQ(sigma_hat2(gram_matrix(KernelSpec::linear(), PointSet(1, {0, 1, 2}))), 2.0);
  EXPECT_KMAX_ERROR(sigma_hat2(gram_matrix(KernelSpec::linear(), PointSet(1, {1}))), ErrorCode::kSingletonDataset);
}

TEST(SigmaHat2, EnergyIsMeanPairwiseDistance) {
  std::mt19937_64 rng(1);
  const auto s = random_sample(rng, 25, 3);
  double sum = 0.0;
  for (std::size_t i = 0; i < s.size(); ++i)
    for (std::size_t j = 0; j < s.size(); ++j)
      if (i != j) sum += std::sqrt(testing::ref_sqdist(s[i], s[j]));
  const double expect = sum / (25.0 * 24.0);
  EXPECT_TRUE(testing::rel_close(sigma_hat2(gram_matrix(KernelSpec::energy_distance(), testing::to_points(s))), expect, 1e-9));
}

TEST(SigmaK2, HandEnumeratedThreeGroups) {
  const auto ds = scalars({0, 1, 2}, {1, 1, 1});
  EXPECT_EQ(sigma_K2(gram_matrix(KernelSpec::linear(), ds), ds.index()), 4.0);
}

TEST(SigmaK2, TwoGroupsEqualsSigmaHat2Exactly) {
  std::mt19937_64 rng(2);
  for (int rep = 0; rep < 50; ++rep) {
    const auto ds = to_dataset({random_sample(rng, 3 + rep % 7, 3), random_sample(rng, 2 + rep % 5, 3, 1.0)});
    for (const auto& spec : {KernelSpec::gaussian_median(), KernelSpec::energy_distance()}) {
      const auto g = gram_matrix(spec, ds);
      EXPECT_EQ(sigma_K2(g, ds.index()), sigma_hat2(g));
    }
  }
}

TEST(SigmaK2, MatchesAlgorithmOracle) {
  std::mt19937_64 rng(3);
  for (int rep = 0; rep < 20; ++rep) {
    const auto ds = to_dataset({random_sample(rng, 2 + rep % 3, 2), random_sample(rng, 4, 2),
                                random_sample(rng, 1 + rep % 5, 2, 2.0)});
    const auto g = gram_matrix(KernelSpec::energy_distance(), ds);
    EXPECT_NEAR(sigma_K2(g, ds.index()), ref_sigma_K2(g, ds.group_sizes()), 1e-12);
  }
}

TEST(SigmaK2, IdenticalPointsAndMaxVariant) {
  const auto flat = scalars({1, 1, 1, 1}, {2, 1, 1});
  EXPECT_EQ(sigma_K2(gram_matrix(KernelSpec::linear(), flat), flat.index()), 0.0);
  const auto ds = scalars({0, 1, 2}, {1, 1, 1});
  EXPECT_EQ(sigma_K2(gram_matrix(KernelSpec::linear(), ds), ds.index(), SigmaKVariant::kMaxPairwise), 4.0);
  std::mt19937_64 rng(4);
  const auto r = to_dataset({random_sample(rng, 5, 2), random_sample(rng, 6, 2), random_sample(rng, 4, 2)});
  const auto g = gram_matrix(KernelSpec::energy_distance(), r);
  EXPECT_GE(sigma_K2(g, r.index(), SigmaKVariant::kMaxPairwise), sigma_K2(g, r.index()));
}

TEST(PBobkov, Examples) {
  EXPECT_EQ(p_bobkov(0.1, 1.0, kFiftyFifty), 1.0);
  const double threshold = std::sqrt(0.02);
  EXPECT_NEAR(p_bobkov(0.5, 1.0, kFiftyFifty), std::exp(-3.125 * (0.5 - threshold) * (0.5 - threshold)), 1e-15);
  EXPECT_NEAR(p_bobkov(0.5, 1.0, kFiftyFifty), 0.6691, 5e-5);
  EXPECT_KMAX_ERROR(p_bobkov(0.5, 1.0, std::vector<std::size_t>{40, 60}), ErrorCode::kUnbalancedGroups);
  EXPECT_KMAX_ERROR(p_bobkov(0.5, 1.0, std::vector<std::size_t>{10, 10, 10}), ErrorCode::kUnbalancedGroups);
  EXPECT_KMAX_ERROR(p_bobkov(0.5, 0.0, kFiftyFifty), ErrorCode::kZeroVariance);
}

TEST(PBobkov, MonotoneInStatisticAndN) {
  double prev = 1.0;
  for (double v = 0.0; v < 3.0; v += 0.05) {
    const double p = p_bobkov(v, 1.3, kFiftyFifty);
    EXPECT_LE(p, prev);
    prev = p;
  }
  prev = 1.0;
  for (std::size_t n = 10; n < 400; n += 10) {
    const std::vector<std::size_t> sizes = {n, n};
    const double p = p_bobkov(0.8, 1.3, sizes);
    EXPECT_LE(p, prev);
    prev = p;
  }
}

TEST(PMcDiarmid, Examples) {
  const std::vector<std::size_t> sizes = {64, 64};
  EXPECT_EQ(p_mcdiarmid(0.4, 1.0, sizes), 1.0);
  EXPECT_NEAR(p_mcdiarmid(1.0, 1.0, sizes), std::exp(-4.0), 1e-15);
  EXPECT_NEAR(p_mcdiarmid(1.0, 1.0, sizes), 0.0183, 5e-5);
  EXPECT_KMAX_ERROR(p_mcdiarmid(1.0, std::nullopt, sizes), ErrorCode::kMissingBound);
  EXPECT_KMAX_ERROR(p_mcdiarmid(1.0, 1.0, std::vector<std::size_t>{60, 68}), ErrorCode::kUnbalancedGroups);
}

TEST(PBobkov, DominatesExactPermutation) {
  std::mt19937_64 rng(5);
  for (int rep = 0; rep < 50; ++rep) {
    const std::size_t n = 1 + rep % 4;
    const auto ds = to_dataset({random_sample(rng, n, 2), random_sample(rng, n, 2, 0.5 * (rep % 5))});
    const auto g = gram_matrix(KernelSpec::gaussian_median(), ds);
    const double stat = max_mmd(g, ds.index()).value;
    const double pperm = permutation_pvalue_exact(g, ds.index(), StatisticKind::kMaxMmd);
    EXPECT_LE(pperm, p_bobkov(stat, sigma_hat2(g), ds.group_sizes()));
  }
}

TEST(Phi2, Examples) {
  EXPECT_EQ(phi2_threshold(0.0, 20, 30, 0.05), 0.0);
  EXPECT_NEAR(phi2_threshold(1.0, 50, 50, std::exp(-1.0)), std::sqrt(0.32) + std::sqrt(0.02), 1e-14);
  EXPECT_NEAR(phi2_threshold(1.0, 50, 50, std::exp(-1.0)), 0.70711, 5e-6);
  double prev = INFINITY;
  for (double a = 0.01; a < 1.0; a += 0.01) {
    const double t = phi2_threshold(2.0, 12, 7, a);
    EXPECT_LT(t, prev);
    prev = t;
  }
  EXPECT_KMAX_ERROR(phi2_threshold(1.0, 5, 5, 1.0), ErrorCode::kInvalidArgument);
}

TEST(PhiK, Reductions) {
  for (double s2 : {0.3, 1.0, 4.2}) {
    const std::vector<std::size_t> two = {13, 8};
    EXPECT_EQ(phiK_threshold(s2, two, 0.05), phi2_threshold(s2, 13, 8, 0.05));
  }
  EXPECT_EQ(phiK_threshold(0.0, std::vector<std::size_t>{3, 4, 5}, 0.1), 0.0);
  // Balanced design: a single pair's expression with log(C(K,2)/alpha).
  const std::vector<std::size_t> bal = {10, 10, 10, 10};
  const double g = 0.25, N = 20.0, s2 = 1.7;
  const double expect = std::sqrt(2 * s2 / (N * g * g) * std::log(6.0 / 0.05)) + std::sqrt(s2 / (2 * N * g));
  EXPECT_NEAR(phiK_threshold(s2, bal, 0.05), expect, 1e-13);
}

TEST(KSampleTailBound, Reductions) {
  const std::vector<std::size_t> two = {30, 20};
  const double g = 30.0 * 20.0 / (50.0 * 50.0);
  EXPECT_NEAR(ksample_tail_bound(0.7, two, 1.5), std::exp(-50.0 * g * g * 0.49 / 3.0), 1e-15);
  double prev = INFINITY;
  for (double t = 0.1; t < 20; t += 0.1) {
    const double b = ksample_tail_bound(t, std::vector<std::size_t>{5, 6, 7}, 1.0);
    EXPECT_LT(b, prev);
    prev = b;
  }
  EXPECT_LT(prev, 1e-6);
  EXPECT_KMAX_ERROR(ksample_tail_bound(1.0, two, 0.0), ErrorCode::kZeroVariance);
}

TEST(KSampleTailBound, BoundsPermutationTail) {
  std::mt19937_64 rng(6);
  for (int rep = 0; rep < 3; ++rep) {
    const auto ds = to_dataset({random_sample(rng, 8, 2), random_sample(rng, 10, 2), random_sample(rng, 12, 2, 0.5)});
    const auto g = gram_matrix(KernelSpec::gaussian_median(), ds);
    const auto sizes = ds.group_sizes();
    const double s2 = sigma_K2(g, ds.index());
    const double drift = ksample_drift(s2, sizes);
    const auto perm = permuted_statistics(g, ds.index(), 10000, rep, StatisticKind::kMaxMmd);
    for (double t : {0.05, 0.1, 0.2, 0.4, 0.8}) {
      double freq = 0.0;
      for (double v : perm) freq += v >= drift + t ? 1.0 : 0.0;
      freq /= static_cast<double>(perm.size());
      EXPECT_LE(freq, ksample_tail_bound(t, sizes, s2)) << "t=" << t;
    }
  }
}

TEST(PhiKPValue, TwoSampleBalancedMatchesBobkov) {
  const std::vector<std::size_t> sizes = {40, 40};
  for (double v : {0.05, 0.3, 0.6, 1.1}) {
    EXPECT_NEAR(phiK_pvalue(v, 1.2, sizes), p_bobkov(v, 1.2, sizes), 1e-14);
  }
}

TEST(PhiTests, ConservativeUnderExchangeability) {
  std::mt19937_64 rng(7);
  const std::size_t reps = 500;
  std::size_t rej2 = 0, rejK = 0;
  for (std::size_t r = 0; r < reps; ++r) {
    const auto two = to_dataset({random_sample(rng, 10, 2), random_sample(rng, 10, 2)});
    const auto g2 = gram_matrix(KernelSpec::gaussian_median(), two);
    rej2 += max_mmd(g2, two.index()).value >= phi2_threshold(sigma_hat2(g2), 10, 10, 0.05);
    const auto many = to_dataset({random_sample(rng, 6, 2), random_sample(rng, 6, 2), random_sample(rng, 6, 2)});
    const auto gK = gram_matrix(KernelSpec::gaussian_median(), many);
    rejK += max_mmd(gK, many.index()).value >= phiK_threshold(sigma_K2(gK, many.index()), many.group_sizes(), 0.05);
  }
  const double bound = 0.05 + 2.0 * std::sqrt(0.05 * 0.95 / reps);
  EXPECT_LE(static_cast<double>(rej2) / reps, bound);
  EXPECT_LE(static_cast<double>(rejK) / reps, bound);
}

}  // namespace
}  // namespace kmax
