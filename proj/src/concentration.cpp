#include "kmax/concentration.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <map>

#include "kmax/numeric.hpp"

namespace kmax {
namespace {

void require_balanced_pair(std::span<const std::size_t> sizes) {
  if (sizes.size() != 2 || sizes[0] != sizes[1] || sizes[0] == 0) {
    throw Error(ErrorCode::kUnbalancedGroups,
                "closed-form bound needs two groups of equal size");
  }
}

void require_alpha(double alpha) {
  if (!(alpha > 0.0 && alpha < 1.0)) {
    throw Error(ErrorCode::kInvalidArgument, "alpha must lie in (0, 1)");
  }
}

double num_pairs(std::size_t K) { return 0.5 * static_cast<double>(K) * static_cast<double>(K - 1); }

// First term of the phi thresholds for one pair, with log_term = log(C / alpha).
double deviation_term(double sigma2, std::size_t nk, std::size_t nl, double log_term) {
  const double g = pair_weight(nk, nl);
  return std::sqrt(2.0 * sigma2 / (static_cast<double>(nk + nl) * g * g) * log_term);
}

double drift_term(double sigma2, std::size_t nk, std::size_t nl) {
  return std::sqrt(sigma2 / (2.0 * static_cast<double>(nk + nl) * pair_weight(nk, nl)));
}

template <class F>
double max_over_pairs(std::span<const std::size_t> sizes, F&& f) {
  double best = -std::numeric_limits<double>::infinity();
  for (std::size_t k = 0; k < sizes.size(); ++k) {
    for (std::size_t l = k + 1; l < sizes.size(); ++l) best = std::max(best, f(sizes[k], sizes[l]));
  }
  return best;
}

}  // namespace

double pair_weight(std::size_t nk, std::size_t nl) {
  const double a = static_cast<double>(nk);
  const double b = static_cast<double>(nl);
  return a * b / ((a + b) * (a + b));
}

double sigma_hat2(const GramMatrix& gram) {
  const std::size_t n = gram.size();
  if (n < 2) throw Error(ErrorCode::kSingletonDataset, "sigma^2 needs N >= 2");
  ExactSum sum;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      if (i != j) sum.add(tilde_h(gram, i, j));
    }
  }
  return sum.value() / (static_cast<double>(n) * static_cast<double>(n - 1));
}

double sigma_K2(const GramMatrix& gram, const GroupIndex& index, SigmaKVariant variant) {
  const std::size_t n = gram.size();
  if (index.num_groups() < 2) throw Error(ErrorCode::kTooFewGroups, "need K >= 2");
  if (index.total() != n) {
    throw Error(ErrorCode::kIndexOutOfRange, "group index does not match the Gram dimension");
  }
  if (variant == SigmaKVariant::kMaxPairwise) {
    double best = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = i + 1; j < n; ++j) best = std::max(best, tilde_h(gram, i, j));
    }
    return best;
  }

  std::vector<double> values;
  values.reserve(n * (n - 1));
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      if (i != j) values.push_back(tilde_h(gram, i, j));
    }
  }
  std::sort(values.begin(), values.end(), std::greater<>());

  // Every pair only needs the top T = (n_k+n_l)(n_k+n_l-1) values; stream the
  // sorted sequence once and snapshot the exact prefix sum at each distinct T.
  std::map<std::size_t, double> top_mean;
  const auto sizes = index.sizes();
  for (std::size_t k = 0; k < sizes.size(); ++k) {
    for (std::size_t l = k + 1; l < sizes.size(); ++l) {
      const std::size_t m = sizes[k] + sizes[l];
      top_mean.emplace(m * (m - 1), 0.0);
    }
  }
  ExactSum prefix;
  std::size_t taken = 0;
  for (auto& [count, mean] : top_mean) {
    while (taken < count) prefix.add(values[taken++]);
    mean = prefix.value() / static_cast<double>(count);
  }
  double best = 0.0;
  for (const auto& [count, mean] : top_mean) best = std::max(best, mean);
  return best;
}

double log_p_bobkov(double statistic, double sigma2, std::span<const std::size_t> sizes) {
  require_balanced_pair(sizes);
  if (!(sigma2 > 0.0)) throw Error(ErrorCode::kZeroVariance, "sigma^2 must be positive");
  const double N = static_cast<double>(sizes[0] + sizes[1]);
  const double threshold = std::sqrt(2.0 * sigma2 / N);
  if (statistic < threshold) return 0.0;
  const double excess = statistic - threshold;
  return -N / (32.0 * sigma2) * excess * excess;
}

double p_bobkov(double statistic, double sigma2, std::span<const std::size_t> sizes) {
  return std::exp(log_p_bobkov(statistic, sigma2, sizes));
}

double log_p_mcdiarmid(double statistic, std::optional<double> bound_B,
                       std::span<const std::size_t> sizes) {
  if (!bound_B) throw Error(ErrorCode::kMissingBound, "McDiarmid p-value needs a kernel bound B");
  if (!(*bound_B > 0.0)) throw Error(ErrorCode::kInvalidArgument, "bound B must be positive");
  require_balanced_pair(sizes);
  const double B = *bound_B;
  const double N = static_cast<double>(sizes[0] + sizes[1]);
  const double threshold = std::sqrt(32.0 * B / N);
  if (statistic < threshold) return 0.0;
  const double excess = statistic - threshold;
  return -N / (8.0 * B) * excess * excess;
}

double p_mcdiarmid(double statistic, std::optional<double> bound_B,
                   std::span<const std::size_t> sizes) {
  return std::exp(log_p_mcdiarmid(statistic, bound_B, sizes));
}

double phi2_threshold(double sigma2, std::size_t n1, std::size_t n2, double alpha) {
  const std::size_t sizes[2] = {n1, n2};
  return phiK_threshold(sigma2, sizes, alpha);
}

double phiK_threshold(double sigmaK2, std::span<const std::size_t> sizes, double alpha) {
  require_alpha(alpha);
  if (sizes.size() < 2) throw Error(ErrorCode::kTooFewGroups, "need K >= 2");
  if (sigmaK2 < 0.0) throw Error(ErrorCode::kInvalidArgument, "variance proxy must be >= 0");
  const double log_term = std::log(num_pairs(sizes.size()) / alpha);
  const double dev = max_over_pairs(
      sizes, [&](std::size_t a, std::size_t b) { return deviation_term(sigmaK2, a, b, log_term); });
  return dev + ksample_drift(sigmaK2, sizes);
}

double ksample_drift(double sigmaK2, std::span<const std::size_t> sizes) {
  if (sizes.size() < 2) throw Error(ErrorCode::kTooFewGroups, "need K >= 2");
  return max_over_pairs(sizes,
                        [&](std::size_t a, std::size_t b) { return drift_term(sigmaK2, a, b); });
}

double ksample_tail_bound(double t, std::span<const std::size_t> sizes, double sigmaK2) {
  if (sizes.size() < 2) throw Error(ErrorCode::kTooFewGroups, "need K >= 2");
  if (!(t > 0.0)) throw Error(ErrorCode::kInvalidArgument, "t must be positive");
  if (!(sigmaK2 > 0.0)) throw Error(ErrorCode::kZeroVariance, "variance proxy must be positive");
  const double rate = -max_over_pairs(sizes, [&](std::size_t a, std::size_t b) {
    const double g = pair_weight(a, b);
    return -static_cast<double>(a + b) * g * g * t * t / (2.0 * sigmaK2);
  });
  return num_pairs(sizes.size()) * std::exp(-rate);
}

double phiK_pvalue(double statistic, double sigmaK2, std::span<const std::size_t> sizes) {
  if (!(sigmaK2 > 0.0)) return statistic > 0.0 ? 0.0 : 1.0;
  const double t = statistic - ksample_drift(sigmaK2, sizes);
  if (!(t > 0.0)) return 1.0;
  return std::min(1.0, ksample_tail_bound(t, sizes, sigmaK2));
}

}  // namespace kmax
