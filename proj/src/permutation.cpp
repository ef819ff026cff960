#include "kmax/permutation.hpp"

#include <algorithm>
#include <cmath>
#include <iostream>

#include "kmax/baselines.hpp"
#include "kmax/parallel.hpp"
#include "kmax/random.hpp"

namespace kmax {

double statistic_from_block_sums(StatisticKind kind, const BlockSums& sums) {
  switch (kind) {
    case StatisticKind::kMaxMmd: return max_mmd(sums).value;
    case StatisticKind::kWeightedMaxMmd: return weighted_max_mmd(sums);
    case StatisticKind::kDisco: return disco_from_block_sums(sums);
    case StatisticKind::kEcf: return ecf_from_block_sums(sums);
  }
  return 0.0;
}

double observed_statistic(const GramMatrix& gram, const GroupIndex& index, StatisticKind kind) {
  return statistic_from_block_sums(kind, block_sums(gram, index));
}

GramMatrix statistic_matrix(StatisticKind kind, const KernelSpec& kernel,
                            const GroupedDataset& data, double disco_exponent, double ecf_scale) {
  switch (kind) {
    case StatisticKind::kMaxMmd:
    case StatisticKind::kWeightedMaxMmd: return gram_matrix(kernel, data);
    case StatisticKind::kDisco: return disco_matrix(data, disco_exponent);
    case StatisticKind::kEcf: return ecf_matrix(data, ecf_scale);
  }
  return {};
}

std::optional<std::uint64_t> count_assignments(std::span<const std::size_t> sizes,
                                               std::uint64_t limit) {
  // Product of binomials C(m_k, n_k) with m_k the running total.
  std::uint64_t total = 1;
  std::size_t running = 0;
  for (std::size_t n : sizes) {
    for (std::size_t i = 1; i <= n; ++i) {
      ++running;
      // total * running / i stays integral at every step of C(running, i).
      const unsigned __int128 next = static_cast<unsigned __int128>(total) * running / i;
      if (next > limit) return std::nullopt;
      total = static_cast<std::uint64_t>(next);
    }
  }
  return total;
}

bool at_least_as_extreme(double permuted, double observed) {
  return permuted >= observed - 1e-12 * std::max(1.0, std::fabs(observed));
}

double permutation_pvalue_exact(const GramMatrix& gram, const GroupIndex& index,
                                StatisticKind kind) {
  const auto sizes = index.sizes();
  if (!count_assignments(sizes)) {
    throw Error(ErrorCode::kEnumerationTooLarge,
                "more than " + std::to_string(kMaxExactAssignments) + " group assignments");
  }
  std::vector<std::uint32_t> labels = index.labels();
  const double observed = statistic_from_block_sums(kind, block_sums(gram, labels, sizes));
  // Labels start sorted, so next_permutation visits every distinct assignment once.
  std::uint64_t hits = 0;
  std::uint64_t total = 0;
  do {
    const double v = statistic_from_block_sums(kind, block_sums(gram, labels, sizes));
    if (at_least_as_extreme(v, observed)) ++hits;
    ++total;
  } while (std::next_permutation(labels.begin(), labels.end()));
  return static_cast<double>(hits) / static_cast<double>(total);
}

std::vector<double> permuted_statistics(const GramMatrix& gram, const GroupIndex& index,
                                        std::size_t num_permutations, std::uint64_t seed,
                                        StatisticKind kind) {
  if (num_permutations == 0) {
    throw Error(ErrorCode::kInvalidArgument, "need at least one permutation");
  }
  if (index.total() != gram.size()) {
    throw Error(ErrorCode::kIndexOutOfRange, "group index does not match the Gram dimension");
  }
  const auto base = index.labels();
  const auto sizes = index.sizes();
  std::vector<double> out(num_permutations);
  parallel_for(num_permutations, [&](std::size_t r) {
    Rng rng = make_rng(seed, r);
    std::vector<std::uint32_t> labels = base;
    for (std::size_t i = labels.size(); i > 1; --i) {
      std::swap(labels[i - 1], labels[uniform_index(rng, i)]);
    }
    out[r] = statistic_from_block_sums(kind, block_sums(gram, labels, sizes));
  });
  return out;
}

double pvalue_from_permuted(double observed, std::span<const double> permuted) {
  std::size_t hits = 0;
  for (double v : permuted) {
    if (at_least_as_extreme(v, observed)) ++hits;
  }
  return static_cast<double>(1 + hits) / static_cast<double>(permuted.size() + 1);
}

double permutation_pvalue_mc(const GramMatrix& gram, const GroupIndex& index,
                             std::size_t num_permutations, std::uint64_t seed, StatisticKind kind) {
  const double observed = observed_statistic(gram, index, kind);
  const auto permuted = permuted_statistics(gram, index, num_permutations, seed, kind);
  return pvalue_from_permuted(observed, permuted);
}

double critical_value(double observed, std::span<const double> permuted, double alpha) {
  if (!(alpha > 0.0 && alpha <= 1.0)) {
    throw Error(ErrorCode::kInvalidArgument, "alpha must lie in (0, 1]");
  }
  std::vector<double> all(permuted.begin(), permuted.end());
  all.push_back(observed);
  std::sort(all.begin(), all.end());
  const double total = static_cast<double>(all.size());
  // all[i..] holds the values >= all[i] (ties resolved to their first index).
  for (std::size_t i = 0; i < all.size(); ++i) {
    if (i > 0 && all[i] == all[i - 1]) continue;
    if (static_cast<double>(all.size() - i) / total <= alpha) return all[i];
  }
  return all.back();
}

double permutation_critical_value(const GramMatrix& gram, const GroupIndex& index, double alpha,
                                  std::size_t num_permutations, std::uint64_t seed,
                                  StatisticKind kind) {
  if (static_cast<double>(num_permutations) * alpha < 1.0) {
    std::clog << "kmax: warning: M = " << num_permutations << " < 1/alpha; the critical value "
              << "collapses to the largest sampled statistic\n";
  }
  const double observed = observed_statistic(gram, index, kind);
  const auto permuted = permuted_statistics(gram, index, num_permutations, seed, kind);
  return critical_value(observed, permuted, alpha);
}

double permutation_pvalue(const GramMatrix& gram, const GroupIndex& index,
                          const PermutationPlan& plan) {
  if (plan.mode == PermutationPlan::Mode::kExact) {
    return permutation_pvalue_exact(gram, index, plan.statistic);
  }
  return permutation_pvalue_mc(gram, index, plan.num_permutations, plan.seed, plan.statistic);
}

}  // namespace kmax
