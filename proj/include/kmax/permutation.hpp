#pragma once

// Exact and Monte-Carlo permutation calibration for any statistic that is a
// function of Gram block sums. The kernel is never re-evaluated: a
// permutation only relabels observations before the block-sum pass.

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "kmax/core.hpp"
#include "kmax/kernels.hpp"
#include "kmax/statistics.hpp"

namespace kmax {

/// Largest number of distinct group assignments exact mode will enumerate.
inline constexpr std::uint64_t kMaxExactAssignments = 1'000'000;

struct PermutationPlan {
  enum class Mode { kExact, kMonteCarlo };
  Mode mode = Mode::kMonteCarlo;
  std::size_t num_permutations = 200;
  std::uint64_t seed = 0;
  StatisticKind statistic = StatisticKind::kMaxMmd;
};

/// Statistic value from block sums. For kDisco / kEcf the sums must come from
/// disco_matrix / ecf_matrix.
double statistic_from_block_sums(StatisticKind kind, const BlockSums& sums);

double observed_statistic(const GramMatrix& gram, const GroupIndex& index, StatisticKind kind);

/// The pairwise matrix a statistic is computed from: the kernel's Gram matrix
/// for the MMD statistics, disco_matrix / ecf_matrix for the baselines.
GramMatrix statistic_matrix(StatisticKind kind, const KernelSpec& kernel,
                            const GroupedDataset& data, double disco_exponent = 1.0,
                            double ecf_scale = 1.5);

/// N! / (n_1! ... n_K!), or nullopt when it exceeds `limit`.
std::optional<std::uint64_t> count_assignments(std::span<const std::size_t> sizes,
                                               std::uint64_t limit = kMaxExactAssignments);

/// Permuted statistic counts as "at least as extreme" when it is >= observed
/// up to a relative rounding tolerance of 1e-12.
bool at_least_as_extreme(double permuted, double observed);

/// Share of distinct group assignments whose statistic is >= the observed one.
double permutation_pvalue_exact(const GramMatrix& gram, const GroupIndex& index,
                                StatisticKind kind);

/// Statistics of M uniformly drawn permutations; replicate r uses the
/// generator stream (seed, r), so the output is independent of threading.
std::vector<double> permuted_statistics(const GramMatrix& gram, const GroupIndex& index,
                                        std::size_t num_permutations, std::uint64_t seed,
                                        StatisticKind kind);

/// (1 + #{permuted >= observed}) / (M + 1).
double permutation_pvalue_mc(const GramMatrix& gram, const GroupIndex& index,
                             std::size_t num_permutations, std::uint64_t seed, StatisticKind kind);
double pvalue_from_permuted(double observed, std::span<const double> permuted);

/// Smallest value t among {observed} U {permuted} with
/// #{values >= t} / (M + 1) <= alpha; the largest value when none qualifies.
double critical_value(double observed, std::span<const double> permuted, double alpha);
double permutation_critical_value(const GramMatrix& gram, const GroupIndex& index, double alpha,
                                  std::size_t num_permutations, std::uint64_t seed,
                                  StatisticKind kind);

/// Dispatches on plan.mode.
double permutation_pvalue(const GramMatrix& gram, const GroupIndex& index,
                          const PermutationPlan& plan);

}  // namespace kmax
