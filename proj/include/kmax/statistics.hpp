#pragma once

// Pairwise MMD V-statistics and the max-type K-sample statistic. Everything
// is computed from the K x K matrix of Gram block sums, so re-evaluating a
// statistic under a relabelling costs one O(N^2) pass plus O(K^2).

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "kmax/core.hpp"
#include "kmax/kernels.hpp"

namespace kmax {

/// S[k][l] = sum over i in group k, j in group l of G[i][j].
class BlockSums {
 public:
  BlockSums() = default;
  BlockSums(std::vector<std::size_t> sizes, std::vector<double> sums);

  std::size_t num_groups() const noexcept { return sizes_.size(); }
  double operator()(std::size_t k, std::size_t l) const { return sums_[k * sizes_.size() + l]; }
  std::span<const std::size_t> sizes() const noexcept { return sizes_; }
  std::size_t total_size() const;

 private:
  std::vector<std::size_t> sizes_;
  std::vector<double> sums_;
};

/// Contiguous groups; each block is summed exactly, so reordering
/// observations within a group leaves the result bit-identical.
BlockSums block_sums(const GramMatrix& gram, const GroupIndex& index);

/// Block sums when observation i belongs to group labels[i]; `sizes` must
/// match the label counts. Accumulation order depends only on the partition,
/// so relabelling the groups permutes S exactly.
BlockSums block_sums(const GramMatrix& gram, std::span<const std::uint32_t> labels,
                     std::span<const std::size_t> sizes);

/// Chi-square kernel block sums from level counts: S[k][l] = sum_v c_kv c_lv / p_v.
/// Equal to block_sums(gram_matrix(chi_square(probs), data), ...) without the
/// O(N^2) Gram matrix.
BlockSums chisquare_block_sums(const GroupedDataset& data, std::span<const double> probs);
BlockSums chisquare_block_sums(std::span<const int> levels, std::span<const std::uint32_t> labels,
                               std::span<const std::size_t> sizes, std::span<const double> probs);

/// V^2_kl = S_kk/n_k^2 + S_ll/n_l^2 - 2 S_kl/(n_k n_l), clamped at zero.
double mmd_squared_pair(const BlockSums& sums, std::size_t k, std::size_t l);
/// The same quantity before clamping.
double mmd_squared_pair_raw(const BlockSums& sums, std::size_t k, std::size_t l);

struct MaxMmd {
  double value = 0.0;
  /// Lexicographically smallest maximising pair, 0-based, k < l.
  std::size_t k = 0;
  std::size_t l = 1;
};

MaxMmd max_mmd(const BlockSums& sums);
MaxMmd max_mmd(const GramMatrix& gram, const GroupIndex& index);

/// max over pairs of (n_k n_l / (n_k + n_l)) V^2_kl.
double weighted_max_mmd(const BlockSums& sums);
double weighted_max_mmd(const GramMatrix& gram, const GroupIndex& index);

/// Two-sample V (the square root of V^2) from the three double sums evaluated
/// term by term through kernel_eval, with no Gram matrix or block sums involved.
double mmd_bruteforce_oracle(const KernelSpec& spec, const PointSet& x, const PointSet& y);
double mmd_bruteforce_oracle(const KernelSpec& spec, std::span<const int> x, std::span<const int> y);

}  // namespace kmax
