#pragma once

// Average-type competitors: the DISCO between/within dispersion ratio and the
// weighted L2 distance between empirical characteristic functions (ECF).
//
// Each statistic has a direct form (double sums over the data) and a
// block-sum form over its own pairwise matrix, which is what the
// permutation engine uses.

#include <cstddef>

#include "kmax/core.hpp"
#include "kmax/kernels.hpp"
#include "kmax/statistics.hpp"

namespace kmax {

inline constexpr double kDefaultDiscoExponent = 1.0;
inline constexpr double kDefaultEcfScale = 1.5;

/// E_{kl,a} = 2/(n_k n_l) sum g(X_k, X_l) - 1/n_k^2 sum g(X_k, X_k)
///            - 1/n_l^2 sum g(X_l, X_l),  with g(x, y) = |x - y|^a.
double energy_distance_pair(const GroupedDataset& data, std::size_t k, std::size_t l,
                            double exponent = kDefaultDiscoExponent);

/// D = (S / (K - 1)) / (W / (N - K)).
double disco_statistic(const GroupedDataset& data, double exponent = kDefaultDiscoExponent);

double ecf_statistic(const GroupedDataset& data, double scale = kDefaultEcfScale);

/// Pairwise matrix g(Z_i, Z_j) = |Z_i - Z_j|^exponent.
GramMatrix disco_matrix(const GroupedDataset& data, double exponent = kDefaultDiscoExponent);
/// Pairwise matrix exp(-|Z_i - Z_j|^2 / (4 scale)).
GramMatrix ecf_matrix(const GroupedDataset& data, double scale = kDefaultEcfScale);

/// DISCO from block sums of disco_matrix. Returns +inf when the within
/// dispersion vanishes but the between dispersion does not, 0 if both vanish.
double disco_from_block_sums(const BlockSums& sums);
double ecf_from_block_sums(const BlockSums& sums);

}  // namespace kmax
