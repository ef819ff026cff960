#pragma once

// Permutation-free p-values and thresholds from concentration inequalities:
// Bobkov's inequality on slices of the discrete cube (conditional on the
// pooled sample) and McDiarmid's inequality for bounded kernels.

#include <cstddef>
#include <optional>
#include <span>

#include "kmax/core.hpp"
#include "kmax/kernels.hpp"

namespace kmax {

/// gamma_{k,l} = n_k n_l / (n_k + n_l)^2.
double pair_weight(std::size_t nk, std::size_t nl);

/// Mean of h~(Z_i, Z_j) over ordered pairs i != j.
double sigma_hat2(const GramMatrix& gram);

enum class SigmaKVariant {
  /// Sorted top averages over all N(N-1) ordered-pair values.
  kSortedTopMean,
  /// The cheaper max_{i<j} h~(Z_i, Z_j).
  kMaxPairwise,
};

/// The K-sample variance proxy: sort the N(N-1) ordered-pair h~ values in
/// descending order and return the largest mean of the top
/// (n_k + n_l)(n_k + n_l - 1) values over pairs k < l.
double sigma_K2(const GramMatrix& gram, const GroupIndex& index,
                SigmaKVariant variant = SigmaKVariant::kSortedTopMean);

/// log of the Bobkov p-value bound for the balanced two-sample statistic.
double log_p_bobkov(double statistic, double sigma2, std::span<const std::size_t> sizes);
double p_bobkov(double statistic, double sigma2, std::span<const std::size_t> sizes);

/// log of the McDiarmid p-value for a kernel bounded by B, balanced two samples.
double log_p_mcdiarmid(double statistic, std::optional<double> bound_B,
                       std::span<const std::size_t> sizes);
double p_mcdiarmid(double statistic, std::optional<double> bound_B,
                   std::span<const std::size_t> sizes);

/// Rejection threshold of the two-sample test phi_2.
double phi2_threshold(double sigma2, std::size_t n1, std::size_t n2, double alpha);

/// Rejection threshold of the K-sample test phi_K.
double phiK_threshold(double sigmaK2, std::span<const std::size_t> sizes, double alpha);

/// max over pairs of sqrt(sigmaK2 / (2 (n_k + n_l) gamma_kl)): the drift term
/// that the permuted statistic's tail is measured beyond.
double ksample_drift(double sigmaK2, std::span<const std::size_t> sizes);

/// C(K,2) exp(-min_pairs (n_k + n_l) gamma_kl^2 t^2 / (2 sigmaK2)).
double ksample_tail_bound(double t, std::span<const std::size_t> sizes, double sigmaK2);

/// Smallest alpha at which phi_K rejects: min(1, tail bound at V - drift).
double phiK_pvalue(double statistic, double sigmaK2, std::span<const std::size_t> sizes);

}  // namespace kmax
