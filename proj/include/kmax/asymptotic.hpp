#pragma once

// Extreme-value asymptotics of the max-type statistic under the null and the
// weighted chi-square tail objects it is built from.

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "kmax/core.hpp"

namespace kmax {

/// Relative tolerance for treating an eigenvalue as equal to lambda_1.
inline constexpr double kMultiplicityTolerance = 1e-12;

struct EigenSpectrum {
  /// Descending, truncated to finitely many terms; lambdas[0] > 0.
  std::vector<double> lambdas;
  /// Multiplicity of the largest eigenvalue.
  int mu1 = 1;
  /// prod over v > mu1 of (1 - lambda_v / lambda_1)^(-1/2).
  double kappa = 1.0;

  double lambda1() const { return lambdas.front(); }
};

EigenSpectrum spectrum_from_lambdas(std::vector<double> lambdas);

/// Centered Gaussian with diagonal covariance under the linear kernel: the
/// eigenvalues are the diagonal entries.
EigenSpectrum spectrum_linear_gaussian(std::span<const double> diagonal);

/// Chi-square kernel on m levels: m - 1 unit eigenvalues whatever the probabilities.
EigenSpectrum spectrum_chisquare(std::span<const double> probs);

/// exp{-(2^(mu1/2 - 2) kappa / Gamma(mu1/2)) exp(-y/2)}.
double gumbel_limit_cdf(double y, const EigenSpectrum& spectrum);
/// 1 - gumbel_limit_cdf, computed without cancellation.
double gumbel_limit_sf(double y, const EigenSpectrum& spectrum);

/// y = (n / (2 lambda_1)) V^2_max - 4 log K - (mu1 - 2) log log K.
double gumbel_centering(double stat_max2, std::size_t n, std::size_t K,
                        const EigenSpectrum& spectrum);

/// Asymptotic p-value of the squared max statistic for a balanced design.
double gumbel_asymptotic_pvalue(double stat_max2, std::span<const std::size_t> sizes,
                                const EigenSpectrum& spectrum);
double gumbel_asymptotic_pvalue(double stat_max2, std::size_t n, std::size_t K,
                                const EigenSpectrum& spectrum);

struct SurvivalEstimate {
  double probability = 0.0;
  double standard_error = 0.0;
  std::size_t num_draws = 0;
};

/// Monte-Carlo estimate of P(sum_v lambda_v xi_v^2 >= x), xi_v iid N(0,1).
SurvivalEstimate weighted_chisq_survival_mc(std::span<const double> lambdas, double x,
                                            std::size_t nsim, std::uint64_t seed);

/// Tail approximation (kappa / Gamma(mu1/2)) (x / (2 lambda_1))^(mu1/2 - 1) exp(-x / (2 lambda_1)).
double zolotarev_tail_approx(double x, const EigenSpectrum& spectrum);

}  // namespace kmax
