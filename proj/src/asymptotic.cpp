#include "kmax/asymptotic.hpp"

#include <algorithm>
#include <cmath>
#include <functional>

#include "kmax/parallel.hpp"
#include "kmax/random.hpp"

namespace kmax {

EigenSpectrum spectrum_from_lambdas(std::vector<double> lambdas) {
  if (lambdas.empty()) throw Error(ErrorCode::kInvalidArgument, "empty spectrum");
  for (double v : lambdas) {
    if (!(v >= 0.0) || !std::isfinite(v)) {
      throw Error(ErrorCode::kInvalidArgument, "eigenvalues must be finite and >= 0");
    }
  }
  std::sort(lambdas.begin(), lambdas.end(), std::greater<>());
  const double top = lambdas.front();
  if (!(top > 0.0)) throw Error(ErrorCode::kAllZero, "all eigenvalues are zero");

  EigenSpectrum s;
  s.mu1 = 0;
  double log_kappa = 0.0;
  for (double v : lambdas) {
    if (top - v <= kMultiplicityTolerance * top) {
      ++s.mu1;
    } else {
      log_kappa -= 0.5 * std::log1p(-v / top);
    }
  }
  s.kappa = std::exp(log_kappa);
  s.lambdas = std::move(lambdas);
  return s;
}

EigenSpectrum spectrum_linear_gaussian(std::span<const double> diagonal) {
  if (diagonal.empty()) throw Error(ErrorCode::kInvalidArgument, "empty covariance diagonal");
  for (double v : diagonal) {
    if (!(v > 0.0)) throw Error(ErrorCode::kNonpositiveVariance, "variances must be > 0");
  }
  return spectrum_from_lambdas({diagonal.begin(), diagonal.end()});
}

EigenSpectrum spectrum_chisquare(std::span<const double> probs) {
  if (probs.size() < 2) throw Error(ErrorCode::kInvalidSimplex, "need m >= 2 levels");
  double total = 0.0;
  for (double p : probs) {
    if (!(p > 0.0)) throw Error(ErrorCode::kInvalidSimplex, "level probabilities must be > 0");
    total += p;
  }
  if (std::fabs(total - 1.0) > 1e-9) {
    throw Error(ErrorCode::kInvalidSimplex, "level probabilities must sum to 1");
  }
  return spectrum_from_lambdas(std::vector<double>(probs.size() - 1, 1.0));
}

namespace {

double gumbel_rate(const EigenSpectrum& s) {
  const double half = 0.5 * s.mu1;
  return std::exp2(half - 2.0) * s.kappa / std::tgamma(half);
}

}  // namespace

double gumbel_limit_cdf(double y, const EigenSpectrum& spectrum) {
  return std::exp(-gumbel_rate(spectrum) * std::exp(-0.5 * y));
}

double gumbel_limit_sf(double y, const EigenSpectrum& spectrum) {
  return -std::expm1(-gumbel_rate(spectrum) * std::exp(-0.5 * y));
}

double gumbel_centering(double stat_max2, std::size_t n, std::size_t K,
                        const EigenSpectrum& spectrum) {
  if (K < 3) throw Error(ErrorCode::kKTooSmall, "log log K needs K >= 3");
  const double logK = std::log(static_cast<double>(K));
  return static_cast<double>(n) / (2.0 * spectrum.lambda1()) * stat_max2 - 4.0 * logK -
         (spectrum.mu1 - 2) * std::log(logK);
}

double gumbel_asymptotic_pvalue(double stat_max2, std::size_t n, std::size_t K,
                                const EigenSpectrum& spectrum) {
  return gumbel_limit_sf(gumbel_centering(stat_max2, n, K, spectrum), spectrum);
}

double gumbel_asymptotic_pvalue(double stat_max2, std::span<const std::size_t> sizes,
                                const EigenSpectrum& spectrum) {
  if (sizes.empty()) throw Error(ErrorCode::kTooFewGroups, "no groups");
  for (std::size_t n : sizes) {
    if (n != sizes.front()) {
      throw Error(ErrorCode::kUnbalancedDesign, "Gumbel limit needs equal group sizes");
    }
  }
  return gumbel_asymptotic_pvalue(stat_max2, sizes.front(), sizes.size(), spectrum);
}

SurvivalEstimate weighted_chisq_survival_mc(std::span<const double> lambdas, double x,
                                            std::size_t nsim, std::uint64_t seed) {
  if (nsim == 0) throw Error(ErrorCode::kInvalidArgument, "nsim must be >= 1");
  SurvivalEstimate est;
  est.num_draws = nsim;
  if (x <= 0.0) {
    est.probability = 1.0;
    return est;
  }
  constexpr std::size_t kChunk = 1 << 16;
  const std::size_t chunks = (nsim + kChunk - 1) / kChunk;
  std::vector<std::size_t> hits(chunks, 0);
  parallel_for(chunks, [&](std::size_t c) {
    Rng rng = make_rng(seed, c);
    const std::size_t lo = c * kChunk;
    const std::size_t hi = std::min(nsim, lo + kChunk);
    std::size_t h = 0;
    for (std::size_t r = lo; r < hi; ++r) {
      double s = 0.0;
      for (double lam : lambdas) {
        const double z = standard_normal(rng);
        s += lam * z * z;
      }
      if (s >= x) ++h;
    }
    hits[c] = h;
  });
  std::size_t total = 0;
  for (std::size_t h : hits) total += h;
  const double p = static_cast<double>(total) / static_cast<double>(nsim);
  est.probability = p;
  est.standard_error = std::sqrt(p * (1.0 - p) / static_cast<double>(nsim));
  return est;
}

double zolotarev_tail_approx(double x, const EigenSpectrum& spectrum) {
  if (!(x > 0.0)) throw Error(ErrorCode::kInvalidArgument, "x must be positive");
  const double half = 0.5 * spectrum.mu1;
  const double u = x / (2.0 * spectrum.lambda1());
  return spectrum.kappa / std::tgamma(half) * std::pow(u, half - 1.0) * std::exp(-u);
}

}  // namespace kmax
