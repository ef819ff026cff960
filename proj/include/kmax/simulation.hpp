#pragma once

// Data generators, the sparse-alternative scenarios and the experiment
// harnesses (power curves, p-value bound comparison, tail-ratio probe and
// the Gumbel null check). Every harness is a deterministic function of its
// seed; replicate r always draws from derive_seed(seed, r).

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "kmax/core.hpp"
#include "kmax/kernels.hpp"

namespace kmax {

enum class LaplaceConstruction {
  /// Independent Laplace coordinates with the requested variance.
  kIndependentMarginals,
  /// Symmetric multivariate Laplace: mean + sqrt(W) * N(0, cov), W ~ Exp(1).
  kElliptical,
};

PointSet gen_mvn(std::size_t n, std::span<const double> mean, double cov_scale,
                 std::uint64_t seed);
PointSet gen_mv_laplace(std::size_t n, std::span<const double> mean, double cov_scale,
                        std::uint64_t seed,
                        LaplaceConstruction construction = LaplaceConstruction::kIndependentMarginals);
/// N(mu, sigma2) conditioned on [lo, hi], by rejection.
std::vector<double> gen_truncnorm(std::size_t n, double mu, double sigma2, double lo, double hi,
                                  std::uint64_t seed);

enum class ScenarioName {
  kNormalLocation,
  kNormalScale,
  kLaplaceLocation,
  kLaplaceScale,
  kNullUniformity,
};

std::string_view to_string(ScenarioName name);
ScenarioName parse_scenario(std::string_view name);

struct ScenarioSpec {
  ScenarioName name = ScenarioName::kNullUniformity;
  std::size_t K = 2;
  std::size_t n = 10;
  std::size_t d = 5;
  std::uint64_t seed = 0;
  LaplaceConstruction laplace = LaplaceConstruction::kIndependentMarginals;
};

/// Group 1 is drawn from the perturbed distribution, groups 2..K from the base.
GroupedDataset make_scenario(const ScenarioSpec& spec);

/// A statistic plus the kernel (or baseline parameter) it is computed with.
struct TestMethod {
  std::string name;
  StatisticKind statistic = StatisticKind::kMaxMmd;
  KernelSpec kernel = KernelSpec::gaussian_median();
  double disco_exponent = 1.0;
  double ecf_scale = 1.5;

  static TestMethod max_gaussian();
  static TestMethod max_energy();
  static TestMethod disco();
  static TestMethod ecf();
  static TestMethod by_name(std::string_view name);
};

struct PowerEstimate {
  std::string method;
  std::string scenario;
  std::size_t K = 0;
  std::size_t n = 0;
  std::size_t d = 0;
  double power = 0.0;
  double mc_se = 0.0;
  std::size_t reps = 0;
  std::uint64_t seed = 0;
};

/// Rejection frequency at level alpha of Monte-Carlo permutation tests. Each
/// replicate regenerates the data (and the median-heuristic bandwidth) and
/// runs every method on the same draw.
std::vector<PowerEstimate> estimate_power(const ScenarioSpec& spec,
                                          std::span<const TestMethod> methods,
                                          std::size_t num_permutations, double alpha,
                                          std::size_t reps, std::uint64_t seed);
PowerEstimate estimate_power(const ScenarioSpec& spec, const TestMethod& method,
                             std::size_t num_permutations, double alpha, std::size_t reps,
                             std::uint64_t seed);

struct BoundsConfig {
  double mu1 = 1.0;
  double mu2 = -1.0;
  double sigma2 = 1.0;
  double lo = -5.0;
  double hi = 5.0;
  std::size_t dim = 1;
  /// Kernel bound for McDiarmid; defaults to 10 (energy) or 100 (linear).
  std::optional<double> bound_B;
};

struct BoundsRow {
  std::size_t N = 0;
  std::size_t reps = 0;
  double bound_B = 0.0;
  double mean_sigma2 = 0.0;
  double mean_statistic = 0.0;
  double mean_p_bobkov = 0.0;
  double mean_p_mcdiarmid = 0.0;
  double mean_log_p_bobkov = 0.0;
  double mean_log_p_mcdiarmid = 0.0;
};

double default_bound(KernelFamily kernel);

/// Bobkov vs McDiarmid p-values on two truncated normals, per even N.
std::vector<BoundsRow> pvalue_comparison_experiment(std::span<const std::size_t> N_grid,
                                                    KernelFamily kernel, std::size_t reps,
                                                    std::uint64_t seed,
                                                    const BoundsConfig& config = {});

struct TailRatioRow {
  double x = 0.0;
  /// Null frequency of n1 n2 V^2_12 / N >= x.
  double empirical = 0.0;
  /// Monte-Carlo P(sum lambda_v xi_v^2 >= x) with lambda = (1, ..., 1).
  double reference = 0.0;
  double reference_se = 0.0;
  double ratio = 0.0;
};

/// Upper-tail probes at the chi-square(dof) quantiles of the given levels.
std::vector<double> chisq_quantile_grid(int dof, std::span<const double> levels);

/// Two groups of n uniform draws over m levels, chi-square kernel.
std::vector<TailRatioRow> tail_ratio_experiment(int m, std::size_t n,
                                                std::span<const double> x_grid,
                                                std::size_t reps, std::uint64_t seed,
                                                std::size_t nsim = 1'000'000);

struct GumbelNullResult {
  double rejection_rate = 0.0;
  double mc_se = 0.0;
  std::size_t reps = 0;
};

/// Null rejection frequency of the asymptotic Gumbel test: K groups of n
/// uniform draws over m levels, chi-square kernel.
GumbelNullResult gumbel_null_experiment(int m, std::size_t n, std::size_t K, std::size_t reps,
                                        double alpha, std::uint64_t seed);

}  // namespace kmax
