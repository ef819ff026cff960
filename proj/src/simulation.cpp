#include "kmax/simulation.hpp"

#include <cmath>

#include <boost/math/distributions/chi_squared.hpp>

#include "kmax/asymptotic.hpp"
#include "kmax/concentration.hpp"
#include "kmax/parallel.hpp"
#include "kmax/permutation.hpp"
#include "kmax/random.hpp"
#include "kmax/statistics.hpp"

namespace kmax {

PointSet gen_mvn(std::size_t n, std::span<const double> mean, double cov_scale,
                 std::uint64_t seed) {
  if (!(cov_scale > 0.0)) throw Error(ErrorCode::kInvalidArgument, "cov_scale must be > 0");
  const std::size_t d = mean.size();
  if (d == 0) throw Error(ErrorCode::kDimensionMismatch, "mean must have dimension >= 1");
  Rng rng(derive_seed(seed, 0));
  const double sd = std::sqrt(cov_scale);
  std::vector<double> v(n * d);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t k = 0; k < d; ++k) v[i * d + k] = mean[k] + sd * standard_normal(rng);
  }
  return PointSet(d, std::move(v));
}

PointSet gen_mv_laplace(std::size_t n, std::span<const double> mean, double cov_scale,
                        std::uint64_t seed, LaplaceConstruction construction) {
  if (!(cov_scale > 0.0)) throw Error(ErrorCode::kInvalidArgument, "cov_scale must be > 0");
  const std::size_t d = mean.size();
  if (d == 0) throw Error(ErrorCode::kDimensionMismatch, "mean must have dimension >= 1");
  Rng rng(derive_seed(seed, 0));
  std::vector<double> v(n * d);
  if (construction == LaplaceConstruction::kIndependentMarginals) {
    // Laplace(0, b) has variance 2 b^2.
    const double b = std::sqrt(cov_scale / 2.0);
    for (std::size_t i = 0; i < n * d; ++i) {
      const double e = standard_exponential(rng);
      v[i] = mean[i % d] + (uniform01(rng) < 0.5 ? -b * e : b * e);
    }
  } else {
    const double sd = std::sqrt(cov_scale);
    for (std::size_t i = 0; i < n; ++i) {
      const double w = std::sqrt(standard_exponential(rng));
      for (std::size_t k = 0; k < d; ++k) v[i * d + k] = mean[k] + w * sd * standard_normal(rng);
    }
  }
  return PointSet(d, std::move(v));
}

std::vector<double> gen_truncnorm(std::size_t n, double mu, double sigma2, double lo, double hi,
                                  std::uint64_t seed) {
  if (!(lo < hi)) throw Error(ErrorCode::kDegenerateSupport, "support must satisfy lo < hi");
  if (!(sigma2 > 0.0)) throw Error(ErrorCode::kInvalidArgument, "sigma2 must be > 0");
  const double sd = std::sqrt(sigma2);
  const double mass = 0.5 * (std::erfc(-(hi - mu) / (sd * M_SQRT2)) -
                             std::erfc(-(lo - mu) / (sd * M_SQRT2)));
  if (!(mass > 1e-9)) {
    throw Error(ErrorCode::kDegenerateSupport, "support carries negligible probability mass");
  }
  Rng rng(derive_seed(seed, 0));
  std::vector<double> out;
  out.reserve(n);
  while (out.size() < n) {
    const double x = mu + sd * standard_normal(rng);
    if (x >= lo && x <= hi) out.push_back(x);
  }
  return out;
}

std::string_view to_string(ScenarioName name) {
  switch (name) {
    case ScenarioName::kNormalLocation: return "normal_location";
    case ScenarioName::kNormalScale: return "normal_scale";
    case ScenarioName::kLaplaceLocation: return "laplace_location";
    case ScenarioName::kLaplaceScale: return "laplace_scale";
    case ScenarioName::kNullUniformity: return "null_uniformity";
  }
  return "unknown";
}

ScenarioName parse_scenario(std::string_view name) {
  if (name == "normal_location" || name == "a") return ScenarioName::kNormalLocation;
  if (name == "normal_scale" || name == "b") return ScenarioName::kNormalScale;
  if (name == "laplace_location" || name == "c") return ScenarioName::kLaplaceLocation;
  if (name == "laplace_scale" || name == "d") return ScenarioName::kLaplaceScale;
  if (name == "null_uniformity" || name == "null") return ScenarioName::kNullUniformity;
  throw Error(ErrorCode::kUnknownScenario, "unknown scenario '" + std::string(name) + "'");
}

GroupedDataset make_scenario(const ScenarioSpec& spec) {
  if (spec.K < 2 || spec.n < 2 || spec.d < 1) {
    throw Error(ErrorCode::kInvalidArgument, "scenario needs K >= 2, n >= 2, d >= 1");
  }
  struct Draw {
    bool laplace;
    double shift;
    double cov;
  };
  Draw first{false, 0.0, 1.0};
  Draw rest{false, 0.0, 1.0};
  switch (spec.name) {
    case ScenarioName::kNormalLocation: first.shift = 1.0; break;
    case ScenarioName::kNormalScale: first.cov = 3.0; break;
    case ScenarioName::kLaplaceLocation:
      first = {true, 1.2, 1.0};
      rest.laplace = true;
      break;
    case ScenarioName::kLaplaceScale:
      first = {true, 0.0, 3.0};
      rest.laplace = true;
      break;
    case ScenarioName::kNullUniformity: break;
  }
  std::vector<PointSet> groups;
  groups.reserve(spec.K);
  for (std::size_t k = 0; k < spec.K; ++k) {
    const Draw& draw = k == 0 ? first : rest;
    const std::vector<double> mean(spec.d, draw.shift);
    const std::uint64_t s = derive_seed(spec.seed, k);
    groups.push_back(draw.laplace ? gen_mv_laplace(spec.n, mean, draw.cov, s, spec.laplace)
                                  : gen_mvn(spec.n, mean, draw.cov, s));
  }
  return GroupedDataset::from_groups(groups);
}

TestMethod TestMethod::max_gaussian() {
  return {"MaxGau", StatisticKind::kMaxMmd, KernelSpec::gaussian_median(), 1.0, 1.5};
}

TestMethod TestMethod::max_energy() {
  return {"MaxEng", StatisticKind::kMaxMmd, KernelSpec::energy_distance(), 1.0, 1.5};
}

TestMethod TestMethod::disco() {
  return {"DISCO", StatisticKind::kDisco, KernelSpec::energy_distance(), 1.0, 1.5};
}

TestMethod TestMethod::ecf() {
  return {"ECF", StatisticKind::kEcf, KernelSpec::gaussian_median(), 1.0, 1.5};
}

TestMethod TestMethod::by_name(std::string_view name) {
  if (name == "MaxGau") return max_gaussian();
  if (name == "MaxEng") return max_energy();
  if (name == "DISCO") return disco();
  if (name == "ECF") return ecf();
  throw Error(ErrorCode::kInvalidArgument, "unknown method '" + std::string(name) + "'");
}

std::vector<PowerEstimate> estimate_power(const ScenarioSpec& spec,
                                          std::span<const TestMethod> methods,
                                          std::size_t num_permutations, double alpha,
                                          std::size_t reps, std::uint64_t seed) {
  if (reps == 0) throw Error(ErrorCode::kInvalidArgument, "reps must be >= 1");
  const std::size_t nm = methods.size();
  std::vector<char> reject(reps * nm, 0);
  parallel_for(reps, [&](std::size_t r) {
    ScenarioSpec rep = spec;
    rep.seed = derive_seed(seed, r);
    const GroupedDataset data = make_scenario(rep);
    for (std::size_t m = 0; m < nm; ++m) {
      const TestMethod& method = methods[m];
      const GramMatrix g = statistic_matrix(method.statistic, method.kernel, data,
                                            method.disco_exponent, method.ecf_scale);
      const double p = permutation_pvalue_mc(g, data.index(), num_permutations,
                                             derive_seed(rep.seed, 1000 + m), method.statistic);
      reject[r * nm + m] = p <= alpha;
    }
  });
  std::vector<PowerEstimate> out;
  for (std::size_t m = 0; m < nm; ++m) {
    std::size_t hits = 0;
    for (std::size_t r = 0; r < reps; ++r) hits += static_cast<std::size_t>(reject[r * nm + m]);
    PowerEstimate e;
    e.method = methods[m].name;
    e.scenario = std::string(to_string(spec.name));
    e.K = spec.K;
    e.n = spec.n;
    e.d = spec.d;
    e.reps = reps;
    e.seed = seed;
    e.power = static_cast<double>(hits) / static_cast<double>(reps);
    e.mc_se = std::sqrt(e.power * (1.0 - e.power) / static_cast<double>(reps));
    out.push_back(std::move(e));
  }
  return out;
}

PowerEstimate estimate_power(const ScenarioSpec& spec, const TestMethod& method,
                             std::size_t num_permutations, double alpha, std::size_t reps,
                             std::uint64_t seed) {
  return estimate_power(spec, std::span<const TestMethod>(&method, 1), num_permutations, alpha,
                        reps, seed)
      .front();
}

double default_bound(KernelFamily kernel) {
  switch (kernel) {
    case KernelFamily::kEnergyDistance: return 10.0;
    case KernelFamily::kLinear: return 100.0;
    default: break;
  }
  throw Error(ErrorCode::kInvalidArgument, "no default bound for this kernel");
}

std::vector<BoundsRow> pvalue_comparison_experiment(std::span<const std::size_t> N_grid,
                                                    KernelFamily kernel, std::size_t reps,
                                                    std::uint64_t seed,
                                                    const BoundsConfig& config) {
  if (kernel != KernelFamily::kEnergyDistance && kernel != KernelFamily::kLinear) {
    throw Error(ErrorCode::kInvalidArgument, "bounds experiment uses the energy or linear kernel");
  }
  if (reps == 0) throw Error(ErrorCode::kInvalidArgument, "reps must be >= 1");
  const double B = config.bound_B.value_or(default_bound(kernel));
  const KernelSpec spec =
      kernel == KernelFamily::kLinear ? KernelSpec::linear() : KernelSpec::energy_distance();
  std::vector<BoundsRow> rows;
  for (std::size_t gi = 0; gi < N_grid.size(); ++gi) {
    const std::size_t N = N_grid[gi];
    if (N < 4 || N % 2 != 0) throw Error(ErrorCode::kInvalidArgument, "N must be even and >= 4");
    const std::size_t half = N / 2;
    const std::size_t sizes[2] = {half, half};
    struct Rep {
      double sigma2, stat, lpb, lpm;
    };
    std::vector<Rep> out(reps);
    parallel_for(reps, [&](std::size_t r) {
      const std::uint64_t s = derive_seed(derive_seed(seed, N), r);
      const std::size_t d = config.dim;
      auto x = gen_truncnorm(half * d, config.mu1, config.sigma2, config.lo, config.hi,
                             derive_seed(s, 1));
      auto y = gen_truncnorm(half * d, config.mu2, config.sigma2, config.lo, config.hi,
                             derive_seed(s, 2));
      x.insert(x.end(), y.begin(), y.end());
      const auto data = GroupedDataset::continuous(PointSet(d, std::move(x)), sizes);
      const GramMatrix g = gram_matrix(spec, data);
      const double stat = max_mmd(g, data.index()).value;
      const double s2 = sigma_hat2(g);
      out[r] = {s2, stat, log_p_bobkov(stat, s2, sizes), log_p_mcdiarmid(stat, B, sizes)};
    });
    BoundsRow row;
    row.N = N;
    row.reps = reps;
    row.bound_B = B;
    for (const Rep& o : out) {
      row.mean_sigma2 += o.sigma2;
      row.mean_statistic += o.stat;
      row.mean_log_p_bobkov += o.lpb;
      row.mean_log_p_mcdiarmid += o.lpm;
      row.mean_p_bobkov += std::exp(o.lpb);
      row.mean_p_mcdiarmid += std::exp(o.lpm);
    }
    const double R = static_cast<double>(reps);
    row.mean_sigma2 /= R;
    row.mean_statistic /= R;
    row.mean_log_p_bobkov /= R;
    row.mean_log_p_mcdiarmid /= R;
    row.mean_p_bobkov /= R;
    row.mean_p_mcdiarmid /= R;
    rows.push_back(row);
  }
  return rows;
}

namespace {

std::vector<int> uniform_levels(std::size_t count, int m, Rng& rng) {
  std::vector<int> v(count);
  for (auto& x : v) x = 1 + static_cast<int>(uniform_index(rng, static_cast<std::uint64_t>(m)));
  return v;
}

}  // namespace

std::vector<double> chisq_quantile_grid(int dof, std::span<const double> levels) {
  if (dof < 1) throw Error(ErrorCode::kInvalidArgument, "degrees of freedom must be >= 1");
  const boost::math::chi_squared dist(dof);
  std::vector<double> out;
  out.reserve(levels.size());
  for (double q : levels) {
    if (!(q > 0.0 && q < 1.0)) throw Error(ErrorCode::kInvalidArgument, "quantile level outside (0,1)");
    out.push_back(boost::math::quantile(dist, q));
  }
  return out;
}

std::vector<TailRatioRow> tail_ratio_experiment(int m, std::size_t n,
                                                std::span<const double> x_grid,
                                                std::size_t reps, std::uint64_t seed,
                                                std::size_t nsim) {
  if (m < 2) throw Error(ErrorCode::kInvalidArgument, "need m >= 2 levels");
  if (n < 1 || reps == 0) throw Error(ErrorCode::kInvalidArgument, "need n >= 1 and reps >= 1");
  const std::vector<double> probs(static_cast<std::size_t>(m), 1.0 / m);
  const std::vector<std::size_t> sizes = {n, n};
  const auto labels = GroupIndex::from_sizes(sizes).labels();
  std::vector<double> scaled(reps);
  parallel_for(reps, [&](std::size_t r) {
    Rng rng = make_rng(seed, r);
    const auto levels = uniform_levels(2 * n, m, rng);
    const BlockSums s = chisquare_block_sums(levels, labels, sizes, probs);
    // n1 n2 / N = n / 2 for two groups of n.
    scaled[r] = 0.5 * static_cast<double>(n) * mmd_squared_pair(s, 0, 1);
  });
  const std::vector<double> lambdas(static_cast<std::size_t>(m - 1), 1.0);
  std::vector<TailRatioRow> rows;
  for (std::size_t xi = 0; xi < x_grid.size(); ++xi) {
    TailRatioRow row;
    row.x = x_grid[xi];
    std::size_t hits = 0;
    for (double t : scaled) hits += t >= row.x ? 1 : 0;
    row.empirical = static_cast<double>(hits) / static_cast<double>(reps);
    const auto ref = weighted_chisq_survival_mc(lambdas, row.x, nsim,
                                                derive_seed(seed, 0xC0FFEEULL + xi));
    row.reference = ref.probability;
    row.reference_se = ref.standard_error;
    row.ratio = row.reference > 0.0 ? row.empirical / row.reference : 0.0;
    rows.push_back(row);
  }
  return rows;
}

GumbelNullResult gumbel_null_experiment(int m, std::size_t n, std::size_t K, std::size_t reps,
                                        double alpha, std::uint64_t seed) {
  if (m < 2) throw Error(ErrorCode::kInvalidArgument, "need m >= 2 levels");
  if (reps == 0) throw Error(ErrorCode::kInvalidArgument, "reps must be >= 1");
  const std::vector<double> probs(static_cast<std::size_t>(m), 1.0 / m);
  const EigenSpectrum spectrum = spectrum_chisquare(probs);
  const std::vector<std::size_t> sizes(K, n);
  const auto labels = GroupIndex::from_sizes(sizes).labels();
  std::vector<char> reject(reps, 0);
  parallel_for(reps, [&](std::size_t r) {
    Rng rng = make_rng(seed, r);
    const auto levels = uniform_levels(K * n, m, rng);
    const BlockSums s = chisquare_block_sums(levels, labels, sizes, probs);
    const double v = max_mmd(s).value;
    reject[r] = gumbel_asymptotic_pvalue(v * v, sizes, spectrum) <= alpha;
  });
  GumbelNullResult out;
  out.reps = reps;
  std::size_t hits = 0;
  for (char c : reject) hits += static_cast<std::size_t>(c);
  out.rejection_rate = static_cast<double>(hits) / static_cast<double>(reps);
  out.mc_se = std::sqrt(out.rejection_rate * (1.0 - out.rejection_rate) / static_cast<double>(reps));
  return out;
}

}  // namespace kmax
