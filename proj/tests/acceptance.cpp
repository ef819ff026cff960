// Acceptance suite: one PASS/FAIL line per criterion; exit status 1 if any fail.
// Usage: kmax_acceptance <path-to-kmax-cli>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <functional>
#include <random>
#include <sstream>
#include <string>
#include <sys/wait.h>
#include <vector>

#include "kmax/asymptotic.hpp"
#include "kmax/baselines.hpp"
#include "kmax/concentration.hpp"
#include "kmax/permutation.hpp"
#include "kmax/simulation.hpp"
#include "kmax/statistics.hpp"
#include "test_util.hpp"

namespace {

using namespace kmax;
using kmax::testing::Sample;

struct Outcome {
  bool pass = false;
  std::string detail;
};

bool rel_within(double a, double b, double tol) {
  return std::fabs(a - b) <= tol * std::max(std::fabs(a), std::fabs(b));
}

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

// Random groups with a group-specific shift so pairwise discrepancies are not tiny.
std::vector<Sample> random_groups(std::mt19937_64& rng, std::size_t K, std::size_t max_n, std::size_t d) {
  std::uniform_int_distribution<std::size_t> n_dist(2, max_n);
  std::uniform_real_distribution<double> shift(-1.0, 1.0), scale(0.5, 2.0);
  std::vector<Sample> groups;
  for (std::size_t k = 0; k < K; ++k) groups.push_back(testing::random_sample(rng, n_dist(rng), d, shift(rng), scale(rng)));
  return groups;
}

Outcome criterion1() {
  std::mt19937_64 rng(101);
  const KernelFamily families[] = {KernelFamily::kGaussian, KernelFamily::kEnergyDistance, KernelFamily::kLinear,
                                   KernelFamily::kChiSquare};
  double worst = 0.0;
  std::size_t pairs = 0;
  for (int inst = 0; inst < 100; ++inst) {
    const KernelFamily fam = families[inst % 4];
    std::uniform_int_distribution<std::size_t> K_dist(2, 4), d_dist(1, 5);
    const std::size_t K = K_dist(rng);
    // mmd_bruteforce_oracle returns V, the others V^2.
    auto check = [&](double got, double want, double lib_v) {
      const double lib = lib_v * lib_v;
      worst = std::max({worst, std::fabs(got - want) / std::max(std::fabs(got), std::fabs(want)),
                        std::fabs(got - lib) / std::max(std::fabs(got), std::fabs(lib))});
      ++pairs;
    };
    if (fam == KernelFamily::kChiSquare) {
      std::uniform_int_distribution<int> m_dist(2, 6);
      const int m = m_dist(rng);
      std::vector<double> probs(static_cast<std::size_t>(m));
      std::exponential_distribution<double> e(1.0);
      double tot = 0;
      for (auto& p : probs) tot += (p = e(rng) + 0.05);
      for (auto& p : probs) p /= tot;
      std::vector<std::vector<int>> groups(K);
      std::vector<int> pooled;
      std::vector<std::size_t> sizes;
      std::uniform_int_distribution<std::size_t> n_dist(2, 20);
      for (std::size_t k = 0; k < K; ++k) {
        // Skew each group towards a different level.
        std::vector<double> w(probs.size(), 1.0);
        w[k % probs.size()] = 4.0;
        std::discrete_distribution<int> lv(w.begin(), w.end());
        groups[k].resize(n_dist(rng));
        for (auto& v : groups[k]) v = lv(rng) + 1;
        pooled.insert(pooled.end(), groups[k].begin(), groups[k].end());
        sizes.push_back(groups[k].size());
      }
      const auto ds = GroupedDataset::discrete(pooled, m, sizes);
      const auto spec = KernelSpec::chi_square(probs);
      const auto sums = block_sums(gram_matrix(spec, ds), ds.index());
      for (std::size_t k = 0; k < K; ++k)
        for (std::size_t l = k + 1; l < K; ++l) {
          double xx = 0, yy = 0, xy = 0;
          auto h = [&](int a, int b) { return a == b ? 1.0 / probs[static_cast<std::size_t>(a - 1)] : 0.0; };
          for (int a : groups[k])
            for (int b : groups[k]) xx += h(a, b);
          for (int a : groups[l])
            for (int b : groups[l]) yy += h(a, b);
          for (int a : groups[k])
            for (int b : groups[l]) xy += h(a, b);
          const double nk = groups[k].size(), nl = groups[l].size();
          const double want = xx / (nk * nk) + yy / (nl * nl) - 2 * xy / (nk * nl);
          check(mmd_squared_pair_raw(sums, k, l), want, mmd_bruteforce_oracle(spec, groups[k], groups[l]));
        }
      continue;
    }
    const auto groups = random_groups(rng, K, 20, d_dist(rng));
    const auto ds = testing::to_dataset(groups);
    KernelSpec spec = fam == KernelFamily::kGaussian ? KernelSpec::gaussian_median()
                      : fam == KernelFamily::kEnergyDistance ? KernelSpec::energy_distance()
                                                             : KernelSpec::linear();
    const auto gram = gram_matrix(spec, ds);
    spec = *gram.kernel();
    const double sigma = spec.bandwidth.value_or(0.0);
    const auto sums = block_sums(gram, ds.index());
    for (std::size_t k = 0; k < K; ++k)
      for (std::size_t l = k + 1; l < K; ++l) {
        const double want = testing::ref_mmd2(groups[k], groups[l], [&](const auto& a, const auto& b) {
          return testing::ref_kernel(fam, sigma, a, b);
        });
        check(mmd_squared_pair_raw(sums, k, l), want,
              mmd_bruteforce_oracle(spec, testing::to_points(groups[k]), testing::to_points(groups[l])));
      }
  }
  return {worst <= 1e-9, fmt("%zu pairs over 100 instances, max rel err %.3g (tol 1e-9)", pairs, worst)};
}

Outcome criterion2() {
  std::mt19937_64 rng(202);
  double worst = 0.0;
  for (int inst = 0; inst < 100; ++inst) {
    std::uniform_int_distribution<std::size_t> d_dist(1, 5);
    const auto groups = random_groups(rng, 2, 20, d_dist(rng));
    const auto ds = testing::to_dataset(groups);
    const double v2 = mmd_squared_pair_raw(block_sums(gram_matrix(KernelSpec::energy_distance(), ds), ds.index()), 0, 1);
    const double e = energy_distance_pair(ds, 0, 1, 1.0);
    worst = std::max(worst, std::fabs(2 * v2 - e) / std::max(std::fabs(2 * v2), std::fabs(e)));
  }
  return {worst <= 1e-9, fmt("max rel err %.3g over 100 instances (tol 1e-9)", worst)};
}

Outcome criterion3() {
  const auto three = GroupedDataset::continuous(PointSet(1, {0.0, 1.0, 2.0}), std::vector<std::size_t>{1, 1, 1});
  const double hand = sigma_K2(gram_matrix(KernelSpec::linear(), three), three.index());
  std::mt19937_64 rng(303);
  int equal = 0;
  for (int inst = 0; inst < 50; ++inst) {
    std::uniform_int_distribution<std::size_t> d_dist(1, 5);
    const auto ds = testing::to_dataset(random_groups(rng, 2, 20, d_dist(rng)));
    const KernelSpec spec = inst % 3 == 0   ? KernelSpec::gaussian_median()
                            : inst % 3 == 1 ? KernelSpec::energy_distance()
                                            : KernelSpec::linear();
    const auto gram = gram_matrix(spec, ds);
    equal += sigma_K2(gram, ds.index()) == sigma_hat2(gram) ? 1 : 0;
  }
  return {hand == 4.0 && equal == 50, fmt("3-group example = %.17g; exact K=2 equality on %d/50", hand, equal)};
}

Outcome criterion4() {
  const ScenarioSpec spec{ScenarioName::kNullUniformity, 5, 10, 5, 0};
  const auto est = estimate_power(spec, TestMethod::max_gaussian(), 200, 0.05, 500, 404);
  const double bound = 0.05 + 2 * std::sqrt(0.05 * 0.95 / 500);
  return {est.power <= bound, fmt("rejection rate %.4f (SE %.4f), bound %.4f", est.power, est.mc_se, bound)};
}

Outcome criterion5() {
  std::mt19937_64 rng(505);
  int ok = 0;
  double worst_gap = -1.0;
  for (int inst = 0; inst < 50; ++inst) {
    const std::size_t n = 2 + inst % 3;
    std::uniform_int_distribution<std::size_t> d_dist(1, 3);
    const std::size_t d = d_dist(rng);
    const std::vector<Sample> groups = {testing::random_sample(rng, n, d), testing::random_sample(rng, n, d, 0.7)};
    const auto ds = testing::to_dataset(groups);
    const KernelSpec spec = inst % 3 == 0   ? KernelSpec::gaussian_median()
                            : inst % 3 == 1 ? KernelSpec::energy_distance()
                                            : KernelSpec::linear();
    const auto gram = gram_matrix(spec, ds);
    const double p_perm = permutation_pvalue_exact(gram, ds.index(), StatisticKind::kMaxMmd);
    const double p_bob = p_bobkov(max_mmd(gram, ds.index()).value, sigma_hat2(gram), ds.group_sizes());
    ok += p_perm <= p_bob ? 1 : 0;
    worst_gap = std::max(worst_gap, p_perm - p_bob);
  }
  return {ok == 50, fmt("p_perm <= p_bobkov on %d/50 (max p_perm - p_bobkov %.4f)", ok, worst_gap)};
}

Outcome criterion6() {
  std::vector<std::size_t> grid;
  for (std::size_t N = 100; N <= 1000; N += 100) grid.push_back(N);
  const auto energy = pvalue_comparison_experiment(grid, KernelFamily::kEnergyDistance, 200, 606);
  const auto linear = pvalue_comparison_experiment(grid, KernelFamily::kLinear, 200, 607);
  bool pass = true;
  double e_lo = 1e300, e_hi = -1e300, l_lo = 1e300, l_hi = -1e300, e_all = 0, l_all = 0;
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const auto& e = energy[i];
    const auto& l = linear[i];
    e_lo = std::min(e_lo, e.mean_sigma2), e_hi = std::max(e_hi, e.mean_sigma2);
    l_lo = std::min(l_lo, l.mean_sigma2), l_hi = std::max(l_hi, l.mean_sigma2);
    e_all += e.mean_sigma2 / grid.size();
    l_all += l.mean_sigma2 / grid.size();
    pass = pass && e.mean_sigma2 >= 1.45 && e.mean_sigma2 <= 1.80 && l.mean_sigma2 >= 3.6 && l.mean_sigma2 <= 4.4;
    pass = pass && e.bound_B == 10.0 && l.bound_B == 100.0;
    pass = pass && e.mean_log_p_bobkov < e.mean_log_p_mcdiarmid && l.mean_log_p_bobkov < l.mean_log_p_mcdiarmid;
  }
  return {pass, fmt("energy sigma2 %.4f [%.4f, %.4f]; linear sigma2 %.4f [%.4f, %.4f]; "
                    "log p_bobkov < log p_mcdiarmid at every N checked",
                    e_all, e_lo, e_hi, l_all, l_lo, l_hi)};
}

Outcome criterion7() {
  const std::vector<TestMethod> methods = {TestMethod::max_gaussian(), TestMethod::max_energy(), TestMethod::disco(),
                                           TestMethod::ecf()};
  const ScenarioName scenarios[] = {ScenarioName::kNormalLocation, ScenarioName::kNormalScale,
                                    ScenarioName::kLaplaceLocation, ScenarioName::kLaplaceScale};
  const std::size_t Ks[] = {2, 20, 40};
  bool pass = true;
  std::ostringstream detail;
  for (auto s : scenarios) {
    double power[3][4];
    for (int ki = 0; ki < 3; ++ki) {
      const ScenarioSpec spec{s, Ks[ki], 10, 5, 0};
      const auto est = estimate_power(spec, methods, 200, 0.05, 200, 707 + ki);
      for (int m = 0; m < 4; ++m) power[ki][m] = est[static_cast<std::size_t>(m)].power;
    }
    const bool location = s == ScenarioName::kNormalLocation || s == ScenarioName::kLaplaceLocation;
    for (int ki = 0; ki < 3; ++ki) {
      if (location && (power[ki][0] < 0.85 || power[ki][1] < 0.85)) pass = false;
      if (ki > 0 && (power[ki][2] > power[ki - 1][2] + 0.05 || power[ki][3] > power[ki - 1][3] + 0.05)) pass = false;
    }
    if (!(power[2][2] < power[2][1] && power[2][3] < power[2][1])) pass = false;
    detail << "\n    " << to_string(s) << ":";
    for (int ki = 0; ki < 3; ++ki)
      detail << fmt(" K=%zu[Gau %.3f Eng %.3f DISCO %.3f ECF %.3f]", Ks[ki], power[ki][0], power[ki][1], power[ki][2],
                    power[ki][3]);
  }
  return {pass, detail.str()};
}

Outcome criterion8() {
  const double c1 = gumbel_limit_cdf(0.0, spectrum_from_lambdas({1.0, 0.0}));
  const double c2 = gumbel_limit_cdf(0.0, spectrum_from_lambdas({1.0, 1.0}));
  const bool spots = std::fabs(c1 - 0.81916) < 5e-6 && std::fabs(c2 - 0.60653) < 5e-6;
  const auto sim = gumbel_null_experiment(2, 500, 50, 300, 0.05, 808);
  const bool rate = sim.rejection_rate >= 0.01 && sim.rejection_rate <= 0.12;
  return {spots && rate, fmt("cdf(mu1=1) %.5f, cdf(mu1=2) %.5f; null rejection %.4f (SE %.4f)", c1, c2,
                             sim.rejection_rate, sim.mc_se)};
}

Outcome criterion9() {
  const std::vector<double> levels = {0.5, 0.75, 0.9, 0.95, 0.99};
  const auto xs = chisq_quantile_grid(1, levels);
  const auto at500 = tail_ratio_experiment(2, 500, xs, 10000, 909);
  const auto at100 = tail_ratio_experiment(2, 100, xs, 10000, 909);
  const double r90 = at500[2].ratio;
  double dev500 = 0, dev100 = 0;
  std::ostringstream ratios;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    dev500 += std::fabs(std::log(at500[i].ratio)) / xs.size();
    dev100 += std::fabs(std::log(at100[i].ratio)) / xs.size();
    ratios << fmt(" q%.2f: %.3f/%.3f", levels[i], at100[i].ratio, at500[i].ratio);
  }
  const bool pass = r90 >= 0.8 && r90 <= 1.25 && dev500 < dev100;
  return {pass, fmt("ratio at q0.90 (n=500) %.4f; mean |log ratio| n=100 %.4f vs n=500 %.4f; n=100/n=500",
                    r90, dev100, dev500) + ratios.str()};
}

struct CliRun {
  int status = -1;
  std::string out;
};

CliRun run(const std::string& cmd) {
  CliRun r;
  FILE* pipe = popen(cmd.c_str(), "r");
  if (!pipe) return r;
  char buf[4096];
  std::size_t n;
  while ((n = fread(buf, 1, sizeof buf, pipe)) > 0) r.out.append(buf, n);
  const int st = pclose(pipe);
  r.status = WIFEXITED(st) ? WEXITSTATUS(st) : -1;
  return r;
}

Outcome criterion10(const std::string& cli) {
  const std::vector<std::string> commands = {
      "test --scenario a --K 4 --n 8 --d 3 --M 200 --seed 11",
      "test --scenario laplace_scale --K 3 --n 10 --statistic weighted --M 100 --seed 12 --format csv",
      "test --scenario b --K 5 --kernel energy --method phiK --seed 13",
      "test --scenario null --K 2 --n 6 --kernel linear --method bobkov",
      "power --scenario a,b --K 2,5 --reps 40 --M 50 --seed 14",
      "bounds --kernel energy --N 40,80 --reps 20 --seed 15",
      "tailratio --levels 3 --n 60 --reps 500 --nsim 20000 --seed 16",
      "gumbel --simulate --levels 2 --n 100 --K 10 --reps 30 --seed 17",
  };
  int identical = 0;
  std::string failures;
  for (const auto& c : commands) {
    const auto a = run("KMAX_THREADS=1 " + cli + " " + c + " 2>&1");
    const auto b = run("KMAX_THREADS=1 " + cli + " " + c + " 2>&1");
    const auto t = run("KMAX_THREADS=4 " + cli + " " + c + " 2>&1");
    const auto z = run("KMAX_THREADS=0 " + cli + " " + c + " 2>&1");
    const bool same = a.status == 0 && b.status == 0 && t.status == 0 && z.status == 0 && !a.out.empty() &&
                      a.out == b.out && a.out == t.out && a.out == z.out;
    identical += same ? 1 : 0;
    if (!same) failures += "\n    differs or failed: " + c + " (" + a.out.substr(0, 200) + ")";
  }
  return {identical == static_cast<int>(commands.size()),
          fmt("%d/%zu commands byte-identical across reruns and KMAX_THREADS=1,4,0", identical, commands.size()) +
              failures};
}

}  // namespace

int main(int argc, char** argv) {
  if (argc < 2) {
    std::fprintf(stderr, "usage: %s <kmax-cli>\n", argv[0]);
    return 2;
  }
  const std::string cli = argv[1];
  struct Criterion {
    int id;
    const char* name;
    double limit_seconds;  // 0 means no hard limit
    std::function<Outcome()> run;
  };
  const std::vector<Criterion> criteria = {
      {1, "oracle equivalence", 10, criterion1},
      {2, "energy identity", 10, criterion2},
      {3, "sigma_K^2 fidelity", 5, criterion3},
      {4, "permutation level", 0, criterion4},
      {5, "exact vs Bobkov dominance", 30, criterion5},
      {6, "p-value bound comparison", 0, criterion6},
      {7, "power curves (desk scale)", 0, criterion7},
      {8, "Gumbel machinery", 0, criterion8},
      {9, "tail ratio probe", 0, criterion9},
      {10, "CLI determinism", 0, [&] { return criterion10(cli); }},
  };
  int failed = 0;
  for (const auto& c : criteria) {
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    const bool in_time = c.limit_seconds == 0 || secs < c.limit_seconds;
    const bool pass = o.pass && in_time;
    failed += pass ? 0 : 1;
    std::printf("%s criterion %d (%s): %s [%.1fs%s]\n", pass ? "PASS" : "FAIL", c.id, c.name, o.detail.c_str(), secs,
                in_time ? "" : ", over time limit");
    std::fflush(stdout);
  }
  std::printf("%d/%zu criteria passed\n", static_cast<int>(criteria.size()) - failed, criteria.size());
  return failed == 0 ? 0 : 1;
}
