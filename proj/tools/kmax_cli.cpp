// kmax: command-line front end for the K-sample max-MMD tests and the
// simulation harnesses.

#include <CLI11.hpp>

#include <cstdint>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "kmax/asymptotic.hpp"
#include "kmax/io.hpp"
#include "kmax/simulation.hpp"

namespace {

using namespace kmax;

struct DataFlags {
  std::string input;
  std::string scenario;
  std::size_t K = 2;
  std::size_t n = 10;
  std::size_t d = 5;
  std::string laplace = "independent";
};

struct KernelFlags {
  std::string kernel = "gaussian";
  std::string bandwidth = "median";
  std::vector<double> probs;
  std::optional<double> bound_B;
};

struct OutputFlags {
  std::string out;
  std::string format;
};

LaplaceConstruction parse_laplace(const std::string& s) {
  if (s == "independent") return LaplaceConstruction::kIndependentMarginals;
  if (s == "elliptical") return LaplaceConstruction::kElliptical;
  throw Error(ErrorCode::kInvalidArgument, "unknown laplace construction '" + s + "'");
}

KernelSpec make_kernel(const KernelFlags& f) {
  KernelSpec spec;
  spec.family = parse_kernel_family(f.kernel);
  if (spec.family == KernelFamily::kGaussian && f.bandwidth != "median") {
    try {
      spec.bandwidth = std::stod(f.bandwidth);
    } catch (const std::exception&) {
      throw Error(ErrorCode::kInvalidArgument, "bandwidth must be 'median' or a number");
    }
  }
  if (spec.family == KernelFamily::kChiSquare) spec.probs = f.probs;
  spec.bound_B = f.bound_B;
  // Empty chi-square probabilities mean uniform over the data's levels.
  if (!(spec.family == KernelFamily::kChiSquare && spec.probs.empty())) validate(spec);
  return spec;
}

void add_kernel_flags(CLI::App* cmd, KernelFlags& f) {
  cmd->add_option("--kernel", f.kernel, "gaussian|energy|linear|chisquare")->capture_default_str();
  cmd->add_option("--bandwidth", f.bandwidth, "median or a positive sigma")->capture_default_str();
  cmd->add_option("--probs", f.probs, "chi-square level probabilities (default uniform)")
      ->delimiter(',');
  cmd->add_option("--bound-B", f.bound_B, "kernel bound B for McDiarmid");
}

void add_output_flags(CLI::App* cmd, OutputFlags& f, const std::string& default_format) {
  f.format = default_format;
  cmd->add_option("--out", f.out, "output path (default stdout)");
  cmd->add_option("--format", f.format, "json|csv")->capture_default_str();
}

void emit(const Table& table, const OutputFlags& f) {
  const auto format = parse_report_format(f.format);
  write_output(format == ReportFormat::kJson ? to_json(table) : to_csv(table), f.out);
}

ScenarioSpec scenario_from(const DataFlags& f, std::uint64_t seed) {
  ScenarioSpec s;
  s.name = parse_scenario(f.scenario);
  s.K = f.K;
  s.n = f.n;
  s.d = f.d;
  s.seed = seed;
  s.laplace = parse_laplace(f.laplace);
  return s;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"K-sample max-MMD tests and simulation harnesses", "kmax"};
  app.require_subcommand(1);

  std::uint64_t seed = 1;
  double alpha = 0.05;
  std::size_t M = 200;
  std::size_t reps = 200;

  // test
  auto* test = app.add_subcommand("test", "Run one K-sample test on a CSV file or a scenario");
  DataFlags test_data;
  KernelFlags test_kernel;
  OutputFlags test_out;
  std::string test_method = "mc";
  std::string test_statistic = "max";
  std::string test_spectrum;
  auto* in_opt = test->add_option("--input", test_data.input, "CSV with a 'group' column");
  auto* sc_opt = test->add_option("--scenario", test_data.scenario,
                                  "normal_location|normal_scale|laplace_location|laplace_scale|"
                                  "null_uniformity");
  in_opt->excludes(sc_opt);
  test->add_option("--K", test_data.K)->capture_default_str();
  test->add_option("--n", test_data.n)->capture_default_str();
  test->add_option("--d", test_data.d)->capture_default_str();
  test->add_option("--laplace", test_data.laplace, "independent|elliptical")->capture_default_str();
  add_kernel_flags(test, test_kernel);
  test->add_option("--statistic", test_statistic, "max|weighted|disco|ecf")->capture_default_str();
  test->add_option("--method", test_method, "perm|mc|bobkov|mcdiarmid|gumbel|phi2|phiK")
      ->capture_default_str();
  test->add_option("--spectrum", test_spectrum, "eigenvalue file for --method gumbel");
  test->add_option("--alpha", alpha)->capture_default_str();
  test->add_option("--M", M, "Monte-Carlo permutations")->capture_default_str();
  test->add_option("--seed", seed)->capture_default_str();
  add_output_flags(test, test_out, "json");

  // power
  auto* power = app.add_subcommand("power", "Power of MaxGau, MaxEng, DISCO and ECF by scenario and K");
  std::vector<std::string> power_scenarios = {"normal_location", "normal_scale",
                                              "laplace_location", "laplace_scale"};
  std::vector<std::size_t> power_K = {2, 20, 40};
  std::vector<std::string> power_methods = {"MaxGau", "MaxEng", "DISCO", "ECF"};
  DataFlags power_data;
  OutputFlags power_out;
  bool full_scale = false;
  power->add_option("--scenario", power_scenarios)->delimiter(',')->capture_default_str();
  power->add_option("--K", power_K)->delimiter(',')->capture_default_str();
  power->add_option("--n", power_data.n)->capture_default_str();
  power->add_option("--d", power_data.d)->capture_default_str();
  power->add_option("--laplace", power_data.laplace, "independent|elliptical")->capture_default_str();
  power->add_option("--methods", power_methods)->delimiter(',')->capture_default_str();
  power->add_option("--M", M)->capture_default_str();
  power->add_option("--alpha", alpha)->capture_default_str();
  power->add_option("--reps", reps)->capture_default_str();
  power->add_option("--seed", seed)->capture_default_str();
  power->add_flag("--full-scale", full_scale, "K in {2,20,...,100} with 800 replicates");
  add_output_flags(power, power_out, "csv");

  // bounds
  auto* bounds = app.add_subcommand("bounds", "Bobkov vs McDiarmid p-values on truncated normals");
  std::string bounds_kernel = "energy";
  std::vector<std::size_t> bounds_N = {100, 200, 300, 400, 500, 600, 700, 800, 900, 1000};
  std::optional<double> bounds_B;
  OutputFlags bounds_out;
  bounds->add_option("--kernel", bounds_kernel, "energy|linear")->capture_default_str();
  bounds->add_option("--N", bounds_N, "pooled sample sizes")->delimiter(',')->capture_default_str();
  bounds->add_option("--bound-B", bounds_B, "kernel bound (default 10 energy, 100 linear)");
  bounds->add_option("--reps", reps)->capture_default_str();
  bounds->add_option("--seed", seed)->capture_default_str();
  add_output_flags(bounds, bounds_out, "csv");

  // tailratio
  auto* tail = app.add_subcommand("tailratio", "Null tail of the two-sample chi-square MMD");
  int tail_m = 2;
  std::size_t tail_n = 500;
  std::size_t tail_nsim = 1'000'000;
  std::vector<double> tail_levels = {0.5, 0.75, 0.9, 0.95, 0.99};
  std::vector<double> tail_x;
  OutputFlags tail_out;
  tail->add_option("--levels", tail_m, "number of categories m")->capture_default_str();
  tail->add_option("--n", tail_n, "observations per group")->capture_default_str();
  tail->add_option("--quantiles", tail_levels, "chi-square quantile levels for x")
      ->delimiter(',')
      ->capture_default_str();
  tail->add_option("--x", tail_x, "explicit x grid (overrides --quantiles)")->delimiter(',');
  tail->add_option("--nsim", tail_nsim, "draws for the reference tail")->capture_default_str();
  tail->add_option("--reps", reps)->capture_default_str();
  tail->add_option("--seed", seed)->capture_default_str();
  add_output_flags(tail, tail_out, "csv");

  // gumbel
  auto* gumbel = app.add_subcommand("gumbel", "Asymptotic Gumbel p-value for the max statistic");
  std::string gumbel_spectrum;
  std::optional<double> gumbel_value;
  std::size_t gumbel_n = 0;
  std::size_t gumbel_K = 0;
  DataFlags gumbel_data;
  KernelFlags gumbel_kernel;
  bool gumbel_simulate = false;
  int gumbel_m = 2;
  OutputFlags gumbel_out;
  gumbel->add_option("--spectrum", gumbel_spectrum, "eigenvalue file, one per line");
  gumbel->add_option("--value", gumbel_value, "observed squared max MMD");
  gumbel->add_option("--n", gumbel_n, "per-group sample size");
  gumbel->add_option("--K", gumbel_K, "number of groups");
  gumbel->add_option("--input", gumbel_data.input, "CSV dataset instead of --value");
  add_kernel_flags(gumbel, gumbel_kernel);
  gumbel->add_flag("--simulate", gumbel_simulate,
                   "null rejection rate for uniform levels with the chi-square kernel");
  gumbel->add_option("--levels", gumbel_m, "categories m for --simulate")->capture_default_str();
  gumbel->add_option("--alpha", alpha)->capture_default_str();
  gumbel->add_option("--reps", reps)->capture_default_str();
  gumbel->add_option("--seed", seed)->capture_default_str();
  add_output_flags(gumbel, gumbel_out, "json");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << "kmax: error: " << e.what() << "\n";
    return e.get_exit_code() == 0 ? 1 : e.get_exit_code();
  }

  try {
    if (*test) {
      RunConfig config;
      if (!test_data.input.empty()) {
        config.input = test_data.input;
      } else if (!test_data.scenario.empty()) {
        config.scenario = scenario_from(test_data, seed);
      }
      config.statistic = parse_statistic_kind(test_statistic);
      config.kernel = make_kernel(test_kernel);
      config.method = parse_calibration_method(test_method);
      config.alpha = alpha;
      config.num_permutations = M;
      config.seed = seed;
      if (!test_spectrum.empty()) config.spectrum = test_spectrum;
      const RunReport report = run_test(config);
      const auto format = parse_report_format(test_out.format);
      write_output(format == ReportFormat::kJson ? to_json(report) : to_csv(report), test_out.out);
    } else if (*power) {
      if (full_scale) {
        power_K = {2, 20, 40, 60, 80, 100};
        reps = 800;
      }
      std::vector<TestMethod> methods;
      for (const auto& name : power_methods) methods.push_back(TestMethod::by_name(name));
      std::vector<PowerEstimate> rows;
      for (const auto& scenario : power_scenarios) {
        for (std::size_t K : power_K) {
          DataFlags f = power_data;
          f.scenario = scenario;
          f.K = K;
          const auto est = estimate_power(scenario_from(f, seed), methods, M, alpha, reps, seed);
          rows.insert(rows.end(), est.begin(), est.end());
        }
      }
      emit(power_table(rows), power_out);
    } else if (*bounds) {
      const KernelFamily family = parse_kernel_family(bounds_kernel);
      BoundsConfig config;
      config.bound_B = bounds_B;
      emit(bounds_table(pvalue_comparison_experiment(bounds_N, family, reps, seed, config), family,
                        seed),
           bounds_out);
    } else if (*tail) {
      const auto x = tail_x.empty() ? chisq_quantile_grid(tail_m - 1, tail_levels) : tail_x;
      emit(tail_ratio_table(tail_ratio_experiment(tail_m, tail_n, x, reps, seed, tail_nsim), tail_m,
                            tail_n, reps, seed),
           tail_out);
    } else if (*gumbel) {
      Table t;
      if (gumbel_simulate) {
        if (gumbel_n == 0 || gumbel_K == 0) {
          throw Error(ErrorCode::kInvalidArgument, "--simulate needs --n and --K");
        }
        const auto r = gumbel_null_experiment(gumbel_m, gumbel_n, gumbel_K, reps, alpha, seed);
        t.columns = {"m", "n", "K", "alpha", "rejection_rate", "mc_se", "reps", "seed"};
        t.rows.push_back({static_cast<std::uint64_t>(gumbel_m), std::uint64_t{gumbel_n},
                          std::uint64_t{gumbel_K}, alpha, r.rejection_rate, r.mc_se,
                          std::uint64_t{r.reps}, seed});
        emit(t, gumbel_out);
      } else if (!gumbel_data.input.empty()) {
        RunConfig config;
        config.input = gumbel_data.input;
        config.kernel = make_kernel(gumbel_kernel);
        config.method = CalibrationMethod::kGumbel;
        config.alpha = alpha;
        config.seed = seed;
        if (gumbel_spectrum.empty()) throw Error(ErrorCode::kInvalidArgument, "--spectrum is required");
        config.spectrum = gumbel_spectrum;
        const RunReport report = run_test(config);
        const auto format = parse_report_format(gumbel_out.format);
        write_output(format == ReportFormat::kJson ? to_json(report) : to_csv(report),
                     gumbel_out.out);
      } else {
        if (gumbel_spectrum.empty()) throw Error(ErrorCode::kInvalidArgument, "--spectrum is required");
        if (!gumbel_value || gumbel_n == 0 || gumbel_K == 0) {
          throw Error(ErrorCode::kInvalidArgument, "give --value, --n and --K, or --input");
        }
        const EigenSpectrum spectrum = spectrum_from_lambdas(read_spectrum(gumbel_spectrum));
        const double y = gumbel_centering(*gumbel_value, gumbel_n, gumbel_K, spectrum);
        t.columns = {"statistic", "n", "K", "lambda1", "mu1", "kappa", "y", "p_value"};
        t.rows.push_back({*gumbel_value, std::uint64_t{gumbel_n}, std::uint64_t{gumbel_K},
                          spectrum.lambda1(), static_cast<std::uint64_t>(spectrum.mu1),
                          spectrum.kappa, y,
                          gumbel_asymptotic_pvalue(*gumbel_value, gumbel_n, gumbel_K, spectrum)});
        emit(t, gumbel_out);
      }
    }
  } catch (const std::exception& e) {
    std::cerr << "kmax: error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
