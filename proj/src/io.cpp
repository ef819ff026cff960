#include "kmax/io.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <limits>
#include <map>
#include <sstream>

#include <json.hpp>

#include "kmax/asymptotic.hpp"
#include "kmax/concentration.hpp"
#include "kmax/permutation.hpp"
#include "kmax/statistics.hpp"

namespace kmax {

namespace {

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  s = s.substr(first, last - first + 1);
  if (s.size() >= 2 && s.front() == '"' && s.back() == '"') s = s.substr(1, s.size() - 2);
  return s;
}

std::vector<std::string_view> split(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const auto comma = line.find(',', start);
    out.push_back(trim(line.substr(start, comma == std::string_view::npos ? comma : comma - start)));
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return out;
}

template <typename T>
bool parse_number(std::string_view s, T& out) {
  if (s.empty()) return false;
  if (s.front() == '+') s.remove_prefix(1);
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
  return ec == std::errc() && ptr == s.data() + s.size();
}

[[noreturn]] void malformed(std::size_t line, const std::string& what) {
  throw Error(ErrorCode::kMalformedRow, "line " + std::to_string(line) + ": " + what);
}

}  // namespace

GroupedDataset parse_dataset_csv(std::istream& in) {
  std::string line;
  std::size_t line_no = 0;
  std::vector<std::string> header;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    for (auto f : split(line)) header.emplace_back(f);
    break;
  }
  if (header.empty()) throw Error(ErrorCode::kMalformedRow, "missing header row");
  const auto group_it = std::find(header.begin(), header.end(), "group");
  if (group_it == header.end()) {
    throw Error(ErrorCode::kMissingGroupColumn, "header has no 'group' column");
  }
  const std::size_t group_col = static_cast<std::size_t>(group_it - header.begin());
  const auto level_it = std::find(header.begin(), header.end(), "level");
  const bool discrete = level_it != header.end();
  if (discrete && header.size() != 2) {
    throw Error(ErrorCode::kMixedDomain, "a 'level' column cannot be combined with feature columns");
  }
  if (!discrete && header.size() < 2) {
    throw Error(ErrorCode::kMalformedRow, "header has no feature columns");
  }
  const std::size_t level_col = static_cast<std::size_t>(level_it - header.begin());
  const std::size_t dim = header.size() - 1;

  // Observations bucketed by group, in order of first appearance.
  std::vector<std::string> labels;
  std::map<std::string, std::size_t, std::less<>> label_index;
  std::vector<std::vector<double>> features;
  std::vector<std::vector<int>> levels;
  std::vector<double> row_values(dim);

  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    const auto fields = split(line);
    if (fields.size() != header.size()) {
      malformed(line_no, "expected " + std::to_string(header.size()) + " fields, found " +
                             std::to_string(fields.size()));
    }
    const std::string_view label = fields[group_col];
    if (label.empty()) malformed(line_no, "empty group label");
    auto it = label_index.find(label);
    if (it == label_index.end()) {
      it = label_index.emplace(std::string(label), labels.size()).first;
      labels.emplace_back(label);
      features.emplace_back();
      levels.emplace_back();
    }
    const std::size_t g = it->second;
    if (discrete) {
      int v = 0;
      if (!parse_number(fields[level_col], v) || v < 1) {
        malformed(line_no, "level '" + std::string(fields[level_col]) + "' is not an integer >= 1");
      }
      levels[g].push_back(v);
      continue;
    }
    std::size_t c = 0;
    for (std::size_t j = 0; j < fields.size(); ++j) {
      if (j == group_col) continue;
      if (!parse_number(fields[j], row_values[c]) || !std::isfinite(row_values[c])) {
        malformed(line_no, "column '" + header[j] + "' value '" + std::string(fields[j]) +
                               "' is not a finite number");
      }
      ++c;
    }
    features[g].insert(features[g].end(), row_values.begin(), row_values.end());
  }

  std::vector<std::size_t> sizes;
  if (discrete) {
    std::vector<int> pooled;
    int m = 0;
    for (const auto& g : levels) {
      sizes.push_back(g.size());
      pooled.insert(pooled.end(), g.begin(), g.end());
      for (int v : g) m = std::max(m, v);
    }
    return GroupedDataset::discrete(std::move(pooled), std::max(m, 1), sizes);
  }
  std::vector<double> pooled;
  for (const auto& g : features) {
    sizes.push_back(g.size() / dim);
    pooled.insert(pooled.end(), g.begin(), g.end());
  }
  return GroupedDataset::continuous(PointSet(dim, std::move(pooled)), sizes);
}

GroupedDataset parse_dataset_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kIoError, "cannot open '" + path.string() + "'");
  return parse_dataset_csv(in);
}

ReportFormat parse_report_format(std::string_view name) {
  if (name == "json") return ReportFormat::kJson;
  if (name == "csv") return ReportFormat::kCsv;
  throw Error(ErrorCode::kInvalidArgument, "unknown format '" + std::string(name) + "'");
}

void validate(const RunConfig& config) {
  if (config.input.has_value() == config.scenario.has_value()) {
    throw Error(ErrorCode::kInvalidArgument, "give exactly one of an input file or a scenario");
  }
  if (!(config.alpha > 0.0 && config.alpha < 1.0)) {
    throw Error(ErrorCode::kInvalidArgument, "alpha must lie in (0,1)");
  }
  if (config.method == CalibrationMethod::kPermMonteCarlo && config.num_permutations == 0) {
    throw Error(ErrorCode::kInvalidArgument, "M must be >= 1");
  }
}

std::vector<double> read_spectrum(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kIoError, "cannot open '" + path.string() + "'");
  std::vector<double> out;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto s = trim(line);
    if (s.empty()) continue;
    double v = 0.0;
    if (!parse_number(s, v) || !std::isfinite(v)) malformed(line_no, "eigenvalue is not a number");
    out.push_back(v);
  }
  return out;
}

namespace {

void require_balanced_pair(const GroupedDataset& data, CalibrationMethod method) {
  if (data.num_groups() != 2 || !data.index().balanced()) {
    throw Error(ErrorCode::kUnbalancedGroups,
                std::string(to_string(method)) + " needs two groups of equal size, got K=" +
                    std::to_string(data.num_groups()));
  }
}

void require_max_statistic(const RunConfig& config) {
  if (config.statistic != StatisticKind::kMaxMmd) {
    throw Error(ErrorCode::kInvalidArgument, std::string(to_string(config.method)) +
                                                 " calibrates the max MMD statistic only");
  }
}

}  // namespace

RunReport run_test(const RunConfig& config) {
  validate(config);
  const GroupedDataset data =
      config.input ? parse_dataset_csv(*config.input) : make_scenario(*config.scenario);

  KernelSpec kernel = config.kernel;
  if (!data.is_continuous() && kernel.family == KernelFamily::kChiSquare && kernel.probs.empty()) {
    auto bound = kernel.bound_B;
    kernel = KernelSpec::chi_square_uniform(data.num_levels());
    kernel.bound_B = bound;
  }
  const GramMatrix gram = statistic_matrix(config.statistic, kernel, data);
  if (gram.kernel()) kernel = *gram.kernel();

  const GroupIndex& index = data.index();
  const auto sizes = data.group_sizes();
  RunReport report;
  report.config = config;
  report.num_observations = data.size();
  report.group_sizes = sizes;
  TestResult& r = report.result;
  r.statistic_kind = config.statistic;
  r.method = config.method;
  const BlockSums sums = block_sums(gram, index);
  r.statistic = statistic_from_block_sums(config.statistic, sums);
  if (config.statistic == StatisticKind::kMaxMmd ||
      config.statistic == StatisticKind::kWeightedMaxMmd) {
    const MaxMmd best = max_mmd(sums);
    r.argmax_pair = std::make_pair(best.k, best.l);
  }

  switch (config.method) {
    case CalibrationMethod::kPermExact: {
      const auto count = count_assignments(sizes);
      if (!count) {
        throw Error(ErrorCode::kEnumerationTooLarge,
                    "exact enumeration exceeds " + std::to_string(kMaxExactAssignments) +
                        " assignments; use method mc");
      }
      r.p_value = permutation_pvalue_exact(gram, index, config.statistic);
      r.num_permutations = static_cast<std::size_t>(*count);
      break;
    }
    case CalibrationMethod::kPermMonteCarlo:
      r.p_value = permutation_pvalue_mc(gram, index, config.num_permutations, config.seed,
                                        config.statistic);
      r.num_permutations = config.num_permutations;
      r.seed = config.seed;
      break;
    case CalibrationMethod::kBobkov:
      require_max_statistic(config);
      require_balanced_pair(data, config.method);
      r.p_value = p_bobkov(r.statistic, sigma_hat2(gram), sizes);
      break;
    case CalibrationMethod::kMcDiarmid:
      require_max_statistic(config);
      require_balanced_pair(data, config.method);
      r.p_value = p_mcdiarmid(r.statistic, kernel.bound_B, sizes);
      break;
    case CalibrationMethod::kGumbel: {
      require_max_statistic(config);
      if (!config.spectrum) {
        throw Error(ErrorCode::kInvalidArgument, "gumbel needs a spectrum file");
      }
      const EigenSpectrum spectrum = spectrum_from_lambdas(read_spectrum(*config.spectrum));
      r.p_value = gumbel_asymptotic_pvalue(r.statistic * r.statistic, sizes, spectrum);
      break;
    }
    case CalibrationMethod::kPhi2: {
      require_max_statistic(config);
      if (data.num_groups() != 2) {
        throw Error(ErrorCode::kInvalidArgument, "phi2 needs exactly two groups");
      }
      const double s2 = sigma_hat2(gram);
      r.threshold = phi2_threshold(s2, sizes[0], sizes[1], config.alpha);
      r.p_value = phiK_pvalue(r.statistic, s2, sizes);
      break;
    }
    case CalibrationMethod::kPhiK: {
      require_max_statistic(config);
      const double s2 = sigma_K2(gram, index);
      r.threshold = phiK_threshold(s2, sizes, config.alpha);
      r.p_value = phiK_pvalue(r.statistic, s2, sizes);
      break;
    }
  }
  report.kernel = std::move(kernel);
  return report;
}

std::string format_double(double value) {
  if (!std::isfinite(value)) return "null";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", value);
  return buf;
}

namespace {

using Fields = std::vector<std::pair<std::string, std::string>>;

std::string quote(std::string_view s) { return nlohmann::json(std::string(s)).dump(); }

std::string object(const Fields& fields) {
  std::string out = "{";
  for (std::size_t i = 0; i < fields.size(); ++i) {
    if (i) out += ",";
    out += quote(fields[i].first) + ":" + fields[i].second;
  }
  return out + "}";
}

std::string array(const std::vector<std::string>& items) {
  std::string out = "[";
  for (std::size_t i = 0; i < items.size(); ++i) {
    if (i) out += ",";
    out += items[i];
  }
  return out + "]";
}

template <typename T>
std::string optional_value(const std::optional<T>& v) {
  if (!v) return "null";
  if constexpr (std::is_floating_point_v<T>) {
    return format_double(*v);
  } else {
    return std::to_string(*v);
  }
}

std::string kernel_json(const KernelSpec& k, bool median) {
  Fields f = {{"family", quote(to_string(k.family))}};
  if (k.family == KernelFamily::kGaussian) {
    f.emplace_back("bandwidth_mode", quote(median ? "median" : "fixed"));
    f.emplace_back("bandwidth", optional_value(k.bandwidth));
  }
  if (k.family == KernelFamily::kChiSquare) {
    std::vector<std::string> p;
    for (double v : k.probs) p.push_back(format_double(v));
    f.emplace_back("probs", array(p));
  }
  f.emplace_back("bound_B", optional_value(k.bound_B));
  return object(f);
}

std::string config_json(const RunReport& report) {
  const RunConfig& c = report.config;
  Fields f;
  if (c.input) {
    f.emplace_back("input", quote(*c.input));
  } else {
    const ScenarioSpec& s = *c.scenario;
    f.emplace_back("scenario", object({{"name", quote(to_string(s.name))},
                                       {"K", std::to_string(s.K)},
                                       {"n", std::to_string(s.n)},
                                       {"d", std::to_string(s.d)},
                                       {"seed", std::to_string(s.seed)}}));
  }
  f.emplace_back("statistic_kind", quote(to_string(c.statistic)));
  f.emplace_back("kernel", kernel_json(report.kernel, !c.kernel.resolved()));
  f.emplace_back("method", quote(to_string(c.method)));
  f.emplace_back("alpha", format_double(c.alpha));
  f.emplace_back("M", std::to_string(c.num_permutations));
  f.emplace_back("seed", std::to_string(c.seed));
  f.emplace_back("spectrum", c.spectrum ? quote(*c.spectrum) : "null");
  std::vector<std::string> sizes;
  for (auto n : report.group_sizes) sizes.push_back(std::to_string(n));
  f.emplace_back("group_sizes", array(sizes));
  return object(f);
}

}  // namespace

std::string to_json(const RunReport& report) {
  const TestResult& r = report.result;
  std::string pair = "null";
  if (r.argmax_pair) {
    pair = array({std::to_string(r.argmax_pair->first + 1), std::to_string(r.argmax_pair->second + 1)});
  }
  return object({{"statistic", format_double(r.statistic)},
                 {"statistic_kind", quote(to_string(r.statistic_kind))},
                 {"p_value", format_double(r.p_value)},
                 {"method", quote(to_string(r.method))},
                 {"argmax_pair", pair},
                 {"num_permutations", optional_value(r.num_permutations)},
                 {"seed", optional_value(r.seed)},
                 {"threshold", optional_value(r.threshold)},
                 {"bandwidth", optional_value(report.kernel.bandwidth)},
                 {"config", config_json(report)}}) +
         "\n";
}

TestResult result_from_json(const std::string& text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::kMalformedRow, std::string("report is not valid JSON: ") + e.what());
  }
  auto number = [&](const char* key) {
    const auto& v = j.at(key);
    return v.is_null() ? std::numeric_limits<double>::quiet_NaN() : v.get<double>();
  };
  TestResult r;
  try {
    r.statistic = number("statistic");
    r.statistic_kind = parse_statistic_kind(j.at("statistic_kind").get<std::string>());
    r.p_value = number("p_value");
    r.method = parse_calibration_method(j.at("method").get<std::string>());
    if (!j.at("argmax_pair").is_null()) {
      const auto& p = j.at("argmax_pair");
      r.argmax_pair = std::make_pair(p.at(0).get<std::size_t>() - 1, p.at(1).get<std::size_t>() - 1);
    }
    if (!j.at("num_permutations").is_null()) r.num_permutations = j.at("num_permutations").get<std::size_t>();
    if (!j.at("seed").is_null()) r.seed = j.at("seed").get<std::uint64_t>();
    if (!j.at("threshold").is_null()) r.threshold = j.at("threshold").get<double>();
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::kMalformedRow, std::string("report is missing fields: ") + e.what());
  }
  return r;
}

std::string to_csv(const RunReport& report) {
  const TestResult& r = report.result;
  auto opt_pair = [&](bool first) {
    if (!r.argmax_pair) return std::string();
    return std::to_string((first ? r.argmax_pair->first : r.argmax_pair->second) + 1);
  };
  auto opt = [](const auto& v) { return v ? optional_value(v) : std::string(); };
  std::ostringstream out;
  out << "statistic,statistic_kind,p_value,method,argmax_k,argmax_l,num_permutations,seed,"
         "threshold,kernel,bandwidth,alpha,N,K\n";
  out << format_double(r.statistic) << ',' << to_string(r.statistic_kind) << ','
      << format_double(r.p_value) << ',' << to_string(r.method) << ',' << opt_pair(true) << ','
      << opt_pair(false) << ',' << opt(r.num_permutations) << ',' << opt(r.seed) << ','
      << opt(r.threshold) << ',' << to_string(report.kernel.family) << ','
      << opt(report.kernel.bandwidth) << ',' << format_double(report.config.alpha) << ','
      << report.num_observations << ',' << report.group_sizes.size() << '\n';
  return out.str();
}

Table power_table(std::span<const PowerEstimate> rows) {
  Table t;
  t.columns = {"method", "scenario", "K", "n", "d", "power", "mc_se", "reps", "seed"};
  for (const auto& e : rows) {
    t.rows.push_back({e.method, e.scenario, std::uint64_t{e.K}, std::uint64_t{e.n},
                      std::uint64_t{e.d}, e.power, e.mc_se, std::uint64_t{e.reps}, e.seed});
  }
  return t;
}

Table bounds_table(std::span<const BoundsRow> rows, KernelFamily kernel, std::uint64_t seed) {
  Table t;
  t.columns = {"kernel",          "N",
               "reps",            "bound_B",
               "mean_sigma2",     "mean_statistic",
               "mean_p_bobkov",   "mean_p_mcdiarmid",
               "mean_log_p_bobkov", "mean_log_p_mcdiarmid",
               "seed"};
  for (const auto& r : rows) {
    t.rows.push_back({std::string(to_string(kernel)), std::uint64_t{r.N}, std::uint64_t{r.reps},
                      r.bound_B, r.mean_sigma2, r.mean_statistic, r.mean_p_bobkov,
                      r.mean_p_mcdiarmid, r.mean_log_p_bobkov, r.mean_log_p_mcdiarmid, seed});
  }
  return t;
}

Table tail_ratio_table(std::span<const TailRatioRow> rows, int m, std::size_t n,
                       std::size_t reps, std::uint64_t seed) {
  Table t;
  t.columns = {"m", "n", "x", "empirical", "reference", "reference_se", "ratio", "reps", "seed"};
  for (const auto& r : rows) {
    t.rows.push_back({static_cast<std::uint64_t>(m), std::uint64_t{n}, r.x, r.empirical,
                      r.reference, r.reference_se, r.ratio, std::uint64_t{reps}, seed});
  }
  return t;
}

namespace {

std::string cell_text(const Table::Cell& c, bool json) {
  if (const auto* s = std::get_if<std::string>(&c)) return json ? quote(*s) : *s;
  if (const auto* d = std::get_if<double>(&c)) return format_double(*d);
  return std::to_string(std::get<std::uint64_t>(c));
}

}  // namespace

std::string to_csv(const Table& table) {
  std::string out;
  for (std::size_t c = 0; c < table.columns.size(); ++c) {
    if (c) out += ',';
    out += table.columns[c];
  }
  out += '\n';
  for (const auto& row : table.rows) {
    for (std::size_t c = 0; c < row.size(); ++c) {
      if (c) out += ',';
      out += cell_text(row[c], false);
    }
    out += '\n';
  }
  return out;
}

std::string to_json(const Table& table) {
  std::vector<std::string> rows;
  for (const auto& row : table.rows) {
    Fields f;
    for (std::size_t c = 0; c < row.size(); ++c) f.emplace_back(table.columns[c], cell_text(row[c], true));
    rows.push_back(object(f));
  }
  return array(rows) + "\n";
}

void write_output(const std::string& text, const std::optional<std::string>& path) {
  if (!path || path->empty() || *path == "-") {
    std::cout << text;
    std::cout.flush();
    if (!std::cout) throw Error(ErrorCode::kIoError, "failed to write to stdout");
    return;
  }
  std::ofstream out(*path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::kIoError, "cannot open '" + *path + "' for writing");
  out << text;
  out.close();
  if (!out) throw Error(ErrorCode::kIoError, "failed writing '" + *path + "'");
}

}  // namespace kmax
