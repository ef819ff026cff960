#pragma once

// CSV ingestion, single-dataset test runs and JSON/CSV reports.

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "kmax/core.hpp"
#include "kmax/kernels.hpp"
#include "kmax/simulation.hpp"

namespace kmax {

/// Reads a comma-separated file with a header row. The `group` column holds
/// labels (any string); groups are ordered by first appearance. Either every
/// other column is a numeric feature, or the only other column is `level`
/// with integer levels 1..m.
GroupedDataset parse_dataset_csv(const std::filesystem::path& path);
GroupedDataset parse_dataset_csv(std::istream& in);

enum class ReportFormat { kJson, kCsv };

ReportFormat parse_report_format(std::string_view name);

struct RunConfig {
  std::optional<std::string> input;
  std::optional<ScenarioSpec> scenario;
  StatisticKind statistic = StatisticKind::kMaxMmd;
  KernelSpec kernel = KernelSpec::gaussian_median();
  CalibrationMethod method = CalibrationMethod::kPermMonteCarlo;
  double alpha = 0.05;
  std::size_t num_permutations = 200;
  std::uint64_t seed = 0;
  /// Eigenvalue file, one value per line; required by the gumbel method.
  std::optional<std::string> spectrum;
};

/// Throws kInvalidArgument unless exactly one data source is set and alpha is in (0,1).
void validate(const RunConfig& config);

struct RunReport {
  TestResult result;
  RunConfig config;
  /// Kernel actually used, with any median-heuristic bandwidth filled in.
  KernelSpec kernel;
  std::size_t num_observations = 0;
  std::vector<std::size_t> group_sizes;
};

RunReport run_test(const RunConfig& config);

std::vector<double> read_spectrum(const std::filesystem::path& path);

/// 17 significant digits; parsing the text back recovers the same bits.
std::string format_double(double value);

std::string to_json(const RunReport& report);
std::string to_csv(const RunReport& report);
/// Recovers the TestResult part of a report produced by to_json.
TestResult result_from_json(const std::string& text);

/// A flat experiment table with a fixed column order.
struct Table {
  using Cell = std::variant<std::string, double, std::uint64_t>;
  std::vector<std::string> columns;
  std::vector<std::vector<Cell>> rows;
};

Table power_table(std::span<const PowerEstimate> rows);
Table bounds_table(std::span<const BoundsRow> rows, KernelFamily kernel, std::uint64_t seed);
Table tail_ratio_table(std::span<const TailRatioRow> rows, int m, std::size_t n,
                       std::size_t reps, std::uint64_t seed);

std::string to_csv(const Table& table);
std::string to_json(const Table& table);

/// Writes text to path, or to stdout when path is empty. Throws kIoError.
void write_output(const std::string& text, const std::optional<std::string>& path);

}  // namespace kmax
