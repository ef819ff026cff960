#pragma once

// Domain types shared by every module: grouped pooled samples, the group
// partition, and the result record produced by a test run.
//
// Conventions used throughout the library:
//   * observation indices and group indices are 0-based;
//   * groups occupy contiguous blocks of the pooled sample, in order;
//   * discrete levels are 1-based, i.e. they lie in {1, ..., m}.

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <variant>
#include <vector>

namespace kmax {

enum class ErrorCode {
  kInvalidArgument,
  kEmptyGroup,
  kDimensionMismatch,
  kTooFewGroups,
  kDiscreteOutOfRange,
  kDomainMismatch,
  kAllPointsIdentical,
  kIndexOutOfRange,
  kSameGroup,
  kEnumerationTooLarge,
  kSingletonDataset,
  kUnbalancedGroups,
  kZeroVariance,
  kMissingBound,
  kAllZero,
  kNonpositiveVariance,
  kInvalidSimplex,
  kUnbalancedDesign,
  kKTooSmall,
  kZeroWithinDispersion,
  kTooFewPoints,
  kDegenerateSupport,
  kUnknownScenario,
  kMalformedRow,
  kMixedDomain,
  kMissingGroupColumn,
  kIoError,
};

std::string_view to_string(ErrorCode code);

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message);
  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

/// n points in R^d stored row-major.
class PointSet {
 public:
  PointSet() = default;
  PointSet(std::size_t dim, std::vector<double> values);

  std::size_t dim() const noexcept { return dim_; }
  std::size_t size() const noexcept { return dim_ == 0 ? 0 : values_.size() / dim_; }
  bool empty() const noexcept { return size() == 0; }

  std::span<const double> operator[](std::size_t i) const {
    return {values_.data() + i * dim_, dim_};
  }
  std::span<double> operator[](std::size_t i) {
    return {values_.data() + i * dim_, dim_};
  }
  const std::vector<double>& values() const noexcept { return values_; }

  void append(std::span<const double> point);
  void append(const PointSet& other);

  bool operator==(const PointSet&) const = default;

 private:
  std::size_t dim_ = 0;
  std::vector<double> values_;
};

/// Prefix sums m_0 = 0 < m_1 < ... < m_K = N of the group sizes.
class GroupIndex {
 public:
  GroupIndex() = default;
  explicit GroupIndex(std::vector<std::size_t> boundaries);
  static GroupIndex from_sizes(std::span<const std::size_t> sizes);

  std::size_t num_groups() const noexcept {
    return boundaries_.empty() ? 0 : boundaries_.size() - 1;
  }
  std::size_t total() const noexcept {
    return boundaries_.empty() ? 0 : boundaries_.back();
  }
  std::size_t begin(std::size_t k) const { return boundaries_.at(k); }
  std::size_t end(std::size_t k) const { return boundaries_.at(k + 1); }
  std::size_t size(std::size_t k) const { return end(k) - begin(k); }

  std::span<const std::size_t> boundaries() const noexcept { return boundaries_; }
  std::vector<std::size_t> sizes() const;
  /// Group label of every pooled observation.
  std::vector<std::uint32_t> labels() const;
  bool balanced() const;

  bool operator==(const GroupIndex&) const = default;

 private:
  std::vector<std::size_t> boundaries_;
};

struct ContinuousDomain {
  std::size_t dim = 0;
  bool operator==(const ContinuousDomain&) const = default;
};
struct DiscreteDomain {
  int levels = 0;
  bool operator==(const DiscreteDomain&) const = default;
};
using Domain = std::variant<ContinuousDomain, DiscreteDomain>;

/// Unvalidated input: observations plus the group sizes they are claimed to
/// split into. Continuous points may have ragged dimensions here.
struct RawDataset {
  std::variant<std::vector<std::vector<double>>, std::vector<int>> observations;
  std::vector<std::size_t> group_sizes;
  /// Number of discrete levels m; inferred as the largest level when absent.
  std::optional<int> levels;
};

class GroupedDataset {
 public:
  static GroupedDataset continuous(PointSet points, std::span<const std::size_t> sizes);
  static GroupedDataset discrete(std::vector<int> levels, int num_levels,
                                 std::span<const std::size_t> sizes);
  /// Concatenates samples X_{.,1}, ..., X_{.,K} into the pooled sample.
  static GroupedDataset from_groups(std::span<const PointSet> groups);

  const Domain& domain() const noexcept { return domain_; }
  bool is_continuous() const noexcept {
    return std::holds_alternative<ContinuousDomain>(domain_);
  }
  std::size_t dim() const;
  int num_levels() const;

  std::size_t size() const noexcept { return index_.total(); }
  std::size_t num_groups() const noexcept { return index_.num_groups(); }
  const GroupIndex& index() const noexcept { return index_; }
  std::vector<std::size_t> group_sizes() const { return index_.sizes(); }

  std::span<const double> point(std::size_t i) const { return points_[i]; }
  int level(std::size_t i) const { return levels_[i]; }
  const PointSet& points() const noexcept { return points_; }
  const std::vector<int>& levels() const noexcept { return levels_; }

  /// Observations of group k as a standalone sample.
  PointSet group_points(std::size_t k) const;

  RawDataset to_raw() const;

  bool operator==(const GroupedDataset&) const = default;

 private:
  GroupedDataset() = default;

  Domain domain_;
  GroupIndex index_;
  PointSet points_;
  std::vector<int> levels_;
};

/// Checks the raw input and builds a dataset; never mutates its argument.
GroupedDataset validate_dataset(const RawDataset& raw);

enum class StatisticKind { kMaxMmd, kWeightedMaxMmd, kDisco, kEcf };

enum class CalibrationMethod {
  kPermExact,
  kPermMonteCarlo,
  kBobkov,
  kMcDiarmid,
  kGumbel,
  kPhi2,
  kPhiK,
};

std::string_view to_string(StatisticKind kind);
std::string_view to_string(CalibrationMethod method);
StatisticKind parse_statistic_kind(std::string_view name);
CalibrationMethod parse_calibration_method(std::string_view name);

struct TestResult {
  double statistic = 0.0;
  StatisticKind statistic_kind = StatisticKind::kMaxMmd;
  double p_value = 1.0;
  CalibrationMethod method = CalibrationMethod::kPermMonteCarlo;
  /// 0-based (k, l) with k < l.
  std::optional<std::pair<std::size_t, std::size_t>> argmax_pair;
  std::optional<std::size_t> num_permutations;
  std::optional<std::uint64_t> seed;
  /// Rejection threshold for the threshold-type tests (phi2, phiK).
  std::optional<double> threshold;

  bool operator==(const TestResult&) const = default;
};

}  // namespace kmax
