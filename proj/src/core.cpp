#include "kmax/core.hpp"

#include <algorithm>
#include <numeric>

namespace kmax {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::kInvalidArgument: return "InvalidArgument";
    case ErrorCode::kEmptyGroup: return "EmptyGroup";
    case ErrorCode::kDimensionMismatch: return "DimensionMismatch";
    case ErrorCode::kTooFewGroups: return "TooFewGroups";
    case ErrorCode::kDiscreteOutOfRange: return "DiscreteOutOfRange";
    case ErrorCode::kDomainMismatch: return "DomainMismatch";
    case ErrorCode::kAllPointsIdentical: return "AllPointsIdentical";
    case ErrorCode::kIndexOutOfRange: return "IndexOutOfRange";
    case ErrorCode::kSameGroup: return "SameGroup";
    case ErrorCode::kEnumerationTooLarge: return "EnumerationTooLarge";
    case ErrorCode::kSingletonDataset: return "SingletonDataset";
    case ErrorCode::kUnbalancedGroups: return "UnbalancedGroups";
    case ErrorCode::kZeroVariance: return "ZeroVariance";
    case ErrorCode::kMissingBound: return "MissingBound";
    case ErrorCode::kAllZero: return "AllZero";
    case ErrorCode::kNonpositiveVariance: return "NonpositiveVariance";
    case ErrorCode::kInvalidSimplex: return "InvalidSimplex";
    case ErrorCode::kUnbalancedDesign: return "UnbalancedDesign";
    case ErrorCode::kKTooSmall: return "KTooSmall";
    case ErrorCode::kZeroWithinDispersion: return "ZeroWithinDispersion";
    case ErrorCode::kTooFewPoints: return "TooFewPoints";
    case ErrorCode::kDegenerateSupport: return "DegenerateSupport";
    case ErrorCode::kUnknownScenario: return "UnknownScenario";
    case ErrorCode::kMalformedRow: return "MalformedRow";
    case ErrorCode::kMixedDomain: return "MixedDomain";
    case ErrorCode::kMissingGroupColumn: return "MissingGroupColumn";
    case ErrorCode::kIoError: return "IoError";
  }
  return "Unknown";
}

Error::Error(ErrorCode code, const std::string& message)
    : std::runtime_error(std::string(to_string(code)) + ": " + message), code_(code) {}

PointSet::PointSet(std::size_t dim, std::vector<double> values)
    : dim_(dim), values_(std::move(values)) {
  if (dim_ == 0 && !values_.empty()) {
    throw Error(ErrorCode::kDimensionMismatch, "points must have dimension >= 1");
  }
  if (dim_ != 0 && values_.size() % dim_ != 0) {
    throw Error(ErrorCode::kDimensionMismatch,
                "value count " + std::to_string(values_.size()) +
                    " is not a multiple of dimension " + std::to_string(dim_));
  }
}

void PointSet::append(std::span<const double> point) {
  if (dim_ == 0) dim_ = point.size();
  if (point.size() != dim_ || dim_ == 0) {
    throw Error(ErrorCode::kDimensionMismatch, "point dimension " + std::to_string(point.size()) +
                                                   " differs from " + std::to_string(dim_));
  }
  values_.insert(values_.end(), point.begin(), point.end());
}

void PointSet::append(const PointSet& other) {
  if (other.empty()) return;
  if (dim_ == 0) dim_ = other.dim_;
  if (other.dim_ != dim_) {
    throw Error(ErrorCode::kDimensionMismatch, "cannot append points of dimension " +
                                                   std::to_string(other.dim_) + " to " +
                                                   std::to_string(dim_));
  }
  values_.insert(values_.end(), other.values_.begin(), other.values_.end());
}

GroupIndex::GroupIndex(std::vector<std::size_t> boundaries) : boundaries_(std::move(boundaries)) {
  if (boundaries_.empty() || boundaries_.front() != 0) {
    throw Error(ErrorCode::kInvalidArgument, "group boundaries must start at 0");
  }
  for (std::size_t k = 1; k < boundaries_.size(); ++k) {
    if (boundaries_[k] <= boundaries_[k - 1]) {
      throw Error(ErrorCode::kEmptyGroup, "group " + std::to_string(k) + " is empty");
    }
  }
}

GroupIndex GroupIndex::from_sizes(std::span<const std::size_t> sizes) {
  std::vector<std::size_t> b(sizes.size() + 1, 0);
  std::partial_sum(sizes.begin(), sizes.end(), b.begin() + 1);
  return GroupIndex(std::move(b));
}

std::vector<std::size_t> GroupIndex::sizes() const {
  std::vector<std::size_t> out(num_groups());
  for (std::size_t k = 0; k < out.size(); ++k) out[k] = size(k);
  return out;
}

std::vector<std::uint32_t> GroupIndex::labels() const {
  std::vector<std::uint32_t> out(total());
  for (std::size_t k = 0; k < num_groups(); ++k) {
    std::fill(out.begin() + begin(k), out.begin() + end(k), static_cast<std::uint32_t>(k));
  }
  return out;
}

bool GroupIndex::balanced() const {
  for (std::size_t k = 1; k < num_groups(); ++k) {
    if (size(k) != size(0)) return false;
  }
  return true;
}

namespace {

void check_sizes(std::span<const std::size_t> sizes, std::size_t n) {
  if (sizes.size() < 2) {
    throw Error(ErrorCode::kTooFewGroups,
                "need at least 2 groups, got " + std::to_string(sizes.size()));
  }
  for (std::size_t k = 0; k < sizes.size(); ++k) {
    if (sizes[k] == 0) {
      throw Error(ErrorCode::kEmptyGroup, "group " + std::to_string(k + 1) + " has size 0");
    }
  }
  const std::size_t total = std::accumulate(sizes.begin(), sizes.end(), std::size_t{0});
  if (total != n) {
    throw Error(ErrorCode::kDimensionMismatch, "group sizes sum to " + std::to_string(total) +
                                                   " but there are " + std::to_string(n) +
                                                   " observations");
  }
}

}  // namespace

GroupedDataset GroupedDataset::continuous(PointSet points, std::span<const std::size_t> sizes) {
  check_sizes(sizes, points.size());
  GroupedDataset ds;
  ds.domain_ = ContinuousDomain{points.dim()};
  ds.index_ = GroupIndex::from_sizes(sizes);
  ds.points_ = std::move(points);
  return ds;
}

GroupedDataset GroupedDataset::discrete(std::vector<int> levels, int num_levels,
                                        std::span<const std::size_t> sizes) {
  check_sizes(sizes, levels.size());
  if (num_levels < 1) {
    throw Error(ErrorCode::kDiscreteOutOfRange, "number of levels must be >= 1");
  }
  for (std::size_t i = 0; i < levels.size(); ++i) {
    if (levels[i] < 1 || levels[i] > num_levels) {
      throw Error(ErrorCode::kDiscreteOutOfRange,
                  "observation " + std::to_string(i) + " has level " + std::to_string(levels[i]) +
                      " outside {1.." + std::to_string(num_levels) + "}");
    }
  }
  GroupedDataset ds;
  ds.domain_ = DiscreteDomain{num_levels};
  ds.index_ = GroupIndex::from_sizes(sizes);
  ds.levels_ = std::move(levels);
  return ds;
}

GroupedDataset GroupedDataset::from_groups(std::span<const PointSet> groups) {
  PointSet pooled;
  std::vector<std::size_t> sizes;
  sizes.reserve(groups.size());
  for (const auto& g : groups) {
    pooled.append(g);
    sizes.push_back(g.size());
  }
  return continuous(std::move(pooled), sizes);
}

std::size_t GroupedDataset::dim() const {
  if (const auto* c = std::get_if<ContinuousDomain>(&domain_)) return c->dim;
  throw Error(ErrorCode::kDomainMismatch, "discrete dataset has no dimension");
}

int GroupedDataset::num_levels() const {
  if (const auto* d = std::get_if<DiscreteDomain>(&domain_)) return d->levels;
  throw Error(ErrorCode::kDomainMismatch, "continuous dataset has no levels");
}

PointSet GroupedDataset::group_points(std::size_t k) const {
  const std::size_t d = dim();
  const auto& v = points_.values();
  return PointSet(d, std::vector<double>(v.begin() + index_.begin(k) * d,
                                         v.begin() + index_.end(k) * d));
}

RawDataset GroupedDataset::to_raw() const {
  RawDataset raw;
  raw.group_sizes = group_sizes();
  if (is_continuous()) {
    std::vector<std::vector<double>> obs;
    obs.reserve(size());
    for (std::size_t i = 0; i < size(); ++i) {
      auto p = point(i);
      obs.emplace_back(p.begin(), p.end());
    }
    raw.observations = std::move(obs);
  } else {
    raw.observations = levels_;
    raw.levels = num_levels();
  }
  return raw;
}

GroupedDataset validate_dataset(const RawDataset& raw) {
  if (const auto* pts = std::get_if<std::vector<std::vector<double>>>(&raw.observations)) {
    check_sizes(raw.group_sizes, pts->size());
    const std::size_t d = pts->front().size();
    if (d == 0) throw Error(ErrorCode::kDimensionMismatch, "observations have dimension 0");
    std::vector<double> flat;
    flat.reserve(pts->size() * d);
    for (std::size_t i = 0; i < pts->size(); ++i) {
      const auto& p = (*pts)[i];
      if (p.size() != d) {
        throw Error(ErrorCode::kDimensionMismatch, "observation " + std::to_string(i) +
                                                       " has dimension " +
                                                       std::to_string(p.size()) + ", expected " +
                                                       std::to_string(d));
      }
      flat.insert(flat.end(), p.begin(), p.end());
    }
    return GroupedDataset::continuous(PointSet(d, std::move(flat)), raw.group_sizes);
  }
  const auto& levels = std::get<std::vector<int>>(raw.observations);
  check_sizes(raw.group_sizes, levels.size());
  int m = raw.levels.value_or(0);
  if (!raw.levels) {
    for (int v : levels) m = std::max(m, v);
  }
  return GroupedDataset::discrete(levels, m, raw.group_sizes);
}

std::string_view to_string(StatisticKind kind) {
  switch (kind) {
    case StatisticKind::kMaxMmd: return "max_mmd";
    case StatisticKind::kWeightedMaxMmd: return "weighted_max_mmd";
    case StatisticKind::kDisco: return "disco";
    case StatisticKind::kEcf: return "ecf";
  }
  return "unknown";
}

std::string_view to_string(CalibrationMethod method) {
  switch (method) {
    case CalibrationMethod::kPermExact: return "perm_exact";
    case CalibrationMethod::kPermMonteCarlo: return "perm_mc";
    case CalibrationMethod::kBobkov: return "bobkov";
    case CalibrationMethod::kMcDiarmid: return "mcdiarmid";
    case CalibrationMethod::kGumbel: return "gumbel";
    case CalibrationMethod::kPhi2: return "phi2";
    case CalibrationMethod::kPhiK: return "phiK";
  }
  return "unknown";
}

StatisticKind parse_statistic_kind(std::string_view name) {
  if (name == "max_mmd" || name == "max") return StatisticKind::kMaxMmd;
  if (name == "weighted_max_mmd" || name == "weighted") return StatisticKind::kWeightedMaxMmd;
  if (name == "disco") return StatisticKind::kDisco;
  if (name == "ecf") return StatisticKind::kEcf;
  throw Error(ErrorCode::kInvalidArgument, "unknown statistic '" + std::string(name) + "'");
}

CalibrationMethod parse_calibration_method(std::string_view name) {
  if (name == "perm" || name == "perm_exact") return CalibrationMethod::kPermExact;
  if (name == "mc" || name == "perm_mc") return CalibrationMethod::kPermMonteCarlo;
  if (name == "bobkov") return CalibrationMethod::kBobkov;
  if (name == "mcdiarmid") return CalibrationMethod::kMcDiarmid;
  if (name == "gumbel") return CalibrationMethod::kGumbel;
  if (name == "phi2") return CalibrationMethod::kPhi2;
  if (name == "phiK") return CalibrationMethod::kPhiK;
  throw Error(ErrorCode::kInvalidArgument, "unknown method '" + std::string(name) + "'");
}

}  // namespace kmax
