#include "kmax/baselines.hpp"

#include <cmath>
#include <limits>

namespace kmax {
namespace {

void require_continuous(const GroupedDataset& data) {
  if (!data.is_continuous()) {
    throw Error(ErrorCode::kDomainMismatch, "baseline statistics need continuous data");
  }
}

double distance_power(std::span<const double> x, std::span<const double> y, double exponent) {
  const double d = std::sqrt(squared_distance(x, y));
  return exponent == 1.0 ? d : std::pow(d, exponent);
}

// Unrestricted double sum of f over group k x group l (diagonal included).
template <class F>
double cross_sum(const GroupedDataset& data, std::size_t k, std::size_t l, F&& f) {
  const auto& idx = data.index();
  double s = 0.0;
  for (std::size_t i = idx.begin(k); i < idx.end(k); ++i) {
    for (std::size_t j = idx.begin(l); j < idx.end(l); ++j) s += f(data.point(i), data.point(j));
  }
  return s;
}

}  // namespace

double energy_distance_pair(const GroupedDataset& data, std::size_t k, std::size_t l,
                            double exponent) {
  require_continuous(data);
  if (k >= data.num_groups() || l >= data.num_groups()) {
    throw Error(ErrorCode::kIndexOutOfRange, "group index out of range");
  }
  if (k == l) throw Error(ErrorCode::kSameGroup, "energy distance needs two groups");
  auto g = [exponent](auto x, auto y) { return distance_power(x, y, exponent); };
  const double nk = static_cast<double>(data.index().size(k));
  const double nl = static_cast<double>(data.index().size(l));
  return 2.0 / (nk * nl) * cross_sum(data, k, l, g) - cross_sum(data, k, k, g) / (nk * nk) -
         cross_sum(data, l, l, g) / (nl * nl);
}

double disco_statistic(const GroupedDataset& data, double exponent) {
  require_continuous(data);
  if (!(exponent > 0.0 && exponent <= 2.0)) {
    throw Error(ErrorCode::kInvalidArgument, "DISCO exponent must lie in (0, 2]");
  }
  const std::size_t K = data.num_groups();
  const std::size_t N = data.size();
  if (N <= K) throw Error(ErrorCode::kTooFewPoints, "DISCO needs N > K");
  auto g = [exponent](auto x, auto y) { return distance_power(x, y, exponent); };

  double between = 0.0;
  for (std::size_t k = 0; k < K; ++k) {
    for (std::size_t l = k + 1; l < K; ++l) between += energy_distance_pair(data, k, l, exponent);
  }
  between /= static_cast<double>(K);

  double within = 0.0;
  for (std::size_t k = 0; k < K; ++k) {
    within += cross_sum(data, k, k, g) / static_cast<double>(data.index().size(k));
  }
  within *= 0.5;
  if (within <= 0.0) {
    throw Error(ErrorCode::kZeroWithinDispersion, "every group is constant");
  }
  return (between / static_cast<double>(K - 1)) / (within / static_cast<double>(N - K));
}

double ecf_statistic(const GroupedDataset& data, double scale) {
  require_continuous(data);
  if (!(scale > 0.0)) throw Error(ErrorCode::kInvalidArgument, "ECF scale must be positive");
  const std::size_t K = data.num_groups();
  const double N = static_cast<double>(data.size());
  auto w = [scale](auto x, auto y) { return std::exp(-squared_distance(x, y) / (4.0 * scale)); };
  double within = 0.0;
  double across = 0.0;
  for (std::size_t k = 0; k < K; ++k) {
    const double nk = static_cast<double>(data.index().size(k));
    within += (N - nk) / (N * nk) * cross_sum(data, k, k, w);
    for (std::size_t l = 0; l < K; ++l) {
      if (l != k) across += cross_sum(data, k, l, w);
    }
  }
  return within - across / N;
}

GramMatrix disco_matrix(const GroupedDataset& data, double exponent) {
  require_continuous(data);
  return GramMatrix::from_function(data.size(), [&](std::size_t i, std::size_t j) {
    return i == j ? 0.0 : distance_power(data.point(i), data.point(j), exponent);
  });
}

GramMatrix ecf_matrix(const GroupedDataset& data, double scale) {
  require_continuous(data);
  return GramMatrix::from_function(data.size(), [&](std::size_t i, std::size_t j) {
    return std::exp(-squared_distance(data.point(i), data.point(j)) / (4.0 * scale));
  });
}

double disco_from_block_sums(const BlockSums& sums) {
  const std::size_t K = sums.num_groups();
  const double N = static_cast<double>(sums.total_size());
  double between = 0.0;
  for (std::size_t k = 0; k < K; ++k) {
    const double nk = static_cast<double>(sums.sizes()[k]);
    for (std::size_t l = k + 1; l < K; ++l) {
      const double nl = static_cast<double>(sums.sizes()[l]);
      between += 2.0 * sums(k, l) / (nk * nl) - sums(k, k) / (nk * nk) - sums(l, l) / (nl * nl);
    }
  }
  between /= static_cast<double>(K);
  double within = 0.0;
  for (std::size_t k = 0; k < K; ++k) within += sums(k, k) / static_cast<double>(sums.sizes()[k]);
  within *= 0.5;
  if (within <= 0.0) return between > 0.0 ? std::numeric_limits<double>::infinity() : 0.0;
  return (between / static_cast<double>(K - 1)) / (within / (N - static_cast<double>(K)));
}

double ecf_from_block_sums(const BlockSums& sums) {
  const std::size_t K = sums.num_groups();
  const double N = static_cast<double>(sums.total_size());
  double within = 0.0;
  double across = 0.0;
  for (std::size_t k = 0; k < K; ++k) {
    const double nk = static_cast<double>(sums.sizes()[k]);
    within += (N - nk) / (N * nk) * sums(k, k);
    for (std::size_t l = 0; l < K; ++l) {
      if (l != k) across += sums(k, l);
    }
  }
  return within - across / N;
}

}  // namespace kmax
