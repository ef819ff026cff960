#include "kmax/statistics.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "kmax/numeric.hpp"

namespace kmax {

BlockSums::BlockSums(std::vector<std::size_t> sizes, std::vector<double> sums)
    : sizes_(std::move(sizes)), sums_(std::move(sums)) {
  if (sums_.size() != sizes_.size() * sizes_.size()) {
    throw Error(ErrorCode::kInvalidArgument, "block sum matrix must be K x K");
  }
}

std::size_t BlockSums::total_size() const {
  return std::accumulate(sizes_.begin(), sizes_.end(), std::size_t{0});
}

namespace {

void check_labels(std::span<const std::uint32_t> labels, std::span<const std::size_t> sizes) {
  std::vector<std::size_t> counts(sizes.size(), 0);
  for (auto g : labels) {
    if (g >= sizes.size()) throw Error(ErrorCode::kIndexOutOfRange, "group label out of range");
    ++counts[g];
  }
  if (!std::equal(counts.begin(), counts.end(), sizes.begin())) {
    throw Error(ErrorCode::kInvalidArgument, "labels do not match the group sizes");
  }
}

}  // namespace

BlockSums block_sums(const GramMatrix& gram, std::span<const std::uint32_t> labels,
                     std::span<const std::size_t> sizes) {
  const std::size_t n = gram.size();
  const std::size_t K = sizes.size();
  if (labels.size() != n) {
    throw Error(ErrorCode::kIndexOutOfRange, "label count differs from the Gram dimension");
  }
  check_labels(labels, sizes);

  std::vector<double> s(K * K, 0.0);
  std::vector<double> acc(K);
  const std::uint32_t* lab = labels.data();
  for (std::size_t i = 0; i < n; ++i) {
    std::fill(acc.begin(), acc.end(), 0.0);
    const double* row = gram.row(i).data();
    for (std::size_t j = i + 1; j < n; ++j) acc[lab[j]] += row[j];
    const std::size_t a = lab[i];
    s[a * K + a] += row[i];
    for (std::size_t g = 0; g < K; ++g) {
      s[a * K + g] += acc[g];
      s[g * K + a] += acc[g];
    }
  }
  return BlockSums({sizes.begin(), sizes.end()}, std::move(s));
}

BlockSums block_sums(const GramMatrix& gram, const GroupIndex& index) {
  if (index.total() != gram.size()) {
    throw Error(ErrorCode::kIndexOutOfRange, "group index does not match the Gram dimension");
  }
  // Exactly rounded per-block sums: the result does not depend on the order
  // of observations inside a group.
  const std::size_t K = index.num_groups();
  std::vector<double> s(K * K, 0.0);
  for (std::size_t k = 0; k < K; ++k) {
    for (std::size_t l = k; l < K; ++l) {
      ExactSum acc;
      for (std::size_t i = index.begin(k); i < index.end(k); ++i) {
        const double* row = gram.row(i).data();
        for (std::size_t j = index.begin(l); j < index.end(l); ++j) acc.add(row[j]);
      }
      s[k * K + l] = s[l * K + k] = acc.value();
    }
  }
  return BlockSums(index.sizes(), std::move(s));
}

BlockSums chisquare_block_sums(std::span<const int> levels, std::span<const std::uint32_t> labels,
                               std::span<const std::size_t> sizes, std::span<const double> probs) {
  const std::size_t K = sizes.size();
  const std::size_t m = probs.size();
  if (levels.size() != labels.size()) {
    throw Error(ErrorCode::kInvalidArgument, "levels and labels differ in length");
  }
  check_labels(labels, sizes);
  std::vector<double> counts(K * m, 0.0);
  for (std::size_t i = 0; i < levels.size(); ++i) {
    const int v = levels[i];
    if (v < 1 || static_cast<std::size_t>(v) > m) {
      throw Error(ErrorCode::kDiscreteOutOfRange, "level outside the kernel's support");
    }
    counts[labels[i] * m + static_cast<std::size_t>(v - 1)] += 1.0;
  }
  std::vector<double> s(K * K, 0.0);
  for (std::size_t k = 0; k < K; ++k) {
    for (std::size_t l = k; l < K; ++l) {
      double acc = 0.0;
      for (std::size_t v = 0; v < m; ++v) acc += counts[k * m + v] * counts[l * m + v] / probs[v];
      s[k * K + l] = acc;
      s[l * K + k] = acc;
    }
  }
  return BlockSums({sizes.begin(), sizes.end()}, std::move(s));
}

BlockSums chisquare_block_sums(const GroupedDataset& data, std::span<const double> probs) {
  if (data.is_continuous()) {
    throw Error(ErrorCode::kDomainMismatch, "chi-square kernel needs discrete data");
  }
  const auto labels = data.index().labels();
  const auto sizes = data.group_sizes();
  return chisquare_block_sums(data.levels(), labels, sizes, probs);
}

double mmd_squared_pair_raw(const BlockSums& sums, std::size_t k, std::size_t l) {
  const std::size_t K = sums.num_groups();
  if (k >= K || l >= K) throw Error(ErrorCode::kIndexOutOfRange, "group index out of range");
  if (k == l) throw Error(ErrorCode::kSameGroup, "MMD needs two distinct groups");
  const double nk = static_cast<double>(sums.sizes()[k]);
  const double nl = static_cast<double>(sums.sizes()[l]);
  // Symmetric in (k, l): the first two terms commute exactly.
  return (sums(k, k) / (nk * nk) + sums(l, l) / (nl * nl)) - 2.0 * sums(k, l) / (nk * nl);
}

double mmd_squared_pair(const BlockSums& sums, std::size_t k, std::size_t l) {
  return std::max(0.0, mmd_squared_pair_raw(sums, k, l));
}

MaxMmd max_mmd(const BlockSums& sums) {
  const std::size_t K = sums.num_groups();
  if (K < 2) throw Error(ErrorCode::kTooFewGroups, "max MMD needs at least 2 groups");
  MaxMmd best;
  double best_sq = -1.0;
  for (std::size_t k = 0; k < K; ++k) {
    for (std::size_t l = k + 1; l < K; ++l) {
      const double v = mmd_squared_pair(sums, k, l);
      if (v > best_sq) {
        best_sq = v;
        best.k = k;
        best.l = l;
      }
    }
  }
  best.value = std::sqrt(best_sq);
  return best;
}

MaxMmd max_mmd(const GramMatrix& gram, const GroupIndex& index) {
  return max_mmd(block_sums(gram, index));
}

double weighted_max_mmd(const BlockSums& sums) {
  const std::size_t K = sums.num_groups();
  if (K < 2) throw Error(ErrorCode::kTooFewGroups, "max MMD needs at least 2 groups");
  double best = 0.0;
  for (std::size_t k = 0; k < K; ++k) {
    for (std::size_t l = k + 1; l < K; ++l) {
      const double nk = static_cast<double>(sums.sizes()[k]);
      const double nl = static_cast<double>(sums.sizes()[l]);
      best = std::max(best, nk * nl / (nk + nl) * mmd_squared_pair(sums, k, l));
    }
  }
  return best;
}

double weighted_max_mmd(const GramMatrix& gram, const GroupIndex& index) {
  return weighted_max_mmd(block_sums(gram, index));
}

namespace {

template <class Eval>
double bruteforce(std::size_t nx, std::size_t ny, Eval&& h) {
  double xx = 0.0, yy = 0.0, xy = 0.0;
  for (std::size_t i = 0; i < nx; ++i)
    for (std::size_t j = 0; j < nx; ++j) xx += h(0, i, 0, j);
  for (std::size_t i = 0; i < ny; ++i)
    for (std::size_t j = 0; j < ny; ++j) yy += h(1, i, 1, j);
  for (std::size_t i = 0; i < nx; ++i)
    for (std::size_t j = 0; j < ny; ++j) xy += h(0, i, 1, j);
  const double a = static_cast<double>(nx);
  const double b = static_cast<double>(ny);
  const double v2 = xx / (a * a) + yy / (b * b) - 2.0 * xy / (a * b);
  return std::sqrt(std::max(0.0, v2));
}

}  // namespace

double mmd_bruteforce_oracle(const KernelSpec& spec, const PointSet& x, const PointSet& y) {
  if (x.empty() || y.empty()) throw Error(ErrorCode::kTooFewPoints, "samples must be nonempty");
  if (!spec.resolved()) throw Error(ErrorCode::kInvalidArgument, "unresolved bandwidth");
  const PointSet* s[2] = {&x, &y};
  return bruteforce(x.size(), y.size(), [&](int a, std::size_t i, int b, std::size_t j) {
    return kernel_eval(spec, (*s[a])[i], (*s[b])[j]);
  });
}

double mmd_bruteforce_oracle(const KernelSpec& spec, std::span<const int> x, std::span<const int> y) {
  if (x.empty() || y.empty()) throw Error(ErrorCode::kTooFewPoints, "samples must be nonempty");
  const std::span<const int> s[2] = {x, y};
  return bruteforce(x.size(), y.size(), [&](int a, std::size_t i, int b, std::size_t j) {
    return kernel_eval(spec, s[a][i], s[b][j]);
  });
}

}  // namespace kmax
