#pragma once

// Kernel families, the median-heuristic bandwidth, dense Gram matrices and
// the induced squared distance h~(i, j) = h(i,i) + h(j,j) - 2 h(i,j).

#include <cstddef>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "kmax/core.hpp"

namespace kmax {

enum class KernelFamily { kGaussian, kEnergyDistance, kLinear, kChiSquare };

std::string_view to_string(KernelFamily family);
KernelFamily parse_kernel_family(std::string_view name);

struct KernelSpec {
  KernelFamily family = KernelFamily::kGaussian;
  /// Gaussian sigma in exp(-|x-y|^2 / sigma); empty means "median heuristic".
  std::optional<double> bandwidth;
  /// Level probabilities p_1..p_m of the chi-square kernel.
  std::vector<double> probs;
  /// User-asserted bound 0 <= h <= B.
  std::optional<double> bound_B;

  static KernelSpec gaussian(double sigma);
  static KernelSpec gaussian_median();
  static KernelSpec energy_distance();
  static KernelSpec linear();
  static KernelSpec chi_square(std::vector<double> probs);
  static KernelSpec chi_square_uniform(int levels);

  bool resolved() const { return family != KernelFamily::kGaussian || bandwidth.has_value(); }
  bool operator==(const KernelSpec&) const = default;
};

/// Throws kInvalidArgument / kInvalidSimplex when the spec breaks its invariants.
void validate(const KernelSpec& spec);

/// Continuous-domain evaluation. Throws kDomainMismatch for chi_square.
double kernel_eval(const KernelSpec& spec, std::span<const double> x, std::span<const double> y);
/// Discrete-domain evaluation (levels are 1-based). Only chi_square applies.
double kernel_eval(const KernelSpec& spec, int x, int y);

double squared_distance(std::span<const double> x, std::span<const double> y);

/// Median of |Z_i - Z_j|^2 over unordered pairs i < j; the mean of the two
/// middle order statistics when the pair count is even.
double median_heuristic(const PointSet& points);
double median_heuristic(const GroupedDataset& data);

/// Fills in the median-heuristic bandwidth against the pooled sample.
KernelSpec resolve(KernelSpec spec, const GroupedDataset& data);

class GramMatrix {
 public:
  GramMatrix() = default;

  /// Evaluates f(i, j) for i <= j and mirrors; rows are filled in parallel.
  static GramMatrix from_function(std::size_t n,
                                  const std::function<double(std::size_t, std::size_t)>& f,
                                  std::optional<KernelSpec> kernel = std::nullopt);

  std::size_t size() const noexcept { return n_; }
  double operator()(std::size_t i, std::size_t j) const { return values_[i * n_ + j]; }
  std::span<const double> row(std::size_t i) const { return {values_.data() + i * n_, n_}; }
  double grand_sum() const;

  /// The resolved kernel, absent for baseline dissimilarity matrices.
  const std::optional<KernelSpec>& kernel() const noexcept { return kernel_; }

 private:
  std::size_t n_ = 0;
  std::vector<double> values_;
  std::optional<KernelSpec> kernel_;
};

/// Builds G[i][j] = h(Z_i, Z_j). A median-heuristic bandwidth is resolved
/// against the pooled sample first; the resolved spec is stored in the result.
GramMatrix gram_matrix(const KernelSpec& spec, const GroupedDataset& data);
GramMatrix gram_matrix(const KernelSpec& spec, const PointSet& points);

/// G[i][i] + G[j][j] - 2 G[i][j], clamped at zero.
double tilde_h(const GramMatrix& gram, std::size_t i, std::size_t j);

}  // namespace kmax
