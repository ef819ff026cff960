#include "kmax/kernels.hpp"

#include <algorithm>
#include <cmath>

#include "kmax/numeric.hpp"
#include "kmax/parallel.hpp"

namespace kmax {

std::string_view to_string(KernelFamily family) {
  switch (family) {
    case KernelFamily::kGaussian: return "gaussian";
    case KernelFamily::kEnergyDistance: return "energy";
    case KernelFamily::kLinear: return "linear";
    case KernelFamily::kChiSquare: return "chisquare";
  }
  return "unknown";
}

KernelFamily parse_kernel_family(std::string_view name) {
  if (name == "gaussian") return KernelFamily::kGaussian;
  if (name == "energy" || name == "energy_distance") return KernelFamily::kEnergyDistance;
  if (name == "linear") return KernelFamily::kLinear;
  if (name == "chisquare" || name == "chi_square") return KernelFamily::kChiSquare;
  throw Error(ErrorCode::kInvalidArgument, "unknown kernel '" + std::string(name) + "'");
}

KernelSpec KernelSpec::gaussian(double sigma) {
  KernelSpec s;
  s.family = KernelFamily::kGaussian;
  s.bandwidth = sigma;
  validate(s);
  return s;
}

KernelSpec KernelSpec::gaussian_median() {
  KernelSpec s;
  s.family = KernelFamily::kGaussian;
  return s;
}

KernelSpec KernelSpec::energy_distance() {
  KernelSpec s;
  s.family = KernelFamily::kEnergyDistance;
  return s;
}

KernelSpec KernelSpec::linear() {
  KernelSpec s;
  s.family = KernelFamily::kLinear;
  return s;
}

KernelSpec KernelSpec::chi_square(std::vector<double> probs) {
  KernelSpec s;
  s.family = KernelFamily::kChiSquare;
  s.probs = std::move(probs);
  validate(s);
  return s;
}

KernelSpec KernelSpec::chi_square_uniform(int levels) {
  if (levels < 1) throw Error(ErrorCode::kInvalidSimplex, "need at least one level");
  return chi_square(std::vector<double>(static_cast<std::size_t>(levels), 1.0 / levels));
}

void validate(const KernelSpec& spec) {
  if (spec.bandwidth && !(*spec.bandwidth > 0.0 && std::isfinite(*spec.bandwidth))) {
    throw Error(ErrorCode::kInvalidArgument, "gaussian bandwidth must be positive");
  }
  if (spec.bound_B && !(*spec.bound_B > 0.0)) {
    throw Error(ErrorCode::kInvalidArgument, "bound B must be positive");
  }
  if (spec.family == KernelFamily::kChiSquare) {
    if (spec.probs.empty()) throw Error(ErrorCode::kInvalidSimplex, "empty probability vector");
    double total = 0.0;
    for (double p : spec.probs) {
      if (!(p > 0.0)) throw Error(ErrorCode::kInvalidSimplex, "level probabilities must be > 0");
      total += p;
    }
    if (std::fabs(total - 1.0) > 1e-9) {
      throw Error(ErrorCode::kInvalidSimplex, "level probabilities sum to " + std::to_string(total));
    }
  }
}

double squared_distance(std::span<const double> x, std::span<const double> y) {
  double s = 0.0;
  for (std::size_t k = 0; k < x.size(); ++k) {
    const double d = x[k] - y[k];
    s += d * d;
  }
  return s;
}

namespace {

double norm(std::span<const double> x) {
  double s = 0.0;
  for (double v : x) s += v * v;
  return std::sqrt(s);
}

}  // namespace

double kernel_eval(const KernelSpec& spec, std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size()) {
    throw Error(ErrorCode::kDimensionMismatch, "kernel arguments differ in dimension");
  }
  switch (spec.family) {
    case KernelFamily::kGaussian:
      if (!spec.bandwidth) {
        throw Error(ErrorCode::kInvalidArgument, "gaussian bandwidth not resolved");
      }
      return std::exp(-squared_distance(x, y) / *spec.bandwidth);
    case KernelFamily::kEnergyDistance:
      // Sum the norms first so that the expression is symmetric in (x, y).
      return 0.5 * ((norm(x) + norm(y)) - std::sqrt(squared_distance(x, y)));
    case KernelFamily::kLinear: {
      double s = 0.0;
      for (std::size_t k = 0; k < x.size(); ++k) s += x[k] * y[k];
      return s;
    }
    case KernelFamily::kChiSquare:
      throw Error(ErrorCode::kDomainMismatch, "chi-square kernel needs discrete data");
  }
  return 0.0;
}

double kernel_eval(const KernelSpec& spec, int x, int y) {
  if (spec.family != KernelFamily::kChiSquare) {
    throw Error(ErrorCode::kDomainMismatch,
                std::string(to_string(spec.family)) + " kernel needs continuous data");
  }
  const int m = static_cast<int>(spec.probs.size());
  if (x < 1 || x > m || y < 1 || y > m) {
    throw Error(ErrorCode::kDiscreteOutOfRange, "level outside the kernel's support");
  }
  return x == y ? 1.0 / spec.probs[static_cast<std::size_t>(x - 1)] : 0.0;
}

double median_heuristic(const PointSet& points) {
  const std::size_t n = points.size();
  if (n < 2) throw Error(ErrorCode::kTooFewPoints, "median heuristic needs at least 2 points");
  std::vector<double> d;
  d.reserve(n * (n - 1) / 2);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) d.push_back(squared_distance(points[i], points[j]));
  }
  const std::size_t mid = d.size() / 2;
  std::nth_element(d.begin(), d.begin() + mid, d.end());
  double med = d[mid];
  if (d.size() % 2 == 0) {
    const double lower = *std::max_element(d.begin(), d.begin() + mid);
    med = 0.5 * (lower + med);
  }
  if (med <= 0.0) {
    if (*std::max_element(d.begin(), d.end()) <= 0.0) {
      throw Error(ErrorCode::kAllPointsIdentical, "all points coincide; no valid bandwidth");
    }
    // More than half of the pairs are duplicates: use the smallest positive
    // squared distance so the bandwidth stays valid.
    double smallest = 0.0;
    for (double v : d) {
      if (v > 0.0 && (smallest == 0.0 || v < smallest)) smallest = v;
    }
    med = smallest;
  }
  return med;
}

double median_heuristic(const GroupedDataset& data) {
  if (!data.is_continuous()) {
    throw Error(ErrorCode::kDomainMismatch, "median heuristic needs continuous data");
  }
  return median_heuristic(data.points());
}

KernelSpec resolve(KernelSpec spec, const GroupedDataset& data) {
  if (!spec.resolved()) spec.bandwidth = median_heuristic(data);
  validate(spec);
  return spec;
}

GramMatrix GramMatrix::from_function(std::size_t n,
                                     const std::function<double(std::size_t, std::size_t)>& f,
                                     std::optional<KernelSpec> kernel) {
  GramMatrix g;
  g.n_ = n;
  g.values_.assign(n * n, 0.0);
  g.kernel_ = std::move(kernel);
  double* v = g.values_.data();
  parallel_for(n, [&](std::size_t i) {
    for (std::size_t j = i; j < n; ++j) v[i * n + j] = f(i, j);
  });
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < i; ++j) v[i * n + j] = v[j * n + i];
  }
  return g;
}

double GramMatrix::grand_sum() const { return exact_sum(values_); }

GramMatrix gram_matrix(const KernelSpec& spec, const GroupedDataset& data) {
  if (data.is_continuous()) {
    if (spec.family == KernelFamily::kChiSquare) {
      throw Error(ErrorCode::kDomainMismatch, "chi-square kernel needs discrete data");
    }
    KernelSpec resolved = resolve(spec, data);
    return GramMatrix::from_function(
        data.size(),
        [&](std::size_t i, std::size_t j) { return kernel_eval(resolved, data.point(i), data.point(j)); },
        resolved);
  }
  if (spec.family != KernelFamily::kChiSquare) {
    throw Error(ErrorCode::kDomainMismatch,
                std::string(to_string(spec.family)) + " kernel needs continuous data");
  }
  validate(spec);
  if (static_cast<int>(spec.probs.size()) < data.num_levels()) {
    throw Error(ErrorCode::kDiscreteOutOfRange, "data has more levels than the kernel's simplex");
  }
  return GramMatrix::from_function(
      data.size(),
      [&](std::size_t i, std::size_t j) { return kernel_eval(spec, data.level(i), data.level(j)); },
      spec);
}

GramMatrix gram_matrix(const KernelSpec& spec, const PointSet& points) {
  if (!spec.resolved()) {
    throw Error(ErrorCode::kInvalidArgument, "resolve the gaussian bandwidth before building");
  }
  validate(spec);
  return GramMatrix::from_function(
      points.size(),
      [&](std::size_t i, std::size_t j) { return kernel_eval(spec, points[i], points[j]); }, spec);
}

double tilde_h(const GramMatrix& gram, std::size_t i, std::size_t j) {
  if (i >= gram.size() || j >= gram.size()) {
    throw Error(ErrorCode::kIndexOutOfRange, "index outside the Gram matrix");
  }
  if (i == j) return 0.0;
  return std::max(0.0, gram(i, i) + gram(j, j) - 2.0 * gram(i, j));
}

}  // namespace kmax
