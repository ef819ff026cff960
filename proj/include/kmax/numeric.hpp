#pragma once

#include <span>
#include <vector>

namespace kmax {

/// Correctly rounded floating-point summation (Shewchuk's partials). The
/// result does not depend on the order in which terms are added.
class ExactSum {
 public:
  void add(double x);
  double value() const;

 private:
  std::vector<double> partials_;
};

double exact_sum(std::span<const double> values);

}  // namespace kmax
