#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace banditlab::stats {

// Neumaier-compensated running sum.
class CompensatedSum {
 public:
  void add(double x);
  double value() const { return sum_ + comp_; }

 private:
  double sum_ = 0.0;
  double comp_ = 0.0;
};

// Sorts a copy of the values, then sums pairwise. The result depends only on
// the multiset of values, not on their order.
double sorted_pairwise_sum(std::span<const double> values);

struct MeanSe {
  double mean = 0.0;
  double stderr_mean = 0.0;  // sample std / sqrt(count)
  std::size_t count = 0;
};

// Order-independent mean and standard error.
MeanSe mean_and_stderr(std::span<const double> values);

struct LinearFit {
  double slope = 0.0;
  double intercept = 0.0;
  double slope_stderr = 0.0;
  double slope_ci_low = 0.0;
  double slope_ci_high = 0.0;
  std::vector<double> residuals;
};

// Ordinary least squares of y on x with a two-sided 95% t interval for the
// slope. Needs at least three points for the interval; with two it is
// degenerate (zero width).
LinearFit ols(std::span<const double> x, std::span<const double> y);

}  // namespace banditlab::stats
