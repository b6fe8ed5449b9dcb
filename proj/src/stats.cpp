#include "banditlab/stats.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include <boost/math/distributions/students_t.hpp>

namespace banditlab::stats {

void CompensatedSum::add(double x) {
  const double t = sum_ + x;
  if (std::abs(sum_) >= std::abs(x)) {
    comp_ += (sum_ - t) + x;
  } else {
    comp_ += (x - t) + sum_;
  }
  sum_ = t;
}

namespace {

double pairwise(std::span<const double> v) {
  if (v.size() <= 8) {
    double s = 0.0;
    for (double x : v) s += x;
    return s;
  }
  const std::size_t half = v.size() / 2;
  return pairwise(v.first(half)) + pairwise(v.subspan(half));
}

}  // namespace

double sorted_pairwise_sum(std::span<const double> values) {
  std::vector<double> sorted(values.begin(), values.end());
  std::sort(sorted.begin(), sorted.end());
  return pairwise(sorted);
}

MeanSe mean_and_stderr(std::span<const double> values) {
  MeanSe r;
  r.count = values.size();
  if (values.empty()) return r;
  const double n = static_cast<double>(values.size());
  r.mean = sorted_pairwise_sum(values) / n;
  if (values.size() < 2) return r;
  std::vector<double> sq(values.size());
  std::transform(values.begin(), values.end(), sq.begin(), [&](double x) {
    const double d = x - r.mean;
    return d * d;
  });
  const double var = sorted_pairwise_sum(sq) / (n - 1.0);
  r.stderr_mean = std::sqrt(var / n);
  return r;
}

LinearFit ols(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size() || x.size() < 2) {
    throw std::invalid_argument("ols: need at least two paired points");
  }
  const double n = static_cast<double>(x.size());
  double mx = 0.0;
  double my = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= n;
  my /= n;
  double sxx = 0.0;
  double sxy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
  }
  if (sxx == 0.0) throw std::invalid_argument("ols: x values are all equal");

  LinearFit fit;
  fit.slope = sxy / sxx;
  fit.intercept = my - fit.slope * mx;
  double sse = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double r = y[i] - (fit.intercept + fit.slope * x[i]);
    fit.residuals.push_back(r);
    sse += r * r;
  }
  if (x.size() > 2) {
    const double dof = n - 2.0;
    fit.slope_stderr = std::sqrt(sse / dof / sxx);
    const boost::math::students_t dist(dof);
    const double q = boost::math::quantile(dist, 0.975);
    fit.slope_ci_low = fit.slope - q * fit.slope_stderr;
    fit.slope_ci_high = fit.slope + q * fit.slope_stderr;
  } else {
    fit.slope_ci_low = fit.slope_ci_high = fit.slope;
  }
  return fit;
}

}  // namespace banditlab::stats
