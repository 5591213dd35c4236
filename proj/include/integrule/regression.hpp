#ifndef INTEGRULE_REGRESSION_HPP
#define INTEGRULE_REGRESSION_HPP

#include <cstddef>
#include <span>
#include <vector>

namespace integrule {

struct RegressionSummary {
  double r = 0.0;  // signed Pearson r; multiple correlation R for two predictors
  double slope = 0.0;
  double intercept = 0.0;
  double r_squared = 0.0;
  std::size_t n = 0;
  std::vector<double> weights;  // one per predictor; weights[0] == slope
};

/// Ordinary least squares of ys on xs. Throws Error(Regression) when n < 2,
/// the lengths differ, or xs has zero variance. A constant ys gives r = 0.
RegressionSummary linear_regression(std::span<const double> xs, std::span<const double> ys);

/// ys ~ w1*x1 + w2*x2 + intercept. r_squared is the coefficient of
/// determination. Throws Error(Regression) on collinear or constant predictors.
RegressionSummary linear_regression2(std::span<const double> x1, std::span<const double> x2,
                                     std::span<const double> ys);

}  // namespace integrule

#endif  // INTEGRULE_REGRESSION_HPP
