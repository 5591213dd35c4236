#include "integrule/regression.hpp"

#include <cmath>

#include "integrule/error.hpp"

namespace integrule {

namespace {

double mean(std::span<const double> v) {
  double s = 0.0;
  for (double x : v) s += x;
  return s / static_cast<double>(v.size());
}

void check_sizes(std::size_t a, std::size_t b) {
  if (a != b) throw Error(ErrorCode::Regression, "regression inputs differ in length");
  if (a < 2) throw Error(ErrorCode::Regression, "regression needs n >= 2");
}

}  // namespace

RegressionSummary linear_regression(std::span<const double> xs, std::span<const double> ys) {
  check_sizes(xs.size(), ys.size());
  const double mx = mean(xs), my = mean(ys);
  double sxx = 0.0, sxy = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    const double dx = xs[i] - mx, dy = ys[i] - my;
    sxx += dx * dx;
    sxy += dx * dy;
    syy += dy * dy;
  }
  if (!(sxx > 0.0)) throw Error(ErrorCode::Regression, "zero variance in predictor");
  RegressionSummary s;
  s.n = xs.size();
  s.slope = sxy / sxx;
  s.intercept = my - s.slope * mx;
  if (syy > 0.0) {
    s.r = sxy / std::sqrt(sxx * syy);
    s.r = std::fmax(-1.0, std::fmin(1.0, s.r));
  }
  s.r_squared = s.r * s.r;
  s.weights = {s.slope};
  return s;
}

RegressionSummary linear_regression2(std::span<const double> x1, std::span<const double> x2,
                                     std::span<const double> ys) {
  check_sizes(x1.size(), ys.size());
  check_sizes(x2.size(), ys.size());
  const double m1 = mean(x1), m2 = mean(x2), my = mean(ys);
  double s11 = 0.0, s12 = 0.0, s22 = 0.0, s1y = 0.0, s2y = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < ys.size(); ++i) {
    const double d1 = x1[i] - m1, d2 = x2[i] - m2, dy = ys[i] - my;
    s11 += d1 * d1;
    s12 += d1 * d2;
    s22 += d2 * d2;
    s1y += d1 * dy;
    s2y += d2 * dy;
    syy += dy * dy;
  }
  const double det = s11 * s22 - s12 * s12;
  if (!(s11 > 0.0) || !(s22 > 0.0) || !(det > 1e-12 * s11 * s22))
    throw Error(ErrorCode::Regression, "collinear or constant predictors");
  RegressionSummary s;
  s.n = ys.size();
  const double w1 = (s22 * s1y - s12 * s2y) / det;
  const double w2 = (s11 * s2y - s12 * s1y) / det;
  s.weights = {w1, w2};
  s.slope = w1;
  s.intercept = my - w1 * m1 - w2 * m2;
  if (syy > 0.0) {
    double sse = 0.0;
    for (std::size_t i = 0; i < ys.size(); ++i) {
      const double r = ys[i] - (w1 * x1[i] + w2 * x2[i] + s.intercept);
      sse += r * r;
    }
    s.r_squared = std::fmax(0.0, std::fmin(1.0, 1.0 - sse / syy));
  }
  s.r = std::sqrt(s.r_squared);
  return s;
}

}  // namespace integrule
