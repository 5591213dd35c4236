#ifndef INTEGRULE_QUADRATURE_HPP
#define INTEGRULE_QUADRATURE_HPP

#include <cstddef>
#include <span>
#include <vector>

#include "integrule/expr.hpp"

namespace integrule {

struct QuadratureConfig {
  double T = 4.0;
  std::size_t n_points = 10000;

  void validate() const;
  double spacing() const { return T / static_cast<double>(n_points - 1); }
};

/// Ordinates on the uniform grid x_i = T*i/(n-1), i = 0..n-1.
class SampledCurve {
 public:
  SampledCurve(QuadratureConfig grid, std::vector<double> ys);

  const QuadratureConfig& grid() const noexcept { return grid_; }
  std::size_t size() const noexcept { return ys_.size(); }
  double x(std::size_t i) const noexcept;
  std::vector<double> xs() const;
  std::span<const double> ys() const noexcept { return ys_; }

 private:
  QuadratureConfig grid_;
  std::vector<double> ys_;
};

std::vector<double> uniform_grid(const QuadratureConfig& q);

/// Throws EvaluationError if any grid value is non-finite.
SampledCurve sample(const Expression& e, const QuadratureConfig& q);

/// Running trapezoid sum, g[0] = 0, g[i] = g[i-1] + (f[i-1] + f[i])/2 * dx.
/// Accumulated with compensated summation.
SampledCurve cumulative_trapezoid(const SampledCurve& f);

/// mean_i |g_i - h_i| / max(max|g|, max|h|); 0 when both curves are zero.
/// Throws Error(GridMismatch) for different grids.
double relative_diff(const SampledCurve& g, const SampledCurve& h);

}  // namespace integrule

#endif  // INTEGRULE_QUADRATURE_HPP
