#include "integrule/quadrature.hpp"

#include <algorithm>
#include <cmath>

namespace integrule {

void QuadratureConfig::validate() const {
  if (!(T > 0.0) || !std::isfinite(T)) throw Error(ErrorCode::Config, "T must be positive");
  if (n_points < 2) throw Error(ErrorCode::Config, "n_points must be >= 2");
}

SampledCurve::SampledCurve(QuadratureConfig grid, std::vector<double> ys)
    : grid_(grid), ys_(std::move(ys)) {
  grid_.validate();
  if (ys_.size() != grid_.n_points)
    throw Error(ErrorCode::InvalidArgument, "ordinate count does not match grid");
  for (std::size_t i = 0; i < ys_.size(); ++i)
    if (!std::isfinite(ys_[i])) throw EvaluationError(x(i));
}

double SampledCurve::x(std::size_t i) const noexcept {
  // Exact endpoints: x_0 = 0 and x_{n-1} = T.
  return grid_.T * static_cast<double>(i) / static_cast<double>(grid_.n_points - 1);
}

std::vector<double> SampledCurve::xs() const { return uniform_grid(grid_); }

std::vector<double> uniform_grid(const QuadratureConfig& q) {
  q.validate();
  std::vector<double> xs(q.n_points);
  for (std::size_t i = 0; i < xs.size(); ++i)
    xs[i] = q.T * static_cast<double>(i) / static_cast<double>(q.n_points - 1);
  return xs;
}

SampledCurve sample(const Expression& e, const QuadratureConfig& q) {
  const auto xs = uniform_grid(q);
  std::vector<double> ys(xs.size());
  for (std::size_t i = 0; i < xs.size(); ++i) ys[i] = evaluate(e, xs[i]);
  return SampledCurve(q, std::move(ys));
}

SampledCurve cumulative_trapezoid(const SampledCurve& f) {
  const auto y = f.ys();
  const double half_dx = 0.5 * f.grid().spacing();
  std::vector<double> g(y.size());
  g[0] = 0.0;
  double sum = 0.0, comp = 0.0;  // Neumaier
  for (std::size_t i = 1; i < y.size(); ++i) {
    const double term = (y[i - 1] + y[i]) * half_dx;
    const double t = sum + term;
    if (std::fabs(sum) >= std::fabs(term))
      comp += (sum - t) + term;
    else
      comp += (term - t) + sum;
    sum = t;
    g[i] = sum + comp;
  }
  return SampledCurve(f.grid(), std::move(g));
}

double relative_diff(const SampledCurve& g, const SampledCurve& h) {
  if (g.grid().n_points != h.grid().n_points || g.grid().T != h.grid().T)
    throw Error(ErrorCode::GridMismatch, "relative_diff needs identical grids");
  const auto a = g.ys();
  const auto b = h.ys();
  double max_abs = 0.0, gap = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    max_abs = std::max({max_abs, std::fabs(a[i]), std::fabs(b[i])});
    gap += std::fabs(a[i] - b[i]);
  }
  if (max_abs == 0.0) return 0.0;
  return gap / static_cast<double>(a.size()) / max_abs;
}

}  // namespace integrule
