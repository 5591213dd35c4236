#ifndef INTEGRULE_SYMFIT_HPP
#define INTEGRULE_SYMFIT_HPP

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "integrule/expr.hpp"
#include "integrule/quadrature.hpp"

namespace integrule {

/// Template fitter settings. The fitter recovers a closed form for a sampled
/// integral curve from a fixed candidate set: POLY(1..7) plus the three
/// transcendental integral forms.
struct FitterConfig {
  double epsilon = 0.01;  // acceptance threshold on rel_error
  // Absolute rel_error slack within which a template with fewer free
  // coefficients wins.
  double simplicity_margin = 1e-6;
  std::size_t rate_grid_points = 481;
  double rate_min = 0.05;  // grid covers [-rate_max, -rate_min] U [rate_min, rate_max]
  double rate_max = 12.0;
  int refine_iters = 25;
  double refine_tol = 1e-9;
  // The rate scan runs on at most this many evenly strided grid points;
  // refinement always uses the full grid.
  std::size_t scan_points = 500;

  void validate() const;
  std::vector<double> rate_grid() const;
};

struct FitResult {
  Template fitted_template = Template::poly(0);
  Expression expression = Expression::zero();      // rounded
  Expression raw_expression = Expression::zero();  // as fitted
  double rel_error = 0.0;
  int free_coefficient_count = 0;
};

/// Candidates in tie-break order.
std::vector<Template> candidate_templates();

int free_coefficient_count(const Template& t);

/// Least-squares fit of one template. Polynomials are linear least squares
/// on the monomial basis; transcendental forms scan the rate grid with the
/// outer coefficients profiled out, then refine all four free coefficients by
/// damped Gauss-Newton. The phase slot stays 0. Throws Error(Fit) when the
/// problem is singular or the rounded result is degenerate.
FitResult fit_template(const Template& t, const SampledCurve& curve, const FitterConfig& cfg,
                       RoundingPolicy rounding = {});

/// Best candidate: among fits within simplicity_margin of the lowest
/// rel_error, the one with fewest free coefficients, then lowest polynomial
/// degree, then candidate order. Throws Error(Fit) when every template fails.
FitResult fit_best(const SampledCurve& curve, const FitterConfig& cfg, RoundingPolicy rounding = {});

struct IntegralPair {
  std::size_t id = 0;
  Expression f = Expression::zero();
  Expression g = Expression::zero();
  double rel_error = 0.0;
};

struct FilterOutcome {
  bool accepted = false;
  std::string reason;  // empty when accepted
  std::optional<IntegralPair> pair;
};

/// Accepts iff fit.rel_error <= epsilon. The accepted integral uses the
/// rounded coefficients; for sin/cos pairs its rate sign is aligned with the
/// source's rate (cos(-u) = cos(u), sin(-u) = -sin(u)).
FilterOutcome filter_pair(std::size_t id, const Expression& f, const FitResult& fit,
                          const FitterConfig& cfg);

/// Same function as `g`, rewritten so its oscillator rate has the sign of
/// `reference`'s rate. Identity unless both are sin/cos forms.
Expression align_rate_sign(const Expression& g, const Expression& reference);

bool exact_correct(const Expression& g, const Expression& g_hat, RoundingPolicy rounding = {});
bool approx_correct(const Expression& g, const Expression& g_hat, const QuadratureConfig& q,
                    double epsilon);

}  // namespace integrule

#endif  // INTEGRULE_SYMFIT_HPP
