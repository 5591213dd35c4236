#include "integrule/symfit.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <limits>

namespace integrule {

void FitterConfig::validate() const {
  auto bad = [](const std::string& what) { throw Error(ErrorCode::Config, what); };
  if (!(epsilon > 0.0)) bad("epsilon must be > 0");
  if (!(simplicity_margin >= 0.0)) bad("simplicity_margin must be >= 0");
  if (rate_grid_points < 2) bad("rate grid needs at least 2 points");
  if (!(rate_min > 0.0) || !(rate_max > rate_min)) bad("rate grid needs 0 < rate_min < rate_max");
  if (refine_iters < 0) bad("refine_iters must be >= 0");
  if (!(refine_tol > 0.0)) bad("refine_tol must be > 0");
  if (scan_points < 8) bad("scan_points must be >= 8");
}

std::vector<double> FitterConfig::rate_grid() const {
  // Evenly spaced over the two half-intervals laid end to end.
  const double half = rate_max - rate_min;
  const double total = 2.0 * half;
  std::vector<double> grid(rate_grid_points);
  for (std::size_t k = 0; k < rate_grid_points; ++k) {
    const double t = total * static_cast<double>(k) / static_cast<double>(rate_grid_points - 1);
    grid[k] = t <= half ? -rate_max + t : rate_min + (t - half);
  }
  return grid;
}

std::vector<Template> candidate_templates() {
  std::vector<Template> out;
  for (int d = 1; d <= kMaxPolyDegree; ++d) out.push_back(Template::poly(d));
  out.push_back(Template::sin_integral_form());
  out.push_back(Template::cos_integral_form());
  out.push_back(Template::exp_integral_form());
  return out;
}

int free_coefficient_count(const Template& t) {
  // The phase slot is pinned to zero for transcendental forms.
  return t.is_polynomial() ? t.degree() + 1 : 4;
}

namespace {

using Eigen::MatrixXd;
using Eigen::VectorXd;

double osc(Family f, double u) {
  switch (f) {
    case Family::Sin: return std::sin(u);
    case Family::Cos: return std::cos(u);
    default: return std::exp(u);
  }
}

double osc_derivative(Family f, double u) {
  switch (f) {
    case Family::Sin: return std::cos(u);
    case Family::Cos: return -std::sin(u);
    default: return std::exp(u);
  }
}

FitResult finish(const Template& t, Expression raw, const SampledCurve& curve,
                 RoundingPolicy rounding) {
  FitResult r;
  r.fitted_template = t;
  r.free_coefficient_count = free_coefficient_count(t);
  r.rel_error = relative_diff(sample(raw, curve.grid()), curve);
  try {
    r.expression = round_coefficients(raw, rounding);
  } catch (const Error& e) {
    throw Error(ErrorCode::Fit, t.name() + ": " + e.what());
  }
  r.raw_expression = std::move(raw);
  return r;
}

// Householder QR of the monomial design matrix in t = x/T. Leading column
// blocks of one factorization give every lower degree.
class PolyBasis {
 public:
  explicit PolyBasis(const SampledCurve& curve) : T_(curve.grid().T) {
    const std::size_t n = curve.size();
    const int cols = kMaxPolyDegree + 1;
    MatrixXd a(static_cast<Eigen::Index>(n), cols);
    for (std::size_t i = 0; i < n; ++i) {
      const double t = curve.x(i) / T_;
      double p = 1.0;
      for (int k = 0; k < cols; ++k) {
        a(static_cast<Eigen::Index>(i), k) = p;
        p *= t;
      }
    }
    Eigen::Map<const VectorXd> y(curve.ys().data(), static_cast<Eigen::Index>(n));
    qr_.compute(a);
    qty_ = qr_.householderQ().adjoint() * y;
  }

  Expression solve(int degree) const {
    const int k = degree + 1;
    const auto r = qr_.matrixQR().topLeftCorner(k, k).triangularView<Eigen::Upper>();
    double rmax = 0.0;
    for (int i = 0; i < k; ++i) rmax = std::max(rmax, std::fabs(qr_.matrixQR()(i, i)));
    for (int i = 0; i < k; ++i)
      if (std::fabs(qr_.matrixQR()(i, i)) <= 1e-13 * rmax)
        throw Error(ErrorCode::Fit, "singular polynomial design");
    const VectorXd c = r.solve(qty_.head(k));
    std::vector<double> coeffs(static_cast<std::size_t>(k));
    double scale = 1.0;
    for (int j = 0; j < k; ++j) {
      coeffs[static_cast<std::size_t>(j)] = c(j) / scale;
      scale *= T_;
    }
    return Expression::polynomial(std::move(coeffs));
  }

 private:
  double T_;
  Eigen::HouseholderQR<MatrixXd> qr_;
  VectorXd qty_;
};

struct OuterFit {
  double amplitude = 0.0, linear = 0.0, offset = 0.0;
  double sse = std::numeric_limits<double>::infinity();
  bool ok = false;
};

// Row weights 1/max(1, |osc(b x)|). Rounding noise in a growing exponential
// scales with its size, so unweighted rows near T would swamp the linear and
// constant terms, which only the small-x rows can pin down. Bounded
// oscillators and decaying exponentials get unit weights.
std::vector<double> growth_weights(Family f, double b, std::span<const double> xs) {
  std::vector<double> w(xs.size());
  for (std::size_t i = 0; i < xs.size(); ++i) w[i] = 1.0 / std::max(1.0, std::fabs(osc(f, b * xs[i])));
  return w;
}

double weight_at(std::span<const double> w, std::size_t i) { return w.empty() ? 1.0 : w[i]; }

// Weighted linear least squares of y on {osc(b x), x, 1} over the given
// points (empty weights: unweighted), with columns scaled to unit max so
// exponentials at large rates stay solvable.
OuterFit solve_outer(Family f, double b, std::span<const double> xs, std::span<const double> ys,
                     std::span<const double> w, double T, std::vector<double>& scratch) {
  const std::size_t m = xs.size();
  scratch.resize(m);
  double omax = 0.0;
  for (std::size_t i = 0; i < m; ++i) {
    scratch[i] = osc(f, b * xs[i]);
    omax = std::max(omax, std::fabs(scratch[i]));
  }
  OuterFit out;
  if (!(omax > 0.0) || !std::isfinite(omax)) return out;
  Eigen::Matrix3d gram = Eigen::Matrix3d::Zero();
  Eigen::Vector3d rhs = Eigen::Vector3d::Zero();
  for (std::size_t i = 0; i < m; ++i) {
    const double wi = weight_at(w, i);
    const Eigen::Vector3d row = wi * Eigen::Vector3d(scratch[i] / omax, xs[i] / T, 1.0);
    gram.noalias() += row * row.transpose();
    rhs.noalias() += row * (wi * ys[i]);
  }
  Eigen::LDLT<Eigen::Matrix3d> ldlt(gram);
  if (ldlt.info() != Eigen::Success) return out;
  const Eigen::Vector3d c = ldlt.solve(rhs);
  if (!c.allFinite()) return out;
  out.amplitude = c(0) / omax;
  out.linear = c(1) / T;
  out.offset = c(2);
  double sse = 0.0;
  for (std::size_t i = 0; i < m; ++i) {
    const double r = weight_at(w, i) * (out.amplitude * scratch[i] + out.linear * xs[i] + out.offset - ys[i]);
    sse += r * r;
  }
  out.sse = sse;
  out.ok = std::isfinite(sse);
  return out;
}

struct Params {
  double amplitude, rate, linear, offset;
};

double model_sse(Family f, const Params& p, std::span<const double> xs, std::span<const double> ys,
                 std::span<const double> w) {
  double sse = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    const double r = weight_at(w, i) * (p.amplitude * osc(f, p.rate * xs[i]) + p.linear * xs[i] + p.offset - ys[i]);
    sse += r * r;
  }
  return std::isfinite(sse) ? sse : std::numeric_limits<double>::infinity();
}

// Damped Gauss-Newton on (amplitude, rate, linear, offset) with fixed row
// weights. Steps that do not lower the weighted SSE are halved; the returned
// parameters never have a larger weighted SSE than the start.
Params gauss_newton(Family f, Params p, std::span<const double> xs, std::span<const double> ys,
                    std::span<const double> w, const FitterConfig& cfg) {
  const auto n = static_cast<Eigen::Index>(xs.size());
  MatrixXd jac(n, 4);
  VectorXd res(n);
  double sse = model_sse(f, p, xs, ys, w);
  for (int iter = 0; iter < cfg.refine_iters; ++iter) {
    for (Eigen::Index i = 0; i < n; ++i) {
      const double x = xs[static_cast<std::size_t>(i)];
      const double u = p.rate * x;
      const double o = osc(f, u);
      const double wi = weight_at(w, static_cast<std::size_t>(i));
      jac(i, 0) = wi * o;
      jac(i, 1) = wi * p.amplitude * x * osc_derivative(f, u);
      jac(i, 2) = wi * x;
      jac(i, 3) = wi;
      res(i) = wi * (ys[static_cast<std::size_t>(i)] - (p.amplitude * o + p.linear * x + p.offset));
    }
    Eigen::Vector4d scale;
    for (int j = 0; j < 4; ++j) {
      const double s = jac.col(j).cwiseAbs().maxCoeff();
      scale(j) = s > 0.0 && std::isfinite(s) ? s : 1.0;
      jac.col(j) /= scale(j);
    }
    Eigen::ColPivHouseholderQR<MatrixXd> qr(jac);
    const Eigen::Vector4d step = qr.solve(res).cwiseQuotient(scale);
    if (!step.allFinite()) break;

    double lambda = 1.0;
    bool improved = false;
    Params trial = p;
    for (int halving = 0; halving < 12; ++halving, lambda *= 0.5) {
      trial = {p.amplitude + lambda * step(0), p.rate + lambda * step(1),
               p.linear + lambda * step(2), p.offset + lambda * step(3)};
      const double trial_sse = model_sse(f, trial, xs, ys, w);
      if (trial_sse < sse) {
        sse = trial_sse;
        improved = true;
        break;
      }
    }
    if (!improved) break;
    const Params prev = p;
    p = trial;
    const double tol = cfg.refine_tol;
    if (std::fabs(p.rate - prev.rate) <= tol * (1.0 + std::fabs(p.rate)) &&
        std::fabs(p.amplitude - prev.amplitude) <= tol * (1.0 + std::fabs(p.amplitude)) &&
        std::fabs(p.linear - prev.linear) <= tol * (1.0 + std::fabs(p.linear)) &&
        std::fabs(p.offset - prev.offset) <= tol * (1.0 + std::fabs(p.offset)))
      break;
  }
  return p;
}

Expression to_expression(Family f, const Params& p) {
  return Expression::transcendental(f, p.offset, p.linear, 0.0, p.rate, p.amplitude);
}

FitResult fit_transcendental(const Template& t, const SampledCurve& curve, const FitterConfig& cfg,
                             RoundingPolicy rounding) {
  const Family f = t.family();
  const std::vector<double> xs = curve.xs();
  const auto ys = curve.ys();
  const double T = curve.grid().T;

  std::vector<double> sx, sy;
  const std::size_t n = xs.size();
  const std::size_t stride = std::max<std::size_t>(1, (n - 1 + cfg.scan_points - 2) / (cfg.scan_points - 1));
  for (std::size_t i = 0; i < n; i += stride) {
    sx.push_back(xs[i]);
    sy.push_back(ys[i]);
  }
  if (sx.back() != xs.back()) {
    sx.push_back(xs.back());
    sy.push_back(ys.back());
  }

  std::vector<double> scratch;
  double best_rate = 0.0;
  OuterFit best;
  for (double b : cfg.rate_grid()) {
    const OuterFit fit = solve_outer(f, b, sx, sy, {}, T, scratch);
    if (fit.ok && fit.sse < best.sse) {
      best = fit;
      best_rate = b;
    }
  }
  if (!best.ok) throw Error(ErrorCode::Fit, t.name() + ": singular normal equations on rate grid");

  // The scan compares rates unweighted; everything after uses weights fixed
  // at the scanned rate.
  const std::vector<double> w = growth_weights(f, best_rate, xs);
  const OuterFit seed_outer = solve_outer(f, best_rate, xs, ys, w, T, scratch);
  const Params seed = seed_outer.ok
                          ? Params{seed_outer.amplitude, best_rate, seed_outer.linear, seed_outer.offset}
                          : Params{best.amplitude, best_rate, best.linear, best.offset};

  Params refined = gauss_newton(f, seed, xs, ys, w, cfg);
  // Re-profile the linear coefficients at the refined rate.
  if (refined.rate != 0.0) {
    const OuterFit polish = solve_outer(f, refined.rate, xs, ys, w, T, scratch);
    if (polish.ok && polish.sse < model_sse(f, refined, xs, ys, w))
      refined = {polish.amplitude, refined.rate, polish.linear, polish.offset};
  }

  FitResult seed_result = finish(t, to_expression(f, seed), curve, rounding);
  if (refined.rate == 0.0 || !std::isfinite(refined.rate)) return seed_result;
  try {
    FitResult refined_result = finish(t, to_expression(f, refined), curve, rounding);
    if (refined_result.rel_error <= seed_result.rel_error) return refined_result;
  } catch (const Error&) {
  }
  return seed_result;
}

bool better_choice(const FitResult& a, const FitResult& b, std::size_t ia, std::size_t ib) {
  if (a.free_coefficient_count != b.free_coefficient_count)
    return a.free_coefficient_count < b.free_coefficient_count;
  const int da = a.fitted_template.is_polynomial() ? a.fitted_template.degree() : kMaxPolyDegree + 1;
  const int db = b.fitted_template.is_polynomial() ? b.fitted_template.degree() : kMaxPolyDegree + 1;
  if (da != db) return da < db;
  return ia < ib;
}

}  // namespace

FitResult fit_template(const Template& t, const SampledCurve& curve, const FitterConfig& cfg,
                       RoundingPolicy rounding) {
  cfg.validate();
  if (t.is_polynomial()) {
    if (t.degree() < 1) throw Error(ErrorCode::InvalidArgument, "POLY(0) is not a candidate");
    PolyBasis basis(curve);
    return finish(t, basis.solve(t.degree()), curve, rounding);
  }
  return fit_transcendental(t, curve, cfg, rounding);
}

FitResult fit_best(const SampledCurve& curve, const FitterConfig& cfg, RoundingPolicy rounding) {
  cfg.validate();
  std::vector<FitResult> fits;
  std::vector<std::size_t> order;
  std::string last_failure;
  const auto candidates = candidate_templates();

  std::optional<PolyBasis> basis;
  try {
    basis.emplace(curve);
  } catch (const Error& e) {
    last_failure = e.what();
  }
  for (std::size_t i = 0; i < candidates.size(); ++i) {
    const Template& t = candidates[i];
    try {
      if (t.is_polynomial()) {
        if (!basis) continue;
        fits.push_back(finish(t, basis->solve(t.degree()), curve, rounding));
      } else {
        fits.push_back(fit_transcendental(t, curve, cfg, rounding));
      }
      order.push_back(i);
    } catch (const Error& e) {
      last_failure = e.what();
    }
  }
  if (fits.empty()) throw Error(ErrorCode::Fit, "every template failed: " + last_failure);

  double min_err = std::numeric_limits<double>::infinity();
  for (const auto& r : fits) min_err = std::min(min_err, r.rel_error);
  std::size_t pick = fits.size();
  for (std::size_t k = 0; k < fits.size(); ++k) {
    if (!(fits[k].rel_error <= min_err + cfg.simplicity_margin)) continue;
    if (pick == fits.size() || better_choice(fits[k], fits[pick], order[k], order[pick])) pick = k;
  }
  return fits[pick];
}

Expression align_rate_sign(const Expression& g, const Expression& reference) {
  const auto oscillatory = [](const Expression& e) {
    return e.form().family() == Family::Sin || e.form().family() == Family::Cos;
  };
  if (!oscillatory(g) || !oscillatory(reference)) return g;
  if (std::signbit(g[kRateSlot]) == std::signbit(reference[kRateSlot])) return g;
  std::vector<double> c(g.coefficients().begin(), g.coefficients().end());
  c[kRateSlot] = -c[kRateSlot];
  c[kPhaseSlot] = c[kPhaseSlot] == 0.0 ? 0.0 : -c[kPhaseSlot];
  if (g.form().family() == Family::Sin) c[kAmplitudeSlot] = -c[kAmplitudeSlot];
  return Expression(g.form(), std::move(c));
}

FilterOutcome filter_pair(std::size_t id, const Expression& f, const FitResult& fit,
                          const FitterConfig& cfg) {
  FilterOutcome out;
  if (!(fit.rel_error <= cfg.epsilon)) {
    out.reason = "exceeds-epsilon";
    return out;
  }
  out.accepted = true;
  out.pair = IntegralPair{id, f, align_rate_sign(fit.expression, f), fit.rel_error};
  return out;
}

bool exact_correct(const Expression& g, const Expression& g_hat, RoundingPolicy rounding) {
  return serialize(g, rounding) == serialize(g_hat, rounding);
}

bool approx_correct(const Expression& g, const Expression& g_hat, const QuadratureConfig& q,
                    double epsilon) {
  try {
    return relative_diff(sample(g, q), sample(g_hat, q)) < epsilon;
  } catch (const EvaluationError&) {
    return false;
  }
}

}  // namespace integrule
