#include <doctest.h>

#include <cmath>
#include <random>

#include "integrule/quadrature.hpp"
#include "oracles.hpp"

using namespace integrule;

namespace {

QuadratureConfig grid(std::size_t n, double T = 4.0) {
  QuadratureConfig q;
  q.T = T;
  q.n_points = n;
  return q;
}

std::vector<double> as_vector(const SampledCurve& c) { return {c.ys().begin(), c.ys().end()}; }

}  // namespace

TEST_CASE("sample") {
  CHECK(as_vector(sample(Expression::zero(), grid(7))) == std::vector<double>(7, 0.0));
  CHECK(as_vector(sample(parse("x"), grid(5))) == std::vector<double>{0, 1, 2, 3, 4});
  const auto e = sample(parse("exp(x)"), grid(10000));
  CHECK(e.ys().back() == doctest::Approx(std::exp(4.0)).epsilon(1e-15));
  CHECK(e.x(9999) == 4.0);
  CHECK_THROWS_AS(sample(parse("exp(500*x)"), grid(100)), EvaluationError);
  CHECK_THROWS_AS(grid(1).validate(), Error);
  CHECK_THROWS_AS(grid(10, 0.0).validate(), Error);
}

TEST_CASE("cumulative_trapezoid is exact for degree <= 1") {
  CHECK(as_vector(cumulative_trapezoid(sample(parse("1"), grid(5)))) == std::vector<double>{0, 1, 2, 3, 4});
  CHECK(as_vector(cumulative_trapezoid(sample(parse("x"), grid(5)))) ==
        std::vector<double>{0, 0.5, 2, 4.5, 8});
  const auto g = cumulative_trapezoid(sample(parse("-3.25*x+1.5"), grid(1001)));
  for (std::size_t i = 0; i < g.size(); i += 97) {
    const double x = g.x(i);
    CHECK(g.ys()[i] == doctest::Approx(-1.625 * x * x + 1.5 * x).epsilon(1e-12));
  }
}

TEST_CASE("x^2 endpoint and second-order convergence") {
  const double exact = 64.0 / 3.0;
  const auto g = cumulative_trapezoid(sample(parse("x**2"), grid(10000)));
  CHECK(std::fabs(g.ys().back() - exact) < 1e-5);

  auto err = [&](std::size_t n) {
    return std::fabs(cumulative_trapezoid(sample(parse("x**2"), grid(n))).ys().back() - exact);
  };
  const double ratio = err(1250) / err(2500);
  CHECK(ratio == doctest::Approx(4.0).epsilon(0.125));
}

TEST_CASE("trapezoid matches analytic antiderivatives") {
  const char* sources[] = {"3*x**4-2*x+1", "2.5*sin(1.7*x)+0.3", "-1.2*cos(3*x)-4", "0.8*exp(-0.9*x)+2"};
  for (const char* s : sources) {
    const auto f = parse(s);
    const auto numeric = cumulative_trapezoid(sample(f, grid(10000)));
    const auto exact = sample(oracle::antiderivative(f), grid(10000));
    CHECK_MESSAGE(relative_diff(numeric, exact) < 1e-6, s);
  }
}

TEST_CASE("linearity and monotonicity") {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> u(-3, 3);
  const auto q = grid(513);
  for (int trial = 0; trial < 20; ++trial) {
    std::vector<double> f(q.n_points), h(q.n_points), mix(q.n_points), pos(q.n_points);
    const double a = u(rng), b = u(rng);
    for (std::size_t i = 0; i < f.size(); ++i) {
      f[i] = u(rng);
      h[i] = u(rng);
      mix[i] = a * f[i] + b * h[i];
      pos[i] = std::fabs(f[i]);
    }
    const auto gf = cumulative_trapezoid(SampledCurve(q, f));
    const auto gh = cumulative_trapezoid(SampledCurve(q, h));
    const auto gm = cumulative_trapezoid(SampledCurve(q, mix));
    for (std::size_t i = 0; i < f.size(); ++i)
      CHECK(gm.ys()[i] == doctest::Approx(a * gf.ys()[i] + b * gh.ys()[i]).epsilon(1e-9).scale(10));
    const auto gp = cumulative_trapezoid(SampledCurve(q, pos));
    for (std::size_t i = 1; i < pos.size(); ++i) CHECK(gp.ys()[i] >= gp.ys()[i - 1]);
  }
}

TEST_CASE("relative_diff") {
  const auto q = grid(10000);
  const auto g = sample(parse("x"), q);
  CHECK(relative_diff(g, g) == 0.0);
  // mean |0.01x| = 0.02, max = 4.04
  CHECK(relative_diff(g, sample(parse("1.01*x"), q)) == doctest::Approx(0.02 / 4.04).epsilon(1e-6));
  CHECK(relative_diff(sample(Expression::zero(), q), sample(Expression::zero(), q)) == 0.0);
  CHECK_THROWS_AS(relative_diff(g, sample(parse("x"), grid(100))), Error);
}

TEST_CASE("relative_diff is symmetric, scale invariant and bounded") {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> u(-5, 5);
  std::uniform_real_distribution<double> scale(0.01, 100);
  const auto q = grid(257);
  for (int trial = 0; trial < 200; ++trial) {
    std::vector<double> a(q.n_points), b(q.n_points), sa(q.n_points), sb(q.n_points);
    const double c = scale(rng);
    for (std::size_t i = 0; i < a.size(); ++i) {
      a[i] = u(rng);
      b[i] = u(rng);
      sa[i] = c * a[i];
      sb[i] = c * b[i];
    }
    const SampledCurve ga(q, a), gb(q, b);
    const double d = relative_diff(ga, gb);
    CHECK(d == relative_diff(gb, ga));
    CHECK(d >= 0.0);
    CHECK(d <= 2.0);
    CHECK(relative_diff(SampledCurve(q, sa), SampledCurve(q, sb)) == doctest::Approx(d).epsilon(1e-12));
  }
}
