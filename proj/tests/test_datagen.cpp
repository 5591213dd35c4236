#include <doctest.h>

#include <cmath>

#include "integrule/datagen.hpp"

using namespace integrule;

TEST_CASE("perturb_constant") {
  CHECK(perturb_constant(4, PerturbOp::Multiply, 2) == 8.0);
  CHECK(perturb_constant(4, PerturbOp::Subtract, 3) == 1.0);
  CHECK(!perturb_constant(2, PerturbOp::Subtract, 2).has_value());  // would be zero
  CHECK(!perturb_constant(1.5, PerturbOp::Subtract, 3).has_value());  // would flip sign
  CHECK(!perturb_constant(-1, PerturbOp::Add, 2).has_value());
  CHECK(perturb_constant(-1, PerturbOp::Subtract, 2) == -3.0);
  CHECK(perturb_constant(1, PerturbOp::Divide, 3) == 0.33);
  CHECK(!perturb_constant(0.01, PerturbOp::Divide, 3).has_value());  // rounds to zero
}

TEST_CASE("randomize_constants keeps signs and nonzero constants") {
  const Expression base = Expression::polynomial({-1.4, 3.55, 0, 2});
  for (std::uint64_t s = 0; s < 300; ++s) {
    RngStream rng(99, s);
    const Expression e = randomize_constants(base, rng, 6);
    const auto c = e.coefficients();
    CHECK(e.form().degree() >= 1);
    CHECK(e.form().degree() <= 6);
    CHECK(c[0] < 0.0);  // constants keep their power and sign
    for (double v : c) CHECK(round_to(v, 2) == v);
  }
  const Expression t = Expression::transcendental(Family::Exp, 2, 0, 0, -3, 1.5);
  for (std::uint64_t s = 0; s < 300; ++s) {
    RngStream rng(5, s);
    const Expression e = randomize_constants(t, rng, 6);
    const auto c = e.coefficients();
    CHECK(c[0] > 0);
    CHECK(c[1] == 0);
    CHECK(c[2] == 0);
    CHECK(c[3] < 0);
    CHECK(c[4] > 0);
  }
}

TEST_CASE("randomize_constants only moves exponents within range") {
  // Single-term polynomials: the perturbed exponent is visible as the degree.
  for (std::uint64_t s = 0; s < 500; ++s) {
    RngStream rng(1, s);
    const Expression e = randomize_constants(Expression::polynomial({0, 0, 0, 0, 0, 2}), rng, 6);
    CHECK(e.form().degree() >= 1);
    CHECK(e.form().degree() <= 6);
    int nonzero = 0;
    for (double v : e.coefficients()) nonzero += v != 0.0;
    CHECK(nonzero == 1);
    CHECK(e.coefficients().back() > 0);
  }
}

TEST_CASE("generate: counts, families and constraints") {
  GeneratorConfig cfg;
  cfg.seed = 42;
  cfg.n_polynomial = 200;
  cfg.n_transcendental = 3000;
  const auto recs = generate(cfg);
  REQUIRE(recs.size() == 3200);
  std::size_t counts[4] = {};
  for (std::size_t i = 0; i < recs.size(); ++i) {
    const auto& r = recs[i];
    CHECK(r.id == i);
    ++counts[static_cast<int>(r.family)];
    const auto c = r.expression.coefficients();
    for (double v : c) CHECK(round_to(v, 2) == v);
    if (r.family == Family::Poly) {
      CHECK(r.expression.form().is_polynomial());
      CHECK(r.expression.form().degree() >= 1);
      CHECK(r.expression.form().degree() <= 6);
      if (r.id % 2 == 0) CHECK(std::fabs(c.back()) >= 0.5);
    } else {
      CHECK(r.expression.form().family() == r.family);
      CHECK(c[1] == 0.0);
      CHECK(c[2] == 0.0);
      CHECK(std::fabs(c[3]) >= 0.5);
      CHECK(std::fabs(c[4]) >= 0.5);
      CHECK(std::fabs(c[0]) <= 10.0);
    }
  }
  CHECK(counts[0] == 200);
  CHECK(counts[1] == 1000);
  CHECK(counts[2] == 1000);
  CHECK(counts[3] == 1000);
}

TEST_CASE("generate is deterministic per record id") {
  GeneratorConfig a;
  a.seed = 7;
  a.n_polynomial = 50;
  a.n_transcendental = 30;
  const auto x = generate(a);
  const auto y = generate(a);
  REQUIRE(x.size() == y.size());
  for (std::size_t i = 0; i < x.size(); ++i) CHECK(x[i].expression == y[i].expression);

  // A longer run shares its prefix of polynomials.
  GeneratorConfig b = a;
  b.n_polynomial = 80;
  const auto z = generate(b);
  for (std::size_t i = 0; i < 50; ++i) CHECK(z[i].expression == x[i].expression);

  GeneratorConfig c = a;
  c.seed = 8;
  const auto w = generate(c);
  int same = 0;
  for (std::size_t i = 0; i < x.size(); ++i) same += w[i].expression == x[i].expression;
  CHECK(same < 5);
}

TEST_CASE("transcendental coefficients are spread over the range") {
  GeneratorConfig cfg;
  cfg.n_polynomial = 2;
  cfg.n_transcendental = 3000;
  const auto recs = generate(cfg);
  double sum0 = 0, sum3 = 0, sum4 = 0;
  double lo = 1e9, hi = -1e9;
  std::size_t n = 0;
  for (const auto& r : recs) {
    if (r.family == Family::Poly) continue;
    sum0 += r.expression[0];
    sum3 += r.expression[3];
    sum4 += r.expression[4];
    lo = std::min(lo, r.expression[3]);
    hi = std::max(hi, r.expression[3]);
    ++n;
  }
  // Uniform on [-10, 10]: sd of the mean over 3000 draws is about 0.1.
  CHECK(std::fabs(sum0 / static_cast<double>(n)) < 0.5);
  CHECK(std::fabs(sum3 / static_cast<double>(n)) < 0.5);
  CHECK(std::fabs(sum4 / static_cast<double>(n)) < 0.5);
  CHECK(lo < -9.5);
  CHECK(hi > 9.5);
}

TEST_CASE("invalid generator configs are rejected") {
  GeneratorConfig cfg;
  cfg.n_polynomial = 0;
  CHECK_THROWS_AS(generate(cfg), Error);
  cfg = {};
  cfg.max_degree = 7;
  CHECK_THROWS_AS(cfg.validate(), Error);
  cfg = {};
  cfg.coeff_min = 5;
  cfg.coeff_max = 5;
  CHECK_THROWS_AS(cfg.validate(), Error);
  cfg = {};
  cfg.min_magnitude = 20;
  CHECK_THROWS_AS(cfg.validate(), Error);
}

TEST_CASE("integer constants toggle") {
  GeneratorConfig cfg;
  cfg.integer_constants = true;
  cfg.n_polynomial = 100;
  cfg.n_transcendental = 30;
  for (const auto& r : generate(cfg)) {
    if (r.family == Family::Poly && r.id % 2 == 1) continue;  // perturbation may divide
    for (double v : r.expression.coefficients()) CHECK(v == std::round(v));
  }
}
