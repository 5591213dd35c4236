#include <doctest.h>

#include <cmath>
#include <random>

#include "integrule/expr.hpp"

using namespace integrule;

TEST_CASE("templates have the documented slot layouts") {
  CHECK(Template::poly(0).slot_count() == 1);
  CHECK(Template::poly(3).slot_count() == 4);
  CHECK(Template::sin_form().slot_count() == 5);
  CHECK(Template::exp_form().slot_names() == std::vector<std::string>{"a0", "a1", "a2", "a3", "a4"});
  CHECK(Template::poly(3).name() == "POLY(3)");
  CHECK(Template::cos_form().name() == "COS");
  CHECK_THROWS_AS(Template::poly(8), Error);
  CHECK_THROWS_AS(Template::poly(-1), Error);

  // Integrals of sin sources carry a cosine, and vice versa.
  CHECK(Template::sin_integral_form() == Template::cos_form());
  CHECK(Template::cos_integral_form() == Template::sin_form());
  CHECK(Template::exp_integral_form() == Template::exp_form());
  CHECK(Template::integral_form_of(Family::Poly, 4) == Template::poly(5));
  CHECK(Template::integral_form_of(Family::Sin) == Template::cos_form());
}

TEST_CASE("expression invariants are enforced") {
  CHECK_THROWS_AS(Expression(Template::poly(2), {1.0, 2.0}), Error);
  CHECK_THROWS_AS(Expression(Template::poly(2), {1.0, 2.0, 0.0}), Error);
  CHECK_THROWS_AS(Expression(Template::poly(1), {1.0, NAN}), Error);
  CHECK_THROWS_AS(Expression::transcendental(Family::Exp, 0, 0, 0, 0.0, 1), Error);
  CHECK_NOTHROW(Expression::transcendental(Family::Exp, 0, 0, 0, 1.0, 0.0));
  CHECK(Expression::polynomial({1.0, 2.0, 0.0, 0.0}).form() == Template::poly(1));
}

TEST_CASE("evaluate") {
  const auto p = Expression::polynomial({-1.4, 3.55, 2.0});
  CHECK(evaluate(p, 1.0) == doctest::Approx(4.15).epsilon(1e-12));
  CHECK(evaluate(Expression::transcendental(Family::Exp, 0, 0, 0, 1, 1), 0.0) == 1.0);
  CHECK(evaluate(Expression::transcendental(Family::Sin, 0, 0, 0, 2, 5), 0.0) == 0.0);
  CHECK(evaluate(Expression::transcendental(Family::Cos, 1, 2, 0.5, 3, 4), 0.7) ==
        doctest::Approx(4.0 * std::cos(3 * 0.7 + 0.5) + 2 * 0.7 + 1).epsilon(1e-14));

  const auto big = Expression::transcendental(Family::Exp, 0, 0, 0, 800.0, 1.0);
  try {
    evaluate(big, 2.0);
    FAIL("expected overflow");
  } catch (const EvaluationError& e) {
    CHECK(e.x() == 2.0);
    CHECK(e.code() == ErrorCode::Evaluation);
  }
}

TEST_CASE("serialize canonical forms") {
  CHECK(serialize(Expression::polynomial({-1.4, 3.55, 2.0})) == "2*x**2+3.55*x-1.4");
  CHECK(serialize(Expression::polynomial({0.0, -1.4, 1.78, 0.67})) == "0.67*x**3+1.78*x**2-1.4*x");
  CHECK(serialize(Expression::zero()) == "0");
  CHECK(serialize(Expression::polynomial({0.0, 1.0})) == "x");
  CHECK(serialize(Expression::polynomial({0.0, -1.0})) == "-x");
  CHECK(serialize(Expression::transcendental(Family::Cos, 2.5, 3, 0, 2, -2.5)) == "-2.5*cos(2*x)+3*x+2.5");
  CHECK(serialize(Expression::transcendental(Family::Exp, -1, 0, 0, 1, 1)) == "exp(x)-1");
  CHECK(serialize(Expression::transcendental(Family::Sin, 0, 0, 0.25, -1, 1)) == "sin(-x+0.25)");
  CHECK(serialize(Expression::transcendental(Family::Sin, 0, 0, -0.5, -2.5, 1)) == "sin(-2.5*x-0.5)");
  CHECK(serialize(Expression::transcendental(Family::Exp, 1, 0, 0, 1, 0)) == "0*exp(x)+1");
}

TEST_CASE("parse inverts serialize") {
  CHECK(parse("2*x**2+3.55*x-1.4") == Expression::polynomial({-1.4, 3.55, 2.0}));
  CHECK(parse("0") == Expression::zero());
  const auto c = parse("-2.5*cos(2*x)+3*x+2.5");
  CHECK(c.form() == Template::cos_form());
  CHECK(c == Expression::transcendental(Family::Cos, 2.5, 3, 0, 2, -2.5));
  CHECK(parse(" x**3 - x ") == Expression::polynomial({0, -1, 0, 1}));
  CHECK(parse("exp(-x)") == Expression::transcendental(Family::Exp, 0, 0, 0, -1, 1));
  CHECK(parse("0*exp(x)+1") == Expression::transcendental(Family::Exp, 1, 0, 0, 1, 0));
}

TEST_CASE("parse errors carry byte offsets") {
  auto offset_of = [](const char* s) -> std::size_t {
    try {
      parse(s);
    } catch (const ParseError& e) {
      return e.offset();
    }
    return static_cast<std::size_t>(-1);
  };
  CHECK(offset_of("") == 0);
  CHECK(offset_of("2*x+tan(x)") == 4);
  CHECK(offset_of("x+x") == 2);
  CHECK(offset_of("sin(x)+cos(x)") == 7);
  CHECK(offset_of("2*x 3") != static_cast<std::size_t>(-1));
  CHECK(offset_of("x**9") == 0);
  CHECK_THROWS_AS(parse("x**2+sin(x)"), ParseError);
  CHECK_THROWS_AS(parse("sin(0*x)"), ParseError);
}

TEST_CASE("round_coefficients") {
  CHECK(round_to(0.333333, 2) == 0.33);
  CHECK(round_to(1.77501292, 2) == 1.78);
  CHECK(round_to(0.125, 2) == 0.13);  // exact ties go away from zero
  CHECK(round_to(-0.125, 2) == -0.13);
  CHECK(!std::signbit(round_to(-0.001, 2)));
  CHECK(round_coefficients(Expression::polynomial({0, 0, 0, 0.004})) == Expression::zero());
  CHECK_THROWS_AS(round_coefficients(Expression::transcendental(Family::Sin, 0, 0, 0, 0.004, 1)), Error);
  CHECK(format_coefficient(3.5) == "3.5");
  CHECK(format_coefficient(-1.0) == "-1");
  CHECK(format_coefficient(1e-9) == "0");
}

namespace {

Expression random_expression(std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(-10.0, 10.0);
  std::uniform_int_distribution<int> pick(0, 3);
  auto coef = [&] { return round_to(u(rng), 2); };
  auto nonzero = [&] {
    double v = 0.0;
    while (v == 0.0) v = coef();
    return v;
  };
  const int kind = pick(rng);
  if (kind == 0) {
    std::uniform_int_distribution<int> deg(0, kMaxPolyDegree);
    std::vector<double> c(static_cast<std::size_t>(deg(rng)) + 1);
    for (auto& v : c) v = std::bernoulli_distribution(0.25)(rng) ? 0.0 : coef();
    return Expression::polynomial(c);
  }
  const Family f = kind == 1 ? Family::Sin : kind == 2 ? Family::Cos : Family::Exp;
  const bool phase = std::bernoulli_distribution(0.3)(rng);
  return Expression::transcendental(f, coef(), coef(), phase ? coef() : 0.0, nonzero(), coef());
}

}  // namespace

TEST_CASE("round-trip property over 10^4 random expressions") {
  std::mt19937_64 rng(20240501);
  for (int i = 0; i < 10000; ++i) {
    const Expression e = random_expression(rng);
    const std::string s = serialize(e);
    const Expression back = parse(s);
    REQUIRE_MESSAGE(back == e, s);
    CHECK(serialize(back) == s);
    for (double x : {0.0, 0.37, 1.5, 3.9})
      CHECK(evaluate(back, x) == evaluate(e, x));
    CHECK(round_coefficients(round_coefficients(e)) == round_coefficients(e));
    if (e.form().is_polynomial()) {
      // No term above the template degree.
      const auto p = s.find("x**" + std::to_string(e.form().degree() + 1));
      CHECK(p == std::string::npos);
    }
  }
}
