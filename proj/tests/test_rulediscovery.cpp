#include <doctest.h>

#include <cmath>
#include <random>

#include "integrule/report.hpp"
#include "integrule/rulediscovery.hpp"
#include "oracles.hpp"

using namespace integrule;

namespace {

// Pairs built from exact analytic integrals; no quadrature or fitting.
std::vector<IntegralPair> planted_pairs(Family family, std::size_t n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(-10, 10);
  auto floored = [&] {
    double v = 0;
    while (std::fabs(v) < 0.5) v = u(rng);
    return v;
  };
  std::vector<IntegralPair> out;
  for (std::size_t i = 0; i < n; ++i) {
    Expression f = Expression::zero();
    if (family == Family::Poly) {
      std::uniform_int_distribution<int> deg(1, 6);
      std::vector<double> c(static_cast<std::size_t>(deg(rng)) + 1);
      for (auto& v : c) v = u(rng);
      c.back() = floored();
      f = Expression::polynomial(c);
    } else {
      f = Expression::transcendental(family, u(rng), 0, 0, floored(), floored());
    }
    out.push_back({i, f, oracle::antiderivative(f), 0.0});
  }
  return out;
}

CoefficientTable table_of(const std::vector<IntegralPair>& pairs) {
  return build_table(pairs, consensus_form(pairs, {}));
}

}  // namespace

TEST_CASE("consensus form") {
  auto pairs = planted_pairs(Family::Exp, 100, 1);
  auto c = consensus_form(pairs, {});
  CHECK(c.form == Template::exp_form());
  CHECK(c.fraction == 1.0);
  CHECK(c.members.size() == 100);

  // A few off-form integrals are excluded from the table.
  for (std::size_t i = 0; i < 6; ++i) pairs[i].g = Expression::polynomial({0, 1, 2});
  c = consensus_form(pairs, {});
  CHECK(c.fraction == doctest::Approx(0.94));
  CHECK(build_table(pairs, c).rows() == 94);

  // Polynomial integrals of different degrees are one form.
  const auto poly = planted_pairs(Family::Poly, 200, 2);
  c = consensus_form(poly, {});
  CHECK(c.form == Template::poly(7));
  CHECK(c.fraction == 1.0);

  CHECK_THROWS_AS(consensus_form(std::span(pairs).first(29), {}), Error);
  auto mixed = planted_pairs(Family::Sin, 60, 3);
  for (std::size_t i = 0; i < 31; ++i) mixed[i].g = Expression::polynomial({0, 1});
  try {
    consensus_form(std::span(mixed).first(60), RuleSearchConfig{.consensus_min = 0.6});
    FAIL("expected ambiguous form");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::AmbiguousForm);
  }
}

TEST_CASE("zero slot detection") {
  const auto poly = table_of(planted_pairs(Family::Poly, 300, 4));
  CHECK(zero_slot_detect(poly, 0, {}));
  CHECK(!zero_slot_detect(poly, 1, {}));
  const auto exp = table_of(planted_pairs(Family::Exp, 300, 5));
  CHECK(zero_slot_detect(exp, kPhaseSlot, {}));
  CHECK(!zero_slot_detect(exp, kAmplitudeSlot, {}));
  CHECK(!zero_slot_detect(exp, kOffsetSlot, {}));
}

TEST_CASE("snap_constant") {
  CHECK(snap_constant(0.3331, 0.01) == 1.0 / 3.0);
  CHECK(snap_constant(-0.998, 0.01) == -1.0);
  CHECK(snap_constant(2.004, 0.01) == 2.0);
  CHECK(snap_constant(0.1435, 0.01) == 1.0 / 7.0);
  CHECK(snap_constant(0.42, 0.01) == 0.42);
  CHECK(snap_constant(0.004, 0.01) == 0.004);
}

TEST_CASE("planted polynomial rules are recovered exactly") {
  const auto table = table_of(planted_pairs(Family::Poly, 500, 6));
  for (std::size_t k = 1; k <= 7; ++k) {
    const auto out = search_rule(table, k, {});
    REQUIRE(out.rule.has_value());
    const Rule& r = *out.rule;
    CHECK(r.stage == 1);
    CHECK(r.feature.kind == FeatureKind::Single);
    CHECK(r.feature.slots == std::vector<std::size_t>{k - 1});
    CHECK(std::fabs(r.slope() - 1.0 / static_cast<double>(k)) < 1e-6);
    CHECK(r.intercept == 0.0);
    CHECK(r.intercept_pruned);
    // Stage ordering: later stages are never evaluated.
    CHECK(out.stats.evaluations[0] > 0);
    CHECK(out.stats.evaluations[1] == 0);
    CHECK(out.stats.evaluations[2] == 0);
  }
  CHECK(search_rule(table, 1, {}).rule->formula_text == "a1' = a0");
  CHECK(search_rule(table, 2, {}).rule->formula_text == "a2' = a1/2");
  CHECK(search_rule(table, 7, {}).rule->formula_text == "a7' = a6/7");
}

TEST_CASE("planted exp rules need a quotient") {
  const auto table = table_of(planted_pairs(Family::Exp, 400, 7));
  const auto a4 = search_rule(table, kAmplitudeSlot, {});
  REQUIRE(a4.rule.has_value());
  CHECK(a4.rule->stage == 2);
  CHECK(a4.rule->feature.kind == FeatureKind::Quotient);
  CHECK(a4.rule->feature.slots == std::vector<std::size_t>{4, 3});
  CHECK(std::fabs(a4.rule->slope() - 1.0) < 1e-6);
  CHECK(a4.rule->formula_text == "a4' = a4/a3");
  CHECK(a4.stats.evaluations[0] > 0);
  CHECK(a4.stats.evaluations[2] == 0);

  const auto a0 = search_rule(table, kOffsetSlot, {});
  REQUIRE(a0.rule.has_value());
  CHECK(std::fabs(a0.rule->slope() + 1.0) < 1e-6);
  CHECK(a0.rule->formula_text == "a0' = -a4/a3");

  CHECK(search_rule(table, kRateSlot, {}).rule->formula_text == "a3' = a3");
  CHECK(search_rule(table, kLinearSlot, {}).rule->formula_text == "a1' = a0");
}

TEST_CASE("all-zero source slots are skipped") {
  const auto table = table_of(planted_pairs(Family::Cos, 200, 8));
  CHECK(table.source_all_zero(kLinearSlot));
  CHECK(table.source_all_zero(kPhaseSlot));
  const auto out = search_rule(table, kRateSlot, {});
  // a0, a3, a4 each as a_i and 1/a_i (a0 is never exactly zero here).
  CHECK(out.stats.evaluations[0] == 6);
}

TEST_CASE("stage three finds planted triples") {
  std::mt19937_64 rng(9);
  std::uniform_real_distribution<double> u(1, 5);
  CoefficientTable t(Family::Exp, Template::exp_form(), Template::exp_form());
  for (std::size_t i = 0; i < 200; ++i) {
    const double a0 = u(rng), a3 = u(rng), a4 = u(rng);
    const std::vector<double> src{a0, 0, 0, a3, a4};
    // a1' = a0*a3*a4 and a4' = a4/a3 + a0/2
    const std::vector<double> dst{0, a0 * a3 * a4, 0, a3, a4 / a3 + 0.5 * a0};
    t.add_row(i, src, dst);
  }
  const auto p = search_rule(t, 1, {});
  REQUIRE(p.rule.has_value());
  CHECK(p.rule->stage == 3);
  CHECK(std::fabs(p.rule->slope() - 1.0) < 1e-6);
  CHECK(p.stats.evaluations[1] > 0);
  const std::vector<double> probe{1.5, 0, 0, 2.5, 3.5};
  CHECK(p.rule->apply(probe) == doctest::Approx(1.5 * 2.5 * 3.5).epsilon(1e-9));

  const auto s = search_rule(t, 4, {});
  REQUIRE(s.rule.has_value());
  CHECK(s.rule->stage == 3);
  CHECK(s.rule->feature.multivariate());
  CHECK(s.rule->apply(probe) == doctest::Approx(3.5 / 2.5 + 0.75).epsilon(1e-9));
}

TEST_CASE("weighted sums are judged by R^2") {
  std::mt19937_64 rng(10);
  std::uniform_real_distribution<double> u(-5, 5);
  CoefficientTable t(Family::Exp, Template::exp_form(), Template::exp_form());
  for (std::size_t i = 0; i < 200; ++i) {
    const double a0 = u(rng), a3 = u(rng), a4 = u(rng);
    t.add_row(i, std::vector<double>{a0, 0, 0, a3, a4}, std::vector<double>{a0 + 0.5 * a4, 0, 0, a3, 1});
  }
  const auto r = search_rule(t, 0, {});
  REQUIRE(r.rule.has_value());
  CHECK(r.rule->stage == 2);
  CHECK(r.rule->feature.kind == FeatureKind::WeightedSum);
  CHECK(r.rule->formula_text == "a0' = a0 + a4/2");
}

TEST_CASE("accepted features are invariant to positive rescaling of a slot") {
  auto pairs = planted_pairs(Family::Exp, 300, 11);
  const auto base = table_of(pairs);
  CoefficientTable scaled(Family::Exp, Template::exp_form(), Template::exp_form());
  for (std::size_t r = 0; r < base.rows(); ++r) {
    std::vector<double> s(5), d(5);
    for (std::size_t k = 0; k < 5; ++k) {
      s[k] = base.source(k)[r];
      d[k] = base.target(k)[r];
    }
    s[3] *= 3.7;
    scaled.add_row(r, s, d);
  }
  for (std::size_t k : {0u, 1u, 3u, 4u}) {
    const auto a = search_rule(base, k, {});
    const auto b = search_rule(scaled, k, {});
    REQUIRE(a.rule.has_value());
    REQUIRE(b.rule.has_value());
    CHECK(a.rule->feature.kind == b.rule->feature.kind);
    CHECK(a.rule->feature.slots == b.rule->feature.slots);
    CHECK(std::fabs(a.rule->evidence.r) == doctest::Approx(std::fabs(b.rule->evidence.r)).epsilon(1e-9));
  }
}

TEST_CASE("meta-rule over per-power slopes") {
  const std::vector<std::pair<int, double>> rounded{{1, 1.0},   {2, 0.5},   {3, 0.333}, {4, 0.25},
                                                    {5, 0.2},   {6, 0.167}, {7, 0.143}};
  const auto m = discover_meta_rule(rounded, {});
  CHECK(m.fits[m.winner].transform == "1/p");
  CHECK(m.accepted);
  CHECK(m.snapped_slope == 1.0);
  CHECK(m.intercept_pruned);
  const auto& identity = *m.fits[0].evidence;
  CHECK(identity.r_squared == doctest::Approx(0.735).epsilon(0.01));
  CHECK(identity.r_squared < 0.95);
  CHECK(std::fabs(m.fits[1].evidence->r) > 0.9999);

  std::vector<std::pair<int, double>> exact;
  for (int p = 1; p <= 7; ++p) exact.emplace_back(p, 1.0 / p);
  const auto e = discover_meta_rule(exact, {});
  CHECK(e.fits[e.winner].transform == "1/p");
  CHECK(e.fits[e.winner].evidence->r == doctest::Approx(1.0).epsilon(1e-12));

  CHECK_THROWS_AS(discover_meta_rule(std::span(exact).first(2), {}), Error);
}

TEST_CASE("reports on planted corpora") {
  const auto poly = build_report(planted_pairs(Family::Poly, 400, 12), {});
  CHECK(poly.complete);
  CHECK(poly.zero_slots == std::vector<std::size_t>{0});
  CHECK(poly.rules.size() == 7);
  REQUIRE(poly.meta_rule.has_value());
  CHECK(poly.meta_rule->formula_text == "a_k' = a_{k-1}/k");
  CHECK(poly.integral_formula == "a0*x + (a1/2)*x**2 + (a2/3)*x**3 + (a3/4)*x**4 + (a4/5)*x**5 + (a5/6)*x**6 + (a6/7)*x**7");

  const auto exp = build_report(planted_pairs(Family::Exp, 300, 13), {});
  CHECK(exp.integral_formula == "(a4/a3)*exp(a3*x) + a0*x - a4/a3");
  CHECK(exp.zero_slots == std::vector<std::size_t>{kPhaseSlot});
  CHECK(!exp.meta_rule.has_value());

  const auto sin = build_report(planted_pairs(Family::Sin, 300, 14), {});
  CHECK(sin.integral_formula == "-(a4/a3)*cos(a3*x) + a0*x + a4/a3");
  const auto cos = build_report(planted_pairs(Family::Cos, 300, 15), {});
  CHECK(cos.integral_formula == "(a4/a3)*sin(a3*x) + a0*x");

  // Completeness: every slot is either ruled or zero.
  for (const auto* r : {&poly, &exp, &sin, &cos}) {
    for (std::size_t k = 0; k < r->integral_form.slot_count(); ++k) {
      const bool zero = std::find(r->zero_slots.begin(), r->zero_slots.end(), k) != r->zero_slots.end();
      CHECK((r->rule_for(k) != nullptr) != zero);
    }
  }
}

TEST_CASE("correlation matrix marks unusable source slots") {
  const auto rep = build_report(planted_pairs(Family::Exp, 300, 16), {});
  REQUIRE(rep.correlation_rows.size() == 4);
  for (const auto& row : rep.correlation) {
    CHECK(!row[kLinearSlot].has_value());
    CHECK(!row[kPhaseSlot].has_value());
    CHECK(row[kRateSlot].has_value());
  }
}

TEST_CASE("report JSON and text are deterministic") {
  const auto pairs = planted_pairs(Family::Sin, 200, 17);
  const auto a = report_to_json(build_report(pairs, {})).dump(2);
  const auto b = report_to_json(build_report(pairs, {})).dump(2);
  CHECK(a == b);
  const auto j = report_to_json(build_report(pairs, {}));
  const std::string text = render_text(j);
  CHECK(text.find("-(a4/a3)*cos(a3*x) + a0*x + a4/a3") != std::string::npos);
  CHECK(text.find("N/A") != std::string::npos);
  CHECK(j["rules"].size() == 4);
  CHECK(j["rules"][0].contains("evidence"));
}
