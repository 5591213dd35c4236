#include "integrule/rulediscovery.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <functional>

namespace integrule {

// ---------------------------------------------------------------------------
// CoefficientTable

CoefficientTable::CoefficientTable(Family source_family, Template source_form,
                                   Template integral_form)
    : source_family_(source_family),
      source_form_(source_form),
      integral_form_(integral_form),
      source_(source_form.slot_count()),
      target_(integral_form.slot_count()) {}

void CoefficientTable::add_row(std::size_t id, std::span<const double> source,
                               std::span<const double> target) {
  if (source.size() > source_.size() || target.size() > target_.size())
    throw Error(ErrorCode::InvalidArgument, "row wider than table");
  ids_.push_back(id);
  for (std::size_t s = 0; s < source_.size(); ++s)
    source_[s].push_back(s < source.size() ? source[s] : 0.0);
  for (std::size_t s = 0; s < target_.size(); ++s)
    target_[s].push_back(s < target.size() ? target[s] : 0.0);
}

bool CoefficientTable::source_all_zero(std::size_t slot) const {
  const auto& col = source_.at(slot);
  return std::all_of(col.begin(), col.end(), [](double v) { return v == 0.0; });
}

bool CoefficientTable::source_never_zero(std::size_t slot) const {
  const auto& col = source_.at(slot);
  return std::none_of(col.begin(), col.end(), [](double v) { return v == 0.0; });
}

// ---------------------------------------------------------------------------
// Consensus

ConsensusResult consensus_form(std::span<const IntegralPair> pairs, const RuleSearchConfig& cfg) {
  if (pairs.size() < cfg.min_pairs)
    throw Error(ErrorCode::InsufficientData, "need at least " + std::to_string(cfg.min_pairs) +
                                                 " pairs, got " + std::to_string(pairs.size()));
  const Family source = pairs.front().f.form().family();
  std::map<Family, std::size_t> counts;
  for (const auto& p : pairs) {
    if (p.f.form().family() != source)
      throw Error(ErrorCode::InvalidArgument, "corpus mixes source families");
    ++counts[p.g.form().family()];
  }
  Family modal = counts.begin()->first;
  for (auto [fam, n] : counts)
    if (n > counts[modal]) modal = fam;

  ConsensusResult out;
  int max_degree = 0;
  for (std::size_t i = 0; i < pairs.size(); ++i) {
    if (pairs[i].g.form().family() != modal) continue;
    out.members.push_back(i);
    if (modal == Family::Poly) max_degree = std::max(max_degree, pairs[i].g.form().degree());
  }
  out.fraction = static_cast<double>(out.members.size()) / static_cast<double>(pairs.size());
  out.form = modal == Family::Poly ? Template::poly(max_degree) : pairs[out.members.front()].g.form();
  if (out.fraction < cfg.consensus_min)
    throw Error(ErrorCode::AmbiguousForm, "no integral form reaches the consensus threshold");
  return out;
}

CoefficientTable build_table(std::span<const IntegralPair> pairs, const ConsensusResult& consensus) {
  if (consensus.members.empty()) throw Error(ErrorCode::InsufficientData, "empty consensus");
  const auto& first = pairs[consensus.members.front()].f;
  Template source_form = first.form();
  if (source_form.is_polynomial()) {
    int d = 0;
    for (std::size_t i : consensus.members) d = std::max(d, pairs[i].f.form().degree());
    source_form = Template::poly(d);
  }
  CoefficientTable table(first.form().family(), source_form, consensus.form);
  for (std::size_t i : consensus.members)
    table.add_row(pairs[i].id, pairs[i].f.coefficients(), pairs[i].g.coefficients());
  return table;
}

bool zero_slot_detect(const CoefficientTable& table, std::size_t slot, const RuleSearchConfig& cfg) {
  const auto col = table.target(slot);
  if (col.empty()) return false;
  const auto small = std::count_if(col.begin(), col.end(),
                                   [&](double v) { return std::fabs(v) < cfg.zero_tolerance; });
  return static_cast<double>(small) >= cfg.zero_fraction * static_cast<double>(col.size());
}

// ---------------------------------------------------------------------------
// Features

const char* to_string(FeatureKind k) {
  switch (k) {
    case FeatureKind::Single: return "single";
    case FeatureKind::Reciprocal: return "reciprocal";
    case FeatureKind::Product: return "product";
    case FeatureKind::Quotient: return "quotient";
    case FeatureKind::WeightedSum: return "weighted_sum";
    case FeatureKind::Triple: return "triple";
  }
  return "?";
}

FeatureKind feature_kind_from_string(const std::string& s) {
  for (auto k : {FeatureKind::Single, FeatureKind::Reciprocal, FeatureKind::Product,
                 FeatureKind::Quotient, FeatureKind::WeightedSum, FeatureKind::Triple})
    if (s == to_string(k)) return k;
  throw Error(ErrorCode::InvalidArgument, "unknown feature kind '" + s + "'");
}

namespace {

double combine(CombineOp op, double a, double b) {
  switch (op) {
    case CombineOp::Add: return a + b;
    case CombineOp::Mul: return a * b;
    case CombineOp::Div: return a / b;
  }
  return 0.0;
}

const char* op_symbol(CombineOp op) {
  switch (op) {
    case CombineOp::Add: return "+";
    case CombineOp::Mul: return "*";
    case CombineOp::Div: return "/";
  }
  return "?";
}

std::string slot_name(std::size_t i) { return "a" + std::to_string(i); }
std::string target_name(std::size_t i) { return slot_name(i) + "'"; }

}  // namespace

bool FeatureSpec::multivariate() const {
  return kind == FeatureKind::WeightedSum || (kind == FeatureKind::Triple && outer == CombineOp::Add);
}

std::vector<double> FeatureSpec::predictors(std::span<const double> s) const {
  auto at = [&](std::size_t k) { return s[slots.at(k)]; };
  switch (kind) {
    case FeatureKind::Single: return {at(0)};
    case FeatureKind::Reciprocal: return {1.0 / at(0)};
    case FeatureKind::Product: return {at(0) * at(1)};
    case FeatureKind::Quotient: return {at(0) / at(1)};
    case FeatureKind::WeightedSum: return {at(0), at(1)};
    case FeatureKind::Triple: {
      const double base = combine(inner, at(0), at(1));
      if (outer == CombineOp::Add) return {base, at(2)};
      return {combine(outer, base, at(2))};
    }
  }
  return {};
}

std::vector<std::string> FeatureSpec::predictor_text() const {
  auto n = [&](std::size_t k) { return slot_name(slots.at(k)); };
  switch (kind) {
    case FeatureKind::Single: return {n(0)};
    case FeatureKind::Reciprocal: return {"1/" + n(0)};
    case FeatureKind::Product: return {n(0) + "*" + n(1)};
    case FeatureKind::Quotient: return {n(0) + "/" + n(1)};
    case FeatureKind::WeightedSum: return {n(0), n(1)};
    case FeatureKind::Triple: {
      const std::string base = n(0) + op_symbol(inner) + n(1);
      if (outer == CombineOp::Add) return {base, n(2)};
      return {"(" + base + ")" + op_symbol(outer) + n(2)};
    }
  }
  return {};
}

double snap_constant(double v, double tolerance) {
  double best = v, best_gap = tolerance;
  auto consider = [&](double c) {
    const double gap = std::fabs(v - c);
    if (gap <= best_gap) {
      best = c;
      best_gap = gap;
    }
  };
  const double nearest_int = std::round(v);
  if (nearest_int != 0.0) consider(nearest_int);
  for (int k = 2; k <= 9; ++k) {
    consider(1.0 / k);
    consider(-1.0 / k);
  }
  return best;
}

double Rule::apply(std::span<const double> source) const {
  const auto pred = feature.predictors(source);
  double y = intercept;
  for (std::size_t i = 0; i < pred.size() && i < snapped.size(); ++i) y += snapped[i] * pred[i];
  return y;
}

namespace {

std::string format_number(double v, int places = 3) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", places, v);
  return buf;
}

bool is_integer(double v) { return v == std::round(v); }

// One weighted predictor, e.g. "a4/a3", "-a4/a3", "a1/2", "0.512*a3".
std::string weighted_term(double w, double raw, const std::string& pred, bool reciprocal_of_slot) {
  const bool snapped = w != raw || is_integer(w) || std::fabs(w * std::round(1.0 / w) - 1.0) < 1e-12;
  const std::string sign = w < 0.0 ? "-" : "";
  const double a = std::fabs(w);
  if (snapped && a == 1.0) return sign + pred;
  if (snapped && a < 1.0) {
    const long k = std::lround(1.0 / a);
    if (std::fabs(a * static_cast<double>(k) - 1.0) < 1e-12) {
      if (reciprocal_of_slot) return sign + "1/(" + std::to_string(k) + "*" + pred.substr(2) + ")";
      return sign + pred + "/" + std::to_string(k);
    }
  }
  if (snapped && is_integer(a)) {
    if (reciprocal_of_slot) return sign + std::to_string(std::lround(a)) + pred.substr(1);
    return sign + std::to_string(std::lround(a)) + "*" + pred;
  }
  return sign + format_number(a) + "*" + pred;
}

void append_signed(std::string& out, const std::string& term) {
  if (out.empty()) {
    out = term;
  } else if (!term.empty() && term.front() == '-') {
    out += " - " + term.substr(1);
  } else {
    out += " + " + term;
  }
}

std::string render_rhs(const Rule& rule) {
  const auto preds = rule.feature.predictor_text();
  std::string out;
  for (std::size_t i = 0; i < preds.size(); ++i) {
    if (rule.snapped[i] == 0.0) continue;
    std::string p = preds[i];
    if (preds.size() > 1 && p.find_first_of("*/+") != std::string::npos) p = "(" + p + ")";
    append_signed(out, weighted_term(rule.snapped[i], rule.weights[i], p,
                                     rule.feature.kind == FeatureKind::Reciprocal));
  }
  if (!rule.intercept_pruned && rule.intercept != 0.0)
    append_signed(out, format_number(rule.intercept));
  return out.empty() ? "0" : out;
}

struct Candidate {
  FeatureSpec feature;
  RegressionSummary summary;
  double strength = 0.0;
};

class StageRunner {
 public:
  StageRunner(const CoefficientTable& table, std::span<const double> target,
              const RuleSearchConfig& cfg, std::size_t& counter)
      : table_(table), target_(target), cfg_(cfg), counter_(counter) {}

  void consider(const FeatureSpec& f) {
    ++counter_;
    const std::size_t n = table_.rows();
    std::vector<std::vector<double>> cols(f.multivariate() ? 2 : 1, std::vector<double>(n));
    std::vector<double> src(table_.source_slots());
    for (std::size_t r = 0; r < n; ++r) {
      for (std::size_t s = 0; s < src.size(); ++s) src[s] = table_.source(s)[r];
      const auto p = f.predictors(src);
      for (std::size_t c = 0; c < cols.size(); ++c) {
        if (!std::isfinite(p[c])) return;
        cols[c][r] = p[c];
      }
    }
    RegressionSummary s;
    try {
      s = cols.size() == 1 ? linear_regression(cols[0], target_)
                           : linear_regression2(cols[0], cols[1], target_);
    } catch (const Error&) {
      return;
    }
    const bool qualifies = f.multivariate() ? s.r_squared > cfg_.r_threshold
                                            : std::fabs(s.r) > cfg_.r_threshold;
    if (!qualifies) return;
    const double strength = f.multivariate() ? std::sqrt(s.r_squared) : std::fabs(s.r);
    if (!best_ || strength > best_->strength) best_ = Candidate{f, s, strength};
  }

  const std::optional<Candidate>& best() const { return best_; }

 private:
  const CoefficientTable& table_;
  std::span<const double> target_;
  const RuleSearchConfig& cfg_;
  std::size_t& counter_;
  std::optional<Candidate> best_;
};

Rule make_rule(std::size_t target_slot, int stage, const Candidate& c, const RuleSearchConfig& cfg) {
  Rule rule;
  rule.target_slot = target_slot;
  rule.feature = c.feature;
  rule.stage = stage;
  rule.evidence = c.summary;
  rule.weights = c.summary.weights;
  for (double w : rule.weights) {
    if (rule.weights.size() > 1 && std::fabs(w) < cfg.const_prune)
      rule.snapped.push_back(0.0);
    else
      rule.snapped.push_back(snap_constant(w, cfg.snap_tolerance));
  }
  rule.intercept_pruned = std::fabs(c.summary.intercept) < cfg.const_prune;
  rule.intercept = rule.intercept_pruned ? 0.0 : c.summary.intercept;
  rule.rhs_text = render_rhs(rule);
  rule.formula_text = target_name(target_slot) + " = " + rule.rhs_text;
  return rule;
}

}  // namespace

SearchOutcome search_rule(const CoefficientTable& table, std::size_t target_slot,
                          const RuleSearchConfig& cfg) {
  SearchOutcome out;
  const auto target = table.target(target_slot);
  std::vector<std::size_t> usable;
  for (std::size_t s = 0; s < table.source_slots(); ++s)
    if (!table.source_all_zero(s)) usable.push_back(s);

  auto finish = [&](int stage, const std::optional<Candidate>& best) {
    if (!best) return false;
    out.rule = make_rule(target_slot, stage, *best, cfg);
    out.stats.accepted_stage = stage;
    return true;
  };

  // Stage 1: a_i and 1/a_i.
  {
    StageRunner run(table, target, cfg, out.stats.evaluations[0]);
    for (std::size_t i : usable) {
      run.consider({FeatureKind::Single, {i}});
      if (table.source_never_zero(i)) run.consider({FeatureKind::Reciprocal, {i}});
    }
    if (finish(1, run.best())) return out;
  }

  // Stage 2: a_i*a_j, a_i/a_j, w1*a_i + w2*a_j.
  std::vector<FeatureSpec> pair_features;
  for (std::size_t i : usable)
    for (std::size_t j : usable) {
      if (i <= j) pair_features.push_back({FeatureKind::Product, {i, j}});
      if (i != j && table.source_never_zero(j)) pair_features.push_back({FeatureKind::Quotient, {i, j}});
    }
  {
    StageRunner run(table, target, cfg, out.stats.evaluations[1]);
    for (const auto& f : pair_features) run.consider(f);
    for (std::size_t a = 0; a < usable.size(); ++a)
      for (std::size_t b = a + 1; b < usable.size(); ++b)
        run.consider({FeatureKind::WeightedSum, {usable[a], usable[b]}});
    if (finish(2, run.best())) return out;
  }

  // Stage 3: a stage-2 product or quotient joined with one more slot.
  {
    StageRunner run(table, target, cfg, out.stats.evaluations[2]);
    for (const auto& base : pair_features) {
      const CombineOp inner = base.kind == FeatureKind::Product ? CombineOp::Mul : CombineOp::Div;
      for (std::size_t k : usable) {
        const std::vector<std::size_t> slots{base.slots[0], base.slots[1], k};
        run.consider({FeatureKind::Triple, slots, inner, CombineOp::Add});
        run.consider({FeatureKind::Triple, slots, inner, CombineOp::Mul});
        if (table.source_never_zero(k)) run.consider({FeatureKind::Triple, slots, inner, CombineOp::Div});
      }
    }
    finish(3, run.best());
  }
  return out;
}

// ---------------------------------------------------------------------------
// Meta-rule

MetaRule discover_meta_rule(std::span<const std::pair<int, double>> power_slopes,
                            const RuleSearchConfig& cfg) {
  if (power_slopes.size() < 3)
    throw Error(ErrorCode::InsufficientData, "meta-rule needs at least 3 (power, slope) points");
  struct Transform {
    const char* name;
    std::function<double(double)> fn;
  };
  const Transform transforms[] = {
      {"p", [](double p) { return p; }},
      {"1/p", [](double p) { return 1.0 / p; }},
      {"p^2", [](double p) { return p * p; }},
      {"sqrt(p)", [](double p) { return std::sqrt(p); }},
  };
  std::vector<double> beta;
  for (auto [p, b] : power_slopes) beta.push_back(b);

  MetaRule out;
  double best = -1.0;
  for (const auto& t : transforms) {
    std::vector<double> xs;
    for (auto [p, b] : power_slopes) xs.push_back(t.fn(static_cast<double>(p)));
    MetaTransformFit fit{t.name, std::nullopt};
    try {
      fit.evidence = linear_regression(xs, beta);
    } catch (const Error&) {
    }
    if (fit.evidence && std::fabs(fit.evidence->r) > best) {
      best = std::fabs(fit.evidence->r);
      out.winner = out.fits.size();
    }
    out.fits.push_back(std::move(fit));
  }
  if (best < 0.0) throw Error(ErrorCode::NoRule, "no transform of p could be regressed");

  const auto& win = *out.fits[out.winner].evidence;
  out.accepted = std::fabs(win.r) > cfg.r_threshold;
  out.slope = win.slope;
  out.snapped_slope = snap_constant(win.slope, cfg.snap_tolerance);
  out.intercept_pruned = std::fabs(win.intercept) < cfg.const_prune;
  out.intercept = out.intercept_pruned ? 0.0 : win.intercept;

  const std::string& tname = out.fits[out.winner].transform;
  std::string rhs = weighted_term(out.snapped_slope, out.slope, tname == "p" ? "p" : "(" + tname + ")", false);
  if (!out.intercept_pruned) append_signed(rhs, format_number(out.intercept));
  out.formula_text = "beta = " + rhs;
  return out;
}

// ---------------------------------------------------------------------------
// Report

const Rule* DiscoveryReport::rule_for(std::size_t target_slot) const {
  for (const auto& r : rules)
    if (r.target_slot == target_slot) return &r;
  return nullptr;
}

namespace {

bool is_identifier(const std::string& s) {
  if (s.size() < 2 || s[0] != 'a') return false;
  return std::all_of(s.begin() + 1, s.end(), [](char c) { return c >= '0' && c <= '9'; });
}

// rhs times a basis atom: "a0*x", "(a1/2)*x**2", "-(a4/a3)*cos(a3*x)".
std::string scaled_atom(const std::string& rhs, const std::string& atom) {
  if (atom.empty()) return rhs;
  if (rhs == "1") return atom;
  if (rhs == "-1") return "-" + atom;
  if (is_identifier(rhs)) return rhs + "*" + atom;
  if (rhs.front() == '-' && rhs.find_first_of("+-", 1) == std::string::npos) {
    const std::string rest = rhs.substr(1);
    return is_identifier(rest) ? "-" + rest + "*" + atom : "-(" + rest + ")*" + atom;
  }
  return "(" + rhs + ")*" + atom;
}

}  // namespace

std::string render_integral_formula(const DiscoveryReport& report) {
  const Template& form = report.integral_form;
  auto rhs = [&](std::size_t slot) -> std::string {
    if (const Rule* r = report.rule_for(slot)) return r->rhs_text;
    if (std::find(report.zero_slots.begin(), report.zero_slots.end(), slot) != report.zero_slots.end())
      return "0";
    return target_name(slot);  // unresolved: leave the coefficient symbolic
  };
  std::string out;
  if (form.is_polynomial()) {
    for (std::size_t k = 0; k < form.slot_count(); ++k) {
      const std::string c = rhs(k);
      if (c == "0") continue;
      const std::string atom = k == 0 ? "" : k == 1 ? "x" : "x**" + std::to_string(k);
      append_signed(out, scaled_atom(c, atom));
    }
  } else {
    const std::string rate = rhs(kRateSlot);
    std::string inner = is_identifier(rate) ? rate + "*x" : "(" + rate + ")*x";
    const std::string phase = rhs(kPhaseSlot);
    if (phase != "0") append_signed(inner, phase);
    const std::string atom = std::string(to_string(form.family())) + "(" + inner + ")";
    const std::string amp = rhs(kAmplitudeSlot);
    if (amp != "0") append_signed(out, scaled_atom(amp, atom));
    const std::string lin = rhs(kLinearSlot);
    if (lin != "0") append_signed(out, scaled_atom(lin, "x"));
    const std::string off = rhs(kOffsetSlot);
    if (off != "0") append_signed(out, off);
  }
  return out.empty() ? "0" : out;
}

DiscoveryReport build_report(const CoefficientTable& table, double consensus_fraction,
                             std::size_t pair_count, const RuleSearchConfig& cfg) {
  DiscoveryReport rep;
  rep.source_family = table.source_family();
  rep.source_form = table.source_form();
  rep.integral_form = table.integral_form();
  rep.form_consensus_fraction = consensus_fraction;
  rep.pair_count = pair_count;
  rep.used_count = table.rows();

  for (std::size_t k = 0; k < table.target_slots(); ++k) {
    if (zero_slot_detect(table, k, cfg)) {
      rep.zero_slots.push_back(k);
      continue;
    }
    rep.correlation_rows.push_back(k);
    std::vector<std::optional<double>> row;
    for (std::size_t s = 0; s < table.source_slots(); ++s) {
      std::optional<double> r;
      if (!table.source_all_zero(s)) {
        try {
          r = linear_regression(table.source(s), table.target(k)).r;
        } catch (const Error&) {
        }
      }
      row.push_back(r);
    }
    rep.correlation.push_back(std::move(row));

    SearchOutcome found = search_rule(table, k, cfg);
    rep.search_stats[k] = found.stats;
    if (found.rule) {
      rep.rules.push_back(std::move(*found.rule));
    } else {
      rep.unresolved_slots.push_back(k);
      rep.errors.push_back(std::string(to_string(ErrorCode::NoRule)) + "(" + target_name(k) + ")");
    }
  }

  if (table.integral_form().is_polynomial()) {
    std::vector<std::pair<int, double>> points;
    bool shifted_single = true;
    for (const auto& r : rep.rules) {
      if (r.feature.kind != FeatureKind::Single) continue;
      points.emplace_back(static_cast<int>(r.target_slot), r.slope());
      shifted_single = shifted_single && r.feature.slots[0] + 1 == r.target_slot;
    }
    try {
      MetaRule meta = discover_meta_rule(points, cfg);
      if (meta.accepted && shifted_single && meta.fits[meta.winner].transform == "1/p" &&
          meta.snapped_slope == 1.0 && meta.intercept_pruned)
        meta.formula_text = "a_k' = a_{k-1}/k";
      rep.meta_rule = std::move(meta);
    } catch (const Error& e) {
      rep.errors.push_back(std::string("meta-rule: ") + e.what());
    }
  }

  rep.complete = rep.unresolved_slots.empty();
  rep.integral_formula = render_integral_formula(rep);
  return rep;
}

DiscoveryReport build_report(std::span<const IntegralPair> pairs, const RuleSearchConfig& cfg) {
  const ConsensusResult consensus = consensus_form(pairs, cfg);
  const CoefficientTable table = build_table(pairs, consensus);
  return build_report(table, consensus.fraction, pairs.size(), cfg);
}

}  // namespace integrule
