#ifndef INTEGRULE_RULEDISCOVERY_HPP
#define INTEGRULE_RULEDISCOVERY_HPP

#include <array>
#include <cstddef>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "integrule/expr.hpp"
#include "integrule/regression.hpp"
#include "integrule/symfit.hpp"

namespace integrule {

struct RuleSearchConfig {
  double r_threshold = 0.95;   // |r| for one predictor, R^2 for two
  double const_prune = 0.01;   // constants below this are dropped
  double snap_tolerance = 0.01;
  double zero_tolerance = 0.01;  // |a_k'| below this counts as zero
  double zero_fraction = 0.99;
  double consensus_min = 0.5;
  std::size_t min_pairs = 30;
};

/// Coefficients of a single-form corpus, stored per slot (column-major).
/// Polynomial corpora are zero-padded to the widest degree present.
class CoefficientTable {
 public:
  CoefficientTable(Family source_family, Template source_form, Template integral_form);

  void add_row(std::size_t id, std::span<const double> source, std::span<const double> target);

  Family source_family() const noexcept { return source_family_; }
  const Template& source_form() const noexcept { return source_form_; }
  const Template& integral_form() const noexcept { return integral_form_; }
  std::size_t rows() const noexcept { return ids_.size(); }
  std::span<const std::size_t> ids() const noexcept { return ids_; }
  std::span<const double> source(std::size_t slot) const { return source_.at(slot); }
  std::span<const double> target(std::size_t slot) const { return target_.at(slot); }
  std::size_t source_slots() const noexcept { return source_.size(); }
  std::size_t target_slots() const noexcept { return target_.size(); }

  /// Slot is exactly zero in every row; regressions on it are "N/A".
  bool source_all_zero(std::size_t slot) const;
  bool source_never_zero(std::size_t slot) const;

 private:
  Family source_family_;
  Template source_form_;
  Template integral_form_;
  std::vector<std::size_t> ids_;
  std::vector<std::vector<double>> source_;
  std::vector<std::vector<double>> target_;
};

struct ConsensusResult {
  Template form = Template::poly(0);
  double fraction = 0.0;
  std::vector<std::size_t> members;  // indices into the pair list
};

/// Modal integral template of a single-family corpus. All polynomial
/// integrals count as one form (the widest degree present). Throws
/// InsufficientData below min_pairs and AmbiguousForm when the mode holds
/// less than consensus_min of the pairs.
ConsensusResult consensus_form(std::span<const IntegralPair> pairs, const RuleSearchConfig& cfg);

CoefficientTable build_table(std::span<const IntegralPair> pairs, const ConsensusResult& consensus);

bool zero_slot_detect(const CoefficientTable& table, std::size_t slot, const RuleSearchConfig& cfg);

enum class FeatureKind { Single, Reciprocal, Product, Quotient, WeightedSum, Triple };
enum class CombineOp { Add, Mul, Div };

const char* to_string(FeatureKind k);
FeatureKind feature_kind_from_string(const std::string& s);

struct FeatureSpec {
  FeatureKind kind = FeatureKind::Single;
  std::vector<std::size_t> slots;
  CombineOp inner = CombineOp::Mul;  // Triple: joins slots[0] and slots[1]
  CombineOp outer = CombineOp::Mul;  // Triple: joins that with slots[2]

  /// Weighted sums regress on two predictors; everything else on one.
  bool multivariate() const;
  /// Predictor values for one record's source coefficients.
  std::vector<double> predictors(std::span<const double> source) const;
  /// Text of each predictor, e.g. {"a4/a3"}.
  std::vector<std::string> predictor_text() const;
};

struct Rule {
  std::size_t target_slot = 0;
  FeatureSpec feature;
  int stage = 1;
  std::vector<double> weights;  // raw regression weights
  std::vector<double> snapped;  // snapped to integers or 1/2..1/9 when within tolerance
  double intercept = 0.0;       // 0 when pruned
  bool intercept_pruned = false;
  RegressionSummary evidence;
  std::string rhs_text;      // "a4/a3"
  std::string formula_text;  // "a4' = a4/a3"

  double slope() const { return weights.empty() ? 0.0 : weights.front(); }
  /// Target coefficient predicted from source coefficients with the snapped
  /// weights and pruned intercept.
  double apply(std::span<const double> source) const;
};

struct SearchStats {
  std::array<std::size_t, 3> evaluations{};  // features regressed per stage
  int accepted_stage = 0;                     // 0 when nothing qualified
};

struct SearchOutcome {
  std::optional<Rule> rule;
  SearchStats stats;
};

/// Staged search: single slots (and reciprocals), then slot pairs combined
/// by product, quotient or weighted sum, then triples. Stops at the first
/// stage with a qualifying feature and takes the strongest one there.
SearchOutcome search_rule(const CoefficientTable& table, std::size_t target_slot,
                          const RuleSearchConfig& cfg);

/// Nearest integer or +-1/k (k = 2..9) within tolerance, else the value itself.
double snap_constant(double v, double tolerance);

struct MetaTransformFit {
  std::string transform;  // "p", "1/p", "p^2", "sqrt(p)"
  std::optional<RegressionSummary> evidence;
};

struct MetaRule {
  std::vector<MetaTransformFit> fits;
  std::size_t winner = 0;
  bool accepted = false;
  double slope = 0.0;
  double snapped_slope = 0.0;
  double intercept = 0.0;
  bool intercept_pruned = false;
  std::string formula_text;
};

/// Regresses per-power slopes beta on transforms of the power p.
/// Throws InsufficientData below 3 points, NoRule if no transform is usable.
MetaRule discover_meta_rule(std::span<const std::pair<int, double>> power_slopes,
                            const RuleSearchConfig& cfg);

struct DiscoveryReport {
  Family source_family = Family::Poly;
  Template source_form = Template::poly(0);
  Template integral_form = Template::poly(0);
  double form_consensus_fraction = 0.0;
  std::size_t pair_count = 0;
  std::size_t used_count = 0;
  std::vector<Rule> rules;
  std::vector<std::size_t> zero_slots;
  std::vector<std::size_t> unresolved_slots;
  std::map<std::size_t, SearchStats> search_stats;
  std::vector<std::size_t> correlation_rows;  // target slots
  std::vector<std::vector<std::optional<double>>> correlation;  // [row][source slot]
  std::optional<MetaRule> meta_rule;
  std::string integral_formula;
  bool complete = true;
  std::vector<std::string> errors;

  const Rule* rule_for(std::size_t target_slot) const;
};

DiscoveryReport build_report(std::span<const IntegralPair> pairs, const RuleSearchConfig& cfg);

/// Report over an already assembled table (planted corpora, tests).
DiscoveryReport build_report(const CoefficientTable& table, double consensus_fraction,
                             std::size_t pair_count, const RuleSearchConfig& cfg);

/// Closed form of the integral assembled from the slot rules, e.g.
/// "(a4/a3)*exp(a3*x) + a0*x - a4/a3".
std::string render_integral_formula(const DiscoveryReport& report);

}  // namespace integrule

#endif  // INTEGRULE_RULEDISCOVERY_HPP
