#include "integrule/report.hpp"

#include <cstdio>
#include <sstream>

namespace integrule {

using nlohmann::ordered_json;

namespace {

ordered_json summary_json(const RegressionSummary& s) {
  return {{"r", s.r},
          {"slope", s.slope},
          {"intercept", s.intercept},
          {"r_squared", s.r_squared},
          {"n", s.n},
          {"weights", s.weights}};
}

const char* op_name(CombineOp op) {
  switch (op) {
    case CombineOp::Add: return "add";
    case CombineOp::Mul: return "mul";
    case CombineOp::Div: return "div";
  }
  return "?";
}

std::string slot_label(std::size_t k, bool primed) {
  return "a" + std::to_string(k) + (primed ? "'" : "");
}

std::string fixed(double v, int places = 3) {
  char buf[48];
  std::snprintf(buf, sizeof buf, "%.*f", places, v);
  return buf;
}

std::string pad(const std::string& s, std::size_t width) {
  return s.size() >= width ? s : std::string(width - s.size(), ' ') + s;
}

}  // namespace

ordered_json report_to_json(const DiscoveryReport& rep) {
  ordered_json j;
  j["source_family"] = to_string(rep.source_family);
  j["source_form"] = rep.source_form.name();
  j["integral_form"] = rep.integral_form.name();
  j["form_consensus_fraction"] = rep.form_consensus_fraction;
  j["pair_count"] = rep.pair_count;
  j["used_count"] = rep.used_count;
  j["complete"] = rep.complete;
  j["integral_formula"] = rep.integral_formula;

  auto slots = ordered_json::array();
  for (std::size_t k : rep.zero_slots) slots.push_back(slot_label(k, true));
  j["zero_slots"] = slots;
  slots = ordered_json::array();
  for (std::size_t k : rep.unresolved_slots) slots.push_back(slot_label(k, true));
  j["unresolved_slots"] = slots;

  auto rules = ordered_json::array();
  for (const Rule& r : rep.rules) {
    ordered_json feature{{"kind", to_string(r.feature.kind)},
                         {"slots", r.feature.slots},
                         {"predictors", r.feature.predictor_text()}};
    if (r.feature.kind == FeatureKind::Triple) {
      feature["inner"] = op_name(r.feature.inner);
      feature["outer"] = op_name(r.feature.outer);
    }
    const auto& st = rep.search_stats.at(r.target_slot);
    rules.push_back({{"target", slot_label(r.target_slot, true)},
                     {"target_slot", r.target_slot},
                     {"stage", r.stage},
                     {"feature", feature},
                     {"weights", r.weights},
                     {"snapped_weights", r.snapped},
                     {"intercept", r.intercept},
                     {"intercept_pruned", r.intercept_pruned},
                     {"evidence", summary_json(r.evidence)},
                     {"evaluations", st.evaluations},
                     {"formula", r.formula_text}});
  }
  j["rules"] = rules;

  auto corr = ordered_json::object();
  corr["columns"] = ordered_json::array();
  for (std::size_t s = 0; s < rep.source_form.slot_count(); ++s)
    corr["columns"].push_back(slot_label(s, false));
  corr["rows"] = ordered_json::array();
  for (std::size_t i = 0; i < rep.correlation_rows.size(); ++i) {
    ordered_json row{{"target", slot_label(rep.correlation_rows[i], true)},
                     {"r", ordered_json::array()}};
    for (const auto& v : rep.correlation[i]) row["r"].push_back(v ? ordered_json(*v) : ordered_json());
    corr["rows"].push_back(row);
  }
  j["correlation"] = corr;

  if (rep.meta_rule) {
    const MetaRule& m = *rep.meta_rule;
    ordered_json meta;
    auto fits = ordered_json::array();
    for (const auto& f : m.fits)
      fits.push_back({{"transform", f.transform},
                      {"evidence", f.evidence ? summary_json(*f.evidence) : ordered_json()}});
    meta["fits"] = fits;
    meta["winner"] = m.fits[m.winner].transform;
    meta["accepted"] = m.accepted;
    meta["slope"] = m.slope;
    meta["snapped_slope"] = m.snapped_slope;
    meta["intercept"] = m.intercept;
    meta["intercept_pruned"] = m.intercept_pruned;
    meta["formula"] = m.formula_text;
    j["meta_rule"] = meta;
  } else {
    j["meta_rule"] = nullptr;
  }
  j["errors"] = rep.errors;
  return j;
}

std::string render_text(const ordered_json& j) {
  std::ostringstream out;
  out << "Source family: " << j.at("source_family").get<std::string>() << " ("
      << j.at("source_form").get<std::string>() << ")\n";
  out << "Integral form: " << j.at("integral_form").get<std::string>() << ", consensus "
      << fixed(100.0 * j.at("form_consensus_fraction").get<double>(), 1) << "% ("
      << j.at("used_count").get<std::size_t>() << " of " << j.at("pair_count").get<std::size_t>()
      << " pairs)\n\n";

  const auto& corr = j.at("correlation");
  out << "Correlation (r) of target vs. source coefficients\n";
  out << pad("", 6);
  for (const auto& c : corr.at("columns")) out << pad(c.get<std::string>(), 8);
  out << "\n";
  for (const auto& row : corr.at("rows")) {
    out << pad(row.at("target").get<std::string>(), 6);
    for (const auto& v : row.at("r")) out << pad(v.is_null() ? "N/A" : fixed(v.get<double>()), 8);
    out << "\n";
  }

  out << "\nRules\n";
  for (const auto& r : j.at("rules")) {
    const auto& ev = r.at("evidence");
    const auto& feat = r.at("feature");
    out << "  " << r.at("formula").get<std::string>() << "\n"
        << "    stage " << r.at("stage").get<int>() << ", " << feat.at("kind").get<std::string>();
    for (const auto& p : feat.at("predictors")) out << " [" << p.get<std::string>() << "]";
    out << ", r " << fixed(ev.at("r").get<double>()) << ", R^2 " << fixed(ev.at("r_squared").get<double>())
        << ", slope";
    for (const auto& w : r.at("weights")) out << " " << fixed(w.get<double>());
    out << ", intercept " << fixed(ev.at("intercept").get<double>());
    if (r.at("intercept_pruned").get<bool>()) out << " (pruned)";
    const auto& ev_counts = r.at("evaluations");
    out << ", features tried " << ev_counts[0].get<std::size_t>() << "/"
        << ev_counts[1].get<std::size_t>() << "/" << ev_counts[2].get<std::size_t>() << "\n";
  }
  if (!j.at("zero_slots").empty()) {
    out << "  zero:";
    for (const auto& s : j.at("zero_slots")) out << " " << s.get<std::string>();
    out << "\n";
  }
  if (!j.at("unresolved_slots").empty()) {
    out << "  no rule found:";
    for (const auto& s : j.at("unresolved_slots")) out << " " << s.get<std::string>();
    out << "\n";
  }

  const auto& meta = j.at("meta_rule");
  if (!meta.is_null()) {
    out << "\nSlope vs. power\n";
    for (const auto& f : meta.at("fits")) {
      out << pad(f.at("transform").get<std::string>(), 9) << ": ";
      if (f.at("evidence").is_null()) {
        out << "N/A\n";
        continue;
      }
      const auto& ev = f.at("evidence");
      out << "r " << fixed(ev.at("r").get<double>()) << ", R^2 " << fixed(ev.at("r_squared").get<double>())
          << ", slope " << fixed(ev.at("slope").get<double>()) << ", intercept "
          << fixed(ev.at("intercept").get<double>()) << "\n";
    }
    out << "  best: " << meta.at("winner").get<std::string>()
        << (meta.at("accepted").get<bool>() ? "" : " (below threshold)") << "\n";
    out << "  " << meta.at("formula").get<std::string>() << "\n";
  }

  out << "\nIntegral: " << j.at("integral_formula").get<std::string>() << "\n";
  if (!j.at("complete").get<bool>()) out << "Report incomplete.\n";
  for (const auto& e : j.at("errors")) out << "error: " << e.get<std::string>() << "\n";
  return out.str();
}

}  // namespace integrule
