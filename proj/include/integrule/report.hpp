#ifndef INTEGRULE_REPORT_HPP
#define INTEGRULE_REPORT_HPP

#include <string>

#include <json.hpp>

#include "integrule/rulediscovery.hpp"

namespace integrule {

/// Machine-readable report carrying every regression summary.
nlohmann::ordered_json report_to_json(const DiscoveryReport& report);

/// Human-readable report: correlation matrix, per-slot rules, search
/// counters, meta-rule and the assembled integral. Works from the JSON
/// document so a saved report can be re-rendered.
std::string render_text(const nlohmann::ordered_json& report);

}  // namespace integrule

#endif  // INTEGRULE_REPORT_HPP
