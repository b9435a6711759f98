#pragma once

// Deterministic JSON and text renderings of analysis results. Rationals are
// rendered as "n/d" strings so that reports stay exact.

#include <string>
#include <vector>

#include <json.hpp>

#include "ptss/approx_bisim.hpp"
#include "ptss/expansivity.hpp"
#include "ptss/format_check.hpp"
#include "ptss/requirements.hpp"
#include "ptss/semantics.hpp"

namespace ptss {

using Json = nlohmann::ordered_json;

Json to_json(const Diagnostics& diags);
Json to_json(const Budget& budget);
Json to_json(NInfty v);
Json to_json(const Pts& pts);
Json to_json(const VerifyReport& report);
/// `{pairs: [[t, t']], epsilon}`.
Json relation_json(const std::vector<std::pair<StateTerm, StateTerm>>& pairs, const Rational& eps);

Json check_json(const Ptss& spec, const FormatReport& format, const ChiTable& chi,
                const std::vector<RequirementVerdict>& verdicts, const Diagnostics& diags);
Json analyze_json(const ExpansivityTable& table, const std::vector<RequirementVerdict>& verdicts);
Json distance_json(const StateTerm& t, const StateTerm& t2, const DistanceResult& result, const Budget& budget);

std::string check_text(const Ptss& spec, const FormatReport& format, const ChiTable& chi,
                       const std::vector<RequirementVerdict>& verdicts, const Diagnostics& diags);
std::string analyze_text(const ExpansivityTable& table, const std::vector<RequirementVerdict>& verdicts);
std::string pts_text(const Pts& pts);
std::string distance_text(const StateTerm& t, const StateTerm& t2, const DistanceResult& result);
std::string verify_text(const VerifyReport& report);
std::string diagnostics_text(const Diagnostics& diags);

/// Reads the format written by to_json(const Pts&). Throws Error(InvalidInput).
Pts pts_from_json(const Json& j);

}  // namespace ptss
