#include "ptss/cli.hpp"

#include <cstdlib>
#include <fstream>
#include <optional>
#include <sstream>

#include <CLI11.hpp>

#include "ptss/approx_bisim.hpp"
#include "ptss/error.hpp"
#include "ptss/format_check.hpp"
#include "ptss/report.hpp"
#include "ptss/requirements.hpp"

namespace ptss {

namespace {

constexpr int kOk = 0;
constexpr int kVerdictFailure = 1;
constexpr int kInputError = 2;
constexpr int kBudgetError = 3;

struct Options {
  std::string format = "text";
  std::string out_file;
  bool strict = false;
  std::optional<std::size_t> max_states;
  std::optional<std::size_t> max_depth;
  std::optional<std::size_t> max_closure_iters;
  std::vector<std::string> params;

  std::string spec_file;
  std::vector<std::string> requirements;
  std::vector<std::string> seeds;
  std::vector<std::string> terms;
  std::vector<std::string> pairs;
  std::string op;
  std::string mode = "exact";
  std::string tolerance = "1/1000000";
  std::string pts_file;
  bool witness = false;
};

// Output of one command: the report and the exit code.
struct Outcome {
  std::string text;
  Json json;
  int code = kOk;
};

// Input problems found before any analysis runs.
struct InputFailure {
  Diagnostics diagnostics;
};

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::InvalidInput, "cannot read '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::size_t parse_count(const std::string& text, const std::string& what) {
  std::size_t pos = 0;
  unsigned long long v = 0;
  try {
    v = std::stoull(text, &pos);
  } catch (const std::exception&) {
    pos = 0;
  }
  if (pos == 0 || pos != text.size() || text.front() == '-')
    throw Error(ErrorCode::InvalidInput, what + " must be a natural number, got '" + text + "'");
  return static_cast<std::size_t>(v);
}

Budget make_budget(const Options& o) {
  Budget b;
  if (const char* env = std::getenv("PTSS_BUDGET_STATES"); env && *env)
    b.max_states = parse_count(env, "PTSS_BUDGET_STATES");
  if (o.max_states) b.max_states = *o.max_states;
  if (o.max_depth) b.max_depth = *o.max_depth;
  if (o.max_closure_iters) b.max_closure_iters = *o.max_closure_iters;
  return b;
}

Ptss load_spec(const Options& o, Diagnostics* warnings = nullptr) {
  if (o.spec_file.empty()) throw Error(ErrorCode::InvalidInput, "no specification file given");
  ParseOptions popts;
  for (const auto& p : o.params) {
    const auto eq = p.find('=');
    if (eq == std::string::npos || eq == 0)
      throw Error(ErrorCode::InvalidInput, "--param expects name=value, got '" + p + "'");
    const auto value = parse_rational(p.substr(eq + 1));
    if (!value) throw Error(ErrorCode::InvalidInput, "--param value '" + p.substr(eq + 1) + "' is not a number");
    popts.params.insert_or_assign(p.substr(0, eq), *value);
  }
  ParseResult parsed = parse_spec(read_file(o.spec_file), popts);
  if (!parsed) throw InputFailure{parsed.diagnostics};
  if (warnings) warnings->append(parsed.diagnostics);
  return std::move(*parsed.spec);
}

Requirement parse_requirement(const std::string& text) {
  if (text == "non-expansive") return Requirement::non_expansive();
  if (text.starts_with("p-norm=")) {
    const auto p = parse_rational(text.substr(7));
    if (!p) throw Error(ErrorCode::InvalidInput, "bad p in requirement '" + text + "'");
    return Requirement::p_norm(*p);
  }
  if (text.starts_with("arg-independent=")) {
    const std::string rest = text.substr(16);
    const auto colon = rest.rfind(':');
    if (colon == std::string::npos || colon == 0)
      throw Error(ErrorCode::InvalidInput, "arg-independent expects f:i, got '" + rest + "'");
    const std::size_t i = parse_count(rest.substr(colon + 1), "argument index");
    if (i == 0) throw Error(ErrorCode::InvalidInput, "argument indices start at 1");
    return Requirement::arg_independent(rest.substr(0, colon), i - 1);
  }
  throw Error(ErrorCode::InvalidInput, "unknown requirement '" + text + "'");
}

std::vector<RequirementVerdict> evaluate_requirements(const ExpansivityTable& table, const Options& o) {
  std::vector<RequirementVerdict> verdicts;
  for (const auto& text : o.requirements) {
    auto v = check_requirement(table, parse_requirement(text));
    verdicts.insert(verdicts.end(), v.begin(), v.end());
  }
  return verdicts;
}

bool all_pass(const std::vector<RequirementVerdict>& verdicts) {
  for (const auto& v : verdicts)
    if (v.verdict != Verdict::Pass) return false;
  return true;
}

Outcome cmd_check(const Options& o) {
  Diagnostics diags;
  const Ptss spec = load_spec(o, &diags);
  for (const auto& text : o.requirements) parse_requirement(text);
  diags.append(classify_evaluable(expand_ntmuxt(spec)));
  diags.sort();
  const FormatReport format = check_entmuft_spec(spec);
  const ChiTable chi = discriminating_power(spec);
  std::vector<RequirementVerdict> verdicts;
  if (!o.requirements.empty()) verdicts = evaluate_requirements(lfp_expansivity(spec), o);
  Outcome r{check_text(spec, format, chi, verdicts, diags), check_json(spec, format, chi, verdicts, diags)};
  if (o.strict && (!format.overall || !all_pass(verdicts))) r.code = kVerdictFailure;
  return r;
}

Outcome cmd_analyze(const Options& o) {
  const Ptss spec = load_spec(o);
  for (const auto& text : o.requirements) parse_requirement(text);
  const ExpansivityTable table = lfp_expansivity(spec);
  const std::vector<RequirementVerdict> verdicts = evaluate_requirements(table, o);
  Outcome r{analyze_text(table, verdicts), analyze_json(table, verdicts)};
  if (o.strict && !all_pass(verdicts)) r.code = kVerdictFailure;
  return r;
}

Outcome cmd_pts(const Options& o) {
  const Ptss spec = load_spec(o);
  if (o.seeds.empty()) throw Error(ErrorCode::InvalidInput, "pts needs at least one --seed");
  std::vector<StateTerm> seeds;
  for (const auto& s : o.seeds) seeds.push_back(parse_term(s, spec.signature));
  Engine engine(spec, make_budget(o));
  const Pts pts = reachable_fragment(engine, seeds);
  Outcome r{pts_text(pts), to_json(pts)};
  if (!pts.all_complete()) r.code = kBudgetError;
  return r;
}

DistanceOptions distance_options(const Options& o) {
  DistanceOptions d;
  if (o.mode == "exact") {
    d.mode = DistanceOptions::Mode::Exact;
  } else if (o.mode == "bracket") {
    d.mode = DistanceOptions::Mode::Bracket;
  } else {
    throw Error(ErrorCode::InvalidInput, "--mode must be exact or bracket");
  }
  const auto tol = parse_rational(o.tolerance);
  if (!tol || *tol <= 0) throw Error(ErrorCode::InvalidInput, "--tolerance must be a positive number");
  d.tolerance = *tol;
  d.want_witness = o.witness;
  return d;
}

Outcome cmd_distance(const Options& o) {
  if (o.terms.size() != 2) throw Error(ErrorCode::InvalidInput, "distance needs exactly two --term arguments");
  const DistanceOptions dopts = distance_options(o);
  if (!o.pts_file.empty()) {
    if (!o.spec_file.empty()) throw Error(ErrorCode::InvalidInput, "give either a specification or --pts, not both");
    Json j;
    try {
      j = Json::parse(read_file(o.pts_file));
    } catch (const Json::exception& e) {
      throw Error(ErrorCode::InvalidInput, std::string("invalid JSON in '") + o.pts_file + "': " + e.what());
    }
    const Pts pts = pts_from_json(j);
    const StateTerm a = parse_closed_term(o.terms[0]);
    const StateTerm b = parse_closed_term(o.terms[1]);
    const DistanceResult d = distance(pts, a, b, dopts);
    return {distance_text(a, b, d), distance_json(a, b, d, pts.budget)};
  }
  const Ptss spec = load_spec(o);
  const StateTerm a = parse_term(o.terms[0], spec.signature);
  const StateTerm b = parse_term(o.terms[1], spec.signature);
  Engine engine(spec, make_budget(o));
  const DistanceResult d = distance(engine, a, b, dopts);
  return {distance_text(a, b, d), distance_json(a, b, d, engine.budget())};
}

Outcome cmd_verify(const Options& o) {
  const Ptss spec = load_spec(o);
  if (o.op.empty()) throw Error(ErrorCode::InvalidInput, "verify needs --op");
  std::vector<std::pair<StateTerm, StateTerm>> pairs;
  for (const auto& p : o.pairs) {
    const auto bar = p.find('|');
    if (bar == std::string::npos) throw Error(ErrorCode::InvalidInput, "--pair expects \"t|t'\", got '" + p + "'");
    pairs.emplace_back(parse_term(p.substr(0, bar), spec.signature), parse_term(p.substr(bar + 1), spec.signature));
  }
  const VerifyReport report = verify_expansivity_bound(spec, o.op, pairs, make_budget(o));
  Outcome r{verify_text(report), to_json(report)};
  if (o.strict && !report.holds) r.code = kVerdictFailure;
  return r;
}

int exit_code_for(ErrorCode code) {
  switch (code) {
    case ErrorCode::BudgetExceeded:
    case ErrorCode::IncompleteFragment:
      return kBudgetError;
    default:
      return kInputError;
  }
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  Options o;
  CLI::App app{"Analyse probabilistic transition system specifications.", "ptss"};
  app.require_subcommand(1);
  app.add_option("--format", o.format, "Report format")->check(CLI::IsMember({"text", "json"}));
  app.add_option("--out", o.out_file, "Write the report to this file");
  app.add_flag("--strict", o.strict, "Exit with 1 when a verdict fails");
  app.add_option("--max-states", o.max_states, "State budget (overrides PTSS_BUDGET_STATES)");
  app.add_option("--max-depth", o.max_depth, "Exploration depth budget");
  app.add_option("--max-closure-iters", o.max_closure_iters, "Rounds for mutually dependent premises");
  app.add_option("--param", o.params, "Override a parameter: name=value");

  auto* check = app.add_subcommand("check", "Parse, validate and check the non-expansive rule format");
  auto* analyze = app.add_subcommand("analyze", "Compute expansivity powers and check requirements");
  auto* pts = app.add_subcommand("pts", "Explore the transition system reachable from seed terms");
  auto* dist = app.add_subcommand("distance", "Exact approximate-bisimulation distance of two terms");
  auto* verify = app.add_subcommand("verify", "Compare the expansivity bound with measured distances");
  for (auto* sub : {check, analyze, pts, verify}) sub->add_option("spec", o.spec_file, "Specification file")->required();
  dist->add_option("spec", o.spec_file, "Specification file");
  for (auto* sub : {check, analyze, pts, dist, verify}) sub->fallthrough();

  for (auto* sub : {check, analyze})
    sub->add_option("--require", o.requirements, "non-expansive | p-norm=P | arg-independent=f:i");
  pts->add_option("--seed", o.seeds, "Seed term");
  dist->add_option("--term", o.terms, "Term (give twice)");
  dist->add_option("--pts", o.pts_file, "Transition system in the JSON format written by pts");
  dist->add_option("--mode", o.mode, "exact or bracket");
  dist->add_option("--tolerance", o.tolerance, "Bracket width");
  dist->add_flag("--witness", o.witness, "Print the bisimulation at the distance");
  verify->add_option("--op", o.op, "Operator");
  verify->add_option("--pair", o.pairs, "Argument pair \"t|t'\"; one per argument");

  std::vector<std::string> argv_store{"ptss"};
  argv_store.insert(argv_store.end(), args.begin(), args.end());
  std::vector<const char*> argv;
  for (const auto& a : argv_store) argv.push_back(a.c_str());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kOk;
  } catch (const CLI::ParseError& e) {
    err << "ptss: " << e.what() << "\n";
    return kInputError;
  }

  const bool json = o.format == "json";
  Outcome result;
  try {
    if (check->parsed()) {
      result = cmd_check(o);
    } else if (analyze->parsed()) {
      result = cmd_analyze(o);
    } else if (pts->parsed()) {
      result = cmd_pts(o);
    } else if (dist->parsed()) {
      result = cmd_distance(o);
    } else {
      result = cmd_verify(o);
    }
  } catch (const InputFailure& f) {
    err << diagnostics_text(f.diagnostics);
    if (json) out << Json{{"diagnostics", to_json(f.diagnostics)}}.dump(2) << "\n";
    return kInputError;
  } catch (const Error& e) {
    const int code = exit_code_for(e.code());
    err << "ptss: " << to_string(e.code()) << ": " << e.what() << "\n";
    if (json) {
      Diagnostics d;
      d.add(Severity::Error, std::string(to_string(e.code())), {}, e.what());
      out << Json{{"diagnostics", to_json(d)}}.dump(2) << "\n";
    }
    return code;
  }

  const std::string body = json ? result.json.dump(2) + "\n" : result.text;
  if (o.out_file.empty()) {
    out << body;
  } else {
    std::ofstream f(o.out_file, std::ios::binary);
    if (!f) {
      err << "ptss: cannot write '" << o.out_file << "'\n";
      return kInputError;
    }
    f << body;
  }
  return result.code;
}

}  // namespace ptss
