#include "ptss/syntax.hpp"

#include <algorithm>
#include <cctype>
#include <utility>

#include "ptss/error.hpp"

namespace ptss {

// --- Rule / Ptss / Diagnostics ---------------------------------------------

std::vector<std::string> Rule::source_vars() const {
  if (const auto* f = fsource()) return f->vars;
  return {std::get<XSource>(source).var};
}

std::vector<std::string> Rule::derivatives() const {
  std::vector<std::string> out;
  out.reserve(positive.size());
  for (const auto& p : positive) out.push_back(p.derivative);
  return out;
}

bool operator==(const Rule& a, const Rule& b) {
  return a.name == b.name && a.positive == b.positive && a.negative == b.negative &&
         a.source == b.source && a.action == b.action && a.target == b.target;
}

std::set<std::string> Ptss::actions() const {
  std::set<std::string> out;
  for (const auto& r : rules) {
    out.insert(r.action);
    for (const auto& p : r.positive) out.insert(p.action);
    for (const auto& n : r.negative) out.insert(n.action);
  }
  return out;
}

std::vector<const Rule*> Ptss::rules_for(std::string_view op) const {
  std::vector<const Rule*> out;
  for (const auto& r : rules)
    if (const auto* f = r.fsource(); f && f->op == op) out.push_back(&r);
  return out;
}

bool Ptss::has_xsource_rules() const {
  return std::any_of(rules.begin(), rules.end(), [](const Rule& r) { return !r.has_fsource(); });
}

void Diagnostics::add(Severity severity, std::string code, SourceLocation loc, std::string message) {
  items_.push_back({severity, std::move(code), loc, std::move(message)});
}

void Diagnostics::append(const Diagnostics& other) {
  items_.insert(items_.end(), other.items_.begin(), other.items_.end());
}

void Diagnostics::sort() {
  std::stable_sort(items_.begin(), items_.end(), [](const Diagnostic& a, const Diagnostic& b) {
    if (a.loc != b.loc) return a.loc < b.loc;
    return a.code < b.code;
  });
}

bool Diagnostics::has_errors() const {
  return std::any_of(items_.begin(), items_.end(),
                     [](const Diagnostic& d) { return d.severity == Severity::Error; });
}

bool Diagnostics::contains_code(std::string_view code) const {
  return std::any_of(items_.begin(), items_.end(), [&](const Diagnostic& d) { return d.code == code; });
}

// --- Lexer -----------------------------------------------------------------

namespace {

enum class Tok {
  Word, Number, DVar,
  LParen, RParen, Comma, Semi, Colon, Slash, Star, Plus, Minus, Equals,
  Oplus,      // (+)
  Turnstile,  // |-
  Arrow,      // ->
  NegArrow,   // -/>
  End, Bad,
};

struct Token {
  Tok kind;
  std::string text;
  SourceLocation loc;
};

bool word_start(char c) { return std::isalpha(static_cast<unsigned char>(c)) || c == '_'; }
bool word_char(char c) { return std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '\''; }
bool digit(char c) { return std::isdigit(static_cast<unsigned char>(c)) != 0; }

std::vector<Token> lex(std::string_view src) {
  std::vector<Token> out;
  std::size_t i = 0, line = 1, col = 1;
  auto advance = [&](std::size_t n) {
    for (std::size_t k = 0; k < n && i < src.size(); ++k, ++i) {
      if (src[i] == '\n') {
        ++line;
        col = 1;
      } else {
        ++col;
      }
    }
  };
  auto starts = [&](std::string_view s) { return src.substr(i, s.size()) == s; };
  while (i < src.size()) {
    const char c = src[i];
    if (std::isspace(static_cast<unsigned char>(c))) {
      advance(1);
      continue;
    }
    if (c == '#') {
      while (i < src.size() && src[i] != '\n') advance(1);
      continue;
    }
    SourceLocation loc{line, col};
    std::size_t start = i;
    if (word_start(c)) {
      std::size_t j = i;
      while (j < src.size() && word_char(src[j])) ++j;
      out.push_back({Tok::Word, std::string(src.substr(i, j - i)), loc});
      advance(j - i);
    } else if (digit(c)) {
      std::size_t j = i;
      while (j < src.size() && digit(src[j])) ++j;
      if (j + 1 < src.size() && src[j] == '.' && digit(src[j + 1])) {
        ++j;
        while (j < src.size() && digit(src[j])) ++j;
      }
      out.push_back({Tok::Number, std::string(src.substr(i, j - i)), loc});
      advance(j - i);
    } else if (c == '%') {
      std::size_t j = i + 1;
      while (j < src.size() && word_char(src[j])) ++j;
      if (j == i + 1) {
        out.push_back({Tok::Bad, "%", loc});
        advance(1);
      } else {
        out.push_back({Tok::DVar, std::string(src.substr(i + 1, j - i - 1)), loc});
        advance(j - i);
      }
    } else if (starts("(+)")) {
      out.push_back({Tok::Oplus, "(+)", loc});
      advance(3);
    } else if (starts("|-")) {
      out.push_back({Tok::Turnstile, "|-", loc});
      advance(2);
    } else if (starts("-/>")) {
      out.push_back({Tok::NegArrow, "-/>", loc});
      advance(3);
    } else if (starts("->")) {
      out.push_back({Tok::Arrow, "->", loc});
      advance(2);
    } else {
      Tok kind = Tok::Bad;
      switch (c) {
        case '(': kind = Tok::LParen; break;
        case ')': kind = Tok::RParen; break;
        case ',': kind = Tok::Comma; break;
        case ';': kind = Tok::Semi; break;
        case ':': kind = Tok::Colon; break;
        case '/': kind = Tok::Slash; break;
        case '*': kind = Tok::Star; break;
        case '+': kind = Tok::Plus; break;
        case '-': kind = Tok::Minus; break;
        case '=': kind = Tok::Equals; break;
        default: break;
      }
      out.push_back({kind, std::string(1, c), loc});
      advance(1);
    }
    (void)start;
  }
  out.push_back({Tok::End, "", {line, col}});
  return out;
}

std::string describe(const Token& t) {
  switch (t.kind) {
    case Tok::End: return "end of input";
    case Tok::DVar: return "'%" + t.text + "'";
    default: return "'" + t.text + "'";
  }
}

bool is_keyword(std::string_view w) {
  return w == "op" || w == "rule" || w == "param" || w == "delta";
}

// --- Parser ----------------------------------------------------------------

struct ParseFailure {
  std::string code;
  SourceLocation loc;
  std::string message;
};

class Parser {
 public:
  Parser(std::vector<Token> tokens, const ParseOptions& options)
      : toks_(std::move(tokens)), options_(options) {}

  ParseResult run() {
    declarations();
    for (const auto& [name, value] : options_.params) {
      if (!params_.contains(name))
        diags_.add(Severity::Error, "UNKNOWN_PARAM", {}, "override for undeclared parameter '" + name + "'");
    }
    rules();
    ParseResult result;
    diags_.sort();
    if (!diags_.has_errors()) result.spec = Ptss{std::move(sig_), std::move(rules_)};
    result.diagnostics = std::move(diags_);
    return result;
  }

  // Closed state term over a known signature (or over any identifiers).
  StateTerm closed_term(const Signature* sig) {
    StateTerm t = closed_term_impl(sig);
    if (peek().kind != Tok::End) fail("SYNTAX", peek().loc, "unexpected " + describe(peek()) + " after term");
    return t;
  }

 private:
  const Token& peek(std::size_t ahead = 0) const { return toks_[std::min(pos_ + ahead, toks_.size() - 1)]; }
  const Token& take() {
    const Token& t = toks_[pos_];
    if (pos_ + 1 < toks_.size()) ++pos_;
    return t;
  }
  bool accept(Tok kind) {
    if (peek().kind != kind) return false;
    take();
    return true;
  }
  [[noreturn]] void fail(std::string code, SourceLocation loc, std::string message) {
    throw ParseFailure{std::move(code), loc, std::move(message)};
  }
  const Token& expect(Tok kind, std::string_view what) {
    if (peek().kind != kind) fail("SYNTAX", peek().loc, "expected " + std::string(what) + ", found " + describe(peek()));
    return take();
  }
  void skip_statement() {
    while (peek().kind != Tok::Semi && peek().kind != Tok::End) take();
    accept(Tok::Semi);
  }
  bool at_keyword(std::string_view kw) const { return peek().kind == Tok::Word && peek().text == kw; }

  // Pass 1: `op` and `param` declarations.
  void declarations() {
    pos_ = 0;
    while (peek().kind != Tok::End) {
      const std::size_t start = pos_;
      try {
        if (at_keyword("op")) {
          op_decl();
        } else if (at_keyword("param")) {
          param_decl();
        } else if (at_keyword("rule")) {
          skip_statement();
        } else {
          fail("SYNTAX", peek().loc, "expected 'op', 'param' or 'rule', found " + describe(peek()));
        }
      } catch (const ParseFailure& f) {
        diags_.add(Severity::Error, f.code, f.loc, f.message);
        if (pos_ == start) take();
        skip_statement();
      }
    }
  }

  void op_decl() {
    take();
    const Token& name = peek();
    if (name.kind != Tok::Word && !(name.kind == Tok::Number && name.text.find('.') == std::string::npos))
      fail("SYNTAX", name.loc, "expected operator name, found " + describe(name));
    if (name.kind == Tok::Word && is_keyword(name.text))
      fail("SYNTAX", name.loc, "'" + name.text + "' is a reserved word");
    take();
    expect(Tok::Slash, "'/'");
    const Token& arity = expect(Tok::Number, "arity");
    if (arity.text.find('.') != std::string::npos) fail("SYNTAX", arity.loc, "arity must be a natural number");
    expect(Tok::Semi, "';'");
    if (sig_.contains(name.text))
      fail("DUP_OP", name.loc, "operator '" + name.text + "' declared twice");
    sig_.declare(name.text, std::stoul(arity.text));
  }

  void param_decl() {
    take();
    const Token& name = expect(Tok::Word, "parameter name");
    if (is_keyword(name.text)) fail("SYNTAX", name.loc, "'" + name.text + "' is a reserved word");
    expect(Tok::Equals, "'='");
    Rational value = weight_expr();
    expect(Tok::Semi, "';'");
    if (params_.contains(name.text)) fail("DUP_PARAM", name.loc, "parameter '" + name.text + "' declared twice");
    if (auto it = options_.params.find(name.text); it != options_.params.end()) value = it->second;
    params_.emplace(name.text, value);
  }

  // Pass 2: rules.
  void rules() {
    pos_ = 0;
    while (peek().kind != Tok::End) {
      const std::size_t start = pos_;
      if (!at_keyword("rule")) {
        skip_statement();
        continue;
      }
      try {
        Rule r = rule();
        Diagnostics d = validate_simple(r, sig_);
        diags_.append(d);
        rules_.push_back(std::move(r));
      } catch (const ParseFailure& f) {
        diags_.add(Severity::Error, f.code, f.loc, f.message);
        if (pos_ == start) take();
        skip_statement();
      }
    }
  }

  Rule rule() {
    const SourceLocation loc = take().loc;
    std::string name;
    if (peek().kind == Tok::Word) {
      if (is_keyword(peek().text)) fail("SYNTAX", peek().loc, "'" + peek().text + "' is a reserved word");
      name = take().text;
    }
    expect(Tok::Colon, "':'");
    std::vector<PositivePremise> pos;
    std::vector<NegativePremise> neg;
    if (peek().kind != Tok::Turnstile) {
      do {
        premise(pos, neg);
      } while (accept(Tok::Comma));
    }
    expect(Tok::Turnstile, "'|-'");
    Source source = conclusion_source();
    std::string action = action_label();
    expect(Tok::Arrow, "'->'");
    DistTerm target = dist_term();
    expect(Tok::Semi, "';'");
    ++rule_count_;
    if (name.empty()) name = "r" + std::to_string(rule_count_);
    return Rule{std::move(name), std::move(pos), std::move(neg), std::move(source), std::move(action),
                std::move(target), loc};
  }

  std::string action_label() {
    expect(Tok::Minus, "'-' before action label");
    const Token& a = expect(Tok::Word, "action label");
    return a.text;
  }

  void premise(std::vector<PositivePremise>& pos, std::vector<NegativePremise>& neg) {
    StateTerm lhs = premise_lhs();
    std::string action = action_label();
    if (accept(Tok::NegArrow)) {
      neg.push_back({std::move(lhs), std::move(action)});
      return;
    }
    expect(Tok::Arrow, "'->' or '-/>'");
    const Token& mu = expect(Tok::DVar, "derivative (a %-variable)");
    pos.push_back({std::move(lhs), std::move(action), mu.text});
  }

  bool is_operator_token(const Token& t) const {
    return (t.kind == Tok::Word || t.kind == Tok::Number) && sig_.contains(t.text);
  }

  // Premise left-hand sides accept %-variables so that validation can report
  // lookahead precisely instead of failing with a syntax error.
  StateTerm premise_lhs() {
    if (peek().kind == Tok::DVar) return StateTerm::var("%" + take().text);
    return state_term(/*allow_dvar=*/true);
  }

  StateTerm state_term(bool allow_dvar) {
    const Token& head = peek();
    if (head.kind == Tok::DVar) {
      if (allow_dvar) return StateTerm::var("%" + take().text);
      fail("SYNTAX", head.loc, "distribution variable " + describe(head) + " inside a state term");
    }
    if (head.kind != Tok::Word && head.kind != Tok::Number)
      fail("SYNTAX", head.loc, "expected state term, found " + describe(head));
    take();
    if (peek().kind == Tok::LParen) {
      if (!sig_.contains(head.text)) fail("UNKNOWN_OP", head.loc, "unknown operator '" + head.text + "'");
      take();
      std::vector<StateTerm> args;
      if (peek().kind != Tok::RParen) {
        do {
          args.push_back(state_term(allow_dvar));
        } while (accept(Tok::Comma));
      }
      expect(Tok::RParen, "')'");
      return StateTerm::app(head.text, std::move(args));
    }
    if (sig_.contains(head.text)) return StateTerm::app(head.text);
    if (head.kind == Tok::Number) fail("UNKNOWN_OP", head.loc, "unknown constant '" + head.text + "'");
    if (is_keyword(head.text)) fail("SYNTAX", head.loc, "'" + head.text + "' is a reserved word");
    return StateTerm::var(head.text);
  }

  Source conclusion_source() {
    const Token& head = peek();
    if (head.kind != Tok::Word && head.kind != Tok::Number)
      fail("SYNTAX", head.loc, "expected conclusion source, found " + describe(head));
    take();
    if (peek().kind == Tok::LParen) {
      if (!sig_.contains(head.text)) fail("UNKNOWN_OP", head.loc, "unknown operator '" + head.text + "'");
      take();
      std::vector<std::string> vars;
      if (peek().kind != Tok::RParen) {
        do {
          const Token& v = peek();
          if (v.kind != Tok::Word || is_operator_token(v) || is_keyword(v.text) ||
              peek(1).kind == Tok::LParen)
            fail("SYNTAX", v.loc, "source arguments must be variables, found " + describe(v));
          vars.push_back(take().text);
        } while (accept(Tok::Comma));
      }
      expect(Tok::RParen, "')'");
      return FSource{head.text, std::move(vars)};
    }
    if (sig_.contains(head.text)) return FSource{head.text, {}};
    if (head.kind == Tok::Number || is_keyword(head.text))
      fail("SYNTAX", head.loc, "invalid conclusion source " + describe(head));
    return XSource{head.text};
  }

  DistTerm dist_term() {
    const Token& head = peek();
    if (head.kind == Tok::DVar) return DistTerm::var(take().text);
    if (head.kind == Tok::LParen) return convex();
    if (head.kind == Tok::Word && head.text == "delta") {
      take();
      expect(Tok::LParen, "'(' after delta");
      StateTerm t = state_term(false);
      expect(Tok::RParen, "')'");
      return DistTerm::dirac(std::move(t));
    }
    if (head.kind != Tok::Word && head.kind != Tok::Number)
      fail("SYNTAX", head.loc, "expected distribution term, found " + describe(head));
    take();
    if (peek().kind == Tok::LParen) {
      if (!sig_.contains(head.text)) fail("UNKNOWN_OP", head.loc, "unknown operator '" + head.text + "'");
      take();
      std::vector<DistTerm> args;
      if (peek().kind != Tok::RParen) {
        do {
          args.push_back(dist_term());
        } while (accept(Tok::Comma));
      }
      expect(Tok::RParen, "')'");
      return DistTerm::lift(head.text, std::move(args));
    }
    if (sig_.contains(head.text)) return DistTerm::lift(head.text);
    fail("SYNTAX", head.loc,
         "state variable '" + head.text + "' used as a distribution term; write delta(" + head.text + ")");
  }

  DistTerm convex() {
    const SourceLocation loc = take().loc;
    std::vector<WeightedDist> parts;
    do {
      Rational w = weight_expr();
      expect(Tok::Star, "'*' after weight");
      parts.push_back({std::move(w), dist_term()});
    } while (accept(Tok::Oplus));
    expect(Tok::RParen, "')' closing convex combination");
    Rational total = 0;
    for (const auto& p : parts) {
      if (p.weight <= 0 || p.weight > 1)
        fail("BAD_WEIGHT", loc, "convex weight " + to_string(p.weight) + " outside (0,1]");
      total += p.weight;
    }
    if (total != 1) fail("BAD_WEIGHT", loc, "convex weights sum to " + to_string(total) + ", not 1");
    return DistTerm::convex(std::move(parts));
  }

  Rational weight_expr() {
    Rational value = weight_atom();
    while (peek().kind == Tok::Plus || peek().kind == Tok::Minus) {
      // `-` followed by a word and `->` would be an action label; weights
      // never appear in that position, so no lookahead is needed here.
      const bool minus = take().kind == Tok::Minus;
      Rational rhs = weight_atom();
      value = minus ? value - rhs : value + rhs;
    }
    return value;
  }

  Rational weight_atom() {
    const Token& t = peek();
    if (t.kind == Tok::LParen) {
      take();
      Rational v = weight_expr();
      expect(Tok::RParen, "')'");
      return v;
    }
    if (t.kind == Tok::Word) {
      take();
      auto it = params_.find(t.text);
      if (it == params_.end()) fail("UNKNOWN_PARAM", t.loc, "unknown parameter '" + t.text + "'");
      return it->second;
    }
    if (t.kind != Tok::Number) fail("SYNTAX", t.loc, "expected probability, found " + describe(t));
    std::string text = take().text;
    if (peek().kind == Tok::Slash) {
      take();
      text += "/" + expect(Tok::Number, "denominator").text;
    }
    auto q = parse_rational(text);
    if (!q) fail("SYNTAX", t.loc, "invalid probability '" + text + "'");
    return *q;
  }

  StateTerm closed_term_impl(const Signature* sig) {
    const Token& head = peek();
    if (head.kind != Tok::Word && head.kind != Tok::Number)
      fail("SYNTAX", head.loc, "expected term, found " + describe(head));
    take();
    std::vector<StateTerm> args;
    if (accept(Tok::LParen)) {
      if (peek().kind != Tok::RParen) {
        do {
          args.push_back(closed_term_impl(sig));
        } while (accept(Tok::Comma));
      }
      expect(Tok::RParen, "')'");
    }
    if (sig) {
      auto arity = sig->arity(head.text);
      if (!arity) fail("UNKNOWN_OP", head.loc, "unknown operator '" + head.text + "'");
      if (*arity != args.size())
        fail("ARITY", head.loc,
             "operator '" + head.text + "' expects " + std::to_string(*arity) + " arguments, got " +
                 std::to_string(args.size()));
    }
    return StateTerm::app(head.text, std::move(args));
  }

  std::vector<Token> toks_;
  const ParseOptions& options_;
  std::size_t pos_ = 0;
  std::size_t rule_count_ = 0;
  Signature sig_;
  std::map<std::string, Rational, std::less<>> params_;
  std::vector<Rule> rules_;
  Diagnostics diags_;
};

}  // namespace

ParseResult parse_spec(std::string_view text, const ParseOptions& options) {
  auto tokens = lex(text);
  for (const auto& t : tokens) {
    if (t.kind == Tok::Bad) {
      ParseResult r;
      r.diagnostics.add(Severity::Error, "SYNTAX", t.loc, "unexpected character '" + t.text + "'");
      return r;
    }
  }
  return Parser(std::move(tokens), options).run();
}

namespace {

StateTerm parse_term_impl(std::string_view text, const Signature* sig) {
  auto tokens = lex(text);
  for (const auto& t : tokens)
    if (t.kind == Tok::Bad) throw Error(ErrorCode::InvalidInput, "unexpected character '" + t.text + "' in term");
  static const ParseOptions no_options;
  try {
    return Parser(std::move(tokens), no_options).closed_term(sig);
  } catch (const ParseFailure& f) {
    throw Error(ErrorCode::InvalidInput, "term '" + std::string(text) + "': " + f.message);
  }
}

}  // namespace

StateTerm parse_term(std::string_view text, const Signature& sig) { return parse_term_impl(text, &sig); }

StateTerm parse_closed_term(std::string_view text) { return parse_term_impl(text, nullptr); }

// --- Validation ------------------------------------------------------------

namespace {

void check_state_term(const StateTerm& t, const Signature& sig, SourceLocation loc, Diagnostics& d) {
  if (t.is_var()) return;
  auto arity = sig.arity(t.name());
  if (!arity) {
    d.add(Severity::Error, "UNKNOWN_OP", loc, "unknown operator '" + t.name() + "'");
  } else if (*arity != t.args().size()) {
    d.add(Severity::Error, "ARITY", loc,
          "operator '" + t.name() + "' has arity " + std::to_string(*arity) + " but is applied to " +
              std::to_string(t.args().size()) + " arguments in " + t.str());
  }
  for (const auto& a : t.args()) check_state_term(a, sig, loc, d);
}

void check_dist_term(const DistTerm& theta, const Signature& sig, SourceLocation loc, Diagnostics& d) {
  switch (theta.kind()) {
    case DistTerm::Kind::Var:
      return;
    case DistTerm::Kind::Dirac:
      check_state_term(theta.state(), sig, loc, d);
      return;
    case DistTerm::Kind::Convex:
      for (const auto& p : theta.parts()) check_dist_term(p.body, sig, loc, d);
      return;
    case DistTerm::Kind::Lift: {
      auto arity = sig.arity(theta.name());
      if (!arity) {
        d.add(Severity::Error, "UNKNOWN_OP", loc, "unknown operator '" + theta.name() + "'");
      } else if (*arity != theta.args().size()) {
        d.add(Severity::Error, "ARITY", loc,
              "operator '" + theta.name() + "' has arity " + std::to_string(*arity) +
                  " but is applied to " + std::to_string(theta.args().size()) + " arguments in " + theta.str());
      }
      for (const auto& a : theta.args()) check_dist_term(a, sig, loc, d);
      return;
    }
  }
}

void find_lookahead(const StateTerm& t, std::set<std::string>& out) {
  std::set<std::string> vars;
  collect_vars(t, vars);
  for (const auto& v : vars)
    if (!v.empty() && v.front() == '%') out.insert(v);
}

}  // namespace

Diagnostics validate_simple(const Rule& rule, const Signature& sig) {
  Diagnostics d;
  const auto loc = rule.loc;
  if (const auto* f = rule.fsource()) {
    auto arity = sig.arity(f->op);
    if (!arity) {
      d.add(Severity::Error, "UNKNOWN_OP", loc, "rule " + rule.name + ": unknown operator '" + f->op + "'");
    } else if (*arity != f->vars.size()) {
      d.add(Severity::Error, "ARITY", loc,
            "rule " + rule.name + ": source operator '" + f->op + "' has arity " + std::to_string(*arity) +
                " but the source lists " + std::to_string(f->vars.size()) + " variables");
    }
    std::set<std::string> seen;
    for (const auto& v : f->vars) {
      if (!seen.insert(v).second)
        d.add(Severity::Error, "DUP_SOURCE_VAR", loc,
              "rule " + rule.name + ": source variable '" + v + "' occurs more than once");
    }
  }
  std::set<std::string> derivs;
  for (const auto& p : rule.positive) {
    if (!derivs.insert(p.derivative).second)
      d.add(Severity::Error, "DUP_DERIVATIVE", loc,
            "rule " + rule.name + ": derivative %" + p.derivative + " bound by more than one premise");
  }
  std::set<std::string> lookahead;
  for (const auto& p : rule.positive) {
    find_lookahead(p.lhs, lookahead);
    check_state_term(p.lhs, sig, loc, d);
  }
  for (const auto& n : rule.negative) {
    find_lookahead(n.lhs, lookahead);
    check_state_term(n.lhs, sig, loc, d);
  }
  for (const auto& v : lookahead)
    d.add(Severity::Error, "LOOKAHEAD", loc,
          "rule " + rule.name + ": lookahead not in simple format (" + v + " on a premise left-hand side)");
  check_dist_term(rule.target, sig, loc, d);
  d.sort();
  return d;
}

// --- x-source expansion ----------------------------------------------------

namespace {

std::set<std::string> rule_state_vars(const Rule& r) {
  std::set<std::string> vars;
  for (const auto& p : r.positive) collect_vars(p.lhs, vars);
  for (const auto& n : r.negative) collect_vars(n.lhs, vars);
  std::set<Variable> tv;
  collect_vars(r.target, tv);
  for (const auto& v : tv)
    if (v.sort == VarSort::State) vars.insert(v.name);
  for (const auto& v : r.source_vars()) vars.insert(v);
  return vars;
}

}  // namespace

Ptss expand_ntmuxt(const Ptss& spec) {
  Ptss out{spec.signature, {}};
  for (const auto& r : spec.rules) {
    if (r.has_fsource()) {
      out.rules.push_back(r);
      continue;
    }
    const std::string& x = std::get<XSource>(r.source).var;
    const auto taken = rule_state_vars(r);
    for (const auto& op : spec.signature.operators()) {
      std::vector<std::string> fresh;
      std::vector<StateTerm> args;
      for (std::size_t i = 1; i <= op.arity; ++i) {
        std::string v = x + std::to_string(i);
        while (taken.contains(v)) v += "_";
        fresh.push_back(v);
        args.push_back(StateTerm::var(v));
      }
      Substitution sigma;
      sigma.state.emplace(x, StateTerm::app(op.name, std::move(args)));
      Rule e{r.name + "_" + op.name, {}, {}, FSource{op.name, std::move(fresh)}, r.action,
             substitute(r.target, sigma), r.loc};
      for (const auto& p : r.positive) e.positive.push_back({substitute(p.lhs, sigma), p.action, p.derivative});
      for (const auto& n : r.negative) e.negative.push_back({substitute(n.lhs, sigma), n.action});
      out.rules.push_back(std::move(e));
    }
  }
  return out;
}

// --- Evaluability ----------------------------------------------------------

Diagnostics classify_evaluable(const Ptss& spec) {
  Diagnostics d;
  for (const auto& r : spec.rules) {
    const auto src = r.source_vars();
    const std::set<std::string> source(src.begin(), src.end());
    for (const auto& n : r.negative) {
      if (!n.lhs.is_var() || !source.contains(n.lhs.name()))
        d.add(Severity::Warning, "NEG_NONVAR", r.loc,
              "rule " + r.name + ": negative premise on " + n.lhs.str() +
                  " is not a bare source variable; the rule cannot be executed");
    }
    std::set<std::string> used;
    for (const auto& p : r.positive) collect_vars(p.lhs, used);
    for (const auto& n : r.negative) collect_vars(n.lhs, used);
    std::set<Variable> tv;
    collect_vars(r.target, tv);
    const auto ds = r.derivatives();
    const std::set<std::string> derivs(ds.begin(), ds.end());
    std::set<std::string> free;
    for (const auto& v : used)
      if (!source.contains(v)) free.insert(v);
    for (const auto& v : tv) {
      if (v.sort == VarSort::State && !source.contains(v.name)) free.insert(v.name);
      if (v.sort == VarSort::Dist && !derivs.contains(v.name)) free.insert("%" + v.name);
    }
    for (const auto& v : free)
      d.add(Severity::Warning, "FREE_VAR", r.loc,
            "rule " + r.name + ": variable " + v + " is not bound by the source or a premise");
  }
  d.sort();
  return d;
}

// --- Rendering -------------------------------------------------------------

std::string render(const Rule& rule) {
  std::string out = "rule " + rule.name + " :";
  bool first = true;
  for (const auto& p : rule.positive) {
    out += first ? " " : ", ";
    first = false;
    out += p.lhs.str() + " -" + p.action + "-> %" + p.derivative;
  }
  for (const auto& n : rule.negative) {
    out += first ? " " : ", ";
    first = false;
    out += n.lhs.str() + " -" + n.action + "-/>";
  }
  out += " |- ";
  if (const auto* f = rule.fsource()) {
    out += f->op;
    if (!f->vars.empty()) {
      out += '(';
      for (std::size_t i = 0; i < f->vars.size(); ++i) out += (i ? "," : "") + f->vars[i];
      out += ')';
    }
  } else {
    out += std::get<XSource>(rule.source).var;
  }
  out += " -" + rule.action + "-> " + rule.target.str() + ";";
  return out;
}

std::string render(const Ptss& spec) {
  std::string out;
  for (const auto& op : spec.signature.operators())
    out += "op " + op.name + "/" + std::to_string(op.arity) + ";\n";
  if (!spec.rules.empty()) out += "\n";
  for (const auto& r : spec.rules) out += render(r) + "\n";
  return out;
}

}  // namespace ptss
