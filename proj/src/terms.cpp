#include "ptss/terms.hpp"

#include <algorithm>
#include <sstream>

#include "ptss/error.hpp"

namespace ptss {

// --- Signature -------------------------------------------------------------

void Signature::declare(std::string name, std::size_t arity) {
  if (index_.contains(name))
    throw Error(ErrorCode::InvalidInput, "operator '" + name + "' declared twice");
  index_.emplace(name, ops_.size());
  ops_.push_back({std::move(name), arity});
}

bool Signature::contains(std::string_view name) const { return index_.find(name) != index_.end(); }

std::optional<std::size_t> Signature::arity(std::string_view name) const {
  auto it = index_.find(name);
  if (it == index_.end()) return std::nullopt;
  return ops_[it->second].arity;
}

std::size_t Signature::arity_of(std::string_view name) const {
  auto a = arity(name);
  if (!a) throw Error(ErrorCode::UnknownOperator, "unknown operator '" + std::string(name) + "'");
  return *a;
}

// --- StateTerm -------------------------------------------------------------

namespace {

std::size_t mix(std::size_t seed, std::size_t value) {
  return seed ^ (value + 0x9e3779b97f4a7c15ULL + (seed << 6) + (seed >> 2));
}

}  // namespace

StateTerm StateTerm::var(std::string name) {
  std::size_t h = mix(0x5151, std::hash<std::string>{}(name));
  return StateTerm(std::make_shared<const Node>(Node{Kind::Var, std::move(name), {}, h, 0, false}));
}

StateTerm StateTerm::app(std::string op, std::vector<StateTerm> args) {
  std::size_t h = mix(0xa9b, std::hash<std::string>{}(op));
  std::size_t depth = 0;
  bool closed = true;
  for (const auto& a : args) {
    h = mix(h, a.hash());
    depth = std::max(depth, a.depth() + 1);
    closed = closed && a.closed();
  }
  return StateTerm(std::make_shared<const Node>(
      Node{Kind::App, std::move(op), std::move(args), h, depth, closed}));
}

bool operator==(const StateTerm& a, const StateTerm& b) noexcept {
  if (a.node_ == b.node_) return true;
  if (a.hash() != b.hash() || a.kind() != b.kind() || a.name() != b.name()) return false;
  auto xs = a.args();
  auto ys = b.args();
  return std::equal(xs.begin(), xs.end(), ys.begin(), ys.end());
}

std::strong_ordering operator<=>(const StateTerm& a, const StateTerm& b) noexcept {
  if (a.node_ == b.node_) return std::strong_ordering::equal;
  if (a.kind() != b.kind()) return a.kind() <=> b.kind();
  if (auto c = a.name().compare(b.name()); c != 0) return c <=> 0;
  auto xs = a.args();
  auto ys = b.args();
  return std::lexicographical_compare_three_way(xs.begin(), xs.end(), ys.begin(), ys.end());
}

namespace {

void render(const StateTerm& t, std::string& out) {
  out += t.name();
  if (t.is_var() || t.args().empty()) return;
  out += '(';
  bool first = true;
  for (const auto& a : t.args()) {
    if (!first) out += ',';
    first = false;
    render(a, out);
  }
  out += ')';
}

}  // namespace

std::string StateTerm::str() const {
  std::string out;
  render(*this, out);
  return out;
}

// --- DistTerm --------------------------------------------------------------

DistTerm DistTerm::var(std::string name) {
  return DistTerm(std::make_shared<const Node>(Node{Kind::Var, std::move(name), std::nullopt, {}, {}, false}));
}

DistTerm DistTerm::dirac(StateTerm t) {
  const bool closed = t.closed();
  return DistTerm(std::make_shared<const Node>(Node{Kind::Dirac, {}, std::move(t), {}, {}, closed}));
}

DistTerm DistTerm::convex(std::vector<WeightedDist> parts) {
  if (parts.empty()) throw Error(ErrorCode::InvalidTerm, "convex combination without parts");
  Rational total = 0;
  bool closed = true;
  for (const auto& p : parts) {
    if (p.weight <= 0 || p.weight > 1)
      throw Error(ErrorCode::InvalidTerm, "convex weight " + to_string(p.weight) + " outside (0,1]");
    total += p.weight;
    closed = closed && p.body.closed();
  }
  if (total != 1)
    throw Error(ErrorCode::InvalidTerm, "convex weights sum to " + to_string(total) + ", not 1");
  return DistTerm(std::make_shared<const Node>(Node{Kind::Convex, {}, std::nullopt, std::move(parts), {}, closed}));
}

DistTerm DistTerm::lift(std::string op, std::vector<DistTerm> args) {
  bool closed = std::all_of(args.begin(), args.end(), [](const DistTerm& a) { return a.closed(); });
  return DistTerm(std::make_shared<const Node>(Node{Kind::Lift, std::move(op), std::nullopt, {}, std::move(args), closed}));
}

const StateTerm& DistTerm::state() const {
  if (!node_->state) throw Error(ErrorCode::InvalidTerm, "not a Dirac term");
  return *node_->state;
}

bool operator==(const DistTerm& a, const DistTerm& b) noexcept {
  if (a.node_ == b.node_) return true;
  if (a.kind() != b.kind() || a.name() != b.name()) return false;
  if (a.node_->state != b.node_->state) return false;
  auto ps = a.parts();
  auto qs = b.parts();
  if (!std::equal(ps.begin(), ps.end(), qs.begin(), qs.end())) return false;
  auto xs = a.args();
  auto ys = b.args();
  return std::equal(xs.begin(), xs.end(), ys.begin(), ys.end());
}

namespace {

void render(const DistTerm& theta, std::string& out) {
  switch (theta.kind()) {
    case DistTerm::Kind::Var:
      out += '%';
      out += theta.name();
      return;
    case DistTerm::Kind::Dirac:
      out += "delta(";
      render(theta.state(), out);
      out += ')';
      return;
    case DistTerm::Kind::Convex: {
      out += '(';
      bool first = true;
      for (const auto& p : theta.parts()) {
        if (!first) out += " (+) ";
        first = false;
        out += to_string(p.weight);
        out += " * ";
        render(p.body, out);
      }
      out += ')';
      return;
    }
    case DistTerm::Kind::Lift: {
      out += theta.name();
      if (theta.args().empty()) return;
      out += '(';
      bool first = true;
      for (const auto& a : theta.args()) {
        if (!first) out += ',';
        first = false;
        render(a, out);
      }
      out += ')';
      return;
    }
  }
}

}  // namespace

std::string DistTerm::str() const {
  std::string out;
  render(*this, out);
  return out;
}

// --- Substitution and counting ---------------------------------------------

StateTerm substitute(const StateTerm& t, const Substitution& sigma) {
  if (t.closed()) return t;
  if (t.is_var()) {
    auto it = sigma.state.find(t.name());
    return it == sigma.state.end() ? t : it->second;
  }
  std::vector<StateTerm> args;
  args.reserve(t.args().size());
  for (const auto& a : t.args()) args.push_back(substitute(a, sigma));
  return StateTerm::app(t.name(), std::move(args));
}

DistTerm substitute(const DistTerm& theta, const Substitution& sigma) {
  if (theta.closed()) return theta;
  switch (theta.kind()) {
    case DistTerm::Kind::Var: {
      auto it = sigma.dist.find(theta.name());
      return it == sigma.dist.end() ? theta : it->second;
    }
    case DistTerm::Kind::Dirac:
      return DistTerm::dirac(substitute(theta.state(), sigma));
    case DistTerm::Kind::Convex: {
      std::vector<WeightedDist> parts;
      for (const auto& p : theta.parts()) parts.push_back({p.weight, substitute(p.body, sigma)});
      return DistTerm::convex(std::move(parts));
    }
    case DistTerm::Kind::Lift: {
      std::vector<DistTerm> args;
      for (const auto& a : theta.args()) args.push_back(substitute(a, sigma));
      return DistTerm::lift(theta.name(), std::move(args));
    }
  }
  return theta;
}

std::size_t mvar(const StateTerm& t, std::string_view x) {
  if (t.is_var()) return t.name() == x ? 1 : 0;
  std::size_t n = 0;
  for (const auto& a : t.args()) n += mvar(a, x);
  return n;
}

std::size_t mvar(const DistTerm& theta, const Variable& zeta) {
  switch (theta.kind()) {
    case DistTerm::Kind::Var:
      return zeta.sort == VarSort::Dist && theta.name() == zeta.name ? 1 : 0;
    case DistTerm::Kind::Dirac:
      return zeta.sort == VarSort::State ? mvar(theta.state(), zeta.name) : 0;
    case DistTerm::Kind::Convex: {
      std::size_t best = 0;
      for (const auto& p : theta.parts()) best = std::max(best, mvar(p.body, zeta));
      return best;
    }
    case DistTerm::Kind::Lift: {
      std::size_t n = 0;
      for (const auto& a : theta.args()) n += mvar(a, zeta);
      return n;
    }
  }
  return 0;
}

void collect_vars(const StateTerm& t, std::set<std::string>& out) {
  if (t.closed()) return;
  if (t.is_var()) {
    out.insert(t.name());
    return;
  }
  for (const auto& a : t.args()) collect_vars(a, out);
}

void collect_vars(const DistTerm& theta, std::set<Variable>& out) {
  switch (theta.kind()) {
    case DistTerm::Kind::Var:
      out.insert(Variable::dist(theta.name()));
      return;
    case DistTerm::Kind::Dirac: {
      std::set<std::string> names;
      collect_vars(theta.state(), names);
      for (auto& n : names) out.insert(Variable::state(n));
      return;
    }
    case DistTerm::Kind::Convex:
      for (const auto& p : theta.parts()) collect_vars(p.body, out);
      return;
    case DistTerm::Kind::Lift:
      for (const auto& a : theta.args()) collect_vars(a, out);
      return;
  }
}

// --- Distribution ----------------------------------------------------------

Distribution Distribution::dirac(StateTerm t) {
  if (!t.closed()) throw Error(ErrorCode::OpenTerm, "Dirac distribution on open term " + t.str());
  MassMap m;
  m.emplace(std::move(t), Rational(1));
  return Distribution(std::move(m));
}

Distribution Distribution::from_masses(MassMap masses) {
  Rational total = 0;
  for (auto it = masses.begin(); it != masses.end();) {
    if (it->second < 0) throw Error(ErrorCode::InvalidTerm, "negative probability mass");
    if (!it->first.closed()) throw Error(ErrorCode::OpenTerm, "distribution over open term " + it->first.str());
    if (it->second == 0) {
      it = masses.erase(it);
      continue;
    }
    total += it->second;
    ++it;
  }
  if (total != 1) throw Error(ErrorCode::InvalidTerm, "distribution mass sums to " + to_string(total));
  return Distribution(std::move(masses));
}

Rational Distribution::at(const StateTerm& t) const {
  auto it = mass_.find(t);
  return it == mass_.end() ? Rational(0) : it->second;
}

Rational Distribution::mass(const std::set<StateTerm>& subset) const {
  Rational total = 0;
  for (const auto& t : subset) total += at(t);
  return total;
}

std::string Distribution::str() const {
  std::string out = "{";
  bool first = true;
  for (const auto& [t, p] : mass_) {
    if (!first) out += ", ";
    first = false;
    out += t.str() + ": " + to_string(p);
  }
  return out + "}";
}

bool operator<(const Distribution& a, const Distribution& b) {
  return std::lexicographical_compare(
      a.mass_.begin(), a.mass_.end(), b.mass_.begin(), b.mass_.end(),
      [](const auto& x, const auto& y) {
        if (auto c = x.first <=> y.first; c != 0) return c < 0;
        return x.second < y.second;
      });
}

// --- Evaluation ------------------------------------------------------------

namespace {

Distribution::MassMap eval_masses(const DistTerm& theta, const Substitution& sigma, const DistEnv& env);

Distribution::MassMap product(const std::string& op, const std::vector<Distribution::MassMap>& factors) {
  // Iterative cartesian product; every combination yields a distinct term.
  std::vector<std::pair<std::vector<StateTerm>, Rational>> partial{{{}, Rational(1)}};
  for (const auto& factor : factors) {
    std::vector<std::pair<std::vector<StateTerm>, Rational>> next;
    next.reserve(partial.size() * factor.size());
    for (const auto& [prefix, p] : partial) {
      for (const auto& [t, q] : factor) {
        auto args = prefix;
        args.push_back(t);
        next.emplace_back(std::move(args), p * q);
      }
    }
    partial = std::move(next);
  }
  Distribution::MassMap out;
  for (auto& [args, p] : partial) out.emplace(StateTerm::app(op, std::move(args)), std::move(p));
  return out;
}

Distribution::MassMap eval_masses(const DistTerm& theta, const Substitution& sigma, const DistEnv& env) {
  switch (theta.kind()) {
    case DistTerm::Kind::Var: {
      auto it = env.find(theta.name());
      if (it == env.end()) throw Error(ErrorCode::OpenTerm, "unbound distribution variable %" + theta.name());
      return it->second.masses();
    }
    case DistTerm::Kind::Dirac: {
      StateTerm t = substitute(theta.state(), sigma);
      if (!t.closed()) throw Error(ErrorCode::OpenTerm, "open Dirac body " + t.str());
      return {{t, Rational(1)}};
    }
    case DistTerm::Kind::Convex: {
      Distribution::MassMap out;
      for (const auto& part : theta.parts()) {
        for (auto& [t, q] : eval_masses(part.body, sigma, env)) out[t] += part.weight * q;
      }
      return out;
    }
    case DistTerm::Kind::Lift: {
      std::vector<Distribution::MassMap> factors;
      factors.reserve(theta.args().size());
      for (const auto& a : theta.args()) factors.push_back(eval_masses(a, sigma, env));
      return product(theta.name(), factors);
    }
  }
  return {};
}

}  // namespace

Distribution evaluate(const DistTerm& theta) {
  if (!theta.closed()) throw Error(ErrorCode::OpenTerm, "cannot evaluate open term " + theta.str());
  return Distribution::from_masses(eval_masses(theta, {}, {}));
}

Distribution evaluate(const DistTerm& theta, const Substitution& sigma, const DistEnv& env) {
  return Distribution::from_masses(eval_masses(theta, sigma, env));
}

}  // namespace ptss
