#include <algorithm>
#include <sstream>

#include "sosforge/ruledsl.hpp"

namespace sosforge {

namespace {

Sort rename_vars(const Sort& s, const std::string& prefix) {
  if (s.is_var) return Sort::var(prefix + s.name);
  Sort out = s;
  for (auto& a : out.args) a = rename_vars(a, prefix);
  return out;
}

bool sorts_overlap(const Sort& a, const Sort& b) {
  SortSubst sub;
  return unify_sorts(rename_vars(a, "0'"), rename_vars(b, "1'"), sub);
}

bool rule_covers(const CompRule& r, const std::vector<std::size_t>& strict,
                 const std::vector<Shape>& shape) {
  for (std::size_t k = 0; k < strict.size(); ++k) {
    const Premise& p = r.premises[strict[k]];
    switch (p.kind) {
      case PremiseKind::Passive: break;
      case PremiseKind::Reduces:
        if (shape[k] != "reduces") return false;
        break;
      case PremiseKind::Consumes:
        if (shape[k] != "consumes") return false;
        break;
      case PremiseKind::Observes:
        if (shape[k] != p.tag) return false;
        break;
    }
  }
  return true;
}

std::string shape_text(const std::vector<Shape>& s) {
  std::string out = "(";
  for (std::size_t i = 0; i < s.size(); ++i) out += (i ? ", " : "") + s[i];
  return out + ")";
}

}  // namespace

std::vector<std::string> heads_at(const RuleSet& rs, const OperatorDescriptor& op, std::size_t pos) {
  const Sort& want = op.args[pos].sort;
  std::vector<std::string> out;
  for (const auto* v : rs.sig.value_formers())
    if (sorts_overlap(want, v->result)) out.push_back(v->name);
  if (rs.sig.binding && sorts_overlap(want, *rs.sig.binding)) out.push_back("#var");
  return out;
}

std::vector<Shape> shapes_at(const RuleSet& rs, const OperatorDescriptor& op, std::size_t pos) {
  std::vector<Shape> out;
  const Sort& want = op.args[pos].sort;
  for (const auto* c : rs.sig.computation_formers())
    if (sorts_overlap(want, c->result)) {
      out.push_back("reduces");
      break;
    }
  bool consumes = false;
  std::vector<std::string> tags;
  for (const auto& h : heads_at(rs, op, pos)) {
    const ValueRule* r = h == "#var" ? rs.variable_rule() : rs.value_rule_for(h);
    if (!r) continue;
    if (r->kind == ValueRule::Kind::Consume) consumes = true;
    else tags.push_back(r->tag);
  }
  if (consumes) out.push_back("consumes");
  for (const auto& t : rs.obs_alphabet)
    if (std::find(tags.begin(), tags.end(), t) != tags.end()) out.push_back(t);
  return out;
}

TotalityReport check_totality(const RuleSet& rs) {
  TotalityReport rep;
  bool unique = rs.effect != EffectKind::FinSet;
  for (const auto* op : rs.sig.computation_formers()) {
    auto strict = op->strict_positions();
    std::vector<std::vector<Shape>> per;
    for (auto p : strict) per.push_back(shapes_at(rs, *op, p));
    const auto& rules = rs.comp_rules_for(op->name);
    std::vector<std::size_t> idx(strict.size(), 0);
    bool empty_axis = std::any_of(per.begin(), per.end(), [](const auto& v) { return v.empty(); });
    if (empty_axis) continue;
    while (true) {
      std::vector<Shape> shape;
      for (std::size_t k = 0; k < strict.size(); ++k) shape.push_back(per[k][idx[k]]);
      std::size_t n = 0;
      for (auto ri : rules) n += rule_covers(rs.comp_rules[ri], strict, shape);
      if (n == 0) rep.gaps.push_back({op->name, shape, 0});
      else if (unique && n > 1) rep.ambiguous.push_back({op->name, shape, n});
      std::size_t k = 0;
      while (k < idx.size() && ++idx[k] == per[k].size()) idx[k++] = 0;
      if (k == idx.size()) break;
    }
  }
  rep.exhaustive = rep.gaps.empty() && rep.ambiguous.empty();
  return rep;
}

SeparationReport check_strong_separation(const RuleSet& rs) {
  SeparationReport rep;
  for (const auto& r : rs.comp_rules) {
    if (!r.has_reduces()) continue;
    const auto& d = rs.sig.at(r.op);
    auto bad = [&](int pos, std::string why) {
      rep.violations.push_back({r.name, r.index, pos, std::move(why)});
    };
    for (std::size_t i = 0; i < d.arity(); ++i)
      if (d.args[i].mode == ArgMode::Strict && r.premises[i].kind == PremiseKind::Passive)
        bad(static_cast<int>(i), "strict argument " + r.arg_metas[i] +
                                     " has no premise next to a reduction premise");
    const Template& c = r.conclusion;
    if (c.kind != Template::Kind::Node || c.name != r.op || c.kids.size() != d.arity()) {
      bad(-1, "conclusion must be " + r.op + "(...) with the reduced arguments, got " +
                  print(rs.sig, c));
      continue;
    }
    for (std::size_t i = 0; i < d.arity(); ++i) {
      const Premise& p = r.premises[i];
      std::string want = p.kind == PremiseKind::Reduces ? p.target : r.arg_metas[i];
      if (!c.kids[i].is_meta() || c.kids[i].name != want)
        bad(static_cast<int>(i), "argument " + std::to_string(i + 1) + " of the conclusion must be " +
                                     want + ", got " + print(rs.sig, c.kids[i]));
    }
  }
  rep.pass = rep.violations.empty();
  rep.totality = check_totality(rs);
  return rep;
}

RuleSet lift_powerset(const RuleSet& rs) {
  if (rs.effect == EffectKind::FinSet) throw EffectError("rule set is already over finite sets");
  RuleSet out = rs;
  out.effect = EffectKind::FinSet;
  return out;
}

RuleSet lift_partial(const RuleSet& rs) {
  if (rs.effect == EffectKind::FinSet) throw EffectError("cannot lift a finite-set rule set to partiality");
  RuleSet out = rs;
  out.effect = EffectKind::Partial;
  return out;
}

nlohmann::ordered_json to_json(const SeparationReport& r, const RuleSet& rs) {
  nlohmann::ordered_json j;
  j["language"] = rs.id;
  j["verdict"] = r.pass ? "pass" : "fail";
  j["violations"] = nlohmann::ordered_json::array();
  for (const auto& v : r.violations) {
    nlohmann::ordered_json o;
    o["rule"] = v.rule;
    o["index"] = v.index;
    if (v.position >= 0) o["position"] = v.position + 1;
    else o["position"] = nullptr;
    o["reason"] = v.reason;
    j["violations"].push_back(o);
  }
  auto gaps = [](const std::vector<ShapeGap>& g) {
    auto a = nlohmann::ordered_json::array();
    for (const auto& x : g) a.push_back({{"op", x.op}, {"shape", x.shape}, {"rules", x.covering}});
    return a;
  };
  j["totality"] = {{"verdict", r.totality.exhaustive ? "exhaustive" : "gaps"},
                   {"gaps", gaps(r.totality.gaps)},
                   {"ambiguous", gaps(r.totality.ambiguous)}};
  return j;
}

std::string to_text(const SeparationReport& r, const RuleSet& rs) {
  std::ostringstream o;
  o << "strong separation (" << rs.id << "): " << (r.pass ? "PASS" : "FAIL") << "\n";
  for (const auto& v : r.violations) {
    o << "  rule " << v.rule << " (#" << v.index << ")";
    if (v.position >= 0) o << ", argument " << v.position + 1;
    o << ": " << v.reason << "\n";
  }
  o << "totality: " << (r.totality.exhaustive ? "exhaustive" : "gaps") << "\n";
  for (const auto& g : r.totality.gaps) o << "  uncovered " << g.op << " " << shape_text(g.shape) << "\n";
  for (const auto& g : r.totality.ambiguous)
    o << "  " << g.covering << " rules for " << g.op << " " << shape_text(g.shape) << "\n";
  return o.str();
}

}  // namespace sosforge
