#include <algorithm>
#include <set>
#include <sstream>

#include "sosforge/ruledsl.hpp"
#include "text_util.hpp"

namespace sosforge {

bool CompRule::has_reduces() const {
  for (const auto& p : premises)
    if (p.kind == PremiseKind::Reduces) return true;
  return false;
}

const ValueRule* RuleSet::value_rule_for(std::string_view op) const {
  auto it = value_index_.find(op);
  return it == value_index_.end() ? nullptr : &value_rules[it->second];
}

const ValueRule* RuleSet::variable_rule() const {
  for (const auto& r : value_rules)
    if (r.for_variables) return &r;
  return nullptr;
}

const std::vector<std::size_t>& RuleSet::comp_rules_for(std::string_view op) const {
  static const std::vector<std::size_t> none;
  auto it = comp_index_.find(op);
  return it == comp_index_.end() ? none : it->second;
}

void RuleSet::reindex() {
  value_index_.clear();
  comp_index_.clear();
  for (std::size_t i = 0; i < value_rules.size(); ++i)
    if (!value_rules[i].for_variables) value_index_[value_rules[i].op] = i;
  for (std::size_t i = 0; i < comp_rules.size(); ++i) comp_index_[comp_rules[i].op].push_back(i);
  obs_alphabet.clear();
  for (const auto& r : value_rules)
    if (r.kind == ValueRule::Kind::Observe &&
        std::find(obs_alphabet.begin(), obs_alphabet.end(), r.tag) == obs_alphabet.end())
      obs_alphabet.push_back(r.tag);
}

namespace {

std::string normalize_arrows(std::string s) {
  auto repl = [&](const std::string& from, const std::string& to) {
    for (std::size_t p = s.find(from); p != std::string::npos; p = s.find(from, p + to.size()))
      s.replace(p, from.size(), to);
  };
  repl("\xE2\x8A\xA2", "|-");  // ⊢
  repl("\xE2\x86\x92", "->");  // →
  return s;
}

struct RuleBlock {
  std::string name;
  std::string text;
  std::size_t line = 0;
};

class RuleBuilder {
 public:
  RuleBuilder(RuleSet& rs, const RuleBlock& b, std::size_t index) : rs_(rs), b_(b), index_(index) {}

  void build() {
    std::string text = normalize_arrows(b_.text);
    auto turn = find_top(text, "|-");
    if (turn != std::string::npos) {
      comp(trim(text.substr(0, turn)), trim(text.substr(turn + 2)));
      return;
    }
    if (starts_with_word(text, "var")) {
      value_var(trim(text.substr(3)));
      return;
    }
    std::size_t cut = find_top(text, " obs ");
    if (cut == std::string::npos) cut = label_arrow(text);
    if (cut == std::string::npos) {
      comp("", text);
      return;
    }
    std::string head = trim(text.substr(0, cut));
    Template h = parse(head, {});
    if (h.kind == Template::Kind::Node && h.cls == OpClass::Value) {
      value(h, trim(text.substr(cut)));
    } else if (h.is_meta()) {
      fail("unknown operator " + h.name, RuleError::Code::UnknownOp);
    } else {
      fail("value rules need a value former or 'var' as head");
    }
  }

 private:
  /// Position of " -l->" (a labelled arrow) outside brackets, or npos.
  static std::size_t label_arrow(const std::string& text) {
    for (std::size_t q = find_top(text, " -"); q != std::string::npos; q = find_top(text, " -", q + 1)) {
      if (q + 2 < text.size() && text[q + 2] != '>' && find_top(text, "->", q + 2) != std::string::npos)
        return q;
    }
    return std::string::npos;
  }

  [[noreturn]] void fail(const std::string& msg, RuleError::Code c = RuleError::Code::Invalid) const {
    throw RuleError(c, "rule " + b_.name + " (line " + std::to_string(b_.line) + "): " + msg);
  }

  /// Rejects `name(` where name is not an operator: the term parser would read it as application.
  void check_calls(const std::string& s) const {
    auto ident = [](unsigned char c) { return std::isalnum(c) || c == '_' || c == '\'' || c >= 0x80; };
    for (std::size_t i = 0; i < s.size(); ++i) {
      if (s[i] != '(' || i == 0 || !ident(static_cast<unsigned char>(s[i - 1]))) continue;
      std::size_t b = i;
      while (b > 0 && ident(static_cast<unsigned char>(s[b - 1]))) --b;
      std::string name = s.substr(b, i - b);
      if (std::isdigit(static_cast<unsigned char>(name[0]))) continue;
      auto al = rs_.sig.syntax.aliases.find(name);
      if (!rs_.sig.find(al == rs_.sig.syntax.aliases.end() ? name : al->second))
        fail("unknown operator " + name, RuleError::Code::UnknownOp);
    }
  }

  Template parse(const std::string& s, const std::set<std::string>& news) {
    check_calls(s);
    try {
      return parse_template(rs_.sig, s, [&](const std::string& n) {
        return news.count(n) ? MetaTag::New : MetaTag::Old;
      });
    } catch (const SyntaxError& e) {
      throw SyntaxError("rule " + b_.name + ": " + e.bare_message(), e.position(), b_.line);
    }
  }

  void claim(const std::string& meta) {
    if (meta == "_") return;
    if (!used_.insert(meta).second) fail("metavariable " + meta + " is bound twice", RuleError::Code::MetaReuse);
    if (rs_.sig.find(meta)) fail(meta + " is an operator, not a metavariable");
  }

  void check_scope(const Template& t, const std::set<std::string>& allowed, const char* where) {
    std::vector<std::string> ms;
    collect_metas(t, ms);
    for (const auto& m : ms)
      if (!allowed.count(m)) fail(std::string("metavariable ") + m + " in " + where + " is not bound");
  }

  std::vector<std::string> head_metas(const Template& h) {
    std::vector<std::string> out;
    for (const auto& k : h.kids) {
      if (!k.is_meta()) fail("arguments of the rule head must be metavariables");
      claim(k.name);
      out.push_back(k.name);
    }
    return out;
  }

  // ---- value rules

  void finish_value(ValueRule& r, const std::string& rest) {
    std::set<std::string> scope(r.arg_metas.begin(), r.arg_metas.end());
    if (starts_with_word(rest, "obs")) {
      r.kind = ValueRule::Kind::Observe;
      std::string body = trim(rest.substr(3));
      auto lp = body.find('(');
      r.tag = trim(lp == std::string::npos ? body : body.substr(0, lp));
      if (r.tag.empty()) fail("observation needs a tag");
      if (lp != std::string::npos) {
        if (body.back() != ')') fail("malformed observation payload");
        for (auto& p : split_top(body.substr(lp + 1, body.size() - lp - 2), ',')) {
          if (trim(p).empty()) continue;
          Template t = parse(trim(p), {});
          check_scope(t, scope, "the observation payload");
          r.payload.push_back(std::move(t));
        }
      }
      return;
    }
    if (rest.size() < 2 || rest[0] != '-') fail("value rule needs '-l-> body' or 'obs tag(...)'");
    auto arrow = find_top(rest, "->", 1);
    if (arrow == std::string::npos) fail("missing '->' in value rule");
    r.kind = ValueRule::Kind::Consume;
    r.label = trim(rest.substr(1, arrow - 1));
    if (r.label.empty()) fail("a consuming value rule needs a label metavariable");
    claim(r.label);
    scope.insert(r.label);
    r.body = parse(trim(rest.substr(arrow + 2)), {});
    check_scope(r.body, scope, "the value rule body");
    r.uses_subst = contains_subst(r.body);
  }

  static bool contains_subst(const Template& t) {
    if (t.kind == Template::Kind::Subst) return true;
    for (const auto& k : t.kids)
      if (contains_subst(k)) return true;
    return false;
  }

  void value(const Template& h, const std::string& rest) {
    ValueRule r;
    r.name = b_.name;
    r.index = index_;
    r.op = h.name;
    r.arg_metas = head_metas(h);
    for (const auto& s : h.sort_args) {
      if (!s.is_var) fail("sort arguments of a rule head must be sort variables");
      r.sort_vars.push_back(s.name);
    }
    if (!r.sort_vars.empty() && r.sort_vars.size() != rs_.sig.at(r.op).params.size())
      fail("rule head must name every sort parameter of " + r.op);
    finish_value(r, rest);
    rs_.value_rules.push_back(std::move(r));
  }

  void value_var(const std::string& text) {
    if (!rs_.sig.has_binding()) fail("variable rules need a binding discipline");
    std::string meta = first_word(text);
    ValueRule r;
    r.name = b_.name;
    r.index = index_;
    r.for_variables = true;
    claim(meta);
    r.arg_metas = {meta};
    finish_value(r, trim(text.substr(meta.size())));
    rs_.value_rules.push_back(std::move(r));
  }

  // ---- computation rules

  struct RawPremise {
    std::string subject;
    Premise p;
    std::string label_text;
  };

  RawPremise premise(const std::string& text) {
    RawPremise rp;
    rp.subject = first_word(text);
    std::string rest = trim(text.substr(rp.subject.size()));
    if (starts_with_word(rest, "obs")) {
      rp.p.kind = PremiseKind::Observes;
      std::string body = trim(rest.substr(3));
      auto lp = body.find('(');
      rp.p.tag = trim(lp == std::string::npos ? body : body.substr(0, lp));
      if (lp != std::string::npos) {
        if (body.back() != ')') fail("malformed observation premise");
        for (auto& m : split_top(body.substr(lp + 1, body.size() - lp - 2), ',')) {
          std::string mm = trim(m);
          if (!mm.empty()) rp.p.payload.push_back(mm);
        }
      }
      return rp;
    }
    if (rest.rfind("->", 0) == 0) {
      rp.p.kind = PremiseKind::Reduces;
      rp.p.target = trim(rest.substr(2));
      if (rp.p.target.empty() || rp.p.target == "_") fail("a reduction premise needs a target");
      return rp;
    }
    if (!rest.empty() && rest[0] == '-') {
      auto arrow = find_top(rest, "->", 1);
      if (arrow == std::string::npos) fail("malformed labelled premise '" + text + "'");
      rp.p.kind = PremiseKind::Consumes;
      rp.label_text = trim(rest.substr(1, arrow - 1));
      rp.p.target = trim(rest.substr(arrow + 2));
      if (rp.p.target == "_") rp.p.target.clear();
      if (rp.label_text == "_" && !rp.p.target.empty())
        fail("an unapplied premise '" + text + "' cannot name a result");
      return rp;
    }
    fail("cannot read premise '" + text + "'");
  }

  void comp(const std::string& prem_text, const std::string& concl_text) {
    auto arrow = find_top(concl_text, "->");
    if (arrow == std::string::npos) fail("conclusion must have the form 'lhs -> rhs'");
    Template lhs = parse(trim(concl_text.substr(0, arrow)), {});
    if (lhs.kind != Template::Kind::Node || lhs.cls != OpClass::Computation)
      fail("the conclusion must start from a computation former");
    CompRule r;
    r.name = b_.name;
    r.index = index_;
    r.op = lhs.name;
    const auto& d = rs_.sig.at(r.op);
    r.arg_metas = head_metas(lhs);
    r.premises.resize(r.arg_metas.size());
    std::set<std::string> old_scope(r.arg_metas.begin(), r.arg_metas.end());
    std::set<std::string> news;
    std::vector<RawPremise> raws;
    if (!prem_text.empty())
      for (auto& p : split_top(prem_text, ',')) raws.push_back(premise(trim(p)));
    for (auto& rp : raws) {
      auto it = std::find(r.arg_metas.begin(), r.arg_metas.end(), rp.subject);
      if (it == r.arg_metas.end()) fail("premise subject " + rp.subject + " is not an argument");
      auto pos = static_cast<std::size_t>(it - r.arg_metas.begin());
      if (d.args[pos].mode != ArgMode::Strict)
        fail("premise on the non-strict argument " + rp.subject);
      if (r.premises[pos].kind != PremiseKind::Passive)
        fail("two premises on argument " + rp.subject, RuleError::Code::MetaReuse);
      for (const auto& m : rp.p.payload) {
        claim(m);
        old_scope.insert(m);
      }
      if (!rp.p.target.empty()) {
        claim(rp.p.target);
        news.insert(rp.p.target);
      }
      r.premises[pos] = rp.p;
    }
    // labels may only mention metavariables standing for input terms
    for (std::size_t i = 0; i < raws.size(); ++i) {
      if (raws[i].p.kind != PremiseKind::Consumes || raws[i].label_text == "_") continue;
      Template l = parse(raws[i].label_text, {});
      check_scope(l, old_scope, "a premise label");
      auto it = std::find(r.arg_metas.begin(), r.arg_metas.end(), raws[i].subject);
      r.premises[static_cast<std::size_t>(it - r.arg_metas.begin())].label = std::move(l);
    }
    std::set<std::string> scope = old_scope;
    scope.insert(news.begin(), news.end());
    r.conclusion = parse(trim(concl_text.substr(arrow + 2)), news);
    check_scope(r.conclusion, scope, "the conclusion");
    rs_.comp_rules.push_back(std::move(r));
  }

  RuleSet& rs_;
  const RuleBlock& b_;
  std::size_t index_;
  std::set<std::string> used_;
};

void validate(const RuleSet& rs) {
  for (const auto* v : rs.sig.value_formers()) {
    std::size_t n = 0;
    for (const auto& r : rs.value_rules) n += (!r.for_variables && r.op == v->name);
    if (n != 1)
      throw RuleError(RuleError::Code::Invalid,
                      "value former " + v->name + " needs exactly one value rule, found " +
                          std::to_string(n));
  }
  std::size_t vars = 0;
  for (const auto& r : rs.value_rules) vars += r.for_variables;
  if (rs.sig.has_binding() && vars != 1)
    throw RuleError(RuleError::Code::Invalid, "a binding discipline needs one variable rule");
  for (const auto& r : rs.comp_rules)
    for (const auto& p : r.premises)
      if (p.kind == PremiseKind::Observes &&
          std::find(rs.obs_alphabet.begin(), rs.obs_alphabet.end(), p.tag) == rs.obs_alphabet.end())
        throw RuleError(RuleError::Code::Invalid,
                        "rule " + r.name + ": observation tag " + p.tag + " is never produced");
  if (rs.value_rules.empty())
    throw RuleError(RuleError::Code::Invalid, "a rule set needs at least one value rule");
}

RuleSet parse_impl(std::string_view text, std::optional<EffectKind> inherited) {
  RuleSet rs;
  rs.source = std::string(text);
  std::string sig_text;
  std::vector<RuleBlock> blocks;
  std::optional<EffectKind> effect;
  std::istringstream in{std::string(text)};
  std::string raw;
  std::size_t line = 0;
  while (std::getline(in, raw)) {
    ++line;
    std::string l = trim(strip_comment(raw));
    if (l.empty()) {
      sig_text += "\n";
      continue;
    }
    bool continuation = std::isspace(static_cast<unsigned char>(raw[0])) && !blocks.empty() &&
                        !starts_with_word(l, "rule");
    if (continuation) {
      blocks.back().text += " " + l;
      sig_text += "\n";
      continue;
    }
    std::string kw = first_word(l);
    std::string rest = trim(l.substr(kw.size()));
    if (kw == "rule") {
      auto colon = rest.find(':');
      if (colon == std::string::npos) throw SyntaxError("rule needs 'name:'", 0, line);
      blocks.push_back({trim(rest.substr(0, colon)), trim(rest.substr(colon + 1)), line});
      sig_text += "\n";
    } else if (kw == "language") {
      rs.id = rest;
      sig_text += "\n";
    } else if (kw == "effect") {
      if (rest == "det") effect = EffectKind::Det;
      else if (rest == "partial") effect = EffectKind::Partial;
      else if (rest == "finset") effect = EffectKind::FinSet;
      else throw SyntaxError("unknown effect '" + rest + "'", 0, line);
      sig_text += "\n";
    } else if (kw == "generate") {
      std::string what = first_word(rest);
      std::string args = trim(rest.substr(what.size()));
      if (what == "exclude") {
        for (auto& w : split_ws(args)) rs.gen_exclude.push_back(w);
      } else if (what == "sorts") {
        for (auto& s : split_top(args, ',')) rs.gen_sorts.push_back(trim(s));
      } else {
        throw SyntaxError("unknown generate directive '" + what + "'", 0, line);
      }
      sig_text += "\n";
    } else {
      sig_text += l + "\n";
    }
  }
  if (trim(sig_text).empty()) throw RuleError(RuleError::Code::Invalid, "empty rule text: a value former is required");
  rs.sig = parse_signature(sig_text);
  rs.effect = effect.value_or(inherited.value_or(EffectKind::Det));
  std::size_t index = 0;
  for (const auto& b : blocks) RuleBuilder(rs, b, ++index).build();
  rs.reindex();
  validate(rs);
  return rs;
}

}  // namespace

RuleSet parse_ruleset(std::string_view text) { return parse_impl(text, std::nullopt); }

RuleSet extend_ruleset(const RuleSet& base, std::string_view text) {
  std::string all = base.source + "\n" + std::string(text);
  RuleSet out = parse_impl(all, base.effect);
  bool own_effect = false;
  std::istringstream in{std::string(text)};
  std::string raw;
  while (std::getline(in, raw)) own_effect = own_effect || starts_with_word(trim(raw), "effect");
  if (!own_effect) out.effect = base.effect;
  if (out.id.empty()) out.id = base.id;
  return out;
}

}  // namespace sosforge
