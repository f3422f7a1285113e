#include <algorithm>
#include <set>
#include <sstream>

#include "sosforge/ruledsl.hpp"
#include "sosforge/semantics.hpp"

namespace sosforge {

namespace {

constexpr const char* kEval = "\xE2\x87\x93";    // ⇓
constexpr const char* kFrom = "\xE2\x87\x90";    // ⇐

bool mentions_generic(const Template& t, std::size_t k) {
  return mentions_meta(t, "#gen" + std::to_string(k));
}

std::string fresh_result(const XiEntry& e) {
  std::vector<std::string> used;
  collect_metas(e.lhs, used);
  for (const auto& b : e.bodies) collect_metas(b, used);
  for (const char* c : {"v", "v'", "v''", "w'", "u'"})
    if (std::find(used.begin(), used.end(), c) == used.end()) return c;
  return "v0";
}

/// Display form of one ξ entry: the lhs with plain metas and one premise per strict argument.
void push_rules(const RuleSet& rs, const OperatorDescriptor& op, const XiEntry& e,
                std::vector<BigStepRule>& out) {
  auto strict = op.strict_positions();
  const auto& rules = rs.comp_rules_for(op.name);
  const CompRule* first = rules.empty() ? nullptr : &rs.comp_rules[rules.front()];
  std::vector<Template> kids;
  std::set<std::string> taken;
  std::vector<std::string> in_lhs;
  collect_metas(e.lhs, in_lhs);
  taken.insert(in_lhs.begin(), in_lhs.end());
  std::vector<std::pair<std::string, Template>> premises;
  for (std::size_t j = 0, k = 0; j < op.arity(); ++j) {
    const Template& lk = e.lhs.kids[j];
    bool is_strict = k < strict.size() && strict[k] == j;
    if (!is_strict) {
      kids.push_back(lk);
      continue;
    }
    std::string name = first ? first->arg_metas[j] : "x";
    if (taken.count(name)) {
      for (const char* c : {"s", "t", "s'", "t'", "x", "y"})
        if (!taken.count(c)) {
          name = c;
          break;
        }
    }
    taken.insert(name);
    kids.push_back(Template::meta(name));
    premises.emplace_back(name, lk);
    ++k;
  }
  Template lhs = e.lhs;
  lhs.kids = kids;
  for (std::size_t b = 0; b < e.bodies.size(); ++b) {
    BigStepRule r;
    r.op = op.name;
    r.heads = e.heads;
    r.lhs = lhs;
    r.premises = premises;
    r.body = e.bodies[b];
    r.asterisk = r.body.is_value_node();
    r.result = fresh_result(e);
    r.rule = e.rules[b];
    out.push_back(std::move(r));
  }
}

}  // namespace

BigStepTable derive_bigstep_rules(const RuleSet& rs) {
  BigStepTable t;
  BigStepRule axiom;
  axiom.axiom = true;
  axiom.lhs = Template::meta("v");
  axiom.body = Template::meta("v");
  t.rules.push_back(axiom);
  std::vector<const OperatorDescriptor*> ops = rs.sig.computation_formers();
  std::sort(ops.begin(), ops.end(), [](auto* a, auto* b) { return a->name < b->name; });
  for (const auto* op : ops) {
    auto strict = op->strict_positions();
    std::vector<std::vector<std::string>> per;
    std::vector<bool> generic;
    for (auto p : strict) {
      per.push_back(heads_at(rs, *op, p));
      bool all_consume = !per.back().empty();
      for (const auto& h : per.back()) {
        const ValueRule* vr = h == "#var" ? rs.variable_rule() : rs.value_rule_for(h);
        all_consume = all_consume && vr && vr->kind == ValueRule::Kind::Consume;
      }
      generic.push_back(all_consume);
    }
    if (std::any_of(per.begin(), per.end(), [](const auto& v) { return v.empty(); })) continue;
    std::vector<XiEntry> entries;
    for (bool settled = false; !settled;) {
      settled = true;
      entries.clear();
      std::vector<std::vector<std::string>> axes;
      for (std::size_t k = 0; k < strict.size(); ++k)
        axes.push_back(generic[k] ? std::vector<std::string>{"*"} : per[k]);
      std::vector<std::size_t> idx(strict.size(), 0);
      while (true) {
        std::vector<std::string> heads;
        for (std::size_t k = 0; k < strict.size(); ++k) heads.push_back(axes[k][idx[k]]);
        try {
          entries.push_back(derive_xi(rs, *op, heads));
          for (std::size_t k = 0; k < strict.size(); ++k)
            for (const auto& b : entries.back().bodies)
              if (generic[k] && mentions_generic(b, k)) {
                generic[k] = false;
                settled = false;
              }
        } catch (const NoMatchingRule&) {
          std::string g = op->name + "(";
          for (std::size_t k = 0; k < heads.size(); ++k) g += (k ? ", " : "") + heads[k];
          t.gaps.push_back(g + ")");
        }
        // last strict position varies fastest
        std::size_t k = idx.size();
        while (k > 0 && ++idx[k - 1] == axes[k - 1].size()) idx[--k] = 0;
        if (k == 0) break;
      }
      if (!settled) t.gaps.clear();
    }
    for (const auto& e : entries) push_rules(rs, *op, e, t.rules);
  }
  return t;
}

std::string rule_text(const RuleSet& rs, const BigStepRule& r, bool simplified) {
  if (r.axiom) return std::string("v ") + kEval + " v";
  std::string out = print(rs.sig, r.lhs) + " " + kEval + " ";
  bool collapse = simplified && r.asterisk;
  out += collapse ? print(rs.sig, r.body) : r.result;
  std::vector<std::string> prem;
  for (const auto& [n, h] : r.premises) prem.push_back(n + " " + kEval + " " + print(rs.sig, h));
  if (!collapse) prem.push_back(print(rs.sig, r.body) + " " + kEval + " " + r.result);
  if (!prem.empty()) {
    out += std::string("  ") + kFrom + "  ";
    for (std::size_t i = 0; i < prem.size(); ++i) out += (i ? ",  " : "") + prem[i];
  }
  return out;
}

namespace {

std::size_t display_width(const std::string& s) {
  std::size_t n = 0;
  for (unsigned char c : s) n += (c & 0xC0) != 0x80;
  return n;
}

}  // namespace

std::string to_text(const BigStepTable& t, const RuleSet& rs) {
  std::vector<std::pair<std::string, std::string>> rows;
  std::size_t width = 0;
  for (const auto& r : t.rules) {
    std::string full = rule_text(rs, r, false);
    std::string conc = full, prem;
    auto p = full.find(kFrom);
    if (p != std::string::npos) {
      conc = full.substr(0, p - 2);
      prem = full.substr(p);
    }
    if (r.asterisk) prem += "   (*)";
    width = std::max(width, display_width(conc));
    rows.emplace_back(conc, prem);
  }
  std::ostringstream o;
  for (const auto& [c, p] : rows) {
    o << c;
    if (!p.empty()) o << std::string(width - display_width(c) + 2, ' ') << p;
    o << "\n";
  }
  for (const auto& g : t.gaps) o << "# no rule for " << g << "\n";
  return o.str();
}

nlohmann::ordered_json to_json(const BigStepTable& t, const RuleSet& rs) {
  nlohmann::ordered_json j;
  j["language"] = rs.id;
  j["rules"] = nlohmann::ordered_json::array();
  for (const auto& r : t.rules) {
    nlohmann::ordered_json o;
    o["axiom"] = r.axiom;
    o["op"] = r.op;
    o["heads"] = r.heads;
    o["text"] = rule_text(rs, r, false);
    o["simplified"] = rule_text(rs, r, true);
    o["asterisk"] = r.asterisk;
    o["lhs"] = print(rs.sig, r.lhs);
    o["premises"] = nlohmann::ordered_json::array();
    for (const auto& [n, h] : r.premises) o["premises"].push_back({{"arg", n}, {"value", print(rs.sig, h)}});
    o["body"] = print(rs.sig, r.body);
    o["result"] = r.result;
    o["from_rule"] = r.rule;
    j["rules"].push_back(o);
  }
  j["gaps"] = t.gaps;
  return j;
}

}  // namespace sosforge
