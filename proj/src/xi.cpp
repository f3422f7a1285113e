#include <algorithm>
#include <mutex>
#include <set>
#include <unordered_map>
#include <unordered_set>

#include "sosforge/semantics.hpp"

namespace sosforge {

std::string head_of(const Term& v) { return v.is_var() ? "#var" : v.op(); }

namespace {

const char* const kPool[] = {"r", "q", "p", "u", "w", "x", "y", "z", "a", "b", "c", "d", "e"};

class Namer {
 public:
  std::string take(const std::string& want) {
    if (!want.empty() && used_.insert(want).second) return want;
    for (const char* p : kPool)
      if (used_.insert(p).second) return p;
    for (int i = 1;; ++i) {
      std::string n = (want.empty() ? std::string("m") : want) + std::to_string(i);
      if (used_.insert(n).second) return n;
    }
  }
  void reserve(const std::string& n) { used_.insert(n); }

 private:
  std::set<std::string> used_;
};

/// A value rule evaluated on a symbolic head.
struct SymObs {
  bool consuming = false;
  std::string label;  // fresh name of the label metavariable
  Template body;
  std::string tag;
  std::vector<Template> payload;
};

struct SymHead {
  Template lhs_kid;
  SymObs obs;
};

SymHead symbolic_head(const RuleSet& rs, const std::string& head, const std::string& strict_name,
                      Namer& names, int position) {
  SymHead h;
  if (head == "*") {
    // any consuming value; its consumption result stays opaque
    h.lhs_kid = Template::meta(names.take("w"));
    h.obs.consuming = true;
    h.obs.label = names.take("l'");
    h.obs.body = Template::meta("#gen" + std::to_string(position), MetaTag::New);
    return h;
  }
  const ValueRule* vr = head == "#var" ? rs.variable_rule() : rs.value_rule_for(head);
  if (!vr) throw NoValueRule("no value rule for " + head);
  TemplateEnv env;
  SortSubst sorts;
  if (head == "#var") {
    std::string x = names.take(strict_name);
    h.lhs_kid = Template::meta(x);
    env[vr->arg_metas[0]] = h.lhs_kid;
  } else {
    const auto& d = rs.sig.at(head);
    std::vector<Template> kids;
    for (const auto& m : vr->arg_metas) {
      std::string n = names.take(m);
      kids.push_back(Template::meta(n));
      env[m] = kids.back();
    }
    std::vector<Sort> sargs;
    if (d.explicit_params()) {
      for (std::size_t i = 0; i < d.params.size(); ++i) {
        std::string base = i < vr->sort_vars.size() ? vr->sort_vars[i] : d.params[i];
        std::string fresh = position == 0 ? base : base + std::to_string(position);
        sargs.push_back(Sort::var(fresh));
        sorts[base] = Sort::var(fresh);
      }
    }
    h.lhs_kid = Template::node(d, std::move(kids), std::move(sargs));
  }
  if (vr->kind == ValueRule::Kind::Consume) {
    h.obs.consuming = true;
    h.obs.label = names.take(vr->label + "'");
    env[vr->label] = Template::meta(h.obs.label);
    h.obs.body = substitute(vr->body, env, sorts);
  } else {
    h.obs.tag = vr->tag;
    for (const auto& p : vr->payload) h.obs.payload.push_back(substitute(p, env, sorts));
  }
  return h;
}

struct Symbolic {
  Template lhs;
  std::vector<SymHead> heads;  // per strict position
  std::vector<std::size_t> strict;
};

Symbolic symbolic_lhs(const RuleSet& rs, const OperatorDescriptor& op,
                      const std::vector<std::string>& heads) {
  Symbolic s;
  s.strict = op.strict_positions();
  if (heads.size() != s.strict.size())
    throw Error(op.name + " has " + std::to_string(s.strict.size()) + " strict positions, got " +
                std::to_string(heads.size()) + " heads");
  const auto& rules = rs.comp_rules_for(op.name);
  const CompRule* first = rules.empty() ? nullptr : &rs.comp_rules[rules.front()];
  Namer names;
  std::vector<std::string> arg_names(op.arity());
  for (std::size_t j = 0; j < op.arity(); ++j) {
    std::string want = first ? first->arg_metas[j] : "z";
    arg_names[j] = names.take(want);
  }
  std::vector<Template> kids(op.arity());
  for (std::size_t j = 0; j < op.arity(); ++j) kids[j] = Template::meta(arg_names[j]);
  for (std::size_t k = 0; k < s.strict.size(); ++k) {
    s.heads.push_back(symbolic_head(rs, heads[k], arg_names[s.strict[k]], names, static_cast<int>(k)));
    kids[s.strict[k]] = s.heads.back().lhs_kid;
  }
  std::vector<Sort> sargs;
  if (op.explicit_params())
    for (const auto& p : op.params) sargs.push_back(Sort::var(p));
  s.lhs = Template::node(op, std::move(kids), std::move(sargs));
  return s;
}

bool sym_compatible(const Premise& p, const SymObs& o) {
  switch (p.kind) {
    case PremiseKind::Passive: return true;
    case PremiseKind::Reduces: return false;
    case PremiseKind::Consumes: return o.consuming;
    case PremiseKind::Observes: return !o.consuming && o.tag == p.tag && o.payload.size() == p.payload.size();
  }
  return false;
}

/// Conclusion of rule r at the symbolic lhs; `two_phase` keeps targets as placeholders first.
Template sym_conclusion(const CompRule& r, const Symbolic& s, bool two_phase) {
  TemplateEnv env;
  for (std::size_t j = 0; j < r.arg_metas.size(); ++j) env[r.arg_metas[j]] = s.lhs.kids[j];
  for (std::size_t k = 0; k < s.strict.size(); ++k) {
    const Premise& p = r.premises[s.strict[k]];
    if (p.kind == PremiseKind::Observes)
      for (std::size_t m = 0; m < p.payload.size(); ++m) env[p.payload[m]] = s.heads[k].obs.payload[m];
  }
  TemplateEnv targets;
  for (std::size_t k = 0; k < s.strict.size(); ++k) {
    const Premise& p = r.premises[s.strict[k]];
    if (p.kind != PremiseKind::Consumes || !p.label || p.target.empty()) continue;
    const SymObs& o = s.heads[k].obs;
    Template arg = substitute(*p.label, env);
    targets[p.target] = substitute(o.body, TemplateEnv{{o.label, arg}});
  }
  if (!two_phase) {
    for (auto& [k, v] : targets) env[k] = v;
    return substitute(r.conclusion, env);
  }
  // first Σ★(X+Y) with New placeholders, then the flattening step
  TemplateEnv flatten;
  for (auto& [k, v] : targets) {
    env[k] = Template::meta("#" + k, MetaTag::New);
    flatten["#" + k] = v;
  }
  Template phase1 = substitute(r.conclusion, env);
  return substitute(phase1, flatten);
}

std::string heads_text(const std::string& op, const std::vector<std::string>& heads) {
  std::string s = op + "(";
  for (std::size_t i = 0; i < heads.size(); ++i) s += (i ? ", " : "") + heads[i];
  return s + ")";
}

}  // namespace

XiEntry derive_xi(const RuleSet& rs, const OperatorDescriptor& op, const std::vector<std::string>& heads) {
  Symbolic s = symbolic_lhs(rs, op, heads);
  XiEntry e;
  e.op = op.name;
  e.heads = heads;
  e.lhs = s.lhs;
  for (auto ri : rs.comp_rules_for(op.name)) {
    const CompRule& r = rs.comp_rules[ri];
    bool ok = true;
    for (std::size_t k = 0; k < s.strict.size() && ok; ++k)
      ok = sym_compatible(r.premises[s.strict[k]], s.heads[k].obs);
    if (!ok) continue;
    e.bodies.push_back(sym_conclusion(r, s, false));
    e.rules.push_back(r.name);
  }
  if (e.bodies.empty()) throw NoMatchingRule("no rule for " + heads_text(op.name, heads));
  return e;
}

std::vector<Template> derive_xi_two_phase(const RuleSet& rs, const OperatorDescriptor& op,
                                          const std::vector<std::string>& heads) {
  Symbolic s = symbolic_lhs(rs, op, heads);
  std::vector<Template> out;
  for (auto ri : rs.comp_rules_for(op.name)) {
    const CompRule& r = rs.comp_rules[ri];
    bool ok = true;
    for (std::size_t k = 0; k < s.strict.size() && ok; ++k)
      ok = sym_compatible(r.premises[s.strict[k]], s.heads[k].obs);
    if (ok) out.push_back(sym_conclusion(r, s, true));
  }
  return out;
}

XiTable::XiTable(const RuleSet& rs) {
  for (const auto* op : rs.sig.computation_formers()) {
    auto strict = op->strict_positions();
    std::vector<std::vector<std::string>> per;
    for (auto p : strict) per.push_back(heads_at(rs, *op, p));
    if (std::any_of(per.begin(), per.end(), [](const auto& v) { return v.empty(); })) continue;
    std::vector<std::size_t> idx(strict.size(), 0);
    while (true) {
      std::vector<std::string> heads;
      for (std::size_t k = 0; k < strict.size(); ++k) heads.push_back(per[k][idx[k]]);
      try {
        index_[{op->name, heads}] = entries_.size();
        entries_.push_back(derive_xi(rs, *op, heads));
      } catch (const NoMatchingRule&) {
        index_.erase({op->name, heads});
        gaps_.push_back(heads_text(op->name, heads));
      }
      std::size_t k = 0;
      while (k < idx.size() && ++idx[k] == per[k].size()) idx[k++] = 0;
      if (k == idx.size()) break;
    }
  }
}

const XiEntry* XiTable::find(const std::string& op, const std::vector<std::string>& heads) const {
  auto it = index_.find({op, heads});
  return it == index_.end() ? nullptr : &entries_[it->second];
}

namespace {

bool bind_sorts(const Sort& pat, const Sort& got, SortSubst& s) { return match_sort(pat, got, s); }

}  // namespace

Effect<Term> XiTable::apply(const RuleSet& rs, const Term& c) const {
  EffectKind kind = eval_kind(rs);
  const auto& d = rs.sig.at(c.op());
  std::vector<std::string> heads;
  for (auto i : d.strict_positions()) heads.push_back(head_of(c.kid(i)));
  const XiEntry* e = find(c.op(), heads);
  if (!e) return Effect<Term>::bottom(kind);
  MetaEnv env;
  for (std::size_t j = 0; j < c.kids().size(); ++j) {
    const Template& k = e->lhs.kids[j];
    const Term& t = c.kid(j);
    if (k.is_meta()) {
      env.bind(k.name, t);
      continue;
    }
    for (std::size_t m = 0; m < k.kids.size(); ++m) env.bind(k.kids[m].name, t.kid(m));
    if (k.keep_sort_args && !t.sort_args().empty())
      for (std::size_t m = 0; m < k.sort_args.size(); ++m) bind_sorts(k.sort_args[m], t.sort_args()[m], env.sorts);
  }
  if (e->lhs.keep_sort_args && !c.sort_args().empty())
    for (std::size_t m = 0; m < e->lhs.sort_args.size(); ++m)
      bind_sorts(e->lhs.sort_args[m], c.sort_args()[m], env.sorts);
  std::vector<Term> out;
  for (const auto& b : e->bodies) out.push_back(instantiate(b, env));
  if (kind != EffectKind::FinSet) {
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
    if (out.size() > 1) throw NonDeterministic("several big-step bodies under a deterministic effect");
  }
  return Effect<Term>::from_items(kind, std::move(out));
}

std::shared_ptr<const XiTable> xi_table(const RuleSet& rs) {
  static std::mutex mu;
  static std::unordered_map<std::string, std::shared_ptr<const XiTable>> cache;
  std::string key = rs.source + "\x1f" + to_string(rs.effect);
  for (const auto& r : rs.comp_rules) key += "\x1f" + r.name;
  for (const auto& r : rs.value_rules) key += "\x1f" + r.name;
  std::lock_guard<std::mutex> lock(mu);
  auto it = cache.find(key);
  if (it != cache.end()) return it->second;
  auto t = std::make_shared<const XiTable>(rs);
  if (cache.size() > 64) cache.clear();
  cache.emplace(key, t);
  return t;
}

// ---------------------------------------------------------------- ζ̂

namespace {

struct PRes {
  std::optional<Term> value;
  bool exhausted = false;
  bool cyclic = false;
  bool stuck = false;
  std::size_t used = 0;
  Term at;  // where exhaustion, the loop or the stuck state was met
};

/// Deterministic/partial ζ̂: tail bodies run in a loop, strict children recurse.
class PartialBig {
 public:
  PartialBig(const RuleSet& rs, const XiTable& xi, std::size_t max_states)
      : rs_(rs), xi_(xi), max_states_(max_states) {}

  PRes eval(const Term& t, std::size_t n) {
    if (t.is_value()) return PRes{t, false, false, false, 0, {}};
    if (auto it = memo_.find(t); it != memo_.end() && it->second.second <= n)
      return PRes{it->second.first, false, false, false, it->second.second, {}};
    std::vector<Term> chain;
    std::vector<std::size_t> child_used;
    Term cur = t;
    PRes res;
    std::size_t j = 0;
    while (true) {
      if (cur.is_value()) {
        res.value = cur;
        break;
      }
      if (j >= n || memo_.size() > max_states_) {
        res.exhausted = true;
        res.at = cur;
        break;
      }
      if (!active_.insert(cur).second) {
        res.cyclic = true;
        res.at = cur;
        break;
      }
      chain.push_back(cur);
      std::vector<Term> kids = cur.kids();
      std::size_t ch = 0;
      bool failed = false;
      for (auto i : rs_.sig.at(cur.op()).strict_positions()) {
        PRes r = eval(kids[i], n - j - 1);
        if (!r.value) {
          res = r;
          failed = true;
          break;
        }
        kids[i] = *r.value;
        ch = std::max(ch, r.used);
      }
      if (failed) break;
      child_used.push_back(ch);
      auto bodies = xi_.apply(rs_, cur.with_kids(std::move(kids)));
      if (bodies.is_bottom()) {
        res.stuck = true;
        res.at = cur;
        break;
      }
      cur = bodies.items().front();
      ++j;
    }
    for (const auto& c : chain) active_.erase(c);
    if (res.value) {
      // used(c_k) = max over i ≥ k of (i - k + 1 + child_used_i)
      std::size_t best = 0;
      for (std::size_t k = child_used.size(); k-- > 0;) {
        best = std::max(best + 1, 1 + child_used[k]);
        memo_[chain[k]] = {*res.value, best};
      }
      res.used = best;
    }
    return res;
  }

  std::size_t states() const { return memo_.size(); }

 private:
  const RuleSet& rs_;
  const XiTable& xi_;
  std::size_t max_states_;
  std::unordered_set<Term, TermHash> active_;
  std::unordered_map<Term, std::pair<Term, std::size_t>, TermHash> memo_;
};

struct FRes {
  std::vector<Term> values;
  bool exhausted = false;
  std::size_t used = 0;
};

/// Finite-powerset ζ̂ with memoization on (term, budget).
class SetBig {
 public:
  SetBig(const RuleSet& rs, const XiTable& xi, std::size_t max_states)
      : rs_(rs), xi_(xi), max_states_(max_states) {}

  FRes eval(const Term& t, std::size_t n) {
    if (t.is_value()) return FRes{{t}, false, 0};
    if (n == 0 || states_ > max_states_) {
      if (frontier.size() < 64) frontier.push_back(t);
      return FRes{{}, true, 0};
    }
    auto& slot = memo_[t];
    for (const auto& [m, r] : slot)
      if (m == n || (!r.exhausted && r.used <= n)) return r;
    ++states_;
    FRes res;
    const auto& d = rs_.sig.at(t.op());
    auto strict = d.strict_positions();
    std::vector<Effect<Term>> args;
    for (auto i : strict) {
      FRes r = eval(t.kid(i), n - 1);
      res.exhausted |= r.exhausted;
      res.used = std::max(res.used, 1 + r.used);
      args.push_back(Effect<Term>::from_items(EffectKind::FinSet, std::move(r.values)));
    }
    auto tuples = dist_chi(EffectKind::FinSet, args);
    for (const auto& tuple : tuples.items()) {
      std::vector<Term> kids = t.kids();
      for (std::size_t k = 0; k < strict.size(); ++k) kids[strict[k]] = tuple[k];
      auto bodies = xi_.apply(rs_, t.with_kids(std::move(kids)));
      if (bodies.is_bottom()) ++stuck;
      for (const auto& b : bodies.items()) {
        FRes r = eval(b, n - 1);
        res.exhausted |= r.exhausted;
        res.used = std::max(res.used, 1 + r.used);
        res.values.insert(res.values.end(), r.values.begin(), r.values.end());
      }
    }
    std::sort(res.values.begin(), res.values.end());
    res.values.erase(std::unique(res.values.begin(), res.values.end()), res.values.end());
    memo_[t].emplace_back(n, res);
    return res;
  }

  std::vector<Term> frontier;
  std::size_t stuck = 0;
  std::size_t states() const { return states_; }

 private:
  const RuleSet& rs_;
  const XiTable& xi_;
  std::size_t max_states_;
  std::size_t states_ = 0;
  std::unordered_map<Term, std::vector<std::pair<std::size_t, FRes>>, TermHash> memo_;
};

}  // namespace

EvalResult big_step(const RuleSet& rs, const Term& t, std::size_t fuel, EvalOptions opt) {
  auto table = xi_table(rs);
  EffectKind kind = eval_kind(rs);
  EvalResult res;
  if (kind == EffectKind::FinSet) {
    SetBig ev(rs, *table, opt.max_states);
    FRes r = ev.eval(t, fuel);
    res.found = Effect<Term>::from_items(kind, std::move(r.values));
    res.converged = !r.exhausted;
    res.status = r.exhausted ? EvalStatus::FuelExhausted : EvalStatus::Converged;
    res.fuel_used = r.exhausted ? fuel : r.used;
    res.frontier = r.exhausted ? std::move(ev.frontier) : std::vector<Term>{};
    res.stuck = ev.stuck;
    res.states = ev.states();
    return res;
  }
  PartialBig ev(rs, *table, opt.max_states);
  PRes r = ev.eval(t, fuel);
  res.states = ev.states();
  if (r.value) {
    res.found = Effect<Term>::unit(kind, *r.value);
    res.converged = true;
    res.status = EvalStatus::Converged;
    res.fuel_used = r.used;
  } else {
    res.found = Effect<Term>::bottom(kind);
    if (r.stuck) {
      res.converged = true;
      res.status = EvalStatus::Converged;
      res.stuck = 1;
    } else {
      res.status = r.cyclic ? EvalStatus::Cyclic : EvalStatus::FuelExhausted;
      res.fuel_used = fuel;
      res.frontier = {r.at};
    }
  }
  if (rs.effect == EffectKind::Det && opt.det_errors) {
    if (res.status == EvalStatus::Cyclic)
      throw NonConvergence("big-step derivation loops at " + print(rs.sig, r.at, 160),
                           {print(rs.sig, t, 160), print(rs.sig, r.at, 160)});
    if (res.status == EvalStatus::FuelExhausted)
      throw NonConvergence("no derivation within depth " + std::to_string(fuel),
                           {print(rs.sig, t, 160), print(rs.sig, r.at, 160)});
    if (res.stuck) throw NoMatchingRule("no big-step rule for " + print(rs.sig, r.at, 160));
  }
  return res;
}

namespace {

std::optional<Derivation> build_tree(const RuleSet& rs, const XiTable& xi, const Term& t,
                                     std::size_t n) {
  if (t.is_value()) return Derivation{t, t, "v \xE2\x87\x93 v", {}};
  if (n == 0) return std::nullopt;
  Derivation d;
  d.term = t;
  std::vector<Term> kids = t.kids();
  std::vector<std::string> heads;
  for (auto i : rs.sig.at(t.op()).strict_positions()) {
    auto sub = build_tree(rs, xi, kids[i], n - 1);
    if (!sub) return std::nullopt;
    kids[i] = sub->value;
    heads.push_back(head_of(sub->value));
    d.premises.push_back(std::move(*sub));
  }
  auto bodies = xi.apply(rs, t.with_kids(std::move(kids)));
  if (bodies.is_bottom()) return std::nullopt;
  auto last = build_tree(rs, xi, bodies.items().front(), n - 1);
  if (!last) return std::nullopt;
  d.value = last->value;
  d.rule = heads_text(t.op(), heads);
  d.premises.push_back(std::move(*last));
  return d;
}

}  // namespace

std::optional<Derivation> derive_tree(const RuleSet& rs, const Term& t, std::size_t fuel) {
  if (rs.effect == EffectKind::FinSet) throw Error("derivation trees need a deterministic rule set");
  auto table = xi_table(rs);
  return build_tree(rs, *table, t, fuel);
}

}  // namespace sosforge
