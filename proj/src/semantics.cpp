#include <pthread.h>

#include <algorithm>
#include <exception>
#include <unordered_map>
#include <unordered_set>

#include "sosforge/semantics.hpp"

namespace sosforge {

Term Observation::apply(const Term& arg) const {
  if (kind != Kind::Consuming) throw Error("applying a structural observation");
  MetaEnv e = env;
  e.bind(label, arg);
  return instantiate(body, e);
}

bool operator==(const Observation& a, const Observation& b) {
  return a.kind == b.kind && a.subject == b.subject;
}

bool operator<(const Observation& a, const Observation& b) {
  if (a.kind != b.kind) return a.kind < b.kind;
  return a.subject < b.subject;
}

const char* to_string(EvalStatus s) {
  switch (s) {
    case EvalStatus::Converged: return "converged";
    case EvalStatus::FuelExhausted: return "fuel-exhausted";
    case EvalStatus::Cyclic: return "cyclic";
  }
  return "?";
}

const char* to_string(Verdict v) {
  switch (v) {
    case Verdict::Holds: return "holds";
    case Verdict::Fails: return "fails";
    case Verdict::Inconclusive: return "inconclusive";
  }
  return "?";
}

EffectKind eval_kind(const RuleSet& rs) {
  return rs.effect == EffectKind::Det ? EffectKind::Partial : rs.effect;
}

namespace {

/// Binds a value rule's head metavariables against a concrete value.
MetaEnv head_env(const ValueRule& r, const Term& v) {
  MetaEnv env;
  if (r.for_variables) {
    env.bind(r.arg_metas[0], v);
    return env;
  }
  for (std::size_t i = 0; i < r.arg_metas.size(); ++i) env.bind(r.arg_metas[i], v.kid(i));
  if (!v.sort_args().empty())
    for (std::size_t i = 0; i < r.sort_vars.size() && i < v.sort_args().size(); ++i)
      env.sorts[r.sort_vars[i]] = v.sort_args()[i];
  return env;
}

bool compatible(const Premise& p, const Term& child, const Observation* obs) {
  switch (p.kind) {
    case PremiseKind::Passive: return true;
    case PremiseKind::Reduces: return child.is_computation();
    case PremiseKind::Consumes: return obs && obs->consuming();
    case PremiseKind::Observes:
      return obs && !obs->consuming() && obs->tag == p.tag && obs->payload.size() == p.payload.size();
  }
  return false;
}

using StepCache = std::unordered_map<const Term::Node*, std::vector<LabeledStep>>;

void successors(const RuleSet& rs, EffectKind kind, const Term& c, bool labels,
                std::vector<LabeledStep>& out, StepCache& cache);

/// Shared subterms are stepped once per call: duplicating rules build DAGs whose trees are exponential.
const std::vector<LabeledStep>& cached_successors(const RuleSet& rs, EffectKind kind, const Term& c,
                                                  bool labels, StepCache& cache) {
  auto it = cache.find(c.raw());
  if (it != cache.end()) return it->second;
  std::vector<LabeledStep> out;
  successors(rs, kind, c, labels, out, cache);
  return cache.emplace(c.raw(), std::move(out)).first->second;
}

/// One level of γᶜ: behaviours of the strict children, then every matching rule.
void successors(const RuleSet& rs, EffectKind kind, const Term& c, bool labels,
                std::vector<LabeledStep>& out, StepCache& cache) {
  const auto& d = rs.sig.at(c.op());
  const auto& rules = rs.comp_rules_for(c.op());
  auto strict = d.strict_positions();
  std::vector<std::optional<Observation>> obs(d.arity());
  std::vector<const std::vector<LabeledStep>*> red(d.arity(), nullptr);
  for (auto i : strict) {
    const Term& k = c.kid(i);
    if (k.is_value()) obs[i] = gamma_v(rs, k);
    else red[i] = &cached_successors(rs, kind, k, labels, cache);
  }
  bool matched = false;
  std::size_t before = out.size();
  for (auto ri : rules) {
    const CompRule& r = rs.comp_rules[ri];
    bool ok = true;
    for (auto i : strict)
      if (!compatible(r.premises[i], c.kid(i), obs[i] ? &*obs[i] : nullptr)) {
        ok = false;
        break;
      }
    if (!ok) continue;
    matched = true;
    MetaEnv env;
    for (std::size_t j = 0; j < d.arity(); ++j) env.bind(r.arg_metas[j], c.kid(j));
    std::vector<std::size_t> reducing;
    for (auto i : strict) {
      const Premise& p = r.premises[i];
      if (p.kind == PremiseKind::Observes)
        for (std::size_t k = 0; k < p.payload.size(); ++k) env.bind(p.payload[k], obs[i]->payload[k]);
      if (p.kind == PremiseKind::Reduces) reducing.push_back(i);
    }
    for (auto i : strict) {
      const Premise& p = r.premises[i];
      if (p.kind == PremiseKind::Consumes && p.label && !p.target.empty())
        env.bind(p.target, obs[i]->apply(instantiate(*p.label, env)));
    }
    // cartesian product over the reducing positions
    std::vector<std::size_t> idx(reducing.size(), 0);
    bool empty = std::any_of(reducing.begin(), reducing.end(), [&](auto i) { return red[i]->empty(); });
    while (!empty) {
      MetaEnv e = env;
      std::string label;
      if (labels) label = r.name;
      for (std::size_t k = 0; k < reducing.size(); ++k) {
        const LabeledStep& s = (*red[reducing[k]])[idx[k]];
        e.bind(r.premises[reducing[k]].target, s.term);
        if (labels) label += (k ? "," : "[") + s.rule + (k + 1 == reducing.size() ? "]" : "");
      }
      out.push_back({instantiate(r.conclusion, e), std::move(label)});
      std::size_t k = 0;
      while (k < idx.size() && ++idx[k] == red[reducing[k]]->size()) idx[k++] = 0;
      if (k == idx.size()) break;
    }
  }
  if (!matched && kind == EffectKind::Det)
    throw NoMatchingRule("no rule for " + print(rs.sig, c, 200));
  // keep the first occurrence of each successor
  for (std::size_t i = before + 1; i < out.size();) {
    bool dup = false;
    for (std::size_t j = before; j < i && !dup; ++j) dup = out[j].term == out[i].term;
    if (dup) out.erase(out.begin() + static_cast<std::ptrdiff_t>(i));
    else ++i;
  }
  if (kind != EffectKind::FinSet && out.size() - before > 1)
    throw NonDeterministic(std::to_string(out.size() - before) + " distinct successors of " +
                           print(rs.sig, c, 200) + " under a deterministic effect");
}

std::vector<Term> successor_terms(const RuleSet& rs, EffectKind kind, const Term& c,
                                  std::size_t* work = nullptr) {
  std::vector<LabeledStep> s;
  StepCache cache;
  successors(rs, kind, c, false, s, cache);
  if (work) *work += cache.size() + 1;
  std::vector<Term> out;
  out.reserve(s.size());
  for (auto& x : s) out.push_back(std::move(x.term));
  return out;
}

std::string short_print(const RuleSet& rs, const Term& t) { return print(rs.sig, t, 160); }

}  // namespace

Observation gamma_v(const RuleSet& rs, const Term& v) {
  if (!v.is_value()) throw Error("gamma_v on a computation");
  const ValueRule* r = v.is_var() ? rs.variable_rule() : rs.value_rule_for(v.op());
  if (!r) throw NoValueRule("no value rule for " + (v.is_var() ? std::string("variables") : v.op()));
  Observation o;
  o.subject = v;
  o.rule = r->name;
  MetaEnv env = head_env(*r, v);
  if (r->kind == ValueRule::Kind::Observe) {
    o.kind = Observation::Kind::Structural;
    o.tag = r->tag;
    for (const auto& p : r->payload) o.payload.push_back(instantiate(p, env));
  } else {
    o.kind = Observation::Kind::Consuming;
    o.label = r->label;
    o.body = r->body;
    o.env = std::move(env);
  }
  return o;
}

Effect<Term> gamma_c(const RuleSet& rs, const Term& c) {
  if (!c.is_computation()) throw Error("gamma_c on a value");
  return Effect<Term>::from_items(rs.effect, successor_terms(rs, rs.effect, c));
}

Behaviour gamma(const RuleSet& rs, const Term& t) {
  Behaviour b;
  if (t.is_value()) {
    b.kind = Behaviour::Kind::Obs;
    b.obs = Effect<Observation>::unit(rs.effect, gamma_v(rs, t));
  } else {
    b.kind = Behaviour::Kind::Red;
    b.red = gamma_c(rs, t);
  }
  return b;
}

Effect<Term> step(const RuleSet& rs, const Term& t) {
  if (t.is_value()) return Effect<Term>::unit(rs.effect, t);
  return gamma_c(rs, t);
}

std::vector<LabeledStep> labeled_successors(const RuleSet& rs, const Term& c) {
  std::vector<LabeledStep> out;
  StepCache cache;
  if (c.is_computation()) successors(rs, eval_kind(rs), c, true, out, cache);
  return out;
}

EvalResult multi_step(const RuleSet& rs, const Term& t, std::size_t fuel, EvalOptions opt) {
  EffectKind kind = eval_kind(rs);
  EvalResult res;
  std::vector<Term> found;
  std::unordered_set<Term, TermHash> visited;
  std::vector<Term> frontier;
  std::vector<std::string> recent;
  std::optional<Term> witness;
  bool cyclic = false;
  bool overflow = false;
  if (t.is_value()) found.push_back(t);
  else {
    frontier.push_back(t);
    visited.insert(t);
  }
  std::size_t used = 0, work = 0;
  while (!frontier.empty() && used < fuel) {
    ++used;
    std::vector<Term> next;
    for (const auto& c : frontier) {
      if (rs.effect == EffectKind::Det && opt.det_errors) {
        recent.push_back(short_print(rs, c));
        if (recent.size() > 8) recent.erase(recent.begin());
      }
      auto succ = successor_terms(rs, kind, c, &work);
      if (succ.empty()) ++res.stuck;
      for (auto& s : succ) {
        if (s.is_value()) found.push_back(std::move(s));
        else if (visited.insert(s).second) next.push_back(std::move(s));
        else if (!witness) witness = s;
      }
    }
    frontier = std::move(next);
    if (kind != EffectKind::FinSet && witness) {
      cyclic = true;
      break;
    }
    if (visited.size() > opt.max_states || work > opt.max_work) {
      overflow = true;
      break;
    }
  }
  res.fuel_used = used;
  res.states = visited.size();
  res.found = Effect<Term>::from_items(kind, std::move(found));
  if (cyclic) {
    res.status = EvalStatus::Cyclic;
    res.frontier = {*witness};
  } else if (frontier.empty() && !overflow) {
    bool no_value = res.found.is_bottom();
    res.status = (no_value && witness) ? EvalStatus::Cyclic : EvalStatus::Converged;
    res.converged = res.status == EvalStatus::Converged;
    if (!res.converged) res.frontier = {*witness};
  } else {
    res.status = EvalStatus::FuelExhausted;
    res.fuel_used = fuel;
    res.frontier = std::move(frontier);
  }
  if (rs.effect == EffectKind::Det && opt.det_errors) {
    if (res.status == EvalStatus::Cyclic)
      throw NonConvergence("small-step evaluation loops: " + short_print(rs, res.frontier.front()),
                           recent);
    if (res.status == EvalStatus::FuelExhausted)
      throw NonConvergence("no value within " + std::to_string(fuel) + " steps", recent);
    if (res.stuck > 0) throw NoMatchingRule("evaluation is stuck at " + recent.back());
  }
  return res;
}

std::vector<TraceStep> trace(const RuleSet& rs, const Term& t, std::size_t fuel,
                             std::size_t max_nodes) {
  std::vector<TraceStep> out;
  std::unordered_set<Term, TermHash> seen{t};
  std::vector<Term> frontier{t};
  for (std::size_t n = 0; n <= fuel && !frontier.empty() && out.size() < max_nodes; ++n) {
    std::vector<Term> next;
    for (const auto& c : frontier) {
      if (out.size() >= max_nodes) break;
      TraceStep st{c, labeled_successors(rs, c)};
      if (n == fuel) st.successors.clear();
      for (const auto& s : st.successors)
        if (seen.insert(s.term).second) next.push_back(s.term);
      out.push_back(std::move(st));
    }
    frontier = std::move(next);
  }
  return out;
}

namespace {

std::vector<Term> merge_found(std::vector<Term> a, const Effect<Term>& b) {
  a.insert(a.end(), b.items().begin(), b.items().end());
  return a;
}

}  // namespace

Verdict check_arg_eval_inclusion(const RuleSet& rs, const Term& c, std::size_t fuel) {
  if (!c.is_computation()) return Verdict::Holds;
  EvalOptions opt;
  opt.det_errors = false;
  EffectKind kind = eval_kind(rs);
  const auto& d = rs.sig.at(c.op());
  auto strict = d.strict_positions();
  std::vector<Effect<Term>> args;
  for (auto i : strict) {
    auto r = multi_step(rs, c.kid(i), fuel, opt);
    if (!r.exact()) return Verdict::Inconclusive;
    args.push_back(r.found);
  }
  auto table = xi_table(rs);
  std::vector<Term> lhs;
  auto tuples = dist_chi(kind, args);
  for (const auto& tuple : tuples.items()) {
    std::vector<Term> kids = c.kids();
    for (std::size_t k = 0; k < strict.size(); ++k) kids[strict[k]] = tuple[k];
    auto bodies = table->apply(rs, c.with_kids(std::move(kids)));
    for (const auto& b : bodies.items()) {
      auto r = multi_step(rs, b, fuel, opt);
      if (!r.exact()) return Verdict::Inconclusive;
      lhs = merge_found(std::move(lhs), r.found);
    }
  }
  auto rhs = multi_step(rs, c, fuel, opt);
  if (!rhs.exact()) return Verdict::Inconclusive;
  if (kind != EffectKind::FinSet && lhs.size() > 1) return Verdict::Fails;
  return leq(Effect<Term>::from_items(kind, std::move(lhs)), rhs.found) ? Verdict::Holds
                                                                         : Verdict::Fails;
}

Verdict check_step_inclusion(const RuleSet& rs, const Term& c, std::size_t fuel) {
  if (!c.is_computation()) return Verdict::Holds;
  EvalOptions opt;
  opt.det_errors = false;
  EffectKind kind = eval_kind(rs);
  std::vector<Term> lhs;
  for (const auto& s : successor_terms(rs, kind, c)) {
    auto r = big_step(rs, s, fuel, opt);
    if (!r.exact()) return Verdict::Inconclusive;
    lhs = merge_found(std::move(lhs), r.found);
  }
  auto rhs = big_step(rs, c, fuel, opt);
  if (!rhs.exact()) return Verdict::Inconclusive;
  if (kind != EffectKind::FinSet && lhs.size() > 1) return Verdict::Fails;
  return leq(Effect<Term>::from_items(kind, std::move(lhs)), rhs.found) ? Verdict::Holds
                                                                         : Verdict::Fails;
}

namespace {

struct Job {
  const std::function<void()>* fn;
  std::exception_ptr err;
};

void* run_job(void* p) {
  auto* job = static_cast<Job*>(p);
  try {
    (*job->fn)();
  } catch (...) {
    job->err = std::current_exception();
  }
  return nullptr;
}

}  // namespace

void run_with_big_stack(const std::function<void()>& fn, std::size_t stack_bytes) {
  Job job{&fn, nullptr};
  pthread_attr_t attr;
  pthread_attr_init(&attr);
  pthread_attr_setstacksize(&attr, stack_bytes);
  pthread_t th;
  int rc = pthread_create(&th, &attr, run_job, &job);
  pthread_attr_destroy(&attr);
  if (rc != 0) {
    fn();
    return;
  }
  pthread_join(th, nullptr);
  if (job.err) std::rethrow_exception(job.err);
}

}  // namespace sosforge
