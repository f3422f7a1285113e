#include "sosforge/fuzz.hpp"

#include <algorithm>
#include <atomic>
#include <mutex>
#include <sstream>
#include <thread>

#include "text_util.hpp"

namespace sosforge {

namespace {

bool has_binding_sort(const RuleSet& rs, const Sort& s) { return rs.sig.binding && *rs.sig.binding == s; }

}  // namespace

TermGenerator::TermGenerator(const RuleSet& rs, std::uint64_t seed, GenOptions opt)
    : rs_(rs), rng_(seed), opt_(opt) {
  for (const auto& s : rs.gen_sorts) roots_.push_back(parse_sort(s, {}));
  for (const auto& s : rs.sig.sorts) pool_.push_back(Sort::base(s));
  if (roots_.empty())
    for (const auto& s : rs.sig.sorts) roots_.push_back(Sort::base(s));
  for (const auto& r : roots_)
    if (std::find(pool_.begin(), pool_.end(), r) == pool_.end()) pool_.push_back(r);
  for (const auto& op : rs.sig.ops)
    if (std::find(rs.gen_exclude.begin(), rs.gen_exclude.end(), op.name) == rs.gen_exclude.end())
      ops_.push_back(&op);
}

Term TermGenerator::next() {
  for (int attempt = 0; attempt < 1000; ++attempt) {
    std::size_t budget = std::uniform_int_distribution<std::size_t>(1, opt_.max_size)(rng_);
    const Sort& root = roots_[std::uniform_int_distribution<std::size_t>(0, roots_.size() - 1)(rng_)];
    if (auto t = generate(root, budget)) return *t;
  }
  throw Error("could not generate a closed term for " + rs_.id);
}

std::optional<Term> TermGenerator::generate(const Sort& sort, std::size_t budget, std::uint32_t depth) {
  if (budget == 0) return std::nullopt;
  struct Choice {
    const OperatorDescriptor* op;
    SortSubst sub;
  };
  std::vector<Choice> values, comps;
  // the whole budget is spent: leaves only at budget 1, unless nothing else fits
  for (int pass = 0; pass < 2 && values.empty() && comps.empty(); ++pass) {
    for (const auto* op : ops_) {
      if (op->arity() + 1 > budget || (pass == 0 && budget > 1 && op->arity() == 0)) continue;
      SortSubst sub;
      if (!match_sort(op->result, sort, sub)) continue;
      (op->is_value() ? values : comps).push_back({op, sub});
    }
  }
  bool vars = depth > 0 && has_binding_sort(rs_, sort) && (budget == 1 || (values.empty() && comps.empty()));
  for (int attempt = 0; attempt < 4; ++attempt) {
    bool want_value = std::bernoulli_distribution(opt_.value_ratio)(rng_);
    std::vector<Choice>* pick = want_value ? &values : &comps;
    if (pick->empty()) pick = want_value ? &comps : &values;
    // variables count as values
    std::size_t n = pick->size() + ((pick == &values && vars) ? 1 : 0);
    if (n == 0) {
      if (vars) return Term::var(std::uniform_int_distribution<std::uint32_t>(0, depth - 1)(rng_));
      return std::nullopt;
    }
    std::size_t k = std::uniform_int_distribution<std::size_t>(0, n - 1)(rng_);
    if (k == pick->size()) return Term::var(std::uniform_int_distribution<std::uint32_t>(0, depth - 1)(rng_));
    Choice c = (*pick)[k];
    const auto& d = *c.op;
    for (const auto& p : d.params)
      if (!c.sub.count(p))
        c.sub[p] = pool_[std::uniform_int_distribution<std::size_t>(0, pool_.size() - 1)(rng_)];
    // spread the remaining budget over the children
    std::vector<std::size_t> share(d.arity(), 1);
    std::size_t extra = budget - 1 - d.arity();
    if (d.arity() > 0 && extra > 0) {
      for (std::size_t i = 0; i < extra; ++i)
        ++share[std::uniform_int_distribution<std::size_t>(0, d.arity() - 1)(rng_)];
    }
    std::vector<Term> kids;
    bool ok = true;
    for (std::size_t i = 0; i < d.arity() && ok; ++i) {
      auto kid = generate(apply_sort(c.sub, d.args[i].sort), share[i],
                          depth + static_cast<std::uint32_t>(d.args[i].binds));
      if (kid) kids.push_back(*kid);
      ok = kid.has_value();
    }
    if (!ok) continue;
    std::vector<Sort> sorts;
    for (const auto& p : d.params) sorts.push_back(c.sub[p]);
    return Term::node(d, std::move(kids), std::move(sorts));
  }
  return std::nullopt;
}

const char* to_string(Outcome o) {
  switch (o) {
    case Outcome::Match: return "match";
    case Outcome::BothDiverge: return "both-diverge";
    case Outcome::Mismatch: return "mismatch";
  }
  return "?";
}

Comparison compare_evaluators(const RuleSet& rs, const Term& t, std::size_t fuel) {
  EvalOptions opt;
  opt.det_errors = false;
  Comparison c;
  c.fuel = fuel;
  for (int k = 0;; ++k) {
    c.small = multi_step(rs, t, c.fuel, opt);
    c.big = big_step(rs, t, c.fuel, opt);
    bool same = c.small.found.items() == c.big.found.items();
    if (same || (c.small.exact() && c.big.exact()) || k == 4) break;
    c.fuel *= 2;
  }
  if (c.small.found.items() != c.big.found.items()) {
    c.outcome = Outcome::Mismatch;
  } else if (!c.small.found.is_bottom() || (c.small.exact() && c.big.exact())) {
    c.outcome = Outcome::Match;
  } else {
    c.outcome = Outcome::BothDiverge;
  }
  c.small.frontier.clear();
  c.big.frontier.clear();
  return c;
}

bool mentions_op(const Term& t, const std::string& op) {
  if (t.is_var()) return false;
  if (t.op() == op) return true;
  for (const auto& k : t.kids())
    if (mentions_op(k, op)) return true;
  return false;
}

namespace {

void subterms(const Term& t, std::vector<Term>& out) {
  out.push_back(t);
  if (t.is_node())
    for (const auto& k : t.kids()) subterms(k, out);
}

Term replace_at(const Term& t, std::size_t& pos, const Term& by) {
  if (pos == 0) return by;
  --pos;
  if (t.is_var()) return t;
  std::vector<Term> kids;
  for (const auto& k : t.kids()) {
    if (pos == static_cast<std::size_t>(-1)) {
      kids.push_back(k);
      continue;
    }
    std::size_t before = k.size();
    if (pos < before) {
      kids.push_back(replace_at(k, pos, by));
      pos = static_cast<std::size_t>(-1);
    } else {
      pos -= before;
      kids.push_back(k);
    }
  }
  return t.with_kids(std::move(kids));
}

}  // namespace

Term shrink(const RuleSet& rs, const Term& t, std::size_t fuel, Outcome keep) {
  Term cur = t;
  std::vector<Term> leaves;
  for (const auto& op : rs.sig.ops)
    if (op.arity() == 0 && op.params.empty()) leaves.push_back(Term::node(op, {}));
  bool improved = true;
  for (int rounds = 0; improved && rounds < 200; ++rounds) {
    improved = false;
    std::vector<Term> subs;
    subterms(cur, subs);
    for (std::size_t p = 0; p < subs.size() && !improved; ++p) {
      std::vector<Term> cands;
      subterms(subs[p], cands);
      cands.erase(cands.begin());
      cands.insert(cands.end(), leaves.begin(), leaves.end());
      std::sort(cands.begin(), cands.end(), [](const Term& a, const Term& b) { return a.size() < b.size(); });
      for (const auto& c : cands) {
        if (!c.closed() || c.size() >= subs[p].size()) continue;
        std::size_t pos = p;
        Term next = replace_at(cur, pos, c);
        try {
          sort_check(rs.sig, next);
        } catch (const Error&) {
          continue;
        }
        if (compare_evaluators(rs, next, fuel).outcome == keep) {
          cur = next;
          improved = true;
          break;
        }
      }
    }
  }
  return cur;
}

FuzzReport run_fuzz(const RuleSet& rs, const FuzzOptions& opt) {
  FuzzReport r;
  r.language = rs.id;
  r.opt = opt;
  r.checker_pass = check_strong_separation(rs).pass;
  TermGenerator gen(rs, opt.seed, GenOptions{opt.size, opt.ratio});
  r.cases.resize(opt.count);
  for (std::size_t i = 0; i < opt.count; ++i) {
    Term t = gen.next();
    for (int tries = 0; !opt.require_op.empty() && !mentions_op(t, opt.require_op) && tries < 10000; ++tries)
      t = gen.next();
    r.cases[i].index = i;
    r.cases[i].term = t;
    r.values += t.is_value();
  }
  std::atomic<std::size_t> next{0};
  std::mutex err_mu;
  std::string first_error;
  auto work = [&] {
    run_with_big_stack([&] {
      for (std::size_t i = next++; i < r.cases.size(); i = next++) {
        try {
          r.cases[i].cmp = compare_evaluators(rs, r.cases[i].term, opt.fuel);
        } catch (const std::exception& e) {
          std::lock_guard<std::mutex> lock(err_mu);
          if (first_error.empty())
            first_error = print(rs.sig, r.cases[i].term, 200) + ": " + e.what();
        }
      }
    });
  };
  unsigned n = std::max(1u, opt.threads);
  std::vector<std::thread> pool;
  for (unsigned k = 1; k < n; ++k) pool.emplace_back(work);
  work();
  for (auto& th : pool) th.join();
  if (!first_error.empty()) throw Error("evaluation failed on " + first_error);
  std::size_t shrunk = 0;
  for (auto& c : r.cases) {
    switch (c.cmp.outcome) {
      case Outcome::Match: ++r.matches; break;
      case Outcome::BothDiverge: ++r.both_diverge; break;
      case Outcome::Mismatch:
        ++r.mismatches;
        if (opt.shrink && shrunk < opt.max_reported) {
          ++shrunk;
          run_with_big_stack([&] { c.shrunk = shrink(rs, c.term, opt.fuel, Outcome::Mismatch); });
        }
        break;
    }
  }
  return r;
}

namespace {

nlohmann::ordered_json terms_json(const RuleSet& rs, const std::vector<Term>& ts) {
  auto j = nlohmann::ordered_json::array();
  for (const auto& t : ts) j.push_back(print(rs.sig, t, 200));
  return j;
}

}  // namespace

nlohmann::ordered_json to_json(const FuzzReport& r, const RuleSet& rs) {
  nlohmann::ordered_json j;
  j["schema"] = "sosforge.fuzz/1";
  j["language"] = r.language;
  j["options"] = {{"seed", r.opt.seed},   {"size", r.opt.size},   {"count", r.opt.count},
                  {"fuel", r.opt.fuel},   {"ratio", r.opt.ratio}, {"require_op", r.opt.require_op}};
  double measured = r.cases.empty() ? 0.0 : static_cast<double>(r.values) / static_cast<double>(r.cases.size());
  j["summary"] = {{"generated", r.cases.size()},
                  {"match", r.matches},
                  {"both_diverge", r.both_diverge},
                  {"mismatch", r.mismatches},
                  {"value_fraction", measured}};
  j["checker_pass"] = r.checker_pass;
  j["mismatches"] = nlohmann::ordered_json::array();
  std::size_t listed = 0;
  for (const auto& c : r.cases) {
    if (c.cmp.outcome != Outcome::Mismatch || listed++ >= r.opt.max_reported) continue;
    nlohmann::ordered_json m;
    m["index"] = c.index;
    m["term"] = print(rs.sig, c.term, 200);
    m["small"] = terms_json(rs, c.cmp.small.found.items());
    m["big"] = terms_json(rs, c.cmp.big.found.items());
    m["small_status"] = to_string(c.cmp.small.status);
    m["big_status"] = to_string(c.cmp.big.status);
    m["fuel"] = c.cmp.fuel;
    m["shrunk"] = c.shrunk ? nlohmann::ordered_json(print(rs.sig, *c.shrunk, 200)) : nlohmann::ordered_json();
    j["mismatches"].push_back(m);
  }
  j["verdict"] = r.mismatches == 0 ? "pass" : (r.checker_pass ? "fail" : "expected-mismatch");
  return j;
}

std::string to_text(const FuzzReport& r, const RuleSet& rs) {
  std::ostringstream o;
  o << "language " << r.language << ", seed " << r.opt.seed << ", size " << r.opt.size << ", fuel "
    << r.opt.fuel << "\n";
  o << "generated " << r.cases.size() << ": match " << r.matches << ", both-diverge " << r.both_diverge
    << ", mismatch " << r.mismatches << "\n";
  std::size_t listed = 0;
  for (const auto& c : r.cases) {
    if (c.cmp.outcome != Outcome::Mismatch || listed++ >= r.opt.max_reported) continue;
    auto set = [&](const EvalResult& e) {
      std::string s = "{";
      for (std::size_t i = 0; i < e.found.items().size(); ++i)
        s += (i ? ", " : "") + print(rs.sig, e.found.items()[i], 120);
      return s + "} (" + to_string(e.status) + ")";
    };
    o << "MISMATCH #" << c.index << ": " << print(rs.sig, c.term, 200) << "\n";
    o << "  small " << set(c.cmp.small) << "\n  big   " << set(c.cmp.big) << "\n";
    if (c.shrunk) o << "  shrunk " << print(rs.sig, *c.shrunk, 200) << "\n";
  }
  return o.str();
}

}  // namespace sosforge
