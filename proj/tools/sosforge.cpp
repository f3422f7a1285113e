// sosforge: evaluate, trace, derive big-step rules, check separation, fuzz.
#include <cstdlib>
#include <iostream>
#include <map>

#include <CLI11.hpp>

#include "sosforge/fuzz.hpp"
#include "sosforge/languages.hpp"
#include "sosforge/ruledsl.hpp"
#include "sosforge/semantics.hpp"

using namespace sosforge;
using json = nlohmann::ordered_json;

namespace {

constexpr int kOk = 0, kMismatch = 1, kParse = 2, kFuel = 3;

std::size_t default_fuel() {
  if (const char* e = std::getenv("SOSFORGE_FUEL")) {
    try {
      return std::stoul(e);
    } catch (const std::exception&) {
      std::cerr << "warning: ignoring SOSFORGE_FUEL=" << e << "\n";
    }
  }
  return 10000;
}

std::string set_text(const RuleSet& rs, const EvalResult& r) {
  std::string s = "{";
  for (std::size_t i = 0; i < r.found.items().size(); ++i)
    s += (i ? ", " : "") + print(rs.sig, r.found.items()[i], 200);
  return s + "}";
}

/// Prepends the versioned schema id to a report.
json versioned(const char* schema, const json& body) {
  json j;
  j["schema"] = schema;
  for (const auto& [k, v] : body.items()) j[k] = v;
  return j;
}

json result_json(const RuleSet& rs, const EvalResult& r) {
  json j;
  j["found"] = json::array();
  for (const auto& t : r.found.items()) j["found"].push_back(print(rs.sig, t, 200));
  j["status"] = to_string(r.status);
  j["fuel_used"] = r.fuel_used;
  j["states"] = r.states;
  j["stuck"] = r.stuck;
  return j;
}

struct Common {
  std::string lang;
  std::string format = "text";
  std::size_t fuel = 0;
};

void add_common(CLI::App* sub, Common& c, bool fuel, bool format) {
  sub->add_option("language", c.lang, "bundled language id or path to a .sos file")->required();
  if (fuel) sub->add_option("--fuel", c.fuel, "evaluation budget (default 10000 or SOSFORGE_FUEL)");
  if (format) sub->add_option("--format", c.format, "text or json")->check(CLI::IsMember({"text", "json"}));
}

int cmd_eval(const Common& c, const std::string& text, const std::string& mode) {
  auto b = load_language(c.lang);
  const RuleSet& rs = b.ruleset;
  Term t = parse_term(rs.sig, text);
  sort_check(rs.sig, t);
  EvalOptions opt;
  opt.det_errors = false;
  EvalResult sm, bg;
  bool small = mode != "big", big = mode != "small";
  run_with_big_stack([&] {
    if (small) sm = multi_step(rs, t, c.fuel, opt);
    if (big) bg = big_step(rs, t, c.fuel, opt);
  });
  std::string verdict;
  int code = kOk;
  bool checker_pass = true;
  if (small && big) {
    checker_pass = check_strong_separation(rs).pass;
    if (sm.found.items() != bg.found.items()) {
      verdict = "MISMATCH";
      if (checker_pass) code = kMismatch;
    } else if (!sm.found.is_bottom() || (sm.exact() && bg.exact())) {
      verdict = "MATCH";
    } else {
      verdict = "UNKNOWN";
      code = kFuel;
    }
  } else {
    const EvalResult& r = small ? sm : bg;
    if (r.found.is_bottom() && !r.exact()) code = kFuel;
  }
  if (c.format == "json") {
    json j;
    j["schema"] = "sosforge.eval/1";
    j["language"] = rs.id;
    j["term"] = print(rs.sig, t);
    j["mode"] = mode;
    j["fuel"] = c.fuel;
    if (small) j["small"] = result_json(rs, sm);
    if (big) j["big"] = result_json(rs, bg);
    if (!verdict.empty()) j["verdict"] = verdict;
    std::cout << j.dump(2) << "\n";
  } else {
    auto line = [&](const char* name, const EvalResult& r) {
      std::cout << name << set_text(rs, r) << "  " << to_string(r.status) << ", fuel used " << r.fuel_used
                << ", states " << r.states << "\n";
    };
    if (small) line("small: ", sm);
    if (big) line("big:   ", bg);
    if (!verdict.empty()) {
      std::cout << verdict;
      if (verdict == "MISMATCH" && !checker_pass) std::cout << " (strong separation fails for " << rs.id << ")";
      std::cout << "\n";
    }
  }
  return code;
}

int cmd_trace(const Common& c, const std::string& text, std::size_t max_nodes) {
  auto b = load_language(c.lang);
  const RuleSet& rs = b.ruleset;
  Term t = parse_term(rs.sig, text);
  sort_check(rs.sig, t);
  std::vector<TraceStep> steps;
  run_with_big_stack([&] { steps = trace(rs, t, c.fuel, max_nodes); });
  std::map<Term, std::size_t> id;
  for (std::size_t i = 0; i < steps.size(); ++i) id.emplace(steps[i].term, i);
  bool linear = std::all_of(steps.begin(), steps.end(), [](const TraceStep& s) { return s.successors.size() <= 1; });
  if (c.format == "json") {
    json j;
    j["schema"] = "sosforge.trace/1";
    j["language"] = rs.id;
    j["nodes"] = json::array();
    for (const auto& s : steps) {
      json n;
      n["term"] = print(rs.sig, s.term, 200);
      n["value"] = s.term.is_value();
      n["successors"] = json::array();
      for (const auto& x : s.successors) {
        auto it = id.find(x.term);
        n["successors"].push_back({{"rule", x.rule}, {"node", it == id.end() ? json() : json(it->second)}});
      }
      j["nodes"].push_back(n);
    }
    std::cout << j.dump(2) << "\n";
  } else if (linear) {
    for (std::size_t i = 0; i < steps.size(); ++i) {
      const auto& s = steps[i];
      std::cout << i << "  " << print(rs.sig, s.term, 200) << "\n";
      if (!s.successors.empty()) {
        std::cout << "     by " << s.successors[0].rule;
        auto it = id.find(s.successors[0].term);
        if (it != id.end() && it->second <= i) std::cout << ", back to " << it->second;
        std::cout << "\n";
      } else if (s.term.is_computation()) {
        bool more = false;
        run_with_big_stack([&] { more = !labeled_successors(rs, s.term).empty(); });
        std::cout << (more ? "     fuel exhausted\n" : "     stuck\n");
      }
    }
  } else {
    for (std::size_t i = 0; i < steps.size(); ++i) {
      const auto& s = steps[i];
      std::cout << i << "  " << print(rs.sig, s.term, 200) << (s.term.is_value() ? "  (value)" : "") << "\n";
      for (const auto& x : s.successors) {
        auto it = id.find(x.term);
        std::cout << "     " << x.rule << " -> "
                  << (it == id.end() ? print(rs.sig, x.term, 120) : std::to_string(it->second)) << "\n";
      }
    }
  }
  return kOk;
}

int cmd_derive(const Common& c, bool simplified) {
  auto b = load_language(c.lang);
  auto table = derive_bigstep_rules(b.ruleset);
  if (c.format == "json") {
    std::cout << versioned("sosforge.bigstep/1", to_json(table, b.ruleset)).dump(2) << "\n";
  } else if (simplified) {
    for (const auto& r : table.rules) std::cout << rule_text(b.ruleset, r, true) << "\n";
  } else {
    std::cout << to_text(table, b.ruleset);
  }
  return kOk;
}

int cmd_check(const Common& c) {
  auto b = load_language(c.lang);
  auto rep = check_strong_separation(b.ruleset);
  if (c.format == "json")
    std::cout << versioned("sosforge.check/1", to_json(rep, b.ruleset)).dump(2) << "\n";
  else
    std::cout << to_text(rep, b.ruleset);
  return rep.pass ? kOk : kMismatch;
}

int cmd_fuzz(const Common& c, FuzzOptions opt) {
  auto b = load_language(c.lang);
  opt.fuel = c.fuel;
  FuzzReport r;
  r = run_fuzz(b.ruleset, opt);
  if (c.format == "json")
    std::cout << to_json(r, b.ruleset).dump(2) << "\n";
  else
    std::cout << to_text(r, b.ruleset);
  return r.mismatches > 0 && r.checker_pass ? kMismatch : kOk;
}

int cmd_corpus(const Common& c) {
  auto b = load_language(c.lang);
  std::size_t failed = 0;
  json cases = json::array();
  for (const auto& k : b.corpus) {
    CaseOutcome o;
    try {
      o = run_case(b.ruleset, k, c.fuel);
    } catch (const std::exception& e) {
      o.detail = e.what();
    }
    failed += !o.pass;
    if (c.format == "json")
      cases.push_back({{"term", k.term}, {"expect", k.expect}, {"pass", o.pass}, {"detail", o.detail}, {"source", k.source}});
    else
      std::cout << (o.pass ? "PASS  " : "FAIL  ") << k.term << "  [" << k.expect << "]  " << o.detail << "\n";
  }
  if (c.format == "json")
    std::cout << json{{"schema", "sosforge.corpus/1"}, {"language", b.id}, {"cases", cases}, {"failed", failed}}.dump(2) << "\n";
  else
    std::cout << b.corpus.size() - failed << "/" << b.corpus.size() << " cases pass\n";
  return failed ? kMismatch : kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"sosforge: separated higher-order GSOS laws, small-step and big-step"};
  app.require_subcommand(1);
  Common c;
  c.fuel = default_fuel();

  std::string term, mode = "both";
  auto* eval = app.add_subcommand("eval", "evaluate a term");
  add_common(eval, c, true, true);
  eval->add_option("term", term, "term in the language's concrete syntax")->required();
  eval->add_option("--mode", mode, "small, big or both")->check(CLI::IsMember({"small", "big", "both"}));

  std::size_t max_nodes = 10000;
  auto* tr = app.add_subcommand("trace", "print the small-step reduction sequence");
  add_common(tr, c, true, true);
  tr->add_option("term", term, "term")->required();
  tr->add_option("--max-nodes", max_nodes, "node limit for branching traces");

  bool simplified = false;
  auto* der = app.add_subcommand("derive-bigstep", "derive the big-step rule table");
  add_common(der, c, false, true);
  der->add_flag("--simplified", simplified, "collapse rules whose body is a value");

  auto* chk = app.add_subcommand("check", "run the strong separation and totality checks");
  add_common(chk, c, false, true);

  FuzzOptions fo;
  auto* fz = app.add_subcommand("fuzz", "differential test of the two evaluators");
  add_common(fz, c, true, true);
  fz->add_option("--seed", fo.seed, "random seed")->required();
  fz->add_option("--size", fo.size, "maximum term size");
  fz->add_option("--count", fo.count, "number of terms");
  fz->add_option("--ratio", fo.ratio, "chance of a value former per node")->check(CLI::Range(0.0, 1.0));
  fz->add_option("--threads", fo.threads, "worker threads");
  fz->add_option("--require-op", fo.require_op, "keep only terms mentioning this operator");
  fz->add_option("--max-reported", fo.max_reported, "mismatches listed and shrunk");
  bool no_shrink = false;
  fz->add_flag("--no-shrink", no_shrink, "skip counterexample shrinking");

  auto* cor = app.add_subcommand("corpus", "run the bundled regression cases");
  add_common(cor, c, true, true);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? kOk : kParse;
  }
  try {
    if (eval->parsed()) return cmd_eval(c, term, mode);
    if (tr->parsed()) return cmd_trace(c, term, max_nodes);
    if (der->parsed()) return cmd_derive(c, simplified);
    if (chk->parsed()) return cmd_check(c);
    if (fz->parsed()) {
      fo.shrink = !no_shrink;
      return cmd_fuzz(c, fo);
    }
    if (cor->parsed()) return cmd_corpus(c);
  } catch (const SyntaxError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kParse;
  } catch (const SortError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kParse;
  } catch (const RuleError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kParse;
  } catch (const SignatureError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kParse;
  } catch (const UnknownLanguage& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kParse;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kMismatch;
  }
  return kOk;
}
