#include <catch_amalgamated.hpp>

#include "oracles/lambda_oracles.hpp"
#include "oracles/xcl_bfs.hpp"
#include "support.hpp"

using namespace sosforge;
using testsupport::lang;

namespace {

std::vector<std::string> keys(const std::vector<Term>& ts) {
  std::vector<std::string> out;
  for (const auto& t : ts) out.push_back(oracle::key_of(t));
  std::sort(out.begin(), out.end());
  return out;
}

}  // namespace

TEST_CASE("gamma on values and computations", "[semantics]") {
  const auto& rs = lang("xcl_cbn").ruleset;
  auto b = gamma(rs, parse_term(rs.sig, "K'(S)"));
  REQUIRE(b.kind == Behaviour::Kind::Obs);
  REQUIRE(b.obs.size() == 1);
  const auto& o = b.obs.items()[0];
  CHECK(o.consuming());
  CHECK(o.apply(parse_term(rs.sig, "I")) == parse_term(rs.sig, "S"));
  auto c = gamma(rs, parse_term(rs.sig, "I K"));
  CHECK(c.kind == Behaviour::Kind::Red);
  CHECK(c.red.items() == std::vector<Term>{parse_term(rs.sig, "K")});
  CHECK(step(rs, parse_term(rs.sig, "S")).items() == std::vector<Term>{parse_term(rs.sig, "S")});
  const auto& pcf = lang("pcf").ruleset;
  auto tt = gamma_v(pcf, parse_term(pcf.sig, "true"));
  CHECK_FALSE(tt.consuming());
  CHECK(tt.tag == "tt");
}

TEST_CASE("erratic choice steps to both operands", "[semantics][nondet]") {
  const auto& rs = lang("xcl_nondet").ruleset;
  TermGenerator gen(rs, 8, GenOptions{6, 0.5});
  for (int i = 0; i < 200; ++i) {
    Term t = gen.next(), s = gen.next();
    Term c = Term::node(rs.sig.at("or"), {t, s});
    std::vector<Term> want = {t, s};
    std::sort(want.begin(), want.end());
    want.erase(std::unique(want.begin(), want.end()), want.end());
    CHECK(step(rs, c).items() == want);
  }
}

TEST_CASE("the Omega_k family never converges and never gets stuck", "[semantics][divergence]") {
  const auto& rs = lang("xcl_cbn").ruleset;
  for (int k = 1; k <= 3; ++k) {
    Term w = testsupport::omega_k(rs, k);
    INFO("k = " << k << ": " << print(rs.sig, w));
    EvalOptions opt;
    opt.det_errors = false;
    opt.max_work = SIZE_MAX;
    EvalResult s, b;
    run_with_big_stack([&] {
      s = multi_step(rs, w, 2000, opt);
      b = big_step(rs, w, 2000, opt);
    });
    CHECK_FALSE(s.converged);
    CHECK_FALSE(b.converged);
    CHECK(s.found.is_bottom());
    CHECK(b.found.is_bottom());
    CHECK(s.stuck == 0);
    CHECK(s.fuel_used == 2000);
  }
  EvalOptions strict;
  CHECK_THROWS_AS(multi_step(rs, testsupport::omega_k(rs, 1), 50, strict), NonConvergence);
}

TEST_CASE("loops with a finite reachable set are reported as cyclic", "[semantics][divergence]") {
  struct Case {
    const char* lang;
    const char* term;
  };
  for (auto c : {Case{"counterex_fg", "Ω"}, Case{"pcf", "fix[bool] I[bool]"},
                 Case{"lambda_cbn", "(λ.0 0) (λ.0 0)"}}) {
    const auto& rs = lang(c.lang).ruleset;
    Term t = parse_term(rs.sig, c.term);
    INFO(c.lang << ": " << c.term);
    auto s = testsupport::small(rs, t, 10000);
    CHECK(s.status == EvalStatus::Cyclic);
    CHECK(s.exact());
    CHECK(s.fuel_used < 100);
    CHECK_FALSE(s.frontier.empty());
    auto b = testsupport::big(rs, t, 10000);
    CHECK(b.status == EvalStatus::Cyclic);
  }
}

TEST_CASE("every bundled corpus case passes", "[semantics][corpus]") {
  for (const auto& id : language_ids()) {
    const auto& b = lang(id);
    CHECK_FALSE(b.corpus.empty());
    for (const auto& c : b.corpus) {
      CaseOutcome o = run_case(b.ruleset, c, 1000);
      INFO(id << " line " << c.line << ": " << c.term << " ;; " << c.expect << "  -> " << o.detail);
      CHECK(o.pass);
    }
  }
  CHECK_THROWS_AS(parse_corpus("I ;; maybe I"), SyntaxError);
  CHECK(parse_corpus("# only a comment\n\n").empty());
}

TEST_CASE("counterexample: small-step and big-step disagree", "[semantics][counterexample]") {
  const auto& rs = lang("counterex_fg").ruleset;
  Term t = parse_term(rs.sig, "f(f(g(Ω)))");
  auto s = testsupport::small(rs, t, 100);
  auto b = testsupport::big(rs, t, 100);
  CHECK(s.found.items() == std::vector<Term>{parse_term(rs.sig, "g(g(Ω))")});
  CHECK(b.found.items() == std::vector<Term>{parse_term(rs.sig, "g(Ω)")});
  CHECK(compare_evaluators(rs, t, 100).outcome == Outcome::Mismatch);
}

TEST_CASE("patched call-by-value steps both sides at once", "[semantics][cbv]") {
  const auto& rs = lang("xcl_cbv_patched").ruleset;
  auto succ = labeled_successors(rs, parse_term(rs.sig, "I I (I I)"));
  REQUIRE(succ.size() == 1);
  CHECK(succ[0].term == parse_term(rs.sig, "I I"));
  const auto& direct = lang("xcl_cbv_direct").ruleset;
  auto d = labeled_successors(direct, parse_term(direct.sig, "I I (I I)"));
  REQUIRE(d.size() == 1);
  CHECK(d[0].term == parse_term(direct.sig, "I (I I)"));
}

TEST_CASE("multi_step agrees with the BFS oracle on xcl_cbn", "[semantics][oracle]") {
  const auto& rs = lang("xcl_cbn").ruleset;
  TermGenerator gen(rs, 41, GenOptions{15, 0.5});
  int compared = 0;
  for (int i = 0; i < 300; ++i) {
    Term t = gen.next();
    auto r = testsupport::small(rs, t, 1000);
    auto o = oracle::bfs(oracle::cl_from_term(t), 1000);
    INFO(print(rs.sig, t));
    if (r.status == EvalStatus::Converged) {
      REQUIRE(o.converged);
      CHECK(keys(r.found.items()) == std::vector<std::string>(o.values.begin(), o.values.end()));
      CHECK(o.rounds == r.fuel_used);
      ++compared;
    } else if (o.converged) {
      FAIL("oracle converged but multi_step reports " << to_string(r.status));
    }
  }
  CHECK(compared > 150);
}

TEST_CASE("multi_step agrees with the BFS oracle on nondeterministic terms", "[semantics][oracle][nondet]") {
  const auto& rs = lang("xcl_nondet").ruleset;
  TermGenerator gen(rs, 43, GenOptions{8, 0.5});
  int compared = 0;
  for (int i = 0; i < 300; ++i) {
    Term t = gen.next();
    auto r = testsupport::small(rs, t, 500);
    auto o = oracle::bfs(oracle::cl_from_term(t), 500);
    INFO(print(rs.sig, t));
    if (r.status == EvalStatus::Converged && o.converged) {
      CHECK(keys(r.found.items()) == std::vector<std::string>(o.values.begin(), o.values.end()));
      ++compared;
    }
  }
  CHECK(compared > 100);
}

TEST_CASE("lambda_cbn big-step agrees with a Krivine machine", "[semantics][oracle][lambda]") {
  const auto& rs = lang("lambda_cbn").ruleset;
  TermGenerator gen(rs, 47, GenOptions{10, 0.5});
  int compared = 0;
  for (int i = 0; i < 300; ++i) {
    Term t = gen.next();
    auto b = testsupport::big(rs, t, 500);
    auto k = oracle::krivine(oracle::lam_from_term(t), 100000);
    INFO(print(rs.sig, t));
    if (b.status == EvalStatus::Converged) {
      REQUIRE(k.has_value());
      REQUIRE(b.found.size() == 1);
      CHECK(oracle::same(oracle::lam_from_term(b.found.items()[0]), *k));
      ++compared;
    } else if (b.status == EvalStatus::Cyclic) {
      CHECK_FALSE(k.has_value());
    }
  }
  CHECK(compared > 100);
}

TEST_CASE("pretty-big-step and patched call-by-value agree", "[semantics][cbv]") {
  const auto& pretty = lang("xcl_cbv_pretty").ruleset;
  const auto& patched = lang("xcl_cbv_patched").ruleset;
  TermGenerator gen(patched, 53, GenOptions{12, 0.5});
  for (int i = 0; i < 300; ++i) {
    Term t = gen.next();
    Term u = parse_term(pretty.sig, print(patched.sig, t));
    auto a = testsupport::big(patched, t, 1000);
    auto b = testsupport::big(pretty, u, 1000);
    INFO(print(patched.sig, t));
    if (a.exact() && b.exact()) CHECK(keys(a.found.items()) == keys(b.found.items()));
  }
}

TEST_CASE("Kleene chains grow and big-step is a post-fixpoint", "[semantics][property]") {
  for (const auto& id : language_ids()) {
    const auto& rs = lang(id).ruleset;
    TermGenerator gen(rs, 59, GenOptions{10, 0.5});
    for (int i = 0; i < 60; ++i) {
      Term t = gen.next();
      INFO(id << ": " << print(rs.sig, t));
      std::string mono, fix;
      run_with_big_stack([&] {
        mono = testsupport::check_chain_monotone(rs, t, 64);
        fix = testsupport::check_post_fixpoint(rs, t, 200);
      });
      CHECK(mono.empty());
      CHECK((fix.empty() || fix == "skip"));
    }
  }
}

TEST_CASE("inclusion checks never fail on strongly separated languages", "[semantics][inclusion]") {
  for (const auto& id : language_ids()) {
    const auto& rs = lang(id).ruleset;
    if (!check_strong_separation(rs).pass) continue;
    auto cs = testsupport::converging_computations(rs, 40, 10, 300, 61);
    for (const auto& c : cs) {
      INFO(id << ": " << print(rs.sig, c));
      Verdict a = Verdict::Inconclusive, b = Verdict::Inconclusive;
      run_with_big_stack([&] {
        a = check_arg_eval_inclusion(rs, c, 300);
        b = check_step_inclusion(rs, c, 300);
      });
      CHECK(a == Verdict::Holds);
      CHECK(b == Verdict::Holds);
    }
  }
}

TEST_CASE("the argument inclusion fails where separation fails", "[semantics][inclusion]") {
  const auto& rs = lang("counterex_fg").ruleset;
  Term c = parse_term(rs.sig, "f(f(g(Ω)))");
  CHECK(check_arg_eval_inclusion(rs, c, 100) == Verdict::Fails);
}

TEST_CASE("traces name the rules", "[semantics][trace]") {
  const auto& rs = lang("xcl_cbn").ruleset;
  auto tr = trace(rs, parse_term(rs.sig, "S K K I"), 100);
  REQUIRE(tr.size() == 6);
  CHECK(tr.back().term == parse_term(rs.sig, "I"));
  CHECK(tr.front().successors.at(0).rule.find("app") != std::string::npos);
  auto d = derive_tree(rs, parse_term(rs.sig, "S K K I"), 100);
  REQUIRE(d.has_value());
  CHECK(d->value == parse_term(rs.sig, "I"));
  const auto& nd = lang("xcl_nondet").ruleset;
  auto g = trace(nd, parse_term(nd.sig, "I ⊕ K"), 10);
  REQUIRE_FALSE(g.empty());
  CHECK(g.front().successors.size() == 2);
}
