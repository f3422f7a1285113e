#include <catch_amalgamated.hpp>

#include "support.hpp"

using namespace sosforge;
using testsupport::lang;

TEST_CASE("generated terms are closed, well-sorted and within the size bound", "[fuzz][property]") {
  for (const auto& id : language_ids()) {
    const auto& rs = lang(id).ruleset;
    TermGenerator gen(rs, 5, GenOptions{9, 0.5});
    std::size_t values = 0;
    for (int i = 0; i < 300; ++i) {
      Term t = gen.next();
      INFO(id << ": " << print(rs.sig, t));
      CHECK(t.closed());
      CHECK(t.size() <= 9);
      CHECK_NOTHROW(sort_check(rs.sig, t));
      for (const auto& ex : rs.gen_exclude) CHECK_FALSE(mentions_op(t, ex));
      values += t.is_value();
    }
    CHECK(values > 0);
    CHECK(values < 300);
  }
}

TEST_CASE("the same seed gives the same report", "[fuzz]") {
  const auto& rs = lang("xcl_cbn").ruleset;
  FuzzOptions o;
  o.seed = 12;
  o.count = 200;
  o.size = 12;
  o.threads = 1;
  auto a = to_json(run_fuzz(rs, o), rs).dump();
  o.threads = 4;
  auto b = to_json(run_fuzz(rs, o), rs).dump();
  CHECK(a == b);
  o.seed = 13;
  CHECK(to_json(run_fuzz(rs, o), rs).dump() != a);
}

TEST_CASE("an empty run has an empty summary", "[fuzz]") {
  const auto& rs = lang("xcl_cbn").ruleset;
  FuzzOptions o;
  o.count = 0;
  auto r = run_fuzz(rs, o);
  CHECK(r.cases.empty());
  CHECK(r.matches + r.both_diverge + r.mismatches == 0);
  auto j = to_json(r, rs);
  CHECK(j["summary"]["generated"] == 0);
  CHECK(j["verdict"] == "pass");
}

TEST_CASE("fuzzing the counterexample finds and shrinks mismatches", "[fuzz][counterexample]") {
  const auto& rs = lang("counterex_fg").ruleset;
  FuzzOptions o;
  o.seed = 1;
  o.size = 6;
  o.count = 1000;
  o.fuel = 200;
  o.max_reported = 5;
  auto r = run_fuzz(rs, o);
  CHECK_FALSE(r.checker_pass);
  REQUIRE(r.mismatches >= 1);
  std::size_t checked = 0;
  for (const auto& c : r.cases) {
    if (!c.shrunk) continue;
    ++checked;
    INFO(print(rs.sig, c.term) << " shrunk to " << print(rs.sig, *c.shrunk));
    CHECK(c.shrunk->size() <= c.term.size());
    CHECK(compare_evaluators(rs, *c.shrunk, o.fuel).outcome == Outcome::Mismatch);
    CHECK(mentions_op(*c.shrunk, "f"));
  }
  CHECK(checked == std::min<std::size_t>(5, r.mismatches));
  CHECK(to_json(r, rs)["verdict"] == "expected-mismatch");
}

TEST_CASE("require_op keeps only terms with that operator", "[fuzz][nondet]") {
  const auto& rs = lang("xcl_nondet").ruleset;
  FuzzOptions o;
  o.seed = 3;
  o.size = 8;
  o.count = 100;
  o.fuel = 300;
  o.require_op = "or";
  auto r = run_fuzz(rs, o);
  for (const auto& c : r.cases) CHECK(mentions_op(c.term, "or"));
  CHECK(r.mismatches == 0);
}

TEST_CASE("no mismatches on the strongly separated languages", "[fuzz]") {
  for (const auto& id : language_ids()) {
    const auto& rs = lang(id).ruleset;
    if (!check_strong_separation(rs).pass) continue;
    FuzzOptions o;
    o.seed = 77;
    o.size = 10;
    o.count = 150;
    o.fuel = 500;
    auto r = run_fuzz(rs, o);
    INFO(to_text(r, rs));
    CHECK(r.mismatches == 0);
    CHECK(r.matches > 0);
  }
}
