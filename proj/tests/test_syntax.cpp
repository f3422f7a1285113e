#include <random>

#include <catch_amalgamated.hpp>

#include "oracles/lambda_oracles.hpp"
#include "support.hpp"

using namespace sosforge;
using testsupport::lang;

namespace {

// Open λ-terms of exactly `size` nodes whose free indices stay below depth + free.
oracle::LamPtr random_lambda(std::mt19937_64& rng, std::size_t size, std::uint32_t depth, std::uint32_t free) {
  auto pick = [&](std::size_t n) { return std::uniform_int_distribution<std::size_t>(0, n - 1)(rng); };
  std::uint32_t scope = depth + free;
  if (size <= 1 || (size == 2 && scope > 0 && pick(2) == 0)) {
    if (scope == 0) return oracle::labs(oracle::lvar(0));
    return oracle::lvar(static_cast<std::uint32_t>(pick(scope)));
  }
  if (size == 2 || pick(2) == 0) return oracle::labs(random_lambda(rng, size - 1, depth + 1, free));
  std::size_t left = 1 + pick(size - 2);
  return oracle::lapp(random_lambda(rng, left, depth, free), random_lambda(rng, size - 1 - left, depth, free));
}

}  // namespace

TEST_CASE("print then parse is the identity on generated terms", "[syntax][property]") {
  for (const auto& id : language_ids()) {
    const auto& rs = lang(id).ruleset;
    TermGenerator gen(rs, 17, GenOptions{12, 0.5});
    for (int i = 0; i < 200; ++i) {
      Term t = gen.next();
      INFO(id << ": " << print(rs.sig, t));
      CHECK_NOTHROW(sort_check(rs.sig, t));
      CHECK(parse_term(rs.sig, print(rs.sig, t)) == t);
    }
  }
}

TEST_CASE("concrete syntax forms", "[syntax]") {
  const auto& nd = lang("xcl_nondet").ruleset;
  CHECK(parse_term(nd.sig, "I + K") == parse_term(nd.sig, "I ⊕ K"));
  CHECK(parse_term(nd.sig, "I || K") == parse_term(nd.sig, "par(I, K)"));
  CHECK(print(nd.sig, parse_term(nd.sig, "or(I, par(K, S))")) == "I ⊕ K ∥ S");
  const auto& cl = lang("xcl_cbn").ruleset;
  CHECK(parse_term(cl.sig, "S K K I") == parse_term(cl.sig, "app(app(app(S, K), K), I)"));
  CHECK(print(cl.sig, parse_term(cl.sig, "S (K I)")) == "S (K I)");
  const auto& lam = lang("lambda_cbn").ruleset;
  CHECK(parse_term(lam.sig, "\\.0 0") == parse_term(lam.sig, "λ.0 0"));
  CHECK(print(lam.sig, parse_term(lam.sig, "(λ.0) (λ.λ.1)")) == "(λ.0) (λ.λ.1)");
  const auto& fg = lang("counterex_fg").ruleset;
  CHECK(parse_term(fg.sig, "f(Omega)") == parse_term(fg.sig, "f(Ω)"));
  const auto& tc = lang("xtcl").ruleset;
  CHECK(sort_check(tc.sig, parse_term(tc.sig, "I[bool -> bool] I[bool]")) == parse_sort("bool -> bool"));
}

TEST_CASE("syntax and sort errors", "[syntax]") {
  const auto& cl = lang("xcl_cbn").ruleset;
  CHECK_THROWS_AS(parse_term(cl.sig, "S (K"), SyntaxError);
  CHECK_THROWS_AS(parse_term(cl.sig, "S K )"), SyntaxError);
  const auto& fg = lang("counterex_fg").ruleset;
  auto code_of = [](auto&& fn) {
    try {
      fn();
    } catch (const SortError& e) {
      return static_cast<int>(e.code());
    } catch (const SyntaxError&) {
      return -1;
    }
    return -2;
  };
  Term omega = parse_term(fg.sig, "Ω");
  CHECK(code_of([&] { parse_term(fg.sig, "f(Ω, Ω)"); }) == -1);
  CHECK(code_of([&] { sort_check(fg.sig, Term::node("f", OpClass::Computation, {omega, omega})); }) ==
        static_cast<int>(SortError::Code::ArityMismatch));
  CHECK(code_of([&] { sort_check(fg.sig, Term::node("h", OpClass::Value, {omega})); }) ==
        static_cast<int>(SortError::Code::UnknownOperator));
  const auto& tc = lang("xtcl").ruleset;
  CHECK(code_of([&] { sort_check(tc.sig, parse_term(tc.sig, "I[bool] K[bool, bool]")); }) ==
        static_cast<int>(SortError::Code::SortMismatch));
  const auto& lam = lang("lambda_cbn").ruleset;
  CHECK(code_of([&] { sort_check(lam.sig, parse_term(lam.sig, "λ.1")); }) ==
        static_cast<int>(SortError::Code::UnboundVariable));
  CHECK_THROWS_AS(parse_signature("sort tm\nvalue a : tm\nvalue a : tm\n"), SignatureError);
  CHECK_THROWS_AS(parse_signature("sort tm\ncomp f(strict tm) : tm\n"), SignatureError);
  CHECK_THROWS(parse_sort("bool ->"));
}

TEST_CASE("de Bruijn substitution agrees with named capture-avoiding substitution", "[syntax][oracle]") {
  const auto& sig = lang("lambda_cbn").ruleset.sig;
  std::mt19937_64 rng(2024);
  const std::vector<std::string> result_ctx = {"g0", "g1", "g2"};
  // t lives in the context x, g0 (index 0 is the substituted variable).
  const std::vector<std::string> t_ctx = {"x", "g0"};
  int with_binders = 0;
  for (int i = 0; i < 1000; ++i) {
    std::size_t n = 1 + rng() % 12;
    auto t = random_lambda(rng, n, 0, 2);
    auto s = random_lambda(rng, 1 + rng() % 6, 0, 3);
    Term got = subst(sig, oracle::to_term(sig, t), 0, oracle::to_term(sig, s));
    auto named_t = oracle::to_named(t, t_ctx);
    auto named_s = oracle::to_named(s, result_ctx);
    auto named = oracle::named_subst(named_t, "x", named_s);
    auto want = oracle::to_debruijn(named, result_ctx);
    INFO("t = " << oracle::show(t) << ", s = " << oracle::show(s));
    REQUIRE(oracle::same(oracle::lam_from_term(got), want));
    with_binders += oracle::show(t).find("\\.") != std::string::npos;
  }
  CHECK(with_binders > 100);
}

TEST_CASE("shift and substitution laws", "[syntax][property]") {
  const auto& sig = lang("lambda_cbn").ruleset.sig;
  std::mt19937_64 rng(99);
  for (int i = 0; i < 500; ++i) {
    Term t = oracle::to_term(sig, random_lambda(rng, 1 + rng() % 12, 0, 3));
    Term s = oracle::to_term(sig, random_lambda(rng, 1 + rng() % 5, 0, 3));
    CHECK(shift(shift(t, 1), -1) == t);
    CHECK(subst(sig, shift(t, 1), 0, s) == t);
    CHECK(shift(t, 2, 0).free_bound() == (t.closed() ? 0u : t.free_bound() + 2));
  }
  Term closed = parse_term(sig, "λ.0 (λ.1)");
  CHECK(closed.closed());
  CHECK(shift(closed, 5) == closed);
  CHECK_THROWS_AS(subst(lang("xcl_cbn").ruleset.sig, parse_term(lang("xcl_cbn").ruleset.sig, "I"), 0,
                        parse_term(lang("xcl_cbn").ruleset.sig, "K")),
                  DisciplineDisabled);
}

TEST_CASE("instantiation is compositional", "[syntax][property]") {
  const auto& rs = lang("xcl_cbn").ruleset;
  const auto& sig = rs.sig;
  Template tpl = parse_template(sig, "x (y x) S");
  Template sx = parse_template(sig, "K z");
  Template sy = parse_template(sig, "z z");
  TermGenerator gen(rs, 3, GenOptions{8, 0.5});
  for (int i = 0; i < 200; ++i) {
    Term z = gen.next();
    MetaEnv inner;
    inner.bind("z", z);
    MetaEnv outer;
    outer.bind("x", instantiate(sx, inner));
    outer.bind("y", instantiate(sy, inner));
    Template composed = substitute(tpl, TemplateEnv{{"x", sx}, {"y", sy}});
    CHECK(instantiate(sig, composed, inner) == instantiate(sig, tpl, outer));
    CHECK(instantiate(to_template(z), MetaEnv{}) == z);
  }
  MetaEnv empty;
  CHECK_THROWS_AS(instantiate(tpl, empty), MissingBinding);
  CHECK(alpha_equal({parse_template(sig, "a (b a)")}, {parse_template(sig, "p (q p)")}));
  CHECK_FALSE(alpha_equal({parse_template(sig, "a (b a)")}, {parse_template(sig, "p (p q)")}));
}
