#include "sosforge/languages.hpp"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "text_util.hpp"

namespace sosforge {

namespace embedded {
const std::map<std::string, std::string>& language_sources();
const std::map<std::string, std::string>& corpus_sources();
}  // namespace embedded

namespace {

std::vector<std::string> split_on(const std::string& s, const std::string& sep) {
  std::vector<std::string> out;
  std::size_t start = 0;
  for (std::size_t p = s.find(sep); p != std::string::npos; p = s.find(sep, start)) {
    out.push_back(trim(s.substr(start, p - start)));
    start = p + sep.size();
  }
  out.push_back(trim(s.substr(start)));
  return out;
}

std::string first_comment(const std::string& text) {
  std::istringstream in(text);
  std::string l;
  while (std::getline(in, l)) {
    std::string t = trim(l);
    if (t.rfind('#', 0) == 0) return trim(t.substr(1));
    if (!t.empty()) break;
  }
  return "";
}

std::vector<Term> parse_all(const RuleSet& rs, const std::vector<std::string>& texts) {
  std::vector<Term> out;
  for (const auto& t : texts) out.push_back(parse_term(rs.sig, t));
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

std::string show(const RuleSet& rs, const std::vector<Term>& ts) {
  std::string s = "{";
  for (std::size_t i = 0; i < ts.size(); ++i) s += (i ? ", " : "") + print(rs.sig, ts[i], 200);
  return s + "}";
}

}  // namespace

const std::vector<std::string>& language_ids() {
  static const std::vector<std::string> ids = {
      "xcl_cbn",         "xtcl",           "pcf",        "xcl_nondet",  "xcl_cbv_direct",
      "xcl_cbv_patched", "xcl_cbv_pretty", "lambda_cbn", "counterex_fg"};
  return ids;
}

const std::string& language_source(const std::string& id) {
  const auto& m = embedded::language_sources();
  auto it = m.find(id);
  if (it == m.end()) throw UnknownLanguage(id);
  return it->second;
}

LanguageBundle load_language(const std::string& id_or_path) {
  LanguageBundle b;
  const auto& m = embedded::language_sources();
  std::string text;
  if (auto it = m.find(id_or_path); it != m.end()) {
    text = it->second;
    b.corpus = corpus(id_or_path);
  } else if (std::filesystem::is_regular_file(id_or_path)) {
    std::ifstream in(id_or_path);
    std::stringstream ss;
    ss << in.rdbuf();
    text = ss.str();
  } else {
    throw UnknownLanguage(id_or_path);
  }
  b.ruleset = parse_ruleset(text);
  if (b.ruleset.id.empty()) b.ruleset.id = std::filesystem::path(id_or_path).stem().string();
  b.id = b.ruleset.id;
  b.notes = first_comment(text);
  return b;
}

std::vector<CorpusCase> parse_corpus(std::string_view text) {
  std::vector<CorpusCase> out;
  std::istringstream in{std::string(text)};
  std::string raw;
  std::size_t line = 0;
  while (std::getline(in, raw)) {
    ++line;
    std::string l = trim(raw);
    if (l.empty() || l[0] == '#') continue;
    auto parts = split_on(l, ";;");
    if (parts.size() < 2) throw SyntaxError("corpus case needs 'term ;; expectation'", 0, line);
    CorpusCase c;
    c.term = parts[0];
    c.line = line;
    c.source = parts.size() > 2 ? parts[2] : "";
    std::string e = parts[1];
    c.expect = first_word(e);
    std::string rest = trim(e.substr(c.expect.size()));
    if (c.expect == "value" || c.expect == "values" || c.expect == "step") {
      c.small = split_on(rest, " | ");
      c.big = c.small;
    } else if (c.expect == "mismatch") {
      auto sb = split_on(rest, " / ");
      if (sb.size() != 2) throw SyntaxError("mismatch needs 'small / big'", 0, line);
      c.small = split_on(sb[0], " | ");
      c.big = split_on(sb[1], " | ");
    } else if (c.expect != "diverges") {
      throw SyntaxError("unknown corpus expectation '" + c.expect + "'", 0, line);
    }
    out.push_back(std::move(c));
  }
  return out;
}

std::vector<CorpusCase> corpus(const std::string& id) {
  const auto& m = embedded::corpus_sources();
  auto it = m.find(id);
  return it == m.end() ? std::vector<CorpusCase>{} : parse_corpus(it->second);
}

CaseOutcome run_case(const RuleSet& rs, const CorpusCase& c, std::size_t fuel) {
  CaseOutcome o;
  Term t = parse_term(rs.sig, c.term);
  sort_check(rs.sig, t);
  if (c.expect == "step") {
    auto want = parse_all(rs, c.small);
    std::vector<Term> got;
    if (t.is_computation())
      for (const auto& s : labeled_successors(rs, t)) got.push_back(s.term);
    std::sort(got.begin(), got.end());
    got.erase(std::unique(got.begin(), got.end()), got.end());
    o.pass = got == want;
    o.detail = "step " + show(rs, got);
    return o;
  }
  EvalOptions opt;
  opt.det_errors = false;
  EvalResult sm, bg;
  run_with_big_stack([&] {
    sm = multi_step(rs, t, fuel, opt);
    bg = big_step(rs, t, fuel, opt);
  });
  const auto& fs = sm.found.items();
  const auto& fb = bg.found.items();
  o.detail = std::string("small ") + show(rs, fs) + " (" + to_string(sm.status) + "), big " + show(rs, fb) +
             " (" + to_string(bg.status) + ")";
  if (c.expect == "diverges") {
    o.pass = fs.empty() && fb.empty() && !sm.converged && !bg.converged;
  } else {
    o.pass = fs == parse_all(rs, c.small) && fb == parse_all(rs, c.big);
  }
  return o;
}

}  // namespace sosforge
