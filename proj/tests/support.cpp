#include "support.hpp"

#include <cctype>
#include <fstream>
#include <mutex>
#include <set>

namespace testsupport {

using namespace sosforge;

const LanguageBundle& lang(const std::string& id) {
  static std::mutex mu;
  static std::map<std::string, LanguageBundle> cache;
  std::lock_guard<std::mutex> lock(mu);
  auto it = cache.find(id);
  if (it == cache.end()) it = cache.emplace(id, load_language(id)).first;
  return it->second;
}

std::string golden_path(const std::string& name) { return std::string(SOSFORGE_GOLDEN_DIR) + "/" + name; }

std::vector<std::string> golden_lines(const std::string& name) {
  std::ifstream in(golden_path(name));
  if (!in) throw std::runtime_error("missing golden file " + golden_path(name));
  std::vector<std::string> out;
  std::string l;
  while (std::getline(in, l)) {
    auto p = l.find_first_not_of(" \t");
    if (p == std::string::npos || l[p] == '#') continue;
    out.push_back(l);
  }
  return out;
}

bool has_asterisk(const std::string& line) { return line.find("(*)") != std::string::npos; }

std::string canonical_rule(const SignatureSpec& sig, const std::string& line) {
  std::string s = line;
  if (auto p = s.find("(*)"); p != std::string::npos) s.erase(p, 3);
  std::map<std::string, std::string> names;
  std::string out;
  for (std::size_t i = 0; i < s.size();) {
    unsigned char c = s[i];
    if (std::isspace(c)) {
      ++i;
      continue;
    }
    if (std::isalpha(c)) {
      std::size_t j = i;
      while (j < s.size() && (std::isalnum(static_cast<unsigned char>(s[j])) || s[j] == '\'' || s[j] == '_')) ++j;
      std::string id = s.substr(i, j - i);
      if (sig.find(id)) {
        out += id;
      } else {
        auto it = names.find(id);
        if (it == names.end()) it = names.emplace(id, "m" + std::to_string(names.size())).first;
        out += it->second;
      }
      out += ' ';
      i = j;
      continue;
    }
    out += static_cast<char>(c);
    ++i;
  }
  return out;
}

Term omega_k(const RuleSet& rs, int k) {
  std::string half = "S I I";
  for (int i = 0; i < k; ++i) half = "I (" + half + ")";
  return parse_term(rs.sig, "(" + half + ") (" + half + ")");
}

EvalResult small(const RuleSet& rs, const Term& t, std::size_t fuel) {
  EvalOptions o;
  o.det_errors = false;
  return multi_step(rs, t, fuel, o);
}

EvalResult big(const RuleSet& rs, const Term& t, std::size_t fuel) {
  EvalOptions o;
  o.det_errors = false;
  return big_step(rs, t, fuel, o);
}

std::vector<Term> converging_computations(const RuleSet& rs, std::size_t n, std::size_t size, std::size_t fuel,
                                          std::uint64_t seed) {
  TermGenerator gen(rs, seed, GenOptions{size, 0.5});
  std::vector<Term> out;
  for (std::size_t tries = 0; out.size() < n && tries < 50 * n; ++tries) {
    Term t = gen.next();
    if (!t.is_computation()) continue;
    auto r = small(rs, t, fuel);
    if (r.status == EvalStatus::Converged) out.push_back(t);
  }
  return out;
}

std::string show(const RuleSet& rs, const std::vector<Term>& ts) {
  std::string s = "{";
  for (std::size_t i = 0; i < ts.size(); ++i) s += (i ? ", " : "") + print(rs.sig, ts[i], 120);
  return s + "}";
}

std::string check_chain_monotone(const RuleSet& rs, const Term& t, std::size_t max_fuel) {
  EvalResult ps, pb;
  for (std::size_t f = 1; f <= max_fuel; f *= 2) {
    auto s = small(rs, t, f);
    auto b = big(rs, t, f);
    if (f > 1) {
      if (!leq(ps.found, s.found))
        return "small-step chain drops " + show(rs, ps.found.items()) + " at fuel " + std::to_string(f);
      if (!leq(pb.found, b.found))
        return "big-step chain drops " + show(rs, pb.found.items()) + " at fuel " + std::to_string(f);
    }
    ps = std::move(s);
    pb = std::move(b);
  }
  return "";
}

std::string check_post_fixpoint(const RuleSet& rs, const Term& c, std::size_t fuel) {
  if (!c.is_computation()) return "skip";
  auto whole = big(rs, c, fuel);
  if (whole.status != EvalStatus::Converged) return "skip";
  const auto& d = rs.sig.at(c.op());
  auto strict = d.strict_positions();
  EffectKind kind = eval_kind(rs);
  std::vector<Effect<Term>> args;
  for (auto i : strict) {
    auto r = big(rs, c.kid(i), fuel);
    if (r.status != EvalStatus::Converged) return "strict argument did not converge within the same fuel";
    args.push_back(r.found);
  }
  auto table = xi_table(rs);
  std::set<Term> acc;
  auto tuples = dist_chi(kind, args);
  for (const auto& tuple : tuples.items()) {
    std::vector<Term> kids = c.kids();
    for (std::size_t k = 0; k < strict.size(); ++k) kids[strict[k]] = tuple[k];
    auto bodies = table->apply(rs, c.with_kids(std::move(kids)));
    for (const auto& b : bodies.items()) {
      auto r = big(rs, b, fuel);
      if (r.status != EvalStatus::Converged) return "continuation did not converge within the same fuel";
      acc.insert(r.found.items().begin(), r.found.items().end());
    }
  }
  std::vector<Term> rhs(acc.begin(), acc.end());
  if (rhs != whole.found.items())
    return "ζ̂(c) = " + show(rs, whole.found.items()) + " but one unfolding gives " + show(rs, rhs);
  return "";
}

}  // namespace testsupport
