#include "xcl_bfs.hpp"

#include <map>
#include <stdexcept>

namespace oracle {

ClPtr mk(std::string op, std::vector<ClPtr> kids) {
  auto c = std::make_shared<Cl>();
  c->op = std::move(op);
  c->key = c->op;
  if (!kids.empty()) {
    c->key += "(";
    for (std::size_t i = 0; i < kids.size(); ++i) {
      c->key += (i ? "," : "") + kids[i]->key;
      c->size += kids[i]->size;
    }
    c->key += ")";
  }
  c->kids = std::move(kids);
  return c;
}

bool is_value(const ClPtr& t) { return t->op != "app" && t->op != "or" && t->op != "par"; }

ClPtr cl_from_term(const sosforge::Term& t) {
  static const std::map<std::string, std::string> names = {
      {"I", "I"}, {"K", "K"}, {"S", "S"}, {"K'", "K'"}, {"S'", "S'"}, {"S''", "S''"},
      {"par_v", "pv"}, {"app", "app"}, {"or", "or"}, {"par", "par"}};
  if (t.is_var()) throw std::invalid_argument("xCL oracle: variables are not supported");
  auto it = names.find(t.op());
  if (it == names.end()) throw std::invalid_argument("xCL oracle: unknown operator " + t.op());
  std::vector<ClPtr> kids;
  for (const auto& k : t.kids()) kids.push_back(cl_from_term(k));
  return mk(it->second, std::move(kids));
}

std::string key_of(const sosforge::Term& v) { return cl_from_term(v)->key; }

namespace {

ClPtr apply(const ClPtr& f, const ClPtr& a) {
  const std::string& h = f->op;
  if (h == "I") return a;
  if (h == "K") return mk("K'", {a});
  if (h == "S") return mk("S'", {a});
  if (h == "K'") return f->kids[0];
  if (h == "S'") return mk("S''", {f->kids[0], a});
  if (h == "S''") return mk("app", {mk("app", {f->kids[0], a}), mk("app", {f->kids[1], a})});
  if (h == "pv") return mk("par", {mk("app", {f->kids[0], a}), mk("app", {f->kids[1], a})});
  throw std::logic_error("xCL oracle: cannot apply " + h);
}

}  // namespace

std::vector<ClPtr> successors(const ClPtr& t) {
  std::vector<ClPtr> out;
  if (t->op == "app") {
    const ClPtr& f = t->kids[0];
    if (is_value(f)) return {apply(f, t->kids[1])};
    for (const auto& f2 : successors(f)) out.push_back(mk("app", {f2, t->kids[1]}));
  } else if (t->op == "or") {
    out = {t->kids[0], t->kids[1]};
  } else if (t->op == "par") {
    const ClPtr& l = t->kids[0];
    const ClPtr& r = t->kids[1];
    bool lv = is_value(l), rv = is_value(r);
    if (lv && rv) return {mk("pv", {l, r})};
    std::vector<ClPtr> ls = lv ? std::vector<ClPtr>{l} : successors(l);
    std::vector<ClPtr> rs = rv ? std::vector<ClPtr>{r} : successors(r);
    for (const auto& a : ls)
      for (const auto& b : rs) out.push_back(mk("par", {a, b}));
  }
  return out;
}

BfsResult bfs(const ClPtr& t, std::size_t rounds, std::size_t size_cap) {
  BfsResult r;
  std::map<std::string, ClPtr> frontier;
  if (is_value(t))
    r.values.insert(t->key);
  else
    frontier.emplace(t->key, t);
  while (!frontier.empty() && r.rounds < rounds) {
    ++r.rounds;
    std::map<std::string, ClPtr> next;
    for (const auto& [k, c] : frontier) {
      for (const auto& s : successors(c)) {
        if (s->size > size_cap) {
          r.gave_up = true;
          return r;
        }
        if (is_value(s))
          r.values.insert(s->key);
        else
          next.emplace(s->key, s);
      }
    }
    frontier = std::move(next);
  }
  r.converged = frontier.empty();
  return r;
}

}  // namespace oracle
