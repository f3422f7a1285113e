#include <algorithm>
#include <functional>

#include "sosforge/syntax.hpp"

namespace sosforge {

namespace {

inline std::size_t mix(std::size_t h, std::size_t v) {
  return h ^ (v + 0x9e3779b97f4a7c15ULL + (h << 6) + (h >> 2));
}

std::size_t sort_hash(const Sort& s) {
  std::size_t h = std::hash<std::string>{}(s.name) + (s.is_var ? 1 : 0);
  for (const auto& a : s.args) h = mix(h, sort_hash(a));
  return h;
}

}  // namespace

Term Term::var(std::uint32_t index) {
  auto n = std::make_shared<Node>();
  n->is_var = true;
  n->index = index;
  n->hash = mix(0x51ed27, index);
  n->free_bound = index + 1;
  return Term(std::move(n));
}

Term Term::node(std::string op, OpClass cls, std::vector<Term> kids, std::vector<Sort> sort_args,
                int binds) {
  auto n = std::make_shared<Node>();
  n->op = std::move(op);
  n->cls = cls;
  n->binds = static_cast<std::uint16_t>(binds);
  n->sort_args = std::move(sort_args);
  n->kids = std::move(kids);
  std::size_t h = std::hash<std::string>{}(n->op);
  for (const auto& s : n->sort_args) h = mix(h, sort_hash(s));
  std::size_t size = 1;
  std::uint32_t fb = 0;
  for (const auto& k : n->kids) {
    h = mix(h, k.hash());
    size = size + k.size() < size ? static_cast<std::size_t>(-1) : size + k.size();
    std::uint32_t kb = k.free_bound();
    kb = kb > n->binds ? kb - n->binds : 0;
    fb = std::max(fb, kb);
  }
  n->hash = h;
  n->size = size;
  n->free_bound = fb;
  return Term(std::move(n));
}

Term Term::node(const OperatorDescriptor& d, std::vector<Term> kids, std::vector<Sort> sort_args) {
  if (!d.explicit_params()) sort_args.clear();
  return node(d.name, d.cls, std::move(kids), std::move(sort_args), d.binds());
}

Term Term::with_kids(std::vector<Term> kids) const {
  return node(p_->op, p_->cls, std::move(kids), p_->sort_args, p_->binds);
}

int compare(const Term& a, const Term& b) {
  if (a.raw() == b.raw()) return 0;
  if (a.is_var() != b.is_var()) return a.is_var() ? -1 : 1;
  if (a.is_var()) return a.index() < b.index() ? -1 : (a.index() > b.index() ? 1 : 0);
  if (int c = a.op().compare(b.op()); c != 0) return c < 0 ? -1 : 1;
  const auto& sa = a.sort_args();
  const auto& sb = b.sort_args();
  if (sa.size() != sb.size()) return sa.size() < sb.size() ? -1 : 1;
  for (std::size_t i = 0; i < sa.size(); ++i)
    if (int c = compare(sa[i], sb[i]); c != 0) return c;
  const auto& ka = a.kids();
  const auto& kb = b.kids();
  if (ka.size() != kb.size()) return ka.size() < kb.size() ? -1 : 1;
  for (std::size_t i = 0; i < ka.size(); ++i)
    if (int c = compare(ka[i], kb[i]); c != 0) return c;
  return 0;
}

bool operator==(const Term& a, const Term& b) {
  if (a.raw() == b.raw()) return true;
  if (a.hash() != b.hash() || a.size() != b.size()) return false;
  return compare(a, b) == 0;
}

Sort sort_check(const SignatureSpec& sig, const Term& t, const Context& ctx) {
  using Code = SortError::Code;
  if (t.is_var()) {
    if (!sig.binding) throw SortError(Code::UnboundVariable, "variables need a binding discipline");
    if (t.index() >= ctx.size())
      throw SortError(Code::UnboundVariable, "index " + std::to_string(t.index()) + " is unbound");
    return ctx[t.index()];
  }
  const OperatorDescriptor* d = sig.find(t.op());
  if (!d) throw SortError(Code::UnknownOperator, t.op());
  if (d->cls != t.cls()) throw SortError(Code::SortMismatch, t.op() + " has the wrong class");
  if (d->arity() != t.kids().size())
    throw SortError(Code::ArityMismatch, t.op() + " expects " + std::to_string(d->arity()) +
                                             " arguments, got " + std::to_string(t.kids().size()));
  SortSubst sub;
  if (!t.sort_args().empty()) {
    if (t.sort_args().size() != d->params.size())
      throw SortError(Code::ArityMismatch, t.op() + " expects " + std::to_string(d->params.size()) +
                                               " sort arguments");
    for (std::size_t i = 0; i < d->params.size(); ++i) {
      if (has_vars(t.sort_args()[i]))
        throw SortError(Code::SortMismatch, t.op() + " has a non-ground sort argument");
      sub[d->params[i]] = t.sort_args()[i];
    }
  } else if (d->explicit_params()) {
    throw SortError(Code::SortMismatch, t.op() + " needs explicit sort arguments");
  }
  for (std::size_t i = 0; i < d->arity(); ++i) {
    Context inner;
    const Context* use = &ctx;
    if (d->args[i].binds > 0) {
      inner.assign(static_cast<std::size_t>(d->args[i].binds), *sig.binding);
      inner.insert(inner.end(), ctx.begin(), ctx.end());
      use = &inner;
    }
    Sort got = sort_check(sig, t.kid(i), *use);
    if (!match_sort(d->args[i].sort, got, sub))
      throw SortError(Code::SortMismatch, "argument " + std::to_string(i + 1) + " of " + t.op() +
                                              " has sort " + to_string(got) + ", expected " +
                                              to_string(apply_sort(sub, d->args[i].sort)));
  }
  Sort r = apply_sort(sub, d->result);
  if (has_vars(r)) throw SortError(Code::SortMismatch, "cannot infer the sort of " + t.op());
  return r;
}

Term shift(const Term& t, int by, std::uint32_t cutoff) {
  if (by == 0 || t.free_bound() <= cutoff) return t;
  if (t.is_var())
    return t.index() >= cutoff ? Term::var(static_cast<std::uint32_t>(t.index() + by)) : t;
  std::vector<Term> kids;
  kids.reserve(t.kids().size());
  for (const auto& k : t.kids()) kids.push_back(shift(k, by, cutoff + t.binds()));
  return t.with_kids(std::move(kids));
}

namespace {

Term subst_go(const Term& t, std::uint32_t j, std::uint32_t d, const Term& s) {
  if (t.free_bound() <= j + d) return t;
  if (t.is_var()) {
    if (t.index() == j + d) return shift(s, static_cast<int>(d));
    if (t.index() > j + d) return Term::var(t.index() - 1);
    return t;
  }
  std::vector<Term> kids;
  kids.reserve(t.kids().size());
  for (const auto& k : t.kids())
    kids.push_back(subst_go(k, j, d + static_cast<std::uint32_t>(t.binds()), s));
  return t.with_kids(std::move(kids));
}

}  // namespace

Term subst_unchecked(const Term& t, std::uint32_t depth, const Term& s) {
  return subst_go(t, depth, 0, s);
}

Term subst(const SignatureSpec& sig, const Term& t, std::uint32_t depth, const Term& s) {
  if (!sig.has_binding()) throw DisciplineDisabled();
  return subst_unchecked(t, depth, s);
}

}  // namespace sosforge
