#include <algorithm>

#include "sosforge/syntax.hpp"

namespace sosforge {

Template Template::meta(std::string name, MetaTag tag) {
  Template t;
  t.kind = Kind::Meta;
  t.name = std::move(name);
  t.tag = tag;
  return t;
}

Template Template::var(std::uint32_t index) {
  Template t;
  t.kind = Kind::Var;
  t.index = index;
  return t;
}

Template Template::node(const OperatorDescriptor& d, std::vector<Template> kids,
                        std::vector<Sort> sort_args) {
  Template t;
  t.kind = Kind::Node;
  t.name = d.name;
  t.cls = d.cls;
  t.binds = d.binds();
  t.keep_sort_args = d.explicit_params();
  t.sort_args = std::move(sort_args);
  t.kids = std::move(kids);
  return t;
}

Template Template::subst(Template body, Template arg) {
  Template t;
  t.kind = Kind::Subst;
  t.kids.push_back(std::move(body));
  t.kids.push_back(std::move(arg));
  return t;
}

namespace {

int compare_tpl(const Template& a, const Template& b) {
  if (a.kind != b.kind) return a.kind < b.kind ? -1 : 1;
  if (a.kind == Template::Kind::Var) return a.index < b.index ? -1 : (a.index > b.index ? 1 : 0);
  if (int c = a.name.compare(b.name); c != 0) return c < 0 ? -1 : 1;
  std::size_t ns = a.keep_sort_args ? a.sort_args.size() : 0;
  std::size_t ms = b.keep_sort_args ? b.sort_args.size() : 0;
  if (ns != ms) return ns < ms ? -1 : 1;
  for (std::size_t i = 0; i < ns; ++i)
    if (int c = compare(a.sort_args[i], b.sort_args[i]); c != 0) return c;
  if (a.kids.size() != b.kids.size()) return a.kids.size() < b.kids.size() ? -1 : 1;
  for (std::size_t i = 0; i < a.kids.size(); ++i)
    if (int c = compare_tpl(a.kids[i], b.kids[i]); c != 0) return c;
  return 0;
}

}  // namespace

bool operator==(const Template& a, const Template& b) { return compare_tpl(a, b) == 0; }
bool operator<(const Template& a, const Template& b) { return compare_tpl(a, b) < 0; }

const Term* MetaEnv::find(std::string_view name) const {
  for (const auto& [n, t] : terms)
    if (n == name) return &t;
  return nullptr;
}

void MetaEnv::bind(const std::string& name, Term t) {
  for (auto& [n, old] : terms)
    if (n == name) {
      old = std::move(t);
      return;
    }
  terms.emplace_back(name, std::move(t));
}

Term instantiate(const Template& tpl, const MetaEnv& env) {
  switch (tpl.kind) {
    case Template::Kind::Meta: {
      const Term* t = env.find(tpl.name);
      if (!t) throw MissingBinding("no binding for metavariable " + tpl.name);
      return *t;
    }
    case Template::Kind::Var:
      return Term::var(tpl.index);
    case Template::Kind::Subst:
      return subst_unchecked(instantiate(tpl.kids[0], env), 0, instantiate(tpl.kids[1], env));
    case Template::Kind::Node: {
      std::vector<Term> kids;
      kids.reserve(tpl.kids.size());
      for (const auto& k : tpl.kids) kids.push_back(instantiate(k, env));
      std::vector<Sort> sorts;
      if (tpl.keep_sort_args) {
        for (const auto& s : tpl.sort_args) {
          Sort g = apply_sort(env.sorts, s);
          if (has_vars(g))
            throw MissingBinding("no binding for a sort variable of " + tpl.name);
          sorts.push_back(std::move(g));
        }
      }
      return Term::node(tpl.name, tpl.cls, std::move(kids), std::move(sorts), tpl.binds);
    }
  }
  throw Error("unreachable template kind");
}

Term instantiate(const SignatureSpec& sig, const Template& tpl, const MetaEnv& env) {
  Term t = instantiate(tpl, env);
  sort_check(sig, t, sig.binding ? Context(t.free_bound(), *sig.binding) : Context{});
  return t;
}

Template substitute(const Template& tpl, const TemplateEnv& env, const SortSubst& sorts) {
  switch (tpl.kind) {
    case Template::Kind::Meta: {
      auto it = env.find(tpl.name);
      return it == env.end() ? tpl : it->second;
    }
    case Template::Kind::Var:
      return tpl;
    case Template::Kind::Subst:
    case Template::Kind::Node: {
      Template out = tpl;
      for (auto& k : out.kids) k = substitute(k, env, sorts);
      if (!sorts.empty())
        for (auto& s : out.sort_args) s = apply_sort(sorts, s);
      return out;
    }
  }
  return tpl;
}

void collect_metas(const Template& tpl, std::vector<std::string>& out) {
  if (tpl.kind == Template::Kind::Meta) {
    if (std::find(out.begin(), out.end(), tpl.name) == out.end()) out.push_back(tpl.name);
    return;
  }
  for (const auto& k : tpl.kids) collect_metas(k, out);
}

bool mentions_meta(const Template& tpl, std::string_view name) {
  if (tpl.kind == Template::Kind::Meta) return tpl.name == name;
  for (const auto& k : tpl.kids)
    if (mentions_meta(k, name)) return true;
  return false;
}

Template to_template(const Term& t) {
  if (t.is_var()) return Template::var(t.index());
  Template out;
  out.kind = Template::Kind::Node;
  out.name = t.op();
  out.cls = t.cls();
  out.binds = t.binds();
  out.keep_sort_args = !t.sort_args().empty();
  out.sort_args = t.sort_args();
  for (const auto& k : t.kids()) out.kids.push_back(to_template(k));
  return out;
}

namespace {

struct Renaming {
  std::map<std::string, std::string> fwd, bwd;
  std::map<std::string, std::string> sfwd, sbwd;

  bool link(std::map<std::string, std::string>& f, std::map<std::string, std::string>& b,
            const std::string& x, const std::string& y) {
    auto i = f.find(x);
    auto j = b.find(y);
    if (i == f.end() && j == b.end()) {
      f[x] = y;
      b[y] = x;
      return true;
    }
    return i != f.end() && j != b.end() && i->second == y && j->second == x;
  }

  bool sorts(const Sort& a, const Sort& b) {
    if (a.is_var != b.is_var) return false;
    if (a.is_var) return link(sfwd, sbwd, a.name, b.name);
    if (a.name != b.name || a.args.size() != b.args.size()) return false;
    for (std::size_t i = 0; i < a.args.size(); ++i)
      if (!sorts(a.args[i], b.args[i])) return false;
    return true;
  }

  bool tpl(const Template& a, const Template& b) {
    if (a.kind != b.kind) return false;
    switch (a.kind) {
      case Template::Kind::Meta: return link(fwd, bwd, a.name, b.name);
      case Template::Kind::Var: return a.index == b.index;
      case Template::Kind::Node:
        if (a.name != b.name) return false;
        if (a.keep_sort_args && b.keep_sort_args) {
          if (a.sort_args.size() != b.sort_args.size()) return false;
          for (std::size_t i = 0; i < a.sort_args.size(); ++i)
            if (!sorts(a.sort_args[i], b.sort_args[i])) return false;
        }
        [[fallthrough]];
      case Template::Kind::Subst:
        if (a.kids.size() != b.kids.size()) return false;
        for (std::size_t i = 0; i < a.kids.size(); ++i)
          if (!tpl(a.kids[i], b.kids[i])) return false;
        return true;
    }
    return false;
  }
};

}  // namespace

bool alpha_equal(const std::vector<Template>& a, const std::vector<Template>& b) {
  if (a.size() != b.size()) return false;
  Renaming r;
  for (std::size_t i = 0; i < a.size(); ++i)
    if (!r.tpl(a[i], b[i])) return false;
  return true;
}

}  // namespace sosforge
