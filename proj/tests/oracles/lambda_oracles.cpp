#include "lambda_oracles.hpp"

#include <algorithm>
#include <set>
#include <stdexcept>

namespace oracle {

LamPtr lvar(std::uint32_t i) {
  auto t = std::make_shared<Lam>();
  t->k = Lam::K::Var;
  t->index = i;
  return t;
}

LamPtr labs(LamPtr body) {
  auto t = std::make_shared<Lam>();
  t->k = Lam::K::Abs;
  t->a = std::move(body);
  return t;
}

LamPtr lapp(LamPtr f, LamPtr x) {
  auto t = std::make_shared<Lam>();
  t->k = Lam::K::App;
  t->a = std::move(f);
  t->b = std::move(x);
  return t;
}

std::string show(const LamPtr& t) {
  switch (t->k) {
    case Lam::K::Var: return std::to_string(t->index);
    case Lam::K::Abs: return "(\\." + show(t->a) + ")";
    case Lam::K::App: return "(" + show(t->a) + " " + show(t->b) + ")";
  }
  return "?";
}

bool same(const LamPtr& x, const LamPtr& y) {
  if (x == y) return true;
  if (x->k != y->k) return false;
  switch (x->k) {
    case Lam::K::Var: return x->index == y->index;
    case Lam::K::Abs: return same(x->a, y->a);
    case Lam::K::App: return same(x->a, y->a) && same(x->b, y->b);
  }
  return false;
}

LamPtr lam_from_term(const sosforge::Term& t) {
  if (t.is_var()) return lvar(t.index());
  if (t.op() == "lam") return labs(lam_from_term(t.kid(0)));
  if (t.op() == "app") return lapp(lam_from_term(t.kid(0)), lam_from_term(t.kid(1)));
  throw std::invalid_argument("λ oracle: unsupported operator " + t.op());
}

sosforge::Term to_term(const sosforge::SignatureSpec& sig, const LamPtr& t) {
  using sosforge::Term;
  switch (t->k) {
    case Lam::K::Var: return Term::var(t->index);
    case Lam::K::Abs: return Term::node(sig.at("lam"), {to_term(sig, t->a)});
    case Lam::K::App: return Term::node(sig.at("app"), {to_term(sig, t->a), to_term(sig, t->b)});
  }
  throw std::logic_error("bad λ term");
}

// ---------------------------------------------------------------- Krivine machine

namespace {

struct Closure;
using Env = std::shared_ptr<const struct EnvCell>;
struct Closure {
  LamPtr term;
  Env env;
};
struct EnvCell {
  Closure head;
  Env tail;
};

const Closure& lookup(Env e, std::uint32_t i) {
  while (i-- > 0) {
    if (!e) throw std::out_of_range("λ oracle: free variable in a closed term");
    e = e->tail;
  }
  if (!e) throw std::out_of_range("λ oracle: free variable in a closed term");
  return e->head;
}

struct Readback {
  std::size_t budget;
  bool overflow = false;

  // Closed environments: the entries below `depth` are the readback's own binders.
  LamPtr go(const LamPtr& t, const Env& env, std::uint32_t depth) {
    if (overflow || budget == 0) {
      overflow = true;
      return lvar(0);
    }
    --budget;
    switch (t->k) {
      case Lam::K::Var:
        if (t->index < depth) return t;
        {
          const Closure& c = lookup(env, t->index - depth);
          return go(c.term, c.env, 0);
        }
      case Lam::K::Abs: return labs(go(t->a, env, depth + 1));
      case Lam::K::App: return lapp(go(t->a, env, depth), go(t->b, env, depth));
    }
    return t;
  }
};

}  // namespace

std::optional<LamPtr> krivine(const LamPtr& t0, std::size_t max_steps, std::size_t size_cap) {
  LamPtr t = t0;
  Env env;
  std::vector<Closure> stack;
  for (std::size_t n = 0; n < max_steps; ++n) {
    switch (t->k) {
      case Lam::K::Var: {
        Closure c = lookup(env, t->index);
        t = c.term;
        env = c.env;
        break;
      }
      case Lam::K::App:
        stack.push_back(Closure{t->b, env});
        t = t->a;
        break;
      case Lam::K::Abs:
        if (stack.empty()) {
          Readback rb{size_cap};
          LamPtr out = rb.go(t, env, 0);
          if (rb.overflow) return std::nullopt;
          return out;
        }
        env = std::make_shared<EnvCell>(EnvCell{stack.back(), env});
        stack.pop_back();
        t = t->a;
        break;
    }
  }
  return std::nullopt;
}

// ---------------------------------------------------------------- named terms

namespace {

NamedPtr nvar(std::string n) {
  auto t = std::make_shared<Named>();
  t->k = Named::K::Var;
  t->name = std::move(n);
  return t;
}

NamedPtr nabs(std::string n, NamedPtr body) {
  auto t = std::make_shared<Named>();
  t->k = Named::K::Abs;
  t->name = std::move(n);
  t->a = std::move(body);
  return t;
}

NamedPtr napp(NamedPtr f, NamedPtr x) {
  auto t = std::make_shared<Named>();
  t->k = Named::K::App;
  t->a = std::move(f);
  t->b = std::move(x);
  return t;
}

void free_vars(const NamedPtr& t, std::set<std::string>& bound, std::set<std::string>& out) {
  switch (t->k) {
    case Named::K::Var:
      if (!bound.count(t->name)) out.insert(t->name);
      break;
    case Named::K::Abs: {
      bool fresh = bound.insert(t->name).second;
      free_vars(t->a, bound, out);
      if (fresh) bound.erase(t->name);
      break;
    }
    case Named::K::App:
      free_vars(t->a, bound, out);
      free_vars(t->b, bound, out);
      break;
  }
}

std::set<std::string> fv(const NamedPtr& t) {
  std::set<std::string> b, out;
  free_vars(t, b, out);
  return out;
}

void all_names(const NamedPtr& t, std::set<std::string>& out) {
  out.insert(t->name);
  if (t->a) all_names(t->a, out);
  if (t->b) all_names(t->b, out);
}

std::string binder_name(const std::vector<std::string>& scope) {
  // g-names first: they collide with the free names of substituted terms and force renaming.
  for (int i = 0;; ++i) {
    std::string n = i < 4 ? "g" + std::to_string(i) : "y" + std::to_string(i - 4);
    if (std::find(scope.begin(), scope.end(), n) == scope.end()) return n;
  }
}

NamedPtr to_named_rec(const LamPtr& t, std::vector<std::string>& scope) {
  switch (t->k) {
    case Lam::K::Var:
      if (t->index >= scope.size()) throw std::out_of_range("λ oracle: index without a name");
      return nvar(scope[scope.size() - 1 - t->index]);
    case Lam::K::Abs: {
      std::string n = binder_name(scope);
      scope.push_back(n);
      NamedPtr body = to_named_rec(t->a, scope);
      scope.pop_back();
      return nabs(n, body);
    }
    case Lam::K::App: {
      NamedPtr f = to_named_rec(t->a, scope);
      return napp(f, to_named_rec(t->b, scope));
    }
  }
  throw std::logic_error("bad λ term");
}

LamPtr to_db_rec(const NamedPtr& t, std::vector<std::string>& scope) {
  switch (t->k) {
    case Named::K::Var: {
      for (std::size_t i = scope.size(); i-- > 0;)
        if (scope[i] == t->name) return lvar(static_cast<std::uint32_t>(scope.size() - 1 - i));
      throw std::out_of_range("λ oracle: unbound name " + t->name);
    }
    case Named::K::Abs: {
      scope.push_back(t->name);
      LamPtr body = to_db_rec(t->a, scope);
      scope.pop_back();
      return labs(body);
    }
    case Named::K::App: {
      LamPtr f = to_db_rec(t->a, scope);
      return lapp(f, to_db_rec(t->b, scope));
    }
  }
  throw std::logic_error("bad named term");
}

}  // namespace

NamedPtr to_named(const LamPtr& t, const std::vector<std::string>& free_names) {
  std::vector<std::string> scope(free_names.rbegin(), free_names.rend());
  return to_named_rec(t, scope);
}

LamPtr to_debruijn(const NamedPtr& t, const std::vector<std::string>& free_names) {
  std::vector<std::string> scope(free_names.rbegin(), free_names.rend());
  return to_db_rec(t, scope);
}

NamedPtr named_subst(const NamedPtr& t, const std::string& x, const NamedPtr& s) {
  switch (t->k) {
    case Named::K::Var: return t->name == x ? s : t;
    case Named::K::App: return napp(named_subst(t->a, x, s), named_subst(t->b, x, s));
    case Named::K::Abs: {
      if (t->name == x) return t;
      auto fs = fv(s);
      if (!fs.count(t->name)) return nabs(t->name, named_subst(t->a, x, s));
      std::set<std::string> used = fs;
      all_names(t, used);
      used.insert(x);
      std::string z = t->name;
      for (int i = 0; used.count(z); ++i) z = t->name + "_" + std::to_string(i);
      NamedPtr body = named_subst(t->a, t->name, nvar(z));
      return nabs(z, named_subst(body, x, s));
    }
  }
  throw std::logic_error("bad named term");
}

}  // namespace oracle
