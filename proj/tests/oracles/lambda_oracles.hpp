#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "sosforge/syntax.hpp"

namespace oracle {

/// Plain λ-terms with de Bruijn indices, independent of the library's Term.
struct Lam;
using LamPtr = std::shared_ptr<const Lam>;
struct Lam {
  enum class K { Var, Abs, App } k = K::Var;
  std::uint32_t index = 0;
  LamPtr a, b;  // Abs body in a; App function in a, argument in b
};

LamPtr lvar(std::uint32_t i);
LamPtr labs(LamPtr body);
LamPtr lapp(LamPtr f, LamPtr x);
std::string show(const LamPtr& t);
bool same(const LamPtr& x, const LamPtr& y);

/// Converts lam/app/variable terms of lambda_cbn (nap is rejected).
LamPtr lam_from_term(const sosforge::Term& t);
sosforge::Term to_term(const sosforge::SignatureSpec& sig, const LamPtr& t);

/// Krivine machine with environments; the weak head value read back as a term.
/// nullopt when the step budget or the readback size cap runs out.
std::optional<LamPtr> krivine(const LamPtr& t, std::size_t max_steps, std::size_t size_cap = 100000);

// ---------------------------------------------------------------- named terms

struct Named;
using NamedPtr = std::shared_ptr<const Named>;
struct Named {
  enum class K { Var, Abs, App } k = K::Var;
  std::string name;  // Var name or Abs binder
  NamedPtr a, b;
};

/// Names free index i after `free_names[i]`; binders take the first g- or y-name not in scope.
NamedPtr to_named(const LamPtr& t, const std::vector<std::string>& free_names);
/// Back to de Bruijn; `free_names[i]` becomes index i at top level.
LamPtr to_debruijn(const NamedPtr& t, const std::vector<std::string>& free_names);
/// Capture-avoiding t[x := s], renaming binders that would capture.
NamedPtr named_subst(const NamedPtr& t, const std::string& x, const NamedPtr& s);

}  // namespace oracle
