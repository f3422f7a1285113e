#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "sosforge/errors.hpp"

namespace sosforge {

// ---------------------------------------------------------------- sorts

/// A sort: a declared base sort, a sort variable, or an arrow.
struct Sort {
  std::string name;        // base or variable name; "->" for arrows
  std::vector<Sort> args;  // {domain, codomain} for arrows
  bool is_var = false;

  static Sort base(std::string n) { return Sort{std::move(n), {}, false}; }
  static Sort var(std::string n) { return Sort{std::move(n), {}, true}; }
  static Sort arrow(Sort a, Sort b) { return Sort{"->", {std::move(a), std::move(b)}, false}; }

  bool is_arrow() const { return !is_var && name == "->" && args.size() == 2; }
  const Sort& dom() const { return args[0]; }
  const Sort& cod() const { return args[1]; }
};

int compare(const Sort& a, const Sort& b);
inline bool operator==(const Sort& a, const Sort& b) { return compare(a, b) == 0; }
inline bool operator!=(const Sort& a, const Sort& b) { return compare(a, b) != 0; }
inline bool operator<(const Sort& a, const Sort& b) { return compare(a, b) < 0; }

std::string to_string(const Sort& s);

using SortSubst = std::map<std::string, Sort>;

Sort apply_sort(const SortSubst& sub, const Sort& s);
bool has_vars(const Sort& s);
/// One-way matching: binds variables of `pattern` so that it equals the ground `target`.
bool match_sort(const Sort& pattern, const Sort& target, SortSubst& sub);
/// Two-way unification (variables on both sides share one namespace).
bool unify_sorts(const Sort& a, const Sort& b, SortSubst& sub);

// ---------------------------------------------------------------- signatures

enum class OpClass { Value, Computation };
enum class ArgMode { Plain, Strict, Lazy };

struct ArgSpec {
  Sort sort;
  ArgMode mode = ArgMode::Plain;
  int binds = 0;
};

struct OperatorDescriptor {
  std::string name;
  OpClass cls = OpClass::Value;
  std::vector<std::string> params;  // sort parameters of a typed schema
  std::vector<ArgSpec> args;
  Sort result;

  std::size_t arity() const { return args.size(); }
  bool is_value() const { return cls == OpClass::Value; }
  /// True when some sort parameter does not occur in an argument sort, so terms
  /// must record the parameters explicitly.
  bool explicit_params() const;
  std::vector<std::size_t> strict_positions() const;
  /// Uniform binder count over the arguments (the only layout terms support).
  int binds() const { return args.empty() ? 0 : args.front().binds; }
};

struct InfixSyntax {
  std::string symbol;  // canonical (possibly non-ASCII) spelling
  std::string op;
  int prec = 1;
  std::vector<std::string> aliases;
};

/// Concrete-syntax hooks: which operators print as juxtaposition, λ, neutral spines or infix.
struct SyntaxConfig {
  std::string apply_op;
  std::string lambda_op;
  std::string neutral_op;
  std::vector<InfixSyntax> infixes;
  std::map<std::string, std::string> aliases;  // alternative spelling -> operator name

  const InfixSyntax* infix_for_op(std::string_view op) const;
};

struct SignatureSpec {
  std::vector<std::string> sorts;
  std::vector<OperatorDescriptor> ops;
  std::optional<Sort> binding;  // de Bruijn discipline; the sort of variables
  SyntaxConfig syntax;

  const OperatorDescriptor* find(std::string_view name) const;
  const OperatorDescriptor& at(std::string_view name) const;
  bool has_binding() const { return binding.has_value(); }
  std::vector<const OperatorDescriptor*> value_formers() const;
  std::vector<const OperatorDescriptor*> computation_formers() const;
  bool single_sorted() const;
  /// Checks name uniqueness, declared sorts, modes, and the presence of a value former.
  void validate() const;
};

/// Parses the declarative signature format (sort/value/comp/binding/syntax lines).
SignatureSpec parse_signature(std::string_view text);

// ---------------------------------------------------------------- terms

/// Immutable closed (or de Bruijn-open) term with structural equality.
///
/// Nodes cache a hash, a size and the bound on free variable indices, so
/// equality and substitution can skip work on shared or closed subterms.
class Term {
 public:
  struct Node {
    bool is_var = false;
    std::uint32_t index = 0;
    OpClass cls = OpClass::Value;
    std::uint16_t binds = 0;
    std::string op;
    std::vector<Sort> sort_args;
    std::vector<Term> kids;
    std::size_t hash = 0;
    std::size_t size = 1;
    std::uint32_t free_bound = 0;  // 1 + largest free index, 0 when closed
  };

  Term() = default;
  static Term var(std::uint32_t index);
  static Term node(std::string op, OpClass cls, std::vector<Term> kids,
                   std::vector<Sort> sort_args = {}, int binds = 0);
  static Term node(const OperatorDescriptor& d, std::vector<Term> kids,
                   std::vector<Sort> sort_args = {});

  bool valid() const { return p_ != nullptr; }
  bool is_var() const { return p_->is_var; }
  bool is_node() const { return !p_->is_var; }
  /// Variables count as values (neutral terms with an empty spine).
  bool is_value() const { return p_->is_var || p_->cls == OpClass::Value; }
  bool is_computation() const { return !is_value(); }
  std::uint32_t index() const { return p_->index; }
  const std::string& op() const { return p_->op; }
  OpClass cls() const { return p_->cls; }
  int binds() const { return p_->binds; }
  const std::vector<Sort>& sort_args() const { return p_->sort_args; }
  const std::vector<Term>& kids() const { return p_->kids; }
  const Term& kid(std::size_t i) const { return p_->kids[i]; }
  std::size_t hash() const { return p_->hash; }
  std::size_t size() const { return p_->size; }
  std::uint32_t free_bound() const { return p_->free_bound; }
  bool closed() const { return p_->free_bound == 0; }
  const Node* raw() const { return p_.get(); }

  /// Same node with replaced children.
  Term with_kids(std::vector<Term> kids) const;

 private:
  explicit Term(std::shared_ptr<const Node> p) : p_(std::move(p)) {}
  std::shared_ptr<const Node> p_;
};

int compare(const Term& a, const Term& b);
bool operator==(const Term& a, const Term& b);
inline bool operator!=(const Term& a, const Term& b) { return !(a == b); }
inline bool operator<(const Term& a, const Term& b) { return compare(a, b) < 0; }

struct TermHash {
  std::size_t operator()(const Term& t) const { return t.hash(); }
};

using Context = std::vector<Sort>;

/// Returns the sort of t; ctx[i] is the sort of de Bruijn index i.
Sort sort_check(const SignatureSpec& sig, const Term& t, const Context& ctx = {});

/// Shifts free indices >= cutoff by `by`.
Term shift(const Term& t, int by, std::uint32_t cutoff = 0);
/// Replaces index `depth` by s (shifted under binders), decrementing larger free indices.
Term subst(const SignatureSpec& sig, const Term& t, std::uint32_t depth, const Term& s);
Term subst_unchecked(const Term& t, std::uint32_t depth, const Term& s);

// ---------------------------------------------------------------- templates

enum class MetaTag { Old, New };

/// An open term over metavariables; Subst nodes stand for body[arg/0].
struct Template {
  enum class Kind { Meta, Node, Var, Subst };
  Kind kind = Kind::Meta;
  std::string name;  // metavariable or operator name
  MetaTag tag = MetaTag::Old;
  OpClass cls = OpClass::Value;
  int binds = 0;
  bool keep_sort_args = false;
  std::uint32_t index = 0;
  std::vector<Sort> sort_args;  // may mention sort variables
  std::vector<Template> kids;

  static Template meta(std::string name, MetaTag tag = MetaTag::Old);
  static Template var(std::uint32_t index);
  static Template node(const OperatorDescriptor& d, std::vector<Template> kids,
                       std::vector<Sort> sort_args = {});
  static Template subst(Template body, Template arg);

  bool is_meta() const { return kind == Kind::Meta; }
  bool is_value_node() const { return kind == Kind::Node && cls == OpClass::Value; }
};

bool operator==(const Template& a, const Template& b);
inline bool operator!=(const Template& a, const Template& b) { return !(a == b); }
bool operator<(const Template& a, const Template& b);

struct MetaEnv {
  std::vector<std::pair<std::string, Term>> terms;
  SortSubst sorts;

  const Term* find(std::string_view name) const;
  void bind(const std::string& name, Term t);
};

/// Replaces every metavariable; Old/New tags are forgotten. Throws MissingBinding.
Term instantiate(const Template& tpl, const MetaEnv& env);
/// As above, then sort-checks the result against the signature (SortMismatch on failure).
Term instantiate(const SignatureSpec& sig, const Template& tpl, const MetaEnv& env);

using TemplateEnv = std::map<std::string, Template>;
/// Template-level substitution (Kleisli extension of the free term monad).
Template substitute(const Template& tpl, const TemplateEnv& env, const SortSubst& sorts = {});
void collect_metas(const Template& tpl, std::vector<std::string>& out);
bool mentions_meta(const Template& tpl, std::string_view name);
Template to_template(const Term& t);
/// Equality up to a consistent bijective renaming of metavariables across both lists.
bool alpha_equal(const std::vector<Template>& a, const std::vector<Template>& b);

// ---------------------------------------------------------------- concrete syntax

Term parse_term(const SignatureSpec& sig, std::string_view text);
/// Identifiers that are not operators become metavariables; `t[s]` denotes substitution.
Template parse_template(const SignatureSpec& sig, std::string_view text,
                        const std::function<MetaTag(const std::string&)>& tag_of = {});
std::string print(const SignatureSpec& sig, const Term& t, std::size_t max_len = 0);
std::string print(const SignatureSpec& sig, const Template& t);
Sort parse_sort(std::string_view text, const std::vector<std::string>& vars = {});

}  // namespace sosforge
