#pragma once

#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "sosforge/effects.hpp"
#include "sosforge/ruledsl.hpp"
#include "sosforge/syntax.hpp"

namespace sosforge {

/// What a value shows to its context: a tagged payload, or a template awaiting one argument.
struct Observation {
  enum class Kind { Structural, Consuming };
  Kind kind = Kind::Structural;
  Term subject;      // the observed value
  std::string rule;  // value rule that produced it
  std::string tag;
  std::vector<Term> payload;
  std::string label;  // Consuming: metavariable receiving the argument
  Template body;      // Consuming: closed over `env`
  MetaEnv env;

  bool consuming() const { return kind == Kind::Consuming; }
  /// Instantiates the body with `arg` for the label (may run a substitution).
  Term apply(const Term& arg) const;
};

bool operator==(const Observation& a, const Observation& b);
bool operator<(const Observation& a, const Observation& b);

struct Behaviour {
  enum class Kind { Obs, Red };
  Kind kind = Kind::Red;
  Effect<Observation> obs;
  Effect<Term> red;
};

Observation gamma_v(const RuleSet& rs, const Term& v);
Effect<Term> gamma_c(const RuleSet& rs, const Term& c);
/// Behaviour of any term: Obs for values, Red for computations.
Behaviour gamma(const RuleSet& rs, const Term& t);
/// unit(t) on values, gamma_c on computations.
Effect<Term> step(const RuleSet& rs, const Term& t);

struct LabeledStep {
  Term term;
  std::string rule;  // e.g. "app-l[app-fn]"
};
/// Successors of a computation with the rule names that produced them.
std::vector<LabeledStep> labeled_successors(const RuleSet& rs, const Term& c);

// ---------------------------------------------------------------- evaluation

enum class EvalStatus { Converged, FuelExhausted, Cyclic };
const char* to_string(EvalStatus s);

struct EvalResult {
  Effect<Term> found;
  std::vector<Term> frontier;  // unresolved terms; the loop witness when Cyclic
  std::size_t fuel_used = 0;
  bool converged = false;
  EvalStatus status = EvalStatus::FuelExhausted;
  std::size_t stuck = 0;   // computations with no successor
  std::size_t states = 0;  // distinct terms visited

  /// The result is the exact fixpoint value (converged, or divergence proven).
  bool exact() const { return status != EvalStatus::FuelExhausted; }
};

struct EvalOptions {
  /// Under Det, throw NonConvergence instead of returning a non-converged result.
  bool det_errors = true;
  std::size_t max_states = 200000;
  /// Cap on computation nodes stepped, summed over all steps; reported as fuel exhaustion.
  std::size_t max_work = 250000;
};

/// Effect actually used to run a rule set: Det runs as Partial.
EffectKind eval_kind(const RuleSet& rs);

/// β̂ approximant: `fuel` rounds of expanding every frontier term by one step.
EvalResult multi_step(const RuleSet& rs, const Term& t, std::size_t fuel, EvalOptions opt = {});

// ---------------------------------------------------------------- big-step law

/// ξ for one operator and one tuple of heads at its strict positions.
struct XiEntry {
  std::string op;
  std::vector<std::string> heads;  // value former name or "#var" per strict position
  Template lhs;                    // f(h₁(ȳ₁), …, lazies)
  std::vector<Template> bodies;    // one per matching rule; several only under FinSet
  std::vector<std::string> rules;  // rule producing each body
};

/// Symbolic ξ(f(h̄(ȳ), z̄)). Throws NoMatchingRule when no rule applies.
/// A head "*" stands for any consuming value; its consumption result is the meta "#genK".
XiEntry derive_xi(const RuleSet& rs, const OperatorDescriptor& op, const std::vector<std::string>& heads);
/// The same bodies computed in two phases: the conclusion over placeholders for
/// premise targets, then the placeholders replaced by the observation results.
std::vector<Template> derive_xi_two_phase(const RuleSet& rs, const OperatorDescriptor& op,
                                          const std::vector<std::string>& heads);

class XiTable {
 public:
  explicit XiTable(const RuleSet& rs);
  const XiEntry* find(const std::string& op, const std::vector<std::string>& heads) const;
  const std::vector<XiEntry>& entries() const { return entries_; }
  const std::vector<std::string>& gaps() const { return gaps_; }
  /// Instantiates ξ at a computation whose strict arguments are values.
  Effect<Term> apply(const RuleSet& rs, const Term& c) const;

 private:
  std::vector<XiEntry> entries_;
  std::map<std::pair<std::string, std::vector<std::string>>, std::size_t> index_;
  std::vector<std::string> gaps_;
};

/// Shared, cached table for a rule set.
std::shared_ptr<const XiTable> xi_table(const RuleSet& rs);
/// Head name of a value: operator name or "#var".
std::string head_of(const Term& v);

/// ζ̂ approximant: fuel bounds the derivation depth.
EvalResult big_step(const RuleSet& rs, const Term& t, std::size_t fuel, EvalOptions opt = {});

/// One node of a big-step derivation.
struct Derivation {
  Term term;
  Term value;
  std::string rule;  // "v ⇓ v" or op[heads]
  std::vector<Derivation> premises;
};
/// Derivation tree for a deterministic rule set; nullopt when no value is reached within fuel.
std::optional<Derivation> derive_tree(const RuleSet& rs, const Term& t, std::size_t fuel);

// ---------------------------------------------------------------- traces and checks

struct TraceStep {
  Term term;
  std::vector<LabeledStep> successors;
};
/// Small-step trace: the reduction sequence, or the explored graph under FinSet.
std::vector<TraceStep> trace(const RuleSet& rs, const Term& t, std::size_t fuel,
                             std::size_t max_nodes = 10000);

enum class Verdict { Holds, Fails, Inconclusive };
const char* to_string(Verdict v);

/// β̂★ ∘ ρᶜᵛ ∘ χ ∘ β̂(strict args) ⊑ β̂ at c.
Verdict check_arg_eval_inclusion(const RuleSet& rs, const Term& c, std::size_t fuel);
/// ζ̂★ ∘ γᶜ ⊑ ζ̂ at c.
Verdict check_step_inclusion(const RuleSet& rs, const Term& c, std::size_t fuel);

/// Runs fn on a thread with a large stack (deep terms recurse deeply).
void run_with_big_stack(const std::function<void()>& fn, std::size_t stack_bytes = 512u << 20);

}  // namespace sosforge
