#pragma once

#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "sosforge/effects.hpp"
#include "sosforge/syntax.hpp"

namespace sosforge {

/// ρᵛ for one value former: either an observation or a consumer of a label.
struct ValueRule {
  enum class Kind { Observe, Consume };
  std::string name;
  std::string op;  // empty for the variable rule of a binding discipline
  bool for_variables = false;
  std::vector<std::string> arg_metas;  // one per argument (or the variable's meta)
  std::vector<std::string> sort_vars;  // bound from the head's sort arguments
  Kind kind = Kind::Consume;
  std::string tag;                // Observe
  std::vector<Template> payload;  // Observe
  std::string label;              // Consume
  Template body;                  // Consume
  bool uses_subst = false;
  std::size_t index = 0;  // 1-based position in the rule file
};

enum class PremiseKind { Passive, Reduces, Consumes, Observes };

struct Premise {
  PremiseKind kind = PremiseKind::Passive;
  std::string target;               // result meta of Reduces / Consumes; may be empty
  std::optional<Template> label;    // Consumes: the argument fed to the function value
  std::string tag;                  // Observes
  std::vector<std::string> payload; // Observes
};

/// ρᶜ for one premise pattern of a computation former.
struct CompRule {
  std::string name;
  std::string op;
  std::vector<std::string> arg_metas;  // one per argument position
  std::vector<Premise> premises;       // one per argument position; lazy ones stay Passive
  Template conclusion;
  std::size_t index = 0;  // 1-based position in the rule file

  bool has_reduces() const;
};

/// A separated law: signature, ρᵛ, ρᶜ and the effect used to combine results.
struct RuleSet {
  std::string id;
  SignatureSpec sig;
  EffectKind effect = EffectKind::Det;
  std::vector<ValueRule> value_rules;
  std::vector<CompRule> comp_rules;
  std::vector<std::string> obs_alphabet;
  std::vector<std::string> gen_exclude;  // operators the term generator must not produce
  std::vector<std::string> gen_sorts;    // target sorts for typed generation
  std::string source;                    // the text this set was parsed from

  const ValueRule* value_rule_for(std::string_view op) const;
  const ValueRule* variable_rule() const;
  const std::vector<std::size_t>& comp_rules_for(std::string_view op) const;
  /// Rebuilds the per-operator rule index; call after editing the rule vectors.
  void reindex();

 private:
  std::map<std::string, std::size_t, std::less<>> value_index_;
  std::map<std::string, std::vector<std::size_t>, std::less<>> comp_index_;
};

using LawSpec = RuleSet;

/// Parses a rule file: signature directives, `effect`, `language`, then `rule` blocks.
RuleSet parse_ruleset(std::string_view text);
/// Adds operators and rules from another text on top of an existing rule set.
RuleSet extend_ruleset(const RuleSet& base, std::string_view text);

// ---------------------------------------------------------------- analysis

/// Premise shape of one strict position: "reduces", "consumes" or an observation tag.
using Shape = std::string;

struct Violation {
  std::string rule;
  std::size_t index = 0;
  int position = -1;  // 0-based argument position, -1 for the rule as a whole
  std::string reason;
};

struct ShapeGap {
  std::string op;
  std::vector<Shape> shape;
  std::size_t covering = 0;  // number of rules covering the shape
};

struct TotalityReport {
  bool exhaustive = true;
  std::vector<ShapeGap> gaps;       // uncovered shapes
  std::vector<ShapeGap> ambiguous;  // shapes covered more than once under Det/Partial
};

struct SeparationReport {
  bool pass = true;
  std::vector<Violation> violations;
  TotalityReport totality;
};

/// Premise shapes available at one argument position, in canonical order.
std::vector<Shape> shapes_at(const RuleSet& rs, const OperatorDescriptor& op, std::size_t pos);
/// Value formers (or "#var") whose values can occur at one argument position.
std::vector<std::string> heads_at(const RuleSet& rs, const OperatorDescriptor& op, std::size_t pos);

TotalityReport check_totality(const RuleSet& rs);
SeparationReport check_strong_separation(const RuleSet& rs);

/// Reinterprets a deterministic rule set over finite powersets.
RuleSet lift_powerset(const RuleSet& rs);
/// Reinterprets a deterministic rule set over the partiality monad.
RuleSet lift_partial(const RuleSet& rs);

nlohmann::ordered_json to_json(const SeparationReport& r, const RuleSet& rs);
std::string to_text(const SeparationReport& r, const RuleSet& rs);

// ---------------------------------------------------------------- big-step rules

/// One derived rule "f(…) ⇓ v ⇐ xᵢ ⇓ headᵢ, body ⇓ v"; a `generic` head is any value.
struct BigStepRule {
  std::string op;
  std::vector<std::string> heads;     // per strict position: former name, "#var" or "*"
  Template lhs;                       // f(x₁,…,xₙ, lazies)
  std::vector<std::pair<std::string, Template>> premises;  // xᵢ ⇓ head template
  Template body;                      // the term evaluated last
  bool asterisk = false;              // body is a value template
  bool axiom = false;                 // v ⇓ v
  std::string result = "v";           // metavariable for the final value
  std::string rule;                   // small-step rule the body comes from
};

struct BigStepTable {
  std::vector<BigStepRule> rules;
  std::vector<std::string> gaps;  // op/head tuples without a matching small-step rule
};

BigStepTable derive_bigstep_rules(const RuleSet& rs);
std::string rule_text(const RuleSet& rs, const BigStepRule& r, bool simplified = false);
std::string to_text(const BigStepTable& t, const RuleSet& rs);
nlohmann::ordered_json to_json(const BigStepTable& t, const RuleSet& rs);

}  // namespace sosforge
