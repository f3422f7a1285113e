#pragma once

#include <map>
#include <string>
#include <vector>

#include "sosforge/fuzz.hpp"
#include "sosforge/languages.hpp"
#include "sosforge/semantics.hpp"

namespace testsupport {

/// Bundled language, loaded once per process.
const sosforge::LanguageBundle& lang(const std::string& id);

std::string golden_path(const std::string& name);
/// Non-comment, non-blank lines of a golden file.
std::vector<std::string> golden_lines(const std::string& name);

/// Renames metavariables in order of first appearance and drops spacing and
/// the asterisk marker, so rule lines can be compared up to renaming.
std::string canonical_rule(const sosforge::SignatureSpec& sig, const std::string& line);
bool has_asterisk(const std::string& line);

/// (I^k (S I I)) (I^k (S I I)) with I^k x = I (I (… x)).
sosforge::Term omega_k(const sosforge::RuleSet& rs, int k);

/// Generated computations whose small-step evaluation converges within `fuel`.
std::vector<sosforge::Term> converging_computations(const sosforge::RuleSet& rs, std::size_t n,
                                                    std::size_t size, std::size_t fuel,
                                                    std::uint64_t seed);

/// Plain evaluation helpers with det_errors off.
sosforge::EvalResult small(const sosforge::RuleSet& rs, const sosforge::Term& t, std::size_t fuel);
sosforge::EvalResult big(const sosforge::RuleSet& rs, const sosforge::Term& t, std::size_t fuel);

/// found(fuel) ⊑ found(2·fuel) for both evaluators over a doubling fuel ladder.
/// Returns an empty string on success, otherwise a description of the violation.
std::string check_chain_monotone(const sosforge::RuleSet& rs, const sosforge::Term& t, std::size_t max_fuel);

/// ζ̂(c) equals ζ̂★ ∘ ξ★ ∘ χ over the evaluated strict arguments whenever ζ̂(c) converged.
/// Empty on success; "skip" when c is a value or did not converge.
std::string check_post_fixpoint(const sosforge::RuleSet& rs, const sosforge::Term& t, std::size_t fuel);

std::string show(const sosforge::RuleSet& rs, const std::vector<sosforge::Term>& ts);

}  // namespace testsupport
