#pragma once

#include <string>
#include <vector>

#include "sosforge/ruledsl.hpp"
#include "sosforge/semantics.hpp"

namespace sosforge {

/// One regression case: `term ;; expectation ;; source` in a corpus file.
///
/// Expectations:
///   value V          both evaluators find exactly {V}
///   values V1 | V2   both evaluators find exactly this set
///   diverges         neither evaluator finds a value
///   step T1 | T2     the successors of one small step
///   mismatch S / B   small-step finds {S}, big-step finds {B}
struct CorpusCase {
  std::string term;
  std::string expect;  // value, values, diverges, step, mismatch
  std::vector<std::string> small;
  std::vector<std::string> big;  // same as small except for mismatch
  std::string source;
  std::size_t line = 0;
};

struct LanguageBundle {
  std::string id;
  RuleSet ruleset;
  std::vector<CorpusCase> corpus;
  std::string notes;  // first comment line of the rule file
};

/// Ids of the bundled languages, in a fixed order.
const std::vector<std::string>& language_ids();
/// A bundled language by id, or a rule file by path. Throws UnknownLanguage.
LanguageBundle load_language(const std::string& id_or_path);
/// Rule file text of a bundled language.
const std::string& language_source(const std::string& id);

std::vector<CorpusCase> parse_corpus(std::string_view text);
/// Curated cases of a bundled language (empty for unknown ids).
std::vector<CorpusCase> corpus(const std::string& id);

struct CaseOutcome {
  bool pass = false;
  std::string detail;
};
CaseOutcome run_case(const RuleSet& rs, const CorpusCase& c, std::size_t fuel);

}  // namespace sosforge
