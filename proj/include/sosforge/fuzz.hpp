#pragma once

#include <cstdint>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "sosforge/ruledsl.hpp"
#include "sosforge/semantics.hpp"

namespace sosforge {

struct GenOptions {
  std::size_t max_size = 10;
  double value_ratio = 0.5;  // chance of a value former at each node
};

/// Closed, well-sorted terms of size at most max_size. Sizes are drawn
/// uniformly, then shapes are drawn top-down over the declared operators.
class TermGenerator {
 public:
  TermGenerator(const RuleSet& rs, std::uint64_t seed, GenOptions opt = {});
  Term next();
  /// A term of the given sort and size budget, or nullopt when none was found.
  std::optional<Term> generate(const Sort& sort, std::size_t budget, std::uint32_t depth = 0);
  std::mt19937_64& rng() { return rng_; }

 private:
  const RuleSet& rs_;
  std::mt19937_64 rng_;
  GenOptions opt_;
  std::vector<Sort> roots_;
  std::vector<Sort> pool_;  // sorts chosen for free sort parameters
  std::vector<const OperatorDescriptor*> ops_;
};

enum class Outcome { Match, BothDiverge, Mismatch };
const char* to_string(Outcome o);

struct Comparison {
  Outcome outcome = Outcome::BothDiverge;
  EvalResult small;
  EvalResult big;
  std::size_t fuel = 0;  // after escalation
};

/// Runs both evaluators, multiplying the fuel by 2 up to 16 times while one side
/// is inexact and the found sets differ.
Comparison compare_evaluators(const RuleSet& rs, const Term& t, std::size_t fuel);

/// Greedy shrinking: replaces subterms by smaller closed terms of the same sort
/// while the comparison keeps the given outcome.
Term shrink(const RuleSet& rs, const Term& t, std::size_t fuel, Outcome keep);

struct FuzzOptions {
  std::size_t size = 10;
  std::size_t count = 100;
  std::size_t fuel = 1000;
  std::uint64_t seed = 1;
  double ratio = 0.5;
  unsigned threads = 1;
  bool shrink = true;
  std::size_t max_reported = 20;
  /// Keeps only generated terms that mention this operator (empty: keep all).
  std::string require_op;
};

struct FuzzCase {
  std::size_t index = 0;
  Term term;
  Comparison cmp;
  std::optional<Term> shrunk;
};

struct FuzzReport {
  std::string language;
  FuzzOptions opt;
  std::size_t matches = 0, both_diverge = 0, mismatches = 0, values = 0;
  std::vector<FuzzCase> cases;  // every case, in generation order
  bool checker_pass = false;
};

FuzzReport run_fuzz(const RuleSet& rs, const FuzzOptions& opt);
nlohmann::ordered_json to_json(const FuzzReport& r, const RuleSet& rs);
std::string to_text(const FuzzReport& r, const RuleSet& rs);

bool mentions_op(const Term& t, const std::string& op);

}  // namespace sosforge
