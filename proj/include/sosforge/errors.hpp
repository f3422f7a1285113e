#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

namespace sosforge {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed concrete syntax (terms, sorts, signatures or rule files).
class SyntaxError : public Error {
 public:
  SyntaxError(const std::string& msg, std::size_t pos, std::size_t line = 0)
      : Error(format(msg, pos, line)), pos_(pos), line_(line), bare_(msg) {}
  std::size_t position() const { return pos_; }
  std::size_t line() const { return line_; }
  const std::string& bare_message() const { return bare_; }

 private:
  static std::string format(const std::string& msg, std::size_t pos, std::size_t line) {
    std::string out = "syntax error";
    if (line > 0) out += " at line " + std::to_string(line);
    out += " (offset " + std::to_string(pos) + "): " + msg;
    return out;
  }
  std::size_t pos_;
  std::size_t line_;
  std::string bare_;
};

class SortError : public Error {
 public:
  enum class Code { UnknownOperator, ArityMismatch, SortMismatch, UnboundVariable };
  SortError(Code code, const std::string& msg) : Error(name(code) + ": " + msg), code_(code) {}
  Code code() const { return code_; }
  static std::string name(Code c) {
    switch (c) {
      case Code::UnknownOperator: return "UnknownOperator";
      case Code::ArityMismatch: return "ArityMismatch";
      case Code::SortMismatch: return "SortMismatch";
      case Code::UnboundVariable: return "UnboundVariable";
    }
    return "SortError";
  }

 private:
  Code code_;
};

class MissingBinding : public Error {
 public:
  using Error::Error;
};

class DisciplineDisabled : public Error {
 public:
  DisciplineDisabled() : Error("substitution requires a binding discipline") {}
};

class EffectError : public Error {
 public:
  using Error::Error;
};

class SignatureError : public Error {
 public:
  using Error::Error;
};

/// Rule-set construction errors: unknown operators, reused metavariables, bad shapes.
class RuleError : public Error {
 public:
  enum class Code { UnknownOp, MetaReuse, Invalid };
  RuleError(Code code, const std::string& msg) : Error(msg), code_(code) {}
  Code code() const { return code_; }

 private:
  Code code_;
};

class NoValueRule : public Error {
 public:
  using Error::Error;
};

class NoMatchingRule : public Error {
 public:
  using Error::Error;
};

class NonDeterministic : public Error {
 public:
  using Error::Error;
};

/// Raised by deterministic evaluation when fuel runs out; carries the last terms visited.
class NonConvergence : public Error {
 public:
  NonConvergence(const std::string& msg, std::vector<std::string> trace)
      : Error(msg), trace_(std::move(trace)) {}
  const std::vector<std::string>& trace() const { return trace_; }

 private:
  std::vector<std::string> trace_;
};

class UnknownLanguage : public Error {
 public:
  explicit UnknownLanguage(const std::string& id) : Error("unknown language: " + id) {}
};

}  // namespace sosforge
