#include <algorithm>
#include <set>
#include <sstream>

#include "sosforge/syntax.hpp"
#include "text_util.hpp"

namespace sosforge {

namespace {

bool occurs_in(const std::string& v, const Sort& s) {
  if (s.is_var) return s.name == v;
  for (const auto& a : s.args)
    if (occurs_in(v, a)) return true;
  return false;
}

void check_declared(const SignatureSpec& sig, const Sort& s, const OperatorDescriptor& op) {
  if (s.is_var) {
    if (std::find(op.params.begin(), op.params.end(), s.name) == op.params.end())
      throw SignatureError("operator " + op.name + " uses undeclared sort variable " + s.name);
    return;
  }
  if (s.is_arrow()) {
    check_declared(sig, s.dom(), op);
    check_declared(sig, s.cod(), op);
    return;
  }
  if (std::find(sig.sorts.begin(), sig.sorts.end(), s.name) == sig.sorts.end())
    throw SignatureError("operator " + op.name + " uses undeclared sort " + s.name);
}

}  // namespace

bool OperatorDescriptor::explicit_params() const {
  for (const auto& p : params) {
    bool found = false;
    for (const auto& a : args) found = found || occurs_in(p, a.sort);
    if (!found) return true;
  }
  return false;
}

std::vector<std::size_t> OperatorDescriptor::strict_positions() const {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < args.size(); ++i)
    if (args[i].mode == ArgMode::Strict) out.push_back(i);
  return out;
}

const InfixSyntax* SyntaxConfig::infix_for_op(std::string_view op) const {
  for (const auto& i : infixes)
    if (i.op == op) return &i;
  return nullptr;
}

const OperatorDescriptor* SignatureSpec::find(std::string_view name) const {
  for (const auto& o : ops)
    if (o.name == name) return &o;
  return nullptr;
}

const OperatorDescriptor& SignatureSpec::at(std::string_view name) const {
  if (const auto* o = find(name)) return *o;
  throw SortError(SortError::Code::UnknownOperator, std::string(name));
}

std::vector<const OperatorDescriptor*> SignatureSpec::value_formers() const {
  std::vector<const OperatorDescriptor*> out;
  for (const auto& o : ops)
    if (o.is_value()) out.push_back(&o);
  return out;
}

std::vector<const OperatorDescriptor*> SignatureSpec::computation_formers() const {
  std::vector<const OperatorDescriptor*> out;
  for (const auto& o : ops)
    if (!o.is_value()) out.push_back(&o);
  return out;
}

bool SignatureSpec::single_sorted() const {
  if (sorts.size() != 1) return false;
  for (const auto& o : ops)
    if (!o.params.empty()) return false;
  return true;
}

void SignatureSpec::validate() const {
  std::set<std::string> names;
  for (const auto& o : ops) {
    if (!names.insert(o.name).second) throw SignatureError("duplicate operator " + o.name);
    for (const auto& a : o.args) {
      check_declared(*this, a.sort, o);
      if (o.is_value() && a.mode != ArgMode::Plain)
        throw SignatureError("value former " + o.name + " must use plain arguments");
      if (!o.is_value() && a.mode == ArgMode::Plain)
        throw SignatureError("computation former " + o.name + " needs strict or lazy arguments");
      if (a.binds > 0 && !binding)
        throw SignatureError("operator " + o.name + " binds variables without a binding discipline");
      if (a.binds != o.args.front().binds)
        throw SignatureError("operator " + o.name + " mixes binder counts across arguments");
    }
    check_declared(*this, o.result, o);
  }
  if (binding) {
    if (std::find(sorts.begin(), sorts.end(), binding->name) == sorts.end())
      throw SignatureError("binding sort " + binding->name + " is not declared");
  }
  if (value_formers().empty()) throw SignatureError("a signature needs at least one value former");
  auto need = [&](const std::string& op, const char* what, std::size_t arity) {
    if (op.empty()) return;
    const auto* d = find(op);
    if (!d) throw SignatureError(std::string(what) + " operator " + op + " is not declared");
    if (d->arity() != arity)
      throw SignatureError(std::string(what) + " operator " + op + " must have arity " +
                           std::to_string(arity));
  };
  need(syntax.apply_op, "apply", 2);
  need(syntax.lambda_op, "lambda", 1);
  need(syntax.neutral_op, "neutral", 2);
  for (const auto& i : syntax.infixes) need(i.op, "infix", 2);
}

namespace {

// Splits "name[a,b](args) : result" into its pieces.
OperatorDescriptor parse_op_decl(const std::string& text, OpClass cls, std::size_t line) {
  OperatorDescriptor d;
  d.cls = cls;
  auto colon = text.rfind(" : ");
  if (colon == std::string::npos) throw SyntaxError("operator declaration needs ' : result'", 0, line);
  std::string head = trim(text.substr(0, colon));
  std::string result = trim(text.substr(colon + 3));
  std::size_t i = 0;
  while (i < head.size() && head[i] != '[' && head[i] != '(' &&
         !std::isspace(static_cast<unsigned char>(head[i])))
    ++i;
  d.name = head.substr(0, i);
  if (d.name.empty()) throw SyntaxError("missing operator name", 0, line);
  std::string rest = trim(head.substr(i));
  if (!rest.empty() && rest[0] == '[') {
    auto close = rest.find(']');
    if (close == std::string::npos) throw SyntaxError("unterminated sort parameter list", i, line);
    for (auto& p : split_top(rest.substr(1, close - 1), ',')) d.params.push_back(trim(p));
    rest = trim(rest.substr(close + 1));
  }
  if (!rest.empty()) {
    if (rest.front() != '(' || rest.back() != ')')
      throw SyntaxError("operator arguments must be parenthesized", i, line);
    for (auto& raw : split_top(rest.substr(1, rest.size() - 2), ',')) {
      std::string a = trim(raw);
      ArgSpec spec;
      if (starts_with_word(a, "strict")) {
        spec.mode = ArgMode::Strict;
        a = trim(a.substr(6));
      } else if (starts_with_word(a, "lazy")) {
        spec.mode = ArgMode::Lazy;
        a = trim(a.substr(4));
      }
      auto b = a.find(" bind ");
      if (b != std::string::npos) {
        spec.binds = std::stoi(trim(a.substr(b + 6)));
        a = trim(a.substr(0, b));
      }
      try {
        spec.sort = parse_sort(a, d.params);
      } catch (const SyntaxError& e) {
        throw SyntaxError(e.bare_message(), e.position(), line);
      }
      d.args.push_back(std::move(spec));
    }
  }
  try {
    d.result = parse_sort(result, d.params);
  } catch (const SyntaxError& e) {
    throw SyntaxError(e.bare_message(), e.position(), line);
  }
  return d;
}

}  // namespace

SignatureSpec parse_signature(std::string_view text) {
  SignatureSpec sig;
  std::istringstream in{std::string(text)};
  std::string raw;
  std::size_t line = 0;
  while (std::getline(in, raw)) {
    ++line;
    std::string l = trim(strip_comment(raw));
    if (l.empty()) continue;
    std::string kw = first_word(l);
    std::string rest = trim(l.substr(kw.size()));
    if (kw == "sort") {
      for (auto& s : split_ws(rest)) sig.sorts.push_back(s);
    } else if (kw == "binding") {
      sig.binding = Sort::base(rest);
    } else if (kw == "value" || kw == "comp") {
      sig.ops.push_back(
          parse_op_decl(rest, kw == "value" ? OpClass::Value : OpClass::Computation, line));
    } else if (kw == "syntax") {
      auto words = split_ws(rest);
      if (words.size() < 2) throw SyntaxError("incomplete syntax directive", 0, line);
      if (words[0] == "apply") {
        sig.syntax.apply_op = words[1];
      } else if (words[0] == "lambda") {
        sig.syntax.lambda_op = words[1];
      } else if (words[0] == "neutral") {
        sig.syntax.neutral_op = words[1];
      } else if (words[0] == "alias" && words.size() == 3) {
        sig.syntax.aliases[words[1]] = words[2];
      } else if (words[0] == "infix" && words.size() >= 4) {
        InfixSyntax inf;
        inf.symbol = words[1];
        inf.op = words[2];
        inf.prec = std::stoi(words[3]);
        for (std::size_t k = 4; k + 1 < words.size(); k += 2)
          if (words[k] == "alias") inf.aliases.push_back(words[k + 1]);
        sig.syntax.infixes.push_back(std::move(inf));
      } else {
        throw SyntaxError("unknown syntax directive '" + words[0] + "'", 0, line);
      }
    } else {
      throw SyntaxError("unknown signature directive '" + kw + "'", 0, line);
    }
  }
  sig.validate();
  return sig;
}

}  // namespace sosforge
