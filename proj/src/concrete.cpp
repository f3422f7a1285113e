#include <algorithm>
#include <cctype>
#include <set>

#include "sosforge/syntax.hpp"

namespace sosforge {

namespace {

// ---------------------------------------------------------------- lexer

enum class Tok { LParen, RParen, LBracket, RBracket, Comma, Dot, Star, Lambda, Int, Ident, Infix, Arrow, End };

struct Token {
  Tok kind = Tok::End;
  std::string text;
  std::size_t pos = 0;
  bool adjacent = false;  // no whitespace since the previous token
  int infix = -1;         // index into SyntaxConfig::infixes
};

bool ident_byte(unsigned char c) { return std::isalnum(c) || c == '_' || c == '\'' || c >= 0x80; }

std::vector<Token> lex(const SignatureSpec& sig, std::string_view s) {
  std::vector<std::pair<std::string, int>> symbols;
  for (std::size_t i = 0; i < sig.syntax.infixes.size(); ++i) {
    symbols.emplace_back(sig.syntax.infixes[i].symbol, static_cast<int>(i));
    for (const auto& a : sig.syntax.infixes[i].aliases) symbols.emplace_back(a, static_cast<int>(i));
  }
  std::sort(symbols.begin(), symbols.end(),
            [](const auto& a, const auto& b) { return a.first.size() > b.first.size(); });

  std::vector<Token> out;
  std::size_t i = 0;
  bool space = true;
  auto push = [&](Tok k, std::string text, std::size_t pos, int infix = -1) {
    Token t;
    t.kind = k;
    t.text = std::move(text);
    t.pos = pos;
    t.adjacent = !space && !out.empty();
    t.infix = infix;
    out.push_back(std::move(t));
    space = false;
  };
  while (i < s.size()) {
    unsigned char c = static_cast<unsigned char>(s[i]);
    if (std::isspace(c)) {
      ++i;
      space = true;
      continue;
    }
    bool matched = false;
    for (const auto& [sym, idx] : symbols) {
      if (s.substr(i, sym.size()) == sym) {
        // an infix spelled with identifier bytes must not swallow a longer identifier
        bool wordy = ident_byte(static_cast<unsigned char>(sym.back())) &&
                     std::isalnum(static_cast<unsigned char>(sym.back()));
        if (wordy && i + sym.size() < s.size() &&
            ident_byte(static_cast<unsigned char>(s[i + sym.size()])))
          continue;
        push(Tok::Infix, sym, i, idx);
        i += sym.size();
        matched = true;
        break;
      }
    }
    if (matched) continue;
    if (s.substr(i, 2) == "\xCE\xBB" || c == '\\') {  // λ
      push(Tok::Lambda, "λ", i);
      i += (c == '\\') ? 1 : 2;
      continue;
    }
    // sort arrows, only meaningful inside sort arguments
    if (s.substr(i, 2) == "->" || s.substr(i, 3) == "\xE2\x86\x92") {
      push(Tok::Arrow, "->", i);
      i += s[i] == '-' ? 2 : 3;
      continue;
    }
    switch (c) {
      case '(': push(Tok::LParen, "(", i); ++i; continue;
      case ')': push(Tok::RParen, ")", i); ++i; continue;
      case '[': push(Tok::LBracket, "[", i); ++i; continue;
      case ']': push(Tok::RBracket, "]", i); ++i; continue;
      case ',': push(Tok::Comma, ",", i); ++i; continue;
      case '.': push(Tok::Dot, ".", i); ++i; continue;
      case '*': push(Tok::Star, "*", i); ++i; continue;
      default: break;
    }
    if (std::isdigit(c)) {
      std::size_t b = i;
      while (i < s.size() && std::isdigit(static_cast<unsigned char>(s[i]))) ++i;
      push(Tok::Int, std::string(s.substr(b, i - b)), b);
      continue;
    }
    if (ident_byte(c) && c != '\'') {
      std::size_t b = i;
      std::string name;
      while (i < s.size() && ident_byte(static_cast<unsigned char>(s[i]))) {
        // stop before λ or an infix symbol glued to the identifier
        if (s.substr(i, 2) == "\xCE\xBB") break;
        bool sym = false;
        for (const auto& [sy, idx] : symbols)
          if (!std::isalnum(static_cast<unsigned char>(sy[0])) && s.substr(i, sy.size()) == sy)
            sym = true;
        if (sym) break;
        if (s.substr(i, 3) == "\xE2\x80\xB2") {  // ′
          name += '\'';
          i += 3;
        } else if (s.substr(i, 3) == "\xE2\x80\xB3") {  // ″
          name += "''";
          i += 3;
        } else {
          name += s[i];
          ++i;
        }
      }
      if (name.empty()) throw SyntaxError("unexpected character", i);
      push(Tok::Ident, name, b);
      continue;
    }
    throw SyntaxError(std::string("unexpected character '") + s[i] + "'", i);
  }
  Token end;
  end.kind = Tok::End;
  end.pos = s.size();
  out.push_back(end);
  return out;
}

// ---------------------------------------------------------------- parser

struct Ast {
  enum class K { Ident, Int, Neutral, Lambda, Apply, Infix, Subst };
  K k = K::Ident;
  std::string name;
  std::string sorts_text;
  bool has_sorts = false;
  bool has_args = false;
  std::uint32_t index = 0;
  std::size_t pos = 0;
  std::vector<Ast> kids;
};

class Parser {
 public:
  Parser(const SignatureSpec& sig, std::string_view src, bool templ)
      : sig_(sig), src_(src), templ_(templ), toks_(lex(sig, src)) {}

  Ast parse() {
    Ast a = expr(0);
    if (peek().kind != Tok::End) fail("unexpected '" + peek().text + "'");
    return a;
  }

 private:
  const Token& peek() const { return toks_[i_]; }
  const Token& next() { return toks_[i_++]; }
  [[noreturn]] void fail(const std::string& msg) const { throw SyntaxError(msg, peek().pos); }
  void expect(Tok k, const char* what) {
    if (peek().kind != k) fail(std::string("expected ") + what);
    ++i_;
  }

  std::string resolve(const std::string& name) const {
    auto it = sig_.syntax.aliases.find(name);
    return it == sig_.syntax.aliases.end() ? name : it->second;
  }
  const OperatorDescriptor* op(const std::string& name) const { return sig_.find(resolve(name)); }

  bool starts_atom() const {
    switch (peek().kind) {
      case Tok::LParen:
      case Tok::Lambda:
      case Tok::Int:
      case Tok::Ident: return true;
      default: return false;
    }
  }

  Ast expr(int minprec) {
    Ast lhs = app();
    while (peek().kind == Tok::Infix) {
      const auto& inf = sig_.syntax.infixes[static_cast<std::size_t>(peek().infix)];
      if (inf.prec < minprec) break;
      std::size_t pos = next().pos;
      Ast rhs = expr(inf.prec + 1);
      Ast n;
      n.k = Ast::K::Infix;
      n.name = inf.op;
      n.pos = pos;
      n.kids = {std::move(lhs), std::move(rhs)};
      lhs = std::move(n);
    }
    return lhs;
  }

  Ast app() {
    if (!starts_atom()) fail(peek().kind == Tok::End ? "unexpected end of input" : "expected a term");
    Ast f = atom();
    while (starts_atom()) {
      std::size_t pos = peek().pos;
      Ast a = atom();
      Ast n;
      n.k = Ast::K::Apply;
      n.pos = pos;
      n.kids = {std::move(f), std::move(a)};
      f = std::move(n);
    }
    return f;
  }

  std::vector<Ast> arg_list() {
    expect(Tok::LParen, "'('");
    std::vector<Ast> args;
    if (peek().kind != Tok::RParen) {
      args.push_back(expr(0));
      while (peek().kind == Tok::Comma) {
        ++i_;
        args.push_back(expr(0));
      }
    }
    expect(Tok::RParen, "')'");
    return args;
  }

  Ast atom() {
    const Token& t = peek();
    switch (t.kind) {
      case Tok::LParen: {
        ++i_;
        Ast a = expr(0);
        expect(Tok::RParen, "')'");
        return postfix(std::move(a));
      }
      case Tok::Lambda: {
        std::size_t pos = next().pos;
        expect(Tok::Dot, "'.' after λ");
        Ast n;
        n.k = Ast::K::Lambda;
        n.pos = pos;
        n.kids.push_back(expr(0));
        return n;
      }
      case Tok::Int: {
        Ast n;
        n.k = Ast::K::Int;
        n.pos = t.pos;
        n.index = static_cast<std::uint32_t>(std::stoul(next().text));
        if (peek().kind == Tok::Star && peek().adjacent) {
          ++i_;
          n.k = Ast::K::Neutral;
          n.kids = arg_list();
        }
        return n;
      }
      case Tok::Ident: {
        Ast n;
        n.k = Ast::K::Ident;
        n.pos = t.pos;
        n.name = next().text;
        const OperatorDescriptor* d = op(n.name);
        if (d && peek().kind == Tok::LBracket && peek().adjacent) {
          std::size_t start = peek().pos + 1;
          int depth = 0;
          while (true) {
            if (peek().kind == Tok::End) fail("unterminated sort arguments");
            if (peek().kind == Tok::LBracket) ++depth;
            if (peek().kind == Tok::RBracket && --depth == 0) break;
            ++i_;
          }
          n.sorts_text = std::string(src_.substr(start, peek().pos - start));
          n.has_sorts = true;
          ++i_;
        }
        if (d && d->arity() > 0 && peek().kind == Tok::LParen && peek().adjacent) {
          n.kids = arg_list();
          n.has_args = true;
        }
        if (!d) return postfix(std::move(n));
        return n;
      }
      default:
        fail("expected a term");
    }
  }

  // template substitution t[s]
  Ast postfix(Ast a) {
    while (templ_ && peek().kind == Tok::LBracket && peek().adjacent) {
      std::size_t pos = next().pos;
      Ast arg = expr(0);
      expect(Tok::RBracket, "']'");
      Ast n;
      n.k = Ast::K::Subst;
      n.pos = pos;
      n.kids = {std::move(a), std::move(arg)};
      a = std::move(n);
    }
    return a;
  }

  const SignatureSpec& sig_;
  std::string_view src_;
  bool templ_;
  std::vector<Token> toks_;
  std::size_t i_ = 0;
};

std::vector<Sort> parse_sort_args(const SignatureSpec& sig, const Ast& a, bool templ) {
  std::vector<Sort> out;
  std::string text = a.sorts_text;
  // identifiers that are not declared sorts are sort variables (templates only)
  std::vector<std::string> vars;
  for (std::size_t i = 0; i < text.size();) {
    if (std::isalpha(static_cast<unsigned char>(text[i]))) {
      std::size_t b = i;
      while (i < text.size() && (std::isalnum(static_cast<unsigned char>(text[i])) ||
                                 text[i] == '_' || text[i] == '\''))
        ++i;
      std::string w = text.substr(b, i - b);
      if (std::find(sig.sorts.begin(), sig.sorts.end(), w) == sig.sorts.end()) {
        if (!templ) throw SyntaxError("unknown sort '" + w + "'", a.pos);
        vars.push_back(w);
      }
    } else {
      ++i;
    }
  }
  int depth = 0;
  std::size_t start = 0;
  for (std::size_t i = 0; i <= text.size(); ++i) {
    if (i == text.size() || (text[i] == ',' && depth == 0)) {
      try {
        out.push_back(parse_sort(text.substr(start, i - start), vars));
      } catch (const SyntaxError& e) {
        throw SyntaxError(e.bare_message(), a.pos);
      }
      start = i + 1;
    } else if (text[i] == '(') {
      ++depth;
    } else if (text[i] == ')') {
      --depth;
    }
  }
  return out;
}

const OperatorDescriptor& need_op(const SignatureSpec& sig, const std::string& name,
                                  std::size_t pos, const char* what) {
  if (name.empty()) throw SyntaxError(std::string(what) + " is not available in this language", pos);
  const auto* d = sig.find(name);
  if (!d) throw SyntaxError(std::string(what) + " operator is missing", pos);
  return *d;
}

Term to_term(const SignatureSpec& sig, const Ast& a) {
  auto kids = [&](std::size_t from = 0) {
    std::vector<Term> out;
    for (std::size_t i = from; i < a.kids.size(); ++i) out.push_back(to_term(sig, a.kids[i]));
    return out;
  };
  switch (a.k) {
    case Ast::K::Ident: {
      auto it = sig.syntax.aliases.find(a.name);
      const std::string& name = it == sig.syntax.aliases.end() ? a.name : it->second;
      const auto* d = sig.find(name);
      if (!d) throw SyntaxError("unknown operator '" + a.name + "'", a.pos);
      if (a.kids.size() != d->arity())
        throw SyntaxError(name + " expects " + std::to_string(d->arity()) + " arguments", a.pos);
      std::vector<Sort> sorts;
      if (a.has_sorts) sorts = parse_sort_args(sig, a, false);
      return Term::node(*d, kids(), std::move(sorts));
    }
    case Ast::K::Int:
      if (!sig.has_binding()) throw SyntaxError("variables need a binding discipline", a.pos);
      return Term::var(a.index);
    case Ast::K::Neutral: {
      if (!sig.has_binding()) throw SyntaxError("variables need a binding discipline", a.pos);
      const auto& d = need_op(sig, sig.syntax.neutral_op, a.pos, "neutral spine syntax");
      Term acc = Term::var(a.index);
      for (const auto& k : a.kids) acc = Term::node(d, {acc, to_term(sig, k)});
      return acc;
    }
    case Ast::K::Lambda: {
      const auto& d = need_op(sig, sig.syntax.lambda_op, a.pos, "λ-abstraction");
      return Term::node(d, kids());
    }
    case Ast::K::Apply: {
      const auto& d = need_op(sig, sig.syntax.apply_op, a.pos, "application by juxtaposition");
      return Term::node(d, kids());
    }
    case Ast::K::Infix:
      return Term::node(sig.at(a.name), kids());
    case Ast::K::Subst:
      throw SyntaxError("substitution is only allowed in rule templates", a.pos);
  }
  throw SyntaxError("bad term", a.pos);
}

Template to_tpl(const SignatureSpec& sig, const Ast& a,
                const std::function<MetaTag(const std::string&)>& tag_of) {
  auto kids = [&]() {
    std::vector<Template> out;
    for (const auto& k : a.kids) out.push_back(to_tpl(sig, k, tag_of));
    return out;
  };
  switch (a.k) {
    case Ast::K::Ident: {
      auto it = sig.syntax.aliases.find(a.name);
      const std::string& name = it == sig.syntax.aliases.end() ? a.name : it->second;
      const auto* d = sig.find(name);
      if (!d) return Template::meta(a.name, tag_of ? tag_of(a.name) : MetaTag::Old);
      if (a.kids.size() != d->arity())
        throw SyntaxError(name + " expects " + std::to_string(d->arity()) + " arguments", a.pos);
      std::vector<Sort> sorts;
      if (a.has_sorts) sorts = parse_sort_args(sig, a, true);
      return Template::node(*d, kids(), std::move(sorts));
    }
    case Ast::K::Int:
      if (!sig.has_binding()) throw SyntaxError("variables need a binding discipline", a.pos);
      return Template::var(a.index);
    case Ast::K::Neutral: {
      const auto& d = need_op(sig, sig.syntax.neutral_op, a.pos, "neutral spine syntax");
      Template acc = Template::var(a.index);
      for (const auto& k : a.kids) acc = Template::node(d, {acc, to_tpl(sig, k, tag_of)});
      return acc;
    }
    case Ast::K::Lambda:
      return Template::node(need_op(sig, sig.syntax.lambda_op, a.pos, "λ-abstraction"), kids());
    case Ast::K::Apply:
      return Template::node(
          need_op(sig, sig.syntax.apply_op, a.pos, "application by juxtaposition"), kids());
    case Ast::K::Infix:
      return Template::node(sig.at(a.name), kids());
    case Ast::K::Subst: {
      if (!sig.has_binding()) throw SyntaxError("substitution needs a binding discipline", a.pos);
      auto k = kids();
      return Template::subst(std::move(k[0]), std::move(k[1]));
    }
  }
  throw SyntaxError("bad template", a.pos);
}

// ---------------------------------------------------------------- printer

enum class Ctx { Top, Fun, Arg, InfixL, InfixR };

struct TermView {
  const Term* t;
  bool is_var() const { return t->is_var(); }
  bool is_meta() const { return false; }
  bool is_subst() const { return false; }
  std::uint32_t index() const { return t->index(); }
  const std::string& name() const { return t->op(); }
  std::size_t arity() const { return t->kids().size(); }
  TermView kid(std::size_t i) const { return TermView{&t->kid(i)}; }
  const std::vector<Sort>& sorts() const { return t->sort_args(); }
};

struct TplView {
  const Template* t;
  bool is_var() const { return t->kind == Template::Kind::Var; }
  bool is_meta() const { return t->kind == Template::Kind::Meta; }
  bool is_subst() const { return t->kind == Template::Kind::Subst; }
  std::uint32_t index() const { return t->index; }
  const std::string& name() const { return t->name; }
  std::size_t arity() const { return t->kids.size(); }
  TplView kid(std::size_t i) const { return TplView{&t->kids[i]}; }
  std::vector<Sort> sorts() const { return t->keep_sort_args ? t->sort_args : std::vector<Sort>{}; }
};

class Printer {
 public:
  Printer(const SignatureSpec& sig, std::size_t max_len) : sig_(sig), max_(max_len) {}

  template <class V>
  void go(const V& v, Ctx ctx, int prec) {
    if (max_ && out.size() > max_) return;
    if (v.is_var()) {
      out += std::to_string(v.index());
      return;
    }
    if (v.is_meta()) {
      out += v.name();
      return;
    }
    if (v.is_subst()) {
      atomic(v.kid(0));
      out += "[";
      go(v.kid(1), Ctx::Top, 0);
      out += "]";
      return;
    }
    const std::string& name = v.name();
    const auto& syn = sig_.syntax;
    if (name == syn.apply_op && v.arity() == 2) {
      bool paren = ctx == Ctx::Arg;
      if (paren) out += "(";
      go(v.kid(0), Ctx::Fun, 0);
      out += " ";
      go(v.kid(1), Ctx::Arg, 0);
      if (paren) out += ")";
      return;
    }
    if (name == syn.lambda_op && v.arity() == 1) {
      bool paren = ctx != Ctx::Top;
      if (paren) out += "(";
      out += "λ.";
      go(v.kid(0), Ctx::Top, 0);
      if (paren) out += ")";
      return;
    }
    if (name == syn.neutral_op && v.arity() == 2 && spine_root_is_var(v)) {
      std::vector<V> spine;
      V cur = v;
      while (!cur.is_var()) {
        spine.push_back(cur.kid(1));
        cur = cur.kid(0);
      }
      out += std::to_string(cur.index()) + "*(";
      for (std::size_t i = spine.size(); i-- > 0;) {
        go(spine[i], Ctx::Top, 0);
        if (i) out += ", ";
      }
      out += ")";
      return;
    }
    if (const auto* inf = syn.infix_for_op(name); inf && v.arity() == 2) {
      bool paren = ctx == Ctx::Fun || ctx == Ctx::Arg || (ctx == Ctx::InfixL && prec > inf->prec) ||
                   (ctx == Ctx::InfixR && prec >= inf->prec);
      if (paren) out += "(";
      go(v.kid(0), Ctx::InfixL, inf->prec);
      out += " " + inf->symbol + " ";
      go(v.kid(1), Ctx::InfixR, inf->prec);
      if (paren) out += ")";
      return;
    }
    out += name;
    auto sorts = v.sorts();
    if (!sorts.empty()) {
      out += "[";
      for (std::size_t i = 0; i < sorts.size(); ++i) {
        if (i) out += ", ";
        out += to_string(sorts[i]);
      }
      out += "]";
    }
    if (v.arity() > 0) {
      out += "(";
      for (std::size_t i = 0; i < v.arity(); ++i) {
        if (i) out += ", ";
        go(v.kid(i), Ctx::Top, 0);
      }
      out += ")";
    }
  }

  std::string out;

 private:
  template <class V>
  bool spine_root_is_var(V v) const {
    while (!v.is_var()) {
      if (v.is_meta() || v.is_subst() || v.name() != sig_.syntax.neutral_op || v.arity() != 2)
        return false;
      v = v.kid(0);
    }
    return true;
  }

  template <class V>
  void atomic(const V& v) {
    bool simple = v.is_var() || v.is_meta();
    if (!simple) out += "(";
    go(v, Ctx::Top, 0);
    if (!simple) out += ")";
  }

  const SignatureSpec& sig_;
  std::size_t max_;
};

}  // namespace

Term parse_term(const SignatureSpec& sig, std::string_view text) {
  Ast a = Parser(sig, text, false).parse();
  Term t = to_term(sig, a);
  sort_check(sig, t, sig.binding ? Context(t.free_bound(), *sig.binding) : Context{});
  return t;
}

Template parse_template(const SignatureSpec& sig, std::string_view text,
                        const std::function<MetaTag(const std::string&)>& tag_of) {
  Ast a = Parser(sig, text, true).parse();
  return to_tpl(sig, a, tag_of);
}

std::string print(const SignatureSpec& sig, const Term& t, std::size_t max_len) {
  Printer p(sig, max_len);
  p.go(TermView{&t}, Ctx::Top, 0);
  if (max_len && p.out.size() > max_len) {
    std::size_t n = max_len;
    while (n > 0 && (static_cast<unsigned char>(p.out[n]) & 0xC0) == 0x80) --n;
    p.out.resize(n);
    p.out += "…";
  }
  return p.out;
}

std::string print(const SignatureSpec& sig, const Template& t) {
  Printer p(sig, 0);
  p.go(TplView{&t}, Ctx::Top, 0);
  return p.out;
}

}  // namespace sosforge
