#include <cctype>

#include "sosforge/syntax.hpp"

namespace sosforge {

int compare(const Sort& a, const Sort& b) {
  if (a.is_var != b.is_var) return a.is_var ? -1 : 1;
  if (int c = a.name.compare(b.name); c != 0) return c < 0 ? -1 : 1;
  if (a.args.size() != b.args.size()) return a.args.size() < b.args.size() ? -1 : 1;
  for (std::size_t i = 0; i < a.args.size(); ++i)
    if (int c = compare(a.args[i], b.args[i]); c != 0) return c;
  return 0;
}

std::string to_string(const Sort& s) {
  if (!s.is_arrow()) return s.name;
  std::string d = to_string(s.dom());
  if (s.dom().is_arrow()) d = "(" + d + ")";
  return d + " -> " + to_string(s.cod());
}

Sort apply_sort(const SortSubst& sub, const Sort& s) {
  if (s.is_var) {
    auto it = sub.find(s.name);
    if (it == sub.end()) return s;
    return it->second;
  }
  if (s.args.empty()) return s;
  Sort out = s;
  for (auto& a : out.args) a = apply_sort(sub, a);
  return out;
}

bool has_vars(const Sort& s) {
  if (s.is_var) return true;
  for (const auto& a : s.args)
    if (has_vars(a)) return true;
  return false;
}

bool match_sort(const Sort& pattern, const Sort& target, SortSubst& sub) {
  if (pattern.is_var) {
    auto it = sub.find(pattern.name);
    if (it != sub.end()) return it->second == target;
    sub.emplace(pattern.name, target);
    return true;
  }
  if (target.is_var || pattern.name != target.name || pattern.args.size() != target.args.size())
    return false;
  for (std::size_t i = 0; i < pattern.args.size(); ++i)
    if (!match_sort(pattern.args[i], target.args[i], sub)) return false;
  return true;
}

namespace {

Sort resolve(const Sort& s, const SortSubst& sub) {
  Sort cur = s;
  while (cur.is_var) {
    auto it = sub.find(cur.name);
    if (it == sub.end()) break;
    cur = it->second;
  }
  return cur;
}

bool occurs(const std::string& v, const Sort& s, const SortSubst& sub) {
  Sort r = resolve(s, sub);
  if (r.is_var) return r.name == v;
  for (const auto& a : r.args)
    if (occurs(v, a, sub)) return true;
  return false;
}

}  // namespace

bool unify_sorts(const Sort& a0, const Sort& b0, SortSubst& sub) {
  Sort a = resolve(a0, sub), b = resolve(b0, sub);
  if (a.is_var && b.is_var && a.name == b.name) return true;
  if (a.is_var) {
    if (occurs(a.name, b, sub)) return false;
    sub[a.name] = b;
    return true;
  }
  if (b.is_var) return unify_sorts(b, a, sub);
  if (a.name != b.name || a.args.size() != b.args.size()) return false;
  for (std::size_t i = 0; i < a.args.size(); ++i)
    if (!unify_sorts(a.args[i], b.args[i], sub)) return false;
  return true;
}

namespace {

class SortParser {
 public:
  SortParser(std::string_view text, const std::vector<std::string>& vars) : s_(text), vars_(vars) {}

  Sort parse() {
    Sort r = arrow();
    skip();
    if (i_ != s_.size()) throw SyntaxError("trailing input in sort", i_);
    return r;
  }

 private:
  void skip() {
    while (i_ < s_.size() && std::isspace(static_cast<unsigned char>(s_[i_]))) ++i_;
  }
  Sort arrow() {
    Sort lhs = atom();
    skip();
    if (s_.substr(i_, 2) == "->") {
      i_ += 2;
      return Sort::arrow(std::move(lhs), arrow());
    }
    if (s_.substr(i_, 3) == "\xE2\x86\x92") {  // →
      i_ += 3;
      return Sort::arrow(std::move(lhs), arrow());
    }
    return lhs;
  }
  Sort atom() {
    skip();
    if (i_ < s_.size() && s_[i_] == '(') {
      ++i_;
      Sort r = arrow();
      skip();
      if (i_ >= s_.size() || s_[i_] != ')') throw SyntaxError("expected ')' in sort", i_);
      ++i_;
      return r;
    }
    std::size_t start = i_;
    while (i_ < s_.size() &&
           (std::isalnum(static_cast<unsigned char>(s_[i_])) || s_[i_] == '_' || s_[i_] == '\''))
      ++i_;
    if (start == i_) throw SyntaxError("expected a sort", i_);
    std::string name(s_.substr(start, i_ - start));
    for (const auto& v : vars_)
      if (v == name) return Sort::var(name);
    return Sort::base(name);
  }

  std::string_view s_;
  const std::vector<std::string>& vars_;
  std::size_t i_ = 0;
};

}  // namespace

Sort parse_sort(std::string_view text, const std::vector<std::string>& vars) {
  return SortParser(text, vars).parse();
}

}  // namespace sosforge
