#pragma once

#include <cctype>
#include <string>
#include <string_view>
#include <vector>

namespace sosforge {

inline std::string trim(std::string_view s) {
  std::size_t b = 0, e = s.size();
  while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
  return std::string(s.substr(b, e - b));
}

inline std::string strip_comment(std::string_view s) {
  auto p = s.find('#');
  return std::string(p == std::string_view::npos ? s : s.substr(0, p));
}

inline std::vector<std::string> split_ws(std::string_view s) {
  std::vector<std::string> out;
  std::size_t i = 0;
  while (i < s.size()) {
    while (i < s.size() && std::isspace(static_cast<unsigned char>(s[i]))) ++i;
    std::size_t b = i;
    while (i < s.size() && !std::isspace(static_cast<unsigned char>(s[i]))) ++i;
    if (i > b) out.emplace_back(s.substr(b, i - b));
  }
  return out;
}

inline std::string first_word(std::string_view s) {
  std::size_t i = 0;
  while (i < s.size() && !std::isspace(static_cast<unsigned char>(s[i]))) ++i;
  return std::string(s.substr(0, i));
}

inline bool starts_with_word(std::string_view s, std::string_view w) {
  return s.substr(0, w.size()) == w &&
         (s.size() == w.size() || std::isspace(static_cast<unsigned char>(s[w.size()])));
}

/// Splits on `sep` outside of parentheses and brackets.
inline std::vector<std::string> split_top(std::string_view s, char sep) {
  std::vector<std::string> out;
  int depth = 0;
  std::size_t start = 0;
  for (std::size_t i = 0; i < s.size(); ++i) {
    char c = s[i];
    if (c == '(' || c == '[') ++depth;
    if (c == ')' || c == ']') --depth;
    if (c == sep && depth == 0) {
      out.emplace_back(s.substr(start, i - start));
      start = i + 1;
    }
  }
  if (start < s.size() || !out.empty()) out.emplace_back(s.substr(start));
  return out;
}

/// Finds `needle` outside parentheses/brackets; npos if absent.
inline std::size_t find_top(std::string_view s, std::string_view needle, std::size_t from = 0) {
  int depth = 0;
  for (std::size_t i = 0; i < s.size(); ++i) {
    char c = s[i];
    if (i >= from && depth == 0 && s.substr(i, needle.size()) == needle) return i;
    if (c == '(' || c == '[') ++depth;
    if (c == ')' || c == ']') --depth;
  }
  return std::string_view::npos;
}

}  // namespace sosforge
