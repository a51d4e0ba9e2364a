#pragma once

// Minimal s-expression reader shared by the term, formula, model and lr
// file formats. Atoms are runs of non-blank, non-paren characters; `;`
// starts a comment that runs to the end of the line.

#include <cctype>
#include <string>
#include <string_view>
#include <vector>

#include "nsa/error.hpp"

namespace nsa {

struct Sexpr {
  bool is_list = false;
  std::string atom;
  std::vector<Sexpr> items;
  std::size_t position = 0;
  std::size_t line = 1;
  std::size_t column = 1;

  bool is_atom() const noexcept { return !is_list; }
  bool is_atom(std::string_view s) const { return !is_list && atom == s; }
  std::size_t size() const noexcept { return items.size(); }
  const Sexpr& operator[](std::size_t i) const { return items.at(i); }

  /// Head symbol of a list, or "" when there is none.
  const std::string& head() const {
    static const std::string none;
    return is_list && !items.empty() && items[0].is_atom() ? items[0].atom : none;
  }

  [[noreturn]] void fail(const std::string& msg) const { throw SyntaxError(msg, position, line, column); }

  std::string str() const {
    if (!is_list) return atom;
    std::string s = "(";
    for (std::size_t i = 0; i < items.size(); ++i) s += (i ? " " : "") + items[i].str();
    return s + ")";
  }
};

class SexprReader {
public:
  explicit SexprReader(std::string_view text) : text_(text) {}

  /// Every top-level expression in the text.
  std::vector<Sexpr> read_all() {
    std::vector<Sexpr> out;
    skip();
    while (pos_ < text_.size()) {
      out.push_back(read());
      skip();
    }
    return out;
  }

  /// Exactly one expression.
  Sexpr read_one() {
    skip();
    if (pos_ >= text_.size()) error("empty input");
    Sexpr e = read();
    skip();
    if (pos_ < text_.size()) error("unexpected text after expression");
    return e;
  }

private:
  Sexpr read() {
    skip();
    if (pos_ >= text_.size()) error("unexpected end of input");
    Sexpr e;
    e.position = pos_;
    e.line = line_;
    e.column = column_;
    char ch = text_[pos_];
    if (ch == ')') error("unexpected ')'");
    if (ch == '(') {
      e.is_list = true;
      advance();
      for (;;) {
        skip();
        if (pos_ >= text_.size())
          throw SyntaxError("unbalanced '(' opened", e.position, e.line, e.column);
        if (text_[pos_] == ')') {
          advance();
          return e;
        }
        e.items.push_back(read());
      }
    }
    while (pos_ < text_.size() && !delimiter(text_[pos_])) {
      e.atom += text_[pos_];
      advance();
    }
    return e;
  }

  static bool delimiter(char c) {
    return std::isspace(static_cast<unsigned char>(c)) || c == '(' || c == ')' || c == ';';
  }

  void skip() {
    while (pos_ < text_.size()) {
      char c = text_[pos_];
      if (c == ';') {
        while (pos_ < text_.size() && text_[pos_] != '\n') advance();
      } else if (std::isspace(static_cast<unsigned char>(c))) {
        advance();
      } else {
        break;
      }
    }
  }

  void advance() {
    if (text_[pos_] == '\n') {
      ++line_;
      column_ = 1;
    } else {
      ++column_;
    }
    ++pos_;
  }

  [[noreturn]] void error(const std::string& msg) const { throw SyntaxError(msg, pos_, line_, column_); }

  std::string_view text_;
  std::size_t pos_ = 0, line_ = 1, column_ = 1;
};

inline Sexpr read_sexpr(std::string_view text) { return SexprReader(text).read_one(); }
inline std::vector<Sexpr> read_sexprs(std::string_view text) { return SexprReader(text).read_all(); }

}  // namespace nsa
