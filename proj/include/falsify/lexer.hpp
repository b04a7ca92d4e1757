#pragma once

#include <cctype>
#include <cstdlib>
#include <string>
#include <vector>

#include "falsify/errors.hpp"

namespace falsify {

// Token stream shared by the STL, manual-fitness, and test-suite parsers.
// `#` starts a line comment; whitespace is insignificant.
struct Token {
  enum class Kind { Ident, Number, Symbol, End };
  Kind kind = Kind::End;
  std::string text;
  double number = 0.0;
  std::size_t offset = 0;
};

class Lexer {
public:
  explicit Lexer(std::string text) : text_(std::move(text)) { tokenize(); }

  const Token& peek(std::size_t ahead = 0) const {
    std::size_t i = pos_ + ahead;
    return i < tokens_.size() ? tokens_[i] : tokens_.back();
  }

  Token next() {
    const Token& t = peek();
    if (t.kind != Token::Kind::End) ++pos_;
    return t;
  }

  bool at_end() const { return peek().kind == Token::Kind::End; }

  // Consumes the token if it is the given symbol or keyword.
  bool accept(const std::string& text) {
    const Token& t = peek();
    if (t.kind != Token::Kind::End && t.text == text) {
      ++pos_;
      return true;
    }
    return false;
  }

  void expect(const std::string& text) {
    if (!accept(text))
      throw SyntaxError("expected `" + text + "`, found `" + describe(peek()) + "`",
                        peek().offset);
  }

  double expect_number() {
    const Token& t = peek();
    if (t.kind == Token::Kind::Number) {
      ++pos_;
      return t.number;
    }
    if (t.kind == Token::Kind::Symbol && t.text == "-") {
      ++pos_;
      return -expect_number();
    }
    throw SyntaxError("expected a number, found `" + describe(t) + "`", t.offset);
  }

  std::string expect_ident() {
    const Token& t = peek();
    if (t.kind != Token::Kind::Ident)
      throw SyntaxError("expected an identifier, found `" + describe(t) + "`",
                        t.offset);
    ++pos_;
    return t.text;
  }

  std::size_t position() const { return pos_; }
  void rewind(std::size_t pos) { pos_ = pos; }

  static std::string describe(const Token& t) {
    return t.kind == Token::Kind::End ? "<end of input>" : t.text;
  }

private:
  void tokenize() {
    std::size_t i = 0;
    const std::size_t n = text_.size();
    while (i < n) {
      char c = text_[i];
      if (std::isspace(static_cast<unsigned char>(c))) {
        ++i;
        continue;
      }
      if (c == '#') {
        while (i < n && text_[i] != '\n') ++i;
        continue;
      }
      Token t;
      t.offset = i;
      if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
        std::size_t j = i;
        while (j < n && (std::isalnum(static_cast<unsigned char>(text_[j])) ||
                         text_[j] == '_'))
          ++j;
        t.kind = Token::Kind::Ident;
        t.text = text_.substr(i, j - i);
        i = j;
      } else if (std::isdigit(static_cast<unsigned char>(c)) ||
                 (c == '.' && i + 1 < n &&
                  std::isdigit(static_cast<unsigned char>(text_[i + 1])))) {
        const char* start = text_.c_str() + i;
        char* end = nullptr;
        t.kind = Token::Kind::Number;
        t.number = std::strtod(start, &end);
        t.text = text_.substr(i, static_cast<std::size_t>(end - start));
        i += static_cast<std::size_t>(end - start);
      } else {
        t.kind = Token::Kind::Symbol;
        // Two-character operators first.
        if (i + 1 < n) {
          std::string two = text_.substr(i, 2);
          if (two == "<=" || two == ">=" || two == "->" || two == "=>") {
            t.text = two;
            i += 2;
            tokens_.push_back(t);
            continue;
          }
        }
        t.text = std::string(1, c);
        ++i;
      }
      tokens_.push_back(t);
    }
    Token end;
    end.kind = Token::Kind::End;
    end.offset = n;
    tokens_.push_back(end);
  }

  std::string text_;
  std::vector<Token> tokens_;
  std::size_t pos_ = 0;
};

}  // namespace falsify
