#pragma once

// Character-level scanner with line/column tracking, shared by the RDF
// document readers and the query parser. Internal plumbing; the public
// surface of the library is the parse/load functions built on top.

#include <cctype>
#include <string>
#include <string_view>

#include "plantkg/error.hpp"

namespace plantkg::util {

inline bool pn_local_char(char c) {
  return std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '-' ||
         c == '%';
}

class Scanner {
 public:
  explicit Scanner(std::string_view text, std::size_t start_line = 1)
      : text_(text), line_(start_line) {}

  std::size_t line() const { return line_; }
  std::size_t col() const { return col_; }

  bool eof() const { return pos_ >= text_.size(); }
  char peek(std::size_t ahead = 0) const {
    return pos_ + ahead < text_.size() ? text_[pos_ + ahead] : '\0';
  }

  char advance() {
    char c = text_[pos_++];
    if (c == '\n') {
      ++line_;
      col_ = 1;
    } else {
      ++col_;
    }
    return c;
  }

  void skip_ws_and_comments() {
    while (!eof()) {
      char c = peek();
      if (c == '#') {
        while (!eof() && peek() != '\n') advance();
      } else if (std::isspace(static_cast<unsigned char>(c))) {
        advance();
      } else {
        return;
      }
    }
  }

  [[noreturn]] void fail(const std::string& msg) const {
    throw ParseError(msg, line_, col_);
  }

  bool consume(char c) {
    if (peek() == c) {
      advance();
      return true;
    }
    return false;
  }

  void expect(char c, const char* what) {
    if (!consume(c)) fail(std::string("expected '") + c + "' (" + what + ")");
  }

  // Reads <...>; checks the IRI is absolute.
  std::string read_iriref() {
    expect('<', "IRI");
    std::string value;
    while (!eof() && peek() != '>') {
      char c = advance();
      if (c == '\n') fail("unterminated IRI");
      value += c;
    }
    expect('>', "IRI close");
    if (value.find("://") == std::string::npos && value.find(':') == std::string::npos)
      fail("IRI is not absolute: <" + value + ">");
    return value;
  }

  // Quoted string with \t \n \r \" \\ \uXXXX \UXXXXXXXX escapes.
  std::string read_string() {
    expect('"', "string");
    std::string out;
    while (true) {
      if (eof()) fail("unterminated string literal");
      char c = advance();
      if (c == '"') return out;
      if (c == '\n') fail("newline in string literal");
      if (c != '\\') {
        out += c;
        continue;
      }
      if (eof()) fail("dangling escape");
      char e = advance();
      switch (e) {
        case 't': out += '\t'; break;
        case 'n': out += '\n'; break;
        case 'r': out += '\r'; break;
        case '"': out += '"'; break;
        case '\\': out += '\\'; break;
        case 'u': out += read_unicode(4); break;
        case 'U': out += read_unicode(8); break;
        default: fail(std::string("unknown escape '\\") + e + "'");
      }
    }
  }

  // Bare name token: letters, digits, '_', '-'.
  std::string read_name() {
    std::string out;
    while (!eof()) {
      char c = peek();
      if (std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '-')
        out += advance();
      else
        break;
    }
    return out;
  }

  // Local part of a prefixed name. A '.' is included only when followed by
  // another local character, so statement-terminating dots stay separate.
  std::string read_pn_local() {
    std::string out;
    while (!eof()) {
      char c = peek();
      if (pn_local_char(c)) {
        out += advance();
      } else if (c == '.' && pn_local_char(peek(1))) {
        out += advance();
      } else {
        break;
      }
    }
    return out;
  }

 private:
  std::string read_unicode(int digits) {
    unsigned code = 0;
    for (int i = 0; i < digits; ++i) {
      if (eof()) fail("truncated unicode escape");
      char c = advance();
      code <<= 4;
      if (c >= '0' && c <= '9')
        code += c - '0';
      else if (c >= 'a' && c <= 'f')
        code += 10 + c - 'a';
      else if (c >= 'A' && c <= 'F')
        code += 10 + c - 'A';
      else
        fail("bad unicode escape digit");
    }
    std::string out;
    if (code < 0x80) {
      out += static_cast<char>(code);
    } else if (code < 0x800) {
      out += static_cast<char>(0xC0 | (code >> 6));
      out += static_cast<char>(0x80 | (code & 0x3F));
    } else if (code < 0x10000) {
      out += static_cast<char>(0xE0 | (code >> 12));
      out += static_cast<char>(0x80 | ((code >> 6) & 0x3F));
      out += static_cast<char>(0x80 | (code & 0x3F));
    } else {
      out += static_cast<char>(0xF0 | (code >> 18));
      out += static_cast<char>(0x80 | ((code >> 12) & 0x3F));
      out += static_cast<char>(0x80 | ((code >> 6) & 0x3F));
      out += static_cast<char>(0x80 | (code & 0x3F));
    }
    return out;
  }

  std::string_view text_;
  std::size_t pos_ = 0;
  std::size_t line_;
  std::size_t col_ = 1;
};

}  // namespace plantkg::util
