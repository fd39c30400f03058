#pragma once

#include <string>
#include <vector>

#include "../diagnostics.hpp"

namespace aidl::lang {

enum class Tok : std::uint8_t {
  Ident, Number,
  LBrace, RBrace, LParen, RParen,
  Comma, Dot, Colon, Assign,
  EqEq, Le, Ge, AndAnd,
  Plus, Minus, Star, Slash,
  Eof, Error,
};

struct Token {
  Tok kind = Tok::Eof;
  std::string text;
  double num = 0.0;
  SourceSpan span;
};

// UTF-8 source, newline-normalized before lexing. Comments run from "//" to
// end of line.
std::vector<Token> lex(const std::string& text, std::vector<Diagnostic>& diagnostics,
                       const std::string& file);

std::string normalize_newlines(std::string text);

}  // namespace aidl::lang
