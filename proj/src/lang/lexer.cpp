#include "lexer.hpp"

#include <cctype>
#include <cstdlib>

namespace aidl::lang {

std::string normalize_newlines(std::string text) {
  std::string out;
  out.reserve(text.size());
  for (std::size_t i = 0; i < text.size(); ++i) {
    if (text[i] == '\r') {
      if (i + 1 < text.size() && text[i + 1] == '\n') continue;
      out += '\n';
    } else {
      out += text[i];
    }
  }
  return out;
}

std::vector<Token> lex(const std::string& text, std::vector<Diagnostic>& diagnostics,
                       const std::string& file) {
  std::vector<Token> out;
  int line = 1, col = 1;
  std::size_t i = 0;
  const std::size_t n = text.size();

  auto advance = [&](std::size_t k) {
    for (std::size_t j = 0; j < k && i < n; ++j, ++i) {
      if (text[i] == '\n') {
        ++line;
        col = 1;
      } else {
        ++col;
      }
    }
  };

  auto push = [&](Tok kind, std::size_t len, const std::string& t = "", double num = 0.0) {
    Token tok;
    tok.kind = kind;
    tok.text = t;
    tok.num = num;
    tok.span = {line, col, line, col + static_cast<int>(len)};
    out.push_back(std::move(tok));
    advance(len);
  };

  while (i < n) {
    char c = text[i];
    if (c == ' ' || c == '\t' || c == '\n') {
      advance(1);
      continue;
    }
    if (c == '/' && i + 1 < n && text[i + 1] == '/') {
      while (i < n && text[i] != '\n') advance(1);
      continue;
    }
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
      std::size_t j = i;
      while (j < n && (std::isalnum(static_cast<unsigned char>(text[j])) || text[j] == '_')) ++j;
      push(Tok::Ident, j - i, text.substr(i, j - i));
      continue;
    }
    if (std::isdigit(static_cast<unsigned char>(c)) ||
        (c == '.' && i + 1 < n && std::isdigit(static_cast<unsigned char>(text[i + 1])))) {
      std::size_t j = i;
      while (j < n && std::isdigit(static_cast<unsigned char>(text[j]))) ++j;
      if (j < n && text[j] == '.' && j + 1 < n &&
          std::isdigit(static_cast<unsigned char>(text[j + 1]))) {
        ++j;
        while (j < n && std::isdigit(static_cast<unsigned char>(text[j]))) ++j;
      }
      if (j < n && (text[j] == 'e' || text[j] == 'E')) {
        std::size_t k = j + 1;
        if (k < n && (text[k] == '+' || text[k] == '-')) ++k;
        if (k < n && std::isdigit(static_cast<unsigned char>(text[k]))) {
          ++k;
          while (k < n && std::isdigit(static_cast<unsigned char>(text[k]))) ++k;
          j = k;
        }
      }
      std::string lit = text.substr(i, j - i);
      push(Tok::Number, j - i, lit, std::strtod(lit.c_str(), nullptr));
      continue;
    }
    switch (c) {
      case '{': push(Tok::LBrace, 1); continue;
      case '}': push(Tok::RBrace, 1); continue;
      case '(': push(Tok::LParen, 1); continue;
      case ')': push(Tok::RParen, 1); continue;
      case ',': push(Tok::Comma, 1); continue;
      case '.': push(Tok::Dot, 1); continue;
      case ':': push(Tok::Colon, 1); continue;
      case '+': push(Tok::Plus, 1); continue;
      case '-': push(Tok::Minus, 1); continue;
      case '*': push(Tok::Star, 1); continue;
      case '/': push(Tok::Slash, 1); continue;
      case '=':
        if (i + 1 < n && text[i + 1] == '=') push(Tok::EqEq, 2, "==");
        else push(Tok::Assign, 1, "=");
        continue;
      case '<':
        if (i + 1 < n && text[i + 1] == '=') { push(Tok::Le, 2, "<="); continue; }
        break;
      case '>':
        if (i + 1 < n && text[i + 1] == '=') { push(Tok::Ge, 2, ">="); continue; }
        break;
      case '&':
        if (i + 1 < n && text[i + 1] == '&') { push(Tok::AndAnd, 2, "&&"); continue; }
        break;
      default:
        break;
    }
    Diagnostic d;
    d.code = "E0001";
    d.severity = Severity::Error;
    d.message = std::string("unexpected character '") + c + "'";
    d.file = file;
    d.span = {line, col, line, col + 1};
    diagnostics.push_back(std::move(d));
    advance(1);
  }
  Token eof;
  eof.kind = Tok::Eof;
  eof.span = {line, col, line, col};
  out.push_back(std::move(eof));
  return out;
}

}  // namespace aidl::lang
