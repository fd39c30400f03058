#include "parser.hpp"

#include <cctype>
#include <numbers>

#include "lexer.hpp"

namespace aidl::lang {

namespace {

bool is_stmt_keyword(const std::string& t) {
  return t == "structure" || t == "param" || t == "point" || t == "line" || t == "arc" ||
         t == "circle" || t == "rect" || t == "triangle" || t == "constrain";
}

struct Parser {
  const std::vector<Token>& toks;
  std::vector<Diagnostic>& diags;
  const std::string& file;
  std::size_t pos = 0;

  const Token& cur() const { return toks[pos]; }
  const Token& peek(std::size_t k = 1) const {
    return toks[std::min(pos + k, toks.size() - 1)];
  }
  bool at(Tok k) const { return cur().kind == k; }
  bool at_ident(const char* t) const { return at(Tok::Ident) && cur().text == t; }
  Token take() { return toks[pos == toks.size() - 1 ? pos : pos++]; }

  void error(const SourceSpan& span, const std::string& msg) {
    Diagnostic d;
    d.code = "E0001";
    d.severity = Severity::Error;
    d.message = msg;
    d.file = file;
    d.span = span;
    diags.push_back(std::move(d));
  }

  bool expect(Tok k, const char* what) {
    if (at(k)) {
      take();
      return true;
    }
    error(cur().span, std::string("expected ") + what);
    return false;
  }

  std::string expect_ident(const char* what) {
    if (at(Tok::Ident)) return take().text;
    error(cur().span, std::string("expected ") + what);
    return "";
  }

  // Skip to the start of the next statement (or closing brace).
  void recover() {
    while (!at(Tok::Eof)) {
      if (at(Tok::RBrace)) return;
      if (at(Tok::Ident) && is_stmt_keyword(cur().text)) return;
      take();
    }
  }

  // --- expressions ---------------------------------------------------------

  AstExpr number_lit() {
    Token t = take();
    AstExpr e;
    e.kind = AstExpr::Kind::Number;
    e.number = t.num;
    e.span = t.span;
    if (at_ident("deg")) {
      take();
      e.number = e.number * std::numbers::pi / 180.0;
    }
    return e;
  }

  AstExpr path_or_call() {
    Token first = take();
    if (at(Tok::LParen)) {
      // function call
      AstExpr e;
      e.kind = AstExpr::Kind::Call;
      e.call = first.text;
      e.span = first.span;
      take();  // (
      if (!at(Tok::RParen)) {
        e.items.push_back(expr());
        while (at(Tok::Comma)) {
          take();
          e.items.push_back(expr());
        }
      }
      expect(Tok::RParen, "')'");
      return e;
    }
    AstExpr e;
    e.kind = AstExpr::Kind::Path;
    e.span = first.span;
    e.path.push_back(first.text);
    while (at(Tok::Dot)) {
      take();
      e.path.push_back(expect_ident("name after '.'"));
      e.span.end_line = cur().span.line;
      e.span.end_col = cur().span.col;
    }
    return e;
  }

  AstExpr factor() {
    if (at(Tok::Minus)) {
      Token t = take();
      AstExpr e;
      e.kind = AstExpr::Kind::Neg;
      e.span = t.span;
      e.a = std::make_unique<AstExpr>(factor());
      return e;
    }
    if (at(Tok::Number)) return number_lit();
    if (at(Tok::Ident)) return path_or_call();
    if (at(Tok::LParen)) {
      take();
      AstExpr inner = expr();
      expect(Tok::RParen, "')'");
      return inner;
    }
    error(cur().span, "expected an expression");
    AstExpr e;
    e.kind = AstExpr::Kind::Number;
    e.span = cur().span;
    if (!at(Tok::Eof) && !at(Tok::RBrace)) take();
    return e;
  }

  AstExpr term() {
    AstExpr lhs = factor();
    while (at(Tok::Star) || at(Tok::Slash)) {
      char op = at(Tok::Star) ? '*' : '/';
      Token t = take();
      AstExpr e;
      e.kind = AstExpr::Kind::Binary;
      e.op = op;
      e.span = t.span;
      e.a = std::make_unique<AstExpr>(std::move(lhs));
      e.b = std::make_unique<AstExpr>(factor());
      lhs = std::move(e);
    }
    return lhs;
  }

  AstExpr expr() {
    AstExpr lhs = term();
    while (at(Tok::Plus) || at(Tok::Minus)) {
      char op = at(Tok::Plus) ? '+' : '-';
      Token t = take();
      AstExpr e;
      e.kind = AstExpr::Kind::Binary;
      e.op = op;
      e.span = t.span;
      e.a = std::make_unique<AstExpr>(std::move(lhs));
      e.b = std::make_unique<AstExpr>(term());
      lhs = std::move(e);
    }
    return lhs;
  }

  AstExpr comparison() {
    AstExpr lhs = expr();
    if (at(Tok::EqEq) || at(Tok::Le) || at(Tok::Ge)) {
      CmpOp op = at(Tok::EqEq) ? CmpOp::Eq : at(Tok::Le) ? CmpOp::Le : CmpOp::Ge;
      Token t = take();
      AstExpr e;
      e.kind = AstExpr::Kind::Cmp;
      e.cmp = op;
      e.span = t.span;
      e.a = std::make_unique<AstExpr>(std::move(lhs));
      e.b = std::make_unique<AstExpr>(expr());
      return e;
    }
    return lhs;
  }

  AstExpr logical() {
    AstExpr lhs = comparison();
    while (at(Tok::AndAnd)) {
      Token t = take();
      AstExpr e;
      e.kind = AstExpr::Kind::And;
      e.span = t.span;
      e.a = std::make_unique<AstExpr>(std::move(lhs));
      e.b = std::make_unique<AstExpr>(comparison());
      lhs = std::move(e);
    }
    return lhs;
  }

  // Constructor argument: tuple or expression.
  AstExpr arg_value() {
    if (at(Tok::LParen)) {
      Token open = take();
      AstExpr first = expr();
      if (at(Tok::Comma)) {
        take();
        AstExpr second = expr();
        expect(Tok::RParen, "')'");
        AstExpr e;
        e.kind = AstExpr::Kind::Tuple;
        e.span = open.span;
        e.items.push_back(std::move(first));
        e.items.push_back(std::move(second));
        return e;
      }
      expect(Tok::RParen, "')'");
      return first;
    }
    return expr();
  }

  // --- statements ----------------------------------------------------------

  AstStmt param_decl() {
    AstStmt stmt;
    stmt.kind = AstStmt::Kind::Param;
    auto d = std::make_unique<AstParamDecl>();
    d->span = cur().span;
    take();  // param
    d->name = expect_ident("parameter name");
    expect(Tok::Assign, "'='");
    d->init = expr();
    if (at_ident("fixed")) {
      take();
      d->fixed = true;
    }
    stmt.param = std::move(d);
    return stmt;
  }

  AstStmt geo_decl() {
    AstStmt stmt;
    stmt.kind = AstStmt::Kind::Geo;
    auto d = std::make_unique<AstGeoDecl>();
    d->span = cur().span;
    d->keyword = take().text;
    d->name = expect_ident("geometry name");
    expect(Tok::Assign, "'='");
    d->ctor = expect_ident("constructor name");
    expect(Tok::LParen, "'('");
    if (!at(Tok::RParen)) {
      while (true) {
        AstNamedArg arg;
        arg.span = cur().span;
        arg.name = expect_ident("argument name");
        expect(Tok::Assign, "'='");
        arg.value = arg_value();
        d->args.push_back(std::move(arg));
        if (!at(Tok::Comma)) break;
        take();
      }
    }
    expect(Tok::RParen, "')'");
    stmt.geo = std::move(d);
    return stmt;
  }

  AstStmt constrain_stmt() {
    AstStmt stmt;
    stmt.kind = AstStmt::Kind::Constrain;
    auto d = std::make_unique<AstConstrain>();
    d->span = cur().span;
    take();  // constrain
    // Capitalized identifier followed by '(' is a constraint call; math
    // builtins are lowercase so raw equations stay unambiguous.
    if (at(Tok::Ident) && !cur().text.empty() &&
        std::isupper(static_cast<unsigned char>(cur().text[0])) &&
        peek().kind == Tok::LParen) {
      d->is_call = true;
      d->name = take().text;
      take();  // (
      if (!at(Tok::RParen)) {
        d->args.push_back(expr());
        while (at(Tok::Comma)) {
          take();
          d->args.push_back(expr());
        }
      }
      expect(Tok::RParen, "')'");
    } else {
      AstExpr eq = logical();
      if (eq.kind != AstExpr::Kind::Cmp && eq.kind != AstExpr::Kind::And) {
        error(d->span, "constraint must be a comparison (==, <=, >=) or a constraint call");
      }
      d->equation = std::make_unique<AstExpr>(std::move(eq));
    }
    stmt.constrain = std::move(d);
    return stmt;
  }

  std::unique_ptr<AstStructure> structure_decl() {
    auto s = std::make_unique<AstStructure>();
    s->span = cur().span;
    take();  // structure
    s->name = expect_ident("structure name");
    expect(Tok::Colon, "':'");
    s->type = expect_ident("structure type (Assembly, Solid, Hole or Drawing)");
    if (at(Tok::Ident) && (cur().text == "Top" || cur().text == "Front" || cur().text == "Side"))
      s->orientation = take().text;
    if (at_ident("at")) {
      take();
      s->has_at = true;
      expect(Tok::LParen, "'('");
      s->at_x = expr();
      expect(Tok::Comma, "','");
      s->at_y = expr();
      expect(Tok::RParen, "')'");
    }
    SourceSpan open = cur().span;
    if (!expect(Tok::LBrace, "'{'")) {
      recover();
      return s;
    }
    while (!at(Tok::RBrace) && !at(Tok::Eof)) {
      if (!at(Tok::Ident) || !is_stmt_keyword(cur().text)) {
        error(cur().span, "expected a declaration or constraint");
        recover();
        if (at(Tok::RBrace) || at(Tok::Eof)) break;
      }
      const std::string& kw = cur().text;
      if (kw == "structure") {
        AstStmt stmt;
        stmt.kind = AstStmt::Kind::Structure;
        stmt.structure = structure_decl();
        s->body.push_back(std::move(stmt));
      } else if (kw == "param") {
        s->body.push_back(param_decl());
      } else if (kw == "constrain") {
        s->body.push_back(constrain_stmt());
      } else {
        s->body.push_back(geo_decl());
      }
    }
    if (at(Tok::RBrace)) {
      take();
    } else {
      error(cur().span, "missing '}' before end of file");
      Diagnostic note;
      note.code = "E0001";
      note.severity = Severity::Note;
      note.message = "the unclosed '{' is here";
      note.file = file;
      note.span = open;
      diags.push_back(std::move(note));
    }
    return s;
  }

  AstUnit unit() {
    AstUnit u;
    if (at(Tok::Ident) && cur().text == "structure") {
      u.root = structure_decl();
    } else {
      error(cur().span, "a program is a single top-level 'structure' block");
      return u;
    }
    if (!at(Tok::Eof)) error(cur().span, "unexpected content after the root structure");
    return u;
  }
};

}  // namespace

ParseResult parse(const std::string& text, const std::string& file) {
  ParseResult result;
  std::string norm = normalize_newlines(text);
  auto tokens = lex(norm, result.diagnostics, file);
  Parser p{tokens, result.diagnostics, file};
  result.unit = p.unit();
  if (has_errors(result.diagnostics)) result.unit.root.reset();
  return result;
}

}  // namespace aidl::lang
