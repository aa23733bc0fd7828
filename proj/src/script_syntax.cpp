#include <algorithm>
#include <charconv>
#include <sstream>

#include "rjs/error.hpp"
#include "rjs/script.hpp"

namespace rjs::script {

namespace {

bool is_ident_start(char c) { return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || c == '_'; }
bool is_digit(char c) { return c >= '0' && c <= '9'; }

constexpr std::string_view kKeywords[] = {"let", "fn", "function", "true", "false", "null"};

}  // namespace

std::vector<Token> tokenize(std::string_view src) {
  std::vector<Token> out;
  std::size_t i = 0, line = 1, col = 1;
  auto advance = [&](std::size_t n = 1) {
    for (std::size_t k = 0; k < n && i < src.size(); ++k, ++i) {
      if (src[i] == '\n') {
        ++line;
        col = 1;
      } else {
        ++col;
      }
    }
  };
  while (i < src.size()) {
    char c = src[i];
    if (c == ' ' || c == '\t' || c == '\r' || c == '\n') {
      advance();
      continue;
    }
    if (c == '/' && i + 1 < src.size() && src[i + 1] == '/') {
      while (i < src.size() && src[i] != '\n') advance();
      continue;
    }
    Token tok;
    tok.line = line;
    tok.column = col;
    if (is_digit(c)) {
      std::size_t start = i, j = i;
      while (j < src.size() && is_digit(src[j])) ++j;
      if (j + 1 < src.size() && src[j] == '.' && is_digit(src[j + 1])) {
        ++j;
        while (j < src.size() && is_digit(src[j])) ++j;
      }
      if (j < src.size() && (src[j] == 'e' || src[j] == 'E')) {
        std::size_t k = j + 1;
        if (k < src.size() && (src[k] == '+' || src[k] == '-')) ++k;
        if (k < src.size() && is_digit(src[k])) {
          while (k < src.size() && is_digit(src[k])) ++k;
          j = k;
        }
      }
      tok.kind = TokenKind::Number;
      tok.text = std::string(src.substr(start, j - start));
      auto [ptr, ec] = std::from_chars(src.data() + start, src.data() + j, tok.number);
      if (ec != std::errc{}) throw SourceError(Errc::Lex, line, col, "bad number '" + tok.text + "'");
      advance(j - start);
    } else if (is_ident_start(c)) {
      std::size_t j = i;
      while (j < src.size() && (is_ident_start(src[j]) || is_digit(src[j]))) ++j;
      tok.text = std::string(src.substr(i, j - i));
      tok.kind = std::find(std::begin(kKeywords), std::end(kKeywords), tok.text) != std::end(kKeywords)
                     ? TokenKind::Keyword
                     : TokenKind::Identifier;
      advance(j - i);
    } else if (c == '"') {
      std::size_t qline = line, qcol = col;
      advance();
      std::string body;
      bool closed = false;
      while (i < src.size()) {
        char d = src[i];
        if (d == '"') {
          advance();
          closed = true;
          break;
        }
        if (d == '\\') {
          if (i + 1 >= src.size()) break;
          char e = src[i + 1];
          switch (e) {
            case 'n': body += '\n'; break;
            case 't': body += '\t'; break;
            case 'r': body += '\r'; break;
            case '"': body += '"'; break;
            case '\\': body += '\\'; break;
            default: throw SourceError(Errc::Lex, line, col, std::string("unknown escape \\") + e);
          }
          advance(2);
          continue;
        }
        body += d;
        advance();
      }
      if (!closed) throw SourceError(Errc::Lex, qline, qcol, "unterminated string literal");
      tok.kind = TokenKind::String;
      tok.text = std::move(body);
    } else if (std::string_view("(){},;.=+-*/%").find(c) != std::string_view::npos) {
      tok.kind = TokenKind::Punct;
      tok.text = std::string(1, c);
      advance();
    } else {
      throw SourceError(Errc::Lex, line, col, std::string("unexpected character '") + c + "'");
    }
    out.push_back(std::move(tok));
  }
  Token end;
  end.kind = TokenKind::End;
  end.line = line;
  end.column = col;
  out.push_back(end);
  return out;
}

namespace {

class Parser {
 public:
  explicit Parser(const std::vector<Token>& tokens) : toks_(tokens) {}

  Program program() {
    Program out;
    while (peek().kind != TokenKind::End) out.push_back(statement());
    return out;
  }

 private:
  const Token& peek() const { return toks_[pos_]; }
  const Token& next() { return toks_[pos_ < toks_.size() - 1 ? pos_++ : pos_]; }

  bool at_punct(char c) const { return peek().kind == TokenKind::Punct && peek().text[0] == c; }
  bool at_keyword(std::string_view k) const { return peek().kind == TokenKind::Keyword && peek().text == k; }

  [[noreturn]] void fail(const std::string& what) const {
    const Token& t = peek();
    std::string got = t.kind == TokenKind::End ? "end of input" : "'" + t.text + "'";
    throw SourceError(Errc::Parse, t.line, t.column, what + ", found " + got);
  }

  void expect_punct(char c) {
    if (!at_punct(c)) fail(std::string("expected '") + c + "'");
    next();
  }

  std::string identifier() {
    if (peek().kind != TokenKind::Identifier) fail("expected an identifier");
    return next().text;
  }

  Stmt statement() {
    if (at_keyword("let")) {
      next();
      std::string name = identifier();
      expect_punct('=');
      Expr value = expression();
      expect_punct(';');
      return {LetStmt{std::move(name), std::move(value)}};
    }
    Expr e = expression();
    if (at_punct('=')) {
      if (!std::holds_alternative<Ident>(e.node) && !std::holds_alternative<Member>(e.node))
        fail("invalid assignment target");
      next();
      Expr value = expression();
      expect_punct(';');
      return {AssignStmt{std::move(e), std::move(value)}};
    }
    expect_punct(';');
    return {ExprStmt{std::move(e)}};
  }

  Expr expression() { return additive(); }

  Expr additive() {
    Expr lhs = multiplicative();
    while (at_punct('+') || at_punct('-')) {
      char op = next().text[0];
      lhs = Expr{BinExpr{op, std::move(lhs), multiplicative()}};
    }
    return lhs;
  }

  Expr multiplicative() {
    Expr lhs = unary();
    while (at_punct('*') || at_punct('/') || at_punct('%')) {
      char op = next().text[0];
      lhs = Expr{BinExpr{op, std::move(lhs), unary()}};
    }
    return lhs;
  }

  Expr unary() {
    if (at_punct('-') && toks_[pos_ + 1].kind != TokenKind::Number) {
      next();
      return Expr{BinExpr{'-', Expr{NumLit{0.0}}, unary()}};
    }
    return postfix();
  }

  Expr postfix() {
    Expr e = primary();
    while (true) {
      if (at_punct('.')) {
        next();
        e = Expr{Member{std::move(e), identifier()}};
      } else if (at_punct('(')) {
        next();
        std::vector<Expr> args;
        if (!at_punct(')')) {
          args.push_back(expression());
          while (at_punct(',')) {
            next();
            args.push_back(expression());
          }
        }
        expect_punct(')');
        e = Expr{Call{std::move(e), std::move(args)}};
      } else {
        return e;
      }
    }
  }

  Expr primary() {
    const Token& t = peek();
    switch (t.kind) {
      case TokenKind::Number: return Expr{NumLit{next().number}};
      case TokenKind::String: return Expr{StrLit{next().text}};
      case TokenKind::Identifier: return Expr{Ident{next().text}};
      case TokenKind::Keyword:
        if (t.text == "true" || t.text == "false") return Expr{BoolLit{next().text == "true"}};
        if (t.text == "null") {
          next();
          return Expr{NullLit{}};
        }
        if (t.text == "fn" || t.text == "function") return function_literal();
        fail("unexpected keyword");
      case TokenKind::Punct:
        if (t.text[0] == '-' && toks_[pos_ + 1].kind == TokenKind::Number) {
          next();
          return Expr{NumLit{-next().number}};
        }
        if (t.text[0] == '(') {
          next();
          Expr e = expression();
          expect_punct(')');
          return e;
        }
        fail("expected an expression");
      case TokenKind::End: fail("expected an expression");
    }
    fail("expected an expression");
  }

  Expr function_literal() {
    next();
    expect_punct('(');
    FnLit fn;
    if (!at_punct(')')) {
      fn.params.push_back(identifier());
      while (at_punct(',')) {
        next();
        fn.params.push_back(identifier());
      }
    }
    expect_punct(')');
    expect_punct('{');
    while (!at_punct('}')) {
      if (peek().kind == TokenKind::End) fail("expected '}'");
      fn.body.push_back(statement());
    }
    next();
    return Expr{std::move(fn)};
  }

  const std::vector<Token>& toks_;
  std::size_t pos_ = 0;
};

std::string quote(const std::string& s) {
  std::string out = "\"";
  for (char c : s) {
    switch (c) {
      case '"': out += "\\\""; break;
      case '\\': out += "\\\\"; break;
      case '\n': out += "\\n"; break;
      case '\t': out += "\\t"; break;
      case '\r': out += "\\r"; break;
      default: out += c;
    }
  }
  return out + "\"";
}

void print_stmt(const Stmt& s, std::string& out);

void print_expr(const Expr& e, std::string& out) {
  struct Visitor {
    std::string& out;
    void operator()(const NumLit& n) const { out += format_number(n.value); }
    void operator()(const StrLit& s) const { out += quote(s.value); }
    void operator()(const BoolLit& b) const { out += b.value ? "true" : "false"; }
    void operator()(const NullLit&) const { out += "null"; }
    void operator()(const Ident& i) const { out += i.name; }
    void operator()(const Member& m) const {
      print_expr(*m.object, out);
      out += '.';
      out += m.name;
    }
    void operator()(const Call& c) const {
      print_expr(*c.callee, out);
      out += '(';
      for (std::size_t i = 0; i < c.args.size(); ++i) {
        if (i) out += ", ";
        print_expr(c.args[i], out);
      }
      out += ')';
    }
    void operator()(const FnLit& f) const {
      out += "fn(";
      for (std::size_t i = 0; i < f.params.size(); ++i) {
        if (i) out += ", ";
        out += f.params[i];
      }
      out += ") {";
      for (const auto& s : f.body) {
        out += ' ';
        print_stmt(s, out);
      }
      out += " }";
    }
    void operator()(const BinExpr& b) const {
      out += '(';
      print_expr(*b.lhs, out);
      out += ' ';
      out += b.op;
      out += ' ';
      print_expr(*b.rhs, out);
      out += ')';
    }
  };
  std::visit(Visitor{out}, e.node);
}

void print_stmt(const Stmt& s, std::string& out) {
  if (const auto* let = std::get_if<LetStmt>(&s.node)) {
    out += "let " + let->name + " = ";
    print_expr(let->value, out);
  } else if (const auto* assign = std::get_if<AssignStmt>(&s.node)) {
    print_expr(assign->target, out);
    out += " = ";
    print_expr(assign->value, out);
  } else {
    print_expr(std::get<ExprStmt>(s.node).value, out);
  }
  out += ';';
}

}  // namespace

Program parse(const std::vector<Token>& tokens) { return Parser(tokens).program(); }

Program parse(std::string_view source) { return parse(tokenize(source)); }

std::string pretty_print(const Program& program) {
  std::string out;
  for (const auto& s : program) {
    print_stmt(s, out);
    out += '\n';
  }
  return out;
}

std::string pretty_print(const Expr& expr) {
  std::string out;
  print_expr(expr, out);
  return out;
}

}  // namespace rjs::script
