#pragma once

#include <cstddef>
#include <iosfwd>
#include <map>
#include <memory>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "rjs/box.hpp"
#include "rjs/bridge.hpp"

namespace rjs {
class Runtime;
}

namespace rjs::script {

enum class TokenKind { Number, String, Identifier, Keyword, Punct, End };

struct Token {
  TokenKind kind = TokenKind::End;
  std::string text;  // identifier/keyword/punct spelling, decoded string body
  double number = 0.0;
  std::size_t line = 1;
  std::size_t column = 1;
};

/// Throws SourceError(Lex) with the position of the offending character
/// (for strings, the opening quote).
std::vector<Token> tokenize(std::string_view source);

struct Expr;
struct Stmt;

struct NumLit {
  double value = 0.0;
  friend bool operator==(const NumLit&, const NumLit&) = default;
};
struct StrLit {
  std::string value;
  friend bool operator==(const StrLit&, const StrLit&) = default;
};
struct BoolLit {
  bool value = false;
  friend bool operator==(const BoolLit&, const BoolLit&) = default;
};
struct NullLit {
  friend bool operator==(const NullLit&, const NullLit&) = default;
};
struct Ident {
  std::string name;
  friend bool operator==(const Ident&, const Ident&) = default;
};
struct Member {
  Box<Expr> object;
  std::string name;
  friend bool operator==(const Member&, const Member&) = default;
};
struct Call {
  Box<Expr> callee;
  std::vector<Expr> args;
  friend bool operator==(const Call&, const Call&) = default;
};
struct FnLit {
  std::vector<std::string> params;
  std::vector<Stmt> body;
  friend bool operator==(const FnLit&, const FnLit&) = default;
};
struct BinExpr {
  char op = '+';
  Box<Expr> lhs;
  Box<Expr> rhs;
  friend bool operator==(const BinExpr&, const BinExpr&) = default;
};

struct Expr {
  std::variant<NumLit, StrLit, BoolLit, NullLit, Ident, Member, Call, FnLit, BinExpr> node;
  friend bool operator==(const Expr&, const Expr&) = default;
};

struct LetStmt {
  std::string name;
  Expr value;
  friend bool operator==(const LetStmt&, const LetStmt&) = default;
};
/// `name = expr;` or `object.name = expr;`
struct AssignStmt {
  Expr target;
  Expr value;
  friend bool operator==(const AssignStmt&, const AssignStmt&) = default;
};
struct ExprStmt {
  Expr value;
  friend bool operator==(const ExprStmt&, const ExprStmt&) = default;
};

struct Stmt {
  std::variant<LetStmt, AssignStmt, ExprStmt> node;
  friend bool operator==(const Stmt&, const Stmt&) = default;
};

using Program = std::vector<Stmt>;

Program parse(const std::vector<Token>& tokens);
Program parse(std::string_view source);

/// Source text that parses back to the same program. Binary expressions
/// are fully parenthesised.
std::string pretty_print(const Program& program);
std::string pretty_print(const Expr& expr);

/// Lexical scope. Names resolve innermost-out.
class Environment {
 public:
  explicit Environment(std::shared_ptr<Environment> parent = nullptr) : parent_(std::move(parent)) {}

  void define(const std::string& name, ScriptValue value);
  const ScriptValue* find(const std::string& name) const;
  /// Throws NameError when no enclosing scope declares `name`.
  void assign(const std::string& name, ScriptValue value);

 private:
  std::map<std::string, ScriptValue, std::less<>> bindings_;
  std::shared_ptr<Environment> parent_;
};

using EnvPtr = std::shared_ptr<Environment>;

/// Tree-walking evaluator bound to a runtime. Predefines `root`, `print`
/// and `pump` in its global scope.
class Interpreter {
 public:
  Interpreter(Runtime& runtime, std::ostream& out);

  /// Evaluates in the global scope; returns the last statement's value.
  ScriptValue run(std::shared_ptr<const Program> program);
  ScriptValue run_source(std::string_view source);

  const EnvPtr& globals() const { return globals_; }
  Runtime& runtime() { return runtime_; }
  std::ostream& out() { return out_; }

  /// Applies a script function or native to arguments.
  ScriptValue apply(const ScriptValue& callee, std::vector<ScriptValue> args);

 private:
  friend class Closure;

  ScriptValue exec_block(const std::vector<Stmt>& body, const EnvPtr& env,
                         const std::shared_ptr<const Program>& owner);
  ScriptValue exec(const Stmt& stmt, const EnvPtr& env, const std::shared_ptr<const Program>& owner);
  ScriptValue eval(const Expr& expr, const EnvPtr& env, const std::shared_ptr<const Program>& owner);

  Runtime& runtime_;
  std::ostream& out_;
  EnvPtr globals_;
};

/// Interactive session state: one interpreter, errors rendered not thrown.
class ReplSession {
 public:
  ReplSession(Runtime& runtime, std::ostream& out);

  /// Evaluates one line, then pumps finished calls once. Returns false after
  /// `.quit`.
  bool step(std::string_view line);

  Interpreter& interpreter() { return interpreter_; }

 private:
  Interpreter interpreter_;
  std::ostream& out_;
};

}  // namespace rjs::script
