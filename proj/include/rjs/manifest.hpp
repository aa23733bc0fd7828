#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "rjs/box.hpp"
#include "rjs/value.hpp"

namespace rjs {

// Host method bodies. These stand in for compiled host code and are run by
// the heap's evaluator.

struct Expr;

struct ConstExpr {
  HostValue value;
  friend bool operator==(const ConstExpr&, const ConstExpr&) = default;
};
struct ParamExpr {
  std::size_t index = 0;
  friend bool operator==(const ParamExpr&, const ParamExpr&) = default;
};
struct SelfExpr {
  friend bool operator==(const SelfExpr&, const SelfExpr&) = default;
};
struct FieldExpr {
  std::string field;
  friend bool operator==(const FieldExpr&, const FieldExpr&) = default;
};
struct GlobalExpr {
  std::string name;
  friend bool operator==(const GlobalExpr&, const GlobalExpr&) = default;
};

enum class BinaryOp : char { Add = '+', Sub = '-', Mul = '*', Div = '/', Mod = '%' };

struct BinaryExpr {
  BinaryOp op = BinaryOp::Add;
  Box<Expr> lhs;
  Box<Expr> rhs;
  friend bool operator==(const BinaryExpr&, const BinaryExpr&) = default;
};

enum class Builtin { Sqrt, Floor, Concat, Strlen, ToStr, SleepMs, Alias };

std::string_view builtin_name(Builtin fn) noexcept;

struct BuiltinExpr {
  Builtin fn = Builtin::Sqrt;
  std::vector<Expr> args;
  friend bool operator==(const BuiltinExpr&, const BuiltinExpr&) = default;
};
struct NewExpr {
  std::string type;
  std::vector<Expr> args;
  friend bool operator==(const NewExpr&, const NewExpr&) = default;
};

struct Expr {
  std::variant<ConstExpr, ParamExpr, SelfExpr, FieldExpr, GlobalExpr, BinaryExpr, BuiltinExpr, NewExpr> node;
  friend bool operator==(const Expr&, const Expr&) = default;
};

struct SetFieldStmt {
  std::string field;
  Expr value;
  friend bool operator==(const SetFieldStmt&, const SetFieldStmt&) = default;
};
struct SetGlobalStmt {
  std::string name;
  Expr value;
  friend bool operator==(const SetGlobalStmt&, const SetGlobalStmt&) = default;
};
struct ReturnStmt {
  Expr value;
  friend bool operator==(const ReturnStmt&, const ReturnStmt&) = default;
};
struct ExprStmt {
  Expr value;
  friend bool operator==(const ExprStmt&, const ExprStmt&) = default;
};

using Stmt = std::variant<SetFieldStmt, SetGlobalStmt, ReturnStmt, ExprStmt>;

/// One overload of an overload set.
struct MethodSignature {
  std::vector<ValueKind> params;
  ValueKind returns;
  bool is_static = false;
  std::vector<Stmt> body;
  friend bool operator==(const MethodSignature&, const MethodSignature&) = default;
};

/// Ordered overloads sharing one name.
using OverloadSet = std::vector<MethodSignature>;

struct FieldDecl {
  std::string name;
  ValueKind kind;
  HostValue initial;
  friend bool operator==(const FieldDecl&, const FieldDecl&) = default;
};

struct MethodDecl {
  std::string name;
  MethodSignature signature;
  friend bool operator==(const MethodDecl&, const MethodDecl&) = default;
};

struct TypeDecl {
  std::string name;
  std::string ns;
  /// Adds methods/ctors to a type declared by an earlier manifest.
  bool extends = false;
  std::vector<std::string> bases;
  std::vector<FieldDecl> fields;
  std::vector<MethodDecl> methods;
  std::vector<MethodSignature> ctors;

  std::string qualified_name() const { return join_qualified(ns, name); }
  friend bool operator==(const TypeDecl&, const TypeDecl&) = default;
};

struct FunctionDecl {
  std::string name;
  std::string ns;
  MethodSignature signature;

  std::string qualified_name() const { return join_qualified(ns, name); }
  friend bool operator==(const FunctionDecl&, const FunctionDecl&) = default;
};

struct GlobalDecl {
  std::string name;
  std::string ns;
  ValueKind kind;
  HostValue initial;

  std::string qualified_name() const { return join_qualified(ns, name); }
  friend bool operator==(const GlobalDecl&, const GlobalDecl&) = default;
};

using Enumerators = std::map<std::string, std::int64_t>;

/// Parsed plugin or macro file.
struct Manifest {
  std::vector<std::string> namespaces;
  std::map<std::string, Enumerators> enums;
  std::vector<TypeDecl> types;
  std::vector<FunctionDecl> functions;
  std::vector<GlobalDecl> globals;
  std::vector<Stmt> statements;

  bool has_declarations() const {
    return !namespaces.empty() || !enums.empty() || !types.empty() || !functions.empty() ||
           !globals.empty();
  }
  friend bool operator==(const Manifest&, const Manifest&) = default;
};

/// Parses and validates the JSON plugin/macro format. Never touches a
/// registry. Throws SourceError(Parse) for malformed text or shape errors
/// and Error(Validation) for semantic problems.
Manifest parse_manifest(std::string_view text);

/// Canonical JSON rendering; parse_manifest(serialize_manifest(m)) == m.
std::string serialize_manifest(const Manifest& manifest, int indent = 2);

ValueKind parse_kind_string(std::string_view text);

}  // namespace rjs
