#include "rjs/manifest.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <set>

#include "json.hpp"
#include "rjs/error.hpp"

namespace rjs {

using nlohmann::json;

std::string_view builtin_name(Builtin fn) noexcept {
  switch (fn) {
    case Builtin::Sqrt: return "sqrt";
    case Builtin::Floor: return "floor";
    case Builtin::Concat: return "concat";
    case Builtin::Strlen: return "strlen";
    case Builtin::ToStr: return "to_str";
    case Builtin::SleepMs: return "sleep_ms";
    case Builtin::Alias: return "alias";
  }
  return "?";
}

namespace {

constexpr std::pair<std::string_view, Builtin> kBuiltins[] = {
    {"sqrt", Builtin::Sqrt},     {"floor", Builtin::Floor},      {"concat", Builtin::Concat},
    {"strlen", Builtin::Strlen}, {"to_str", Builtin::ToStr},     {"sleep_ms", Builtin::SleepMs},
    {"alias", Builtin::Alias},
};

[[noreturn]] void shape_error(const std::string& where, const std::string& what) {
  throw Error(Errc::Parse, where + ": " + what);
}

[[noreturn]] void invalid(const std::string& where, const std::string& what) {
  throw Error(Errc::Validation, where + ": " + what);
}

// Reading helpers. `where` is a JSON-pointer-like location for messages.

const json& member(const json& obj, const char* key, const std::string& where) {
  auto it = obj.find(key);
  if (it == obj.end()) shape_error(where, std::string("missing key '") + key + "'");
  return *it;
}

void expect_object(const json& j, const std::string& where) {
  if (!j.is_object()) shape_error(where, "expected an object");
}

void expect_array(const json& j, const std::string& where) {
  if (!j.is_array()) shape_error(where, "expected an array");
}

void allow_keys(const json& obj, std::initializer_list<std::string_view> keys, const std::string& where) {
  for (auto it = obj.begin(); it != obj.end(); ++it) {
    if (std::find(keys.begin(), keys.end(), it.key()) == keys.end())
      shape_error(where, "unexpected key '" + it.key() + "'");
  }
}

std::string read_string(const json& j, const std::string& where) {
  if (!j.is_string()) shape_error(where, "expected a string");
  return j.get<std::string>();
}

std::string read_identifier(const json& j, const std::string& where) {
  auto s = read_string(j, where);
  if (!is_identifier(s)) invalid(where, "'" + s + "' is not an identifier");
  return s;
}

std::string read_qualified(const json& j, const std::string& where, bool allow_empty) {
  auto s = read_string(j, where);
  if (!is_qualified_name(s) || (!allow_empty && s.empty()))
    invalid(where, "'" + s + "' is not a qualified name");
  return s;
}

bool read_bool(const json& j, const std::string& where) {
  if (!j.is_boolean()) shape_error(where, "expected a boolean");
  return j.get<bool>();
}

ValueKind read_kind(const json& j, const std::string& where) {
  if (j.is_string()) {
    auto s = j.get<std::string>();
    try {
      return parse_kind_string(s);
    } catch (const Error& e) {
      invalid(where, e.message());
    }
  }
  if (j.is_object() && j.size() == 1) {
    if (auto it = j.find("enum"); it != j.end())
      return ValueKind::enumeration(read_qualified(*it, where + "/enum", false));
    if (auto it = j.find("obj"); it != j.end())
      return ValueKind::object(read_qualified(*it, where + "/obj", false));
  }
  invalid(where, "unknown kind " + j.dump());
}

bool is_integral_json(const json& j) { return j.is_number_integer() || j.is_number_unsigned(); }

std::int64_t read_int(const json& j, const std::string& where) {
  if (j.is_number_unsigned()) {
    auto u = j.get<std::uint64_t>();
    if (u > static_cast<std::uint64_t>(std::numeric_limits<std::int64_t>::max()))
      invalid(where, "integer out of range");
    return static_cast<std::int64_t>(u);
  }
  if (j.is_number_integer()) return j.get<std::int64_t>();
  if (j.is_number_float()) {
    double d = j.get<double>();
    if (std::trunc(d) == d && std::abs(d) < 9.2e18) return static_cast<std::int64_t>(d);
  }
  invalid(where, "expected an integer, got " + j.dump());
}

struct ParseContext {
  const std::map<std::string, Enumerators>* enums = nullptr;
};

/// Value for a declared kind (field/global initials, typed constants).
HostValue read_value_of_kind(const json& j, const ValueKind& kind, const ParseContext& ctx,
                             const std::string& where) {
  using Tag = ValueKind::Tag;
  switch (kind.tag) {
    case Tag::Int64:
      return read_int(j, where);
    case Tag::Float64:
      if (!j.is_number()) invalid(where, "expected a number");
      return j.get<double>();
    case Tag::Bool:
      return read_bool(j, where);
    case Tag::CString:
      return CStr{read_string(j, where)};
    case Tag::StrObj:
      return StrObj{read_string(j, where)};
    case Tag::Enum: {
      if (j.is_string()) {
        auto name = j.get<std::string>();
        if (ctx.enums) {
          auto e = ctx.enums->find(kind.name);
          if (e != ctx.enums->end()) {
            auto v = e->second.find(name);
            if (v != e->second.end()) return EnumVal{kind.name, v->second};
          }
        }
        invalid(where, "enumerator '" + name + "' of " + kind.name + " not declared in this manifest");
      }
      return EnumVal{kind.name, read_int(j, where)};
    }
    case Tag::ObjRef:
      if (!j.is_null()) invalid(where, "object values can only be initialised to null");
      return Ref{0};
    case Tag::Void:
      if (!j.is_null()) invalid(where, "void value must be null");
      return VoidVal{};
  }
  return VoidVal{};
}

HostValue default_initial(const ValueKind& kind, const ParseContext& ctx) {
  HostValue v = default_value(kind);
  if (kind.tag == ValueKind::Tag::Enum && ctx.enums) {
    auto e = ctx.enums->find(kind.name);
    if (e != ctx.enums->end() && !e->second.empty()) {
      auto lowest = std::min_element(e->second.begin(), e->second.end(),
                                     [](const auto& a, const auto& b) { return a.second < b.second; });
      v = EnumVal{kind.name, lowest->second};
    }
  }
  return v;
}

// Body validation context.
struct BodyScope {
  std::size_t arity = 0;
  bool has_self = false;
};

Expr read_expr(const json& j, const BodyScope& scope, const ParseContext& ctx, const std::string& where);

std::vector<Expr> read_args(const json& obj, const BodyScope& scope, const ParseContext& ctx,
                            const std::string& where) {
  std::vector<Expr> out;
  auto it = obj.find("args");
  if (it == obj.end()) return out;
  expect_array(*it, where + "/args");
  for (std::size_t i = 0; i < it->size(); ++i)
    out.push_back(read_expr((*it)[i], scope, ctx, where + "/args/" + std::to_string(i)));
  return out;
}

Expr read_const(const json& j, const ParseContext& ctx, const std::string& where) {
  allow_keys(j, {"op", "value", "kind"}, where);
  const json& v = member(j, "value", where);
  if (auto k = j.find("kind"); k != j.end()) {
    if (k->is_string() && k->get<std::string>() == "ref") {
      if (v.is_null()) return {ConstExpr{Ref{0}}};
      if (!v.is_number_unsigned() && !v.is_number_integer()) invalid(where, "ref constant must be an integer");
      return {ConstExpr{Ref{v.get<std::uint64_t>()}}};
    }
    auto kind = read_kind(*k, where + "/kind");
    return {ConstExpr{read_value_of_kind(v, kind, ctx, where + "/value")}};
  }
  if (is_integral_json(v)) return {ConstExpr{read_int(v, where + "/value")}};
  if (v.is_number_float()) return {ConstExpr{v.get<double>()}};
  if (v.is_boolean()) return {ConstExpr{v.get<bool>()}};
  if (v.is_string()) return {ConstExpr{CStr{v.get<std::string>()}}};
  if (v.is_null()) return {ConstExpr{VoidVal{}}};
  invalid(where, "unsupported constant " + v.dump());
}

Expr read_expr(const json& j, const BodyScope& scope, const ParseContext& ctx, const std::string& where) {
  expect_object(j, where);
  auto op = read_string(member(j, "op", where), where + "/op");
  if (op == "const") return read_const(j, ctx, where);
  if (op == "param") {
    allow_keys(j, {"op", "index"}, where);
    const json& idx = member(j, "index", where);
    if (!idx.is_number_unsigned() && !(idx.is_number_integer() && idx.get<std::int64_t>() >= 0))
      shape_error(where + "/index", "expected a non-negative integer");
    auto index = idx.get<std::size_t>();
    if (index >= scope.arity)
      invalid(where, "param index " + std::to_string(index) + " out of range for arity " +
                         std::to_string(scope.arity));
    return {ParamExpr{index}};
  }
  if (op == "self") {
    allow_keys(j, {"op"}, where);
    if (!scope.has_self) invalid(where, "self reference outside an instance method");
    return {SelfExpr{}};
  }
  if (op == "get") {
    allow_keys(j, {"op", "field"}, where);
    if (!scope.has_self) invalid(where, "field access outside an instance method");
    return {FieldExpr{read_identifier(member(j, "field", where), where + "/field")}};
  }
  if (op == "gget") {
    allow_keys(j, {"op", "name"}, where);
    return {GlobalExpr{read_qualified(member(j, "name", where), where + "/name", false)}};
  }
  if (op == "bin") {
    allow_keys(j, {"op", "o", "l", "r"}, where);
    auto o = read_string(member(j, "o", where), where + "/o");
    if (o.size() != 1 || std::string_view("+-*/%").find(o[0]) == std::string_view::npos)
      invalid(where, "unknown operator '" + o + "'");
    return {BinaryExpr{static_cast<BinaryOp>(o[0]), read_expr(member(j, "l", where), scope, ctx, where + "/l"),
                       read_expr(member(j, "r", where), scope, ctx, where + "/r")}};
  }
  if (op == "builtin") {
    allow_keys(j, {"op", "name", "args"}, where);
    auto name = read_string(member(j, "name", where), where + "/name");
    auto found = std::find_if(std::begin(kBuiltins), std::end(kBuiltins),
                              [&](const auto& b) { return b.first == name; });
    if (found == std::end(kBuiltins)) invalid(where, "unknown builtin '" + name + "'");
    BuiltinExpr b{found->second, read_args(j, scope, ctx, where)};
    bool variadic = b.fn == Builtin::Concat;
    if (variadic ? b.args.empty() : b.args.size() != 1)
      invalid(where, "builtin '" + name + "' given " + std::to_string(b.args.size()) + " arguments");
    return {std::move(b)};
  }
  if (op == "new") {
    allow_keys(j, {"op", "type", "args"}, where);
    return {NewExpr{read_qualified(member(j, "type", where), where + "/type", false),
                    read_args(j, scope, ctx, where)}};
  }
  invalid(where, "unknown expression op '" + op + "'");
}

Stmt read_stmt(const json& j, const BodyScope& scope, const ParseContext& ctx, const std::string& where) {
  expect_object(j, where);
  auto op = read_string(member(j, "op", where), where + "/op");
  if (op == "set") {
    allow_keys(j, {"op", "field", "value"}, where);
    if (!scope.has_self) invalid(where, "field assignment outside an instance method");
    return SetFieldStmt{read_identifier(member(j, "field", where), where + "/field"),
                        read_expr(member(j, "value", where), scope, ctx, where + "/value")};
  }
  if (op == "gset") {
    allow_keys(j, {"op", "name", "value"}, where);
    return SetGlobalStmt{read_qualified(member(j, "name", where), where + "/name", false),
                         read_expr(member(j, "value", where), scope, ctx, where + "/value")};
  }
  if (op == "ret") {
    allow_keys(j, {"op", "value"}, where);
    auto it = j.find("value");
    if (it == j.end()) return ReturnStmt{Expr{ConstExpr{VoidVal{}}}};
    return ReturnStmt{read_expr(*it, scope, ctx, where + "/value")};
  }
  if (op == "expr") {
    allow_keys(j, {"op", "value"}, where);
    return ExprStmt{read_expr(member(j, "value", where), scope, ctx, where + "/value")};
  }
  return ExprStmt{read_expr(j, scope, ctx, where)};
}

std::vector<Stmt> read_body(const json& obj, const BodyScope& scope, const ParseContext& ctx,
                            const std::string& where) {
  std::vector<Stmt> out;
  auto it = obj.find("body");
  if (it == obj.end()) return out;
  expect_array(*it, where + "/body");
  for (std::size_t i = 0; i < it->size(); ++i)
    out.push_back(read_stmt((*it)[i], scope, ctx, where + "/body/" + std::to_string(i)));
  return out;
}

std::vector<ValueKind> read_params(const json& obj, const std::string& where) {
  std::vector<ValueKind> out;
  auto it = obj.find("params");
  if (it == obj.end()) return out;
  expect_array(*it, where + "/params");
  for (std::size_t i = 0; i < it->size(); ++i) {
    auto kind = read_kind((*it)[i], where + "/params/" + std::to_string(i));
    if (kind.tag == ValueKind::Tag::Void) invalid(where, "void parameter");
    out.push_back(std::move(kind));
  }
  return out;
}

/// Methods and functions: {name, static, params, returns, body}.
MethodSignature read_signature(const json& j, bool allow_self, const ParseContext& ctx,
                               const std::string& where) {
  MethodSignature sig;
  if (auto it = j.find("static"); it != j.end()) sig.is_static = read_bool(*it, where + "/static");
  sig.params = read_params(j, where);
  sig.returns = j.contains("returns") ? read_kind(j["returns"], where + "/returns") : ValueKind::void_kind();
  sig.body = read_body(j, BodyScope{sig.params.size(), allow_self && !sig.is_static}, ctx, where);
  return sig;
}

MethodSignature read_ctor(const json& j, const ParseContext& ctx, const std::string& where) {
  expect_object(j, where);
  allow_keys(j, {"params", "body"}, where);
  MethodSignature sig;
  sig.params = read_params(j, where);
  sig.returns = ValueKind::void_kind();
  sig.body = read_body(j, BodyScope{sig.params.size(), true}, ctx, where);
  return sig;
}

void check_distinct_overloads(const std::vector<const MethodSignature*>& set, const std::string& where) {
  for (std::size_t a = 0; a < set.size(); ++a)
    for (std::size_t b = a + 1; b < set.size(); ++b)
      if (set[a]->params == set[b]->params) invalid(where, "indistinguishable overloads");
}

TypeDecl read_type(const json& j, const ParseContext& ctx, const std::string& where) {
  expect_object(j, where);
  allow_keys(j, {"name", "namespace", "extends", "bases", "fields", "methods", "ctors"}, where);
  TypeDecl t;
  t.name = read_identifier(member(j, "name", where), where + "/name");
  if (auto it = j.find("namespace"); it != j.end()) t.ns = read_qualified(*it, where + "/namespace", true);
  if (auto it = j.find("extends"); it != j.end()) t.extends = read_bool(*it, where + "/extends");
  if (auto it = j.find("bases"); it != j.end()) {
    expect_array(*it, where + "/bases");
    for (std::size_t i = 0; i < it->size(); ++i)
      t.bases.push_back(read_qualified((*it)[i], where + "/bases/" + std::to_string(i), false));
  }
  std::set<std::string> field_names;
  if (auto it = j.find("fields"); it != j.end()) {
    expect_array(*it, where + "/fields");
    for (std::size_t i = 0; i < it->size(); ++i) {
      const json& f = (*it)[i];
      auto fw = where + "/fields/" + std::to_string(i);
      expect_object(f, fw);
      allow_keys(f, {"name", "kind", "initial"}, fw);
      FieldDecl fd;
      fd.name = read_identifier(member(f, "name", fw), fw + "/name");
      fd.kind = read_kind(member(f, "kind", fw), fw + "/kind");
      if (fd.kind.tag == ValueKind::Tag::Void) invalid(fw, "void field");
      fd.initial = f.contains("initial") ? read_value_of_kind(f["initial"], fd.kind, ctx, fw + "/initial")
                                         : default_initial(fd.kind, ctx);
      if (!field_names.insert(fd.name).second) invalid(fw, "duplicate field '" + fd.name + "'");
      t.fields.push_back(std::move(fd));
    }
  }
  if (auto it = j.find("methods"); it != j.end()) {
    expect_array(*it, where + "/methods");
    for (std::size_t i = 0; i < it->size(); ++i) {
      auto mw = where + "/methods/" + std::to_string(i);
      expect_object((*it)[i], mw);
      allow_keys((*it)[i], {"name", "static", "params", "returns", "body"}, mw);
      MethodDecl m;
      m.name = read_identifier(member((*it)[i], "name", mw), mw + "/name");
      m.signature = read_signature((*it)[i], true, ctx, mw);
      if (field_names.count(m.name)) invalid(mw, "method '" + m.name + "' collides with a field");
      t.methods.push_back(std::move(m));
    }
  }
  if (auto it = j.find("ctors"); it != j.end()) {
    expect_array(*it, where + "/ctors");
    for (std::size_t i = 0; i < it->size(); ++i)
      t.ctors.push_back(read_ctor((*it)[i], ctx, where + "/ctors/" + std::to_string(i)));
  }
  if (t.extends && (!t.fields.empty() || !t.bases.empty()))
    invalid(where, "an extending declaration may only add methods and constructors");

  std::map<std::string, std::vector<const MethodSignature*>> by_name;
  for (const auto& m : t.methods) by_name[m.name].push_back(&m.signature);
  for (const auto& [name, set] : by_name) check_distinct_overloads(set, where + " method '" + name + "'");
  std::vector<const MethodSignature*> ctors;
  for (const auto& c : t.ctors) ctors.push_back(&c);
  check_distinct_overloads(ctors, where + " constructors");
  return t;
}

}  // namespace

ValueKind parse_kind_string(std::string_view text) {
  if (text == "i64") return ValueKind::int64();
  if (text == "f64") return ValueKind::float64();
  if (text == "bool") return ValueKind::boolean();
  if (text == "cstr") return ValueKind::cstring();
  if (text == "str") return ValueKind::strobj();
  if (text == "void") return ValueKind::void_kind();
  throw Error(Errc::Validation, "unknown kind '" + std::string(text) + "'");
}

Manifest parse_manifest(std::string_view text) {
  json doc;
  try {
    doc = json::parse(text.begin(), text.end());
  } catch (const json::parse_error& e) {
    std::size_t line = 1, column = 1;
    std::size_t limit = std::min<std::size_t>(e.byte == 0 ? 0 : e.byte - 1, text.size());
    for (std::size_t i = 0; i < limit; ++i) {
      if (text[i] == '\n') {
        ++line;
        column = 1;
      } else {
        ++column;
      }
    }
    throw SourceError(Errc::Parse, line, column, "malformed manifest JSON");
  }
  expect_object(doc, "");
  allow_keys(doc, {"namespaces", "enums", "types", "functions", "globals", "statements"}, "");

  Manifest m;
  std::set<std::string> declared;  // qualified names across categories
  auto claim = [&](const std::string& qname, const std::string& where) {
    if (!declared.insert(qname).second) invalid(where, "duplicate name '" + qname + "'");
  };

  if (auto it = doc.find("namespaces"); it != doc.end()) {
    expect_array(*it, "/namespaces");
    std::set<std::string> seen;
    for (std::size_t i = 0; i < it->size(); ++i) {
      auto where = "/namespaces/" + std::to_string(i);
      auto ns = read_qualified((*it)[i], where, false);
      if (!seen.insert(ns).second) invalid(where, "duplicate namespace '" + ns + "'");
      m.namespaces.push_back(std::move(ns));
    }
  }
  if (auto it = doc.find("enums"); it != doc.end()) {
    expect_object(*it, "/enums");
    for (auto e = it->begin(); e != it->end(); ++e) {
      auto where = "/enums/" + e.key();
      if (!is_qualified_name(e.key()) || e.key().empty()) invalid(where, "bad enum name");
      expect_object(e.value(), where);
      Enumerators values;
      for (auto v = e.value().begin(); v != e.value().end(); ++v) {
        if (!is_identifier(v.key())) invalid(where, "bad enumerator name '" + v.key() + "'");
        values[v.key()] = read_int(v.value(), where + "/" + v.key());
      }
      if (values.empty()) invalid(where, "enum without enumerators");
      claim(e.key(), where);
      m.enums.emplace(e.key(), std::move(values));
    }
  }
  ParseContext ctx{&m.enums};

  if (auto it = doc.find("types"); it != doc.end()) {
    expect_array(*it, "/types");
    for (std::size_t i = 0; i < it->size(); ++i) {
      auto where = "/types/" + std::to_string(i);
      auto t = read_type((*it)[i], ctx, where);
      if (!t.extends) claim(t.qualified_name(), where);
      m.types.push_back(std::move(t));
    }
  }
  if (auto it = doc.find("functions"); it != doc.end()) {
    expect_array(*it, "/functions");
    std::map<std::string, std::vector<const MethodSignature*>> by_name;
    for (std::size_t i = 0; i < it->size(); ++i) {
      auto where = "/functions/" + std::to_string(i);
      const json& f = (*it)[i];
      expect_object(f, where);
      allow_keys(f, {"name", "namespace", "static", "params", "returns", "body"}, where);
      FunctionDecl fd;
      fd.name = read_identifier(member(f, "name", where), where + "/name");
      if (auto ns = f.find("namespace"); ns != f.end()) fd.ns = read_qualified(*ns, where + "/namespace", true);
      fd.signature = read_signature(f, false, ctx, where);
      fd.signature.is_static = true;
      m.functions.push_back(std::move(fd));
    }
    for (std::size_t i = 0; i < m.functions.size(); ++i) {
      auto qname = m.functions[i].qualified_name();
      if (!by_name.count(qname)) claim(qname, "/functions/" + std::to_string(i));
      by_name[qname].push_back(&m.functions[i].signature);
    }
    for (const auto& [name, set] : by_name) check_distinct_overloads(set, "function '" + name + "'");
  }
  if (auto it = doc.find("globals"); it != doc.end()) {
    expect_array(*it, "/globals");
    for (std::size_t i = 0; i < it->size(); ++i) {
      auto where = "/globals/" + std::to_string(i);
      const json& g = (*it)[i];
      expect_object(g, where);
      allow_keys(g, {"name", "namespace", "kind", "initial"}, where);
      GlobalDecl gd;
      gd.name = read_identifier(member(g, "name", where), where + "/name");
      if (auto ns = g.find("namespace"); ns != g.end()) gd.ns = read_qualified(*ns, where + "/namespace", true);
      gd.kind = read_kind(member(g, "kind", where), where + "/kind");
      if (gd.kind.tag == ValueKind::Tag::Void) invalid(where, "void global");
      gd.initial = g.contains("initial") ? read_value_of_kind(g["initial"], gd.kind, ctx, where + "/initial")
                                         : default_initial(gd.kind, ctx);
      claim(gd.qualified_name(), where);
      m.globals.push_back(std::move(gd));
    }
  }
  if (auto it = doc.find("statements"); it != doc.end()) {
    expect_array(*it, "/statements");
    for (std::size_t i = 0; i < it->size(); ++i)
      m.statements.push_back(read_stmt((*it)[i], BodyScope{0, false}, ctx, "/statements/" + std::to_string(i)));
  }
  return m;
}

// Serialization.

namespace {

json kind_json(const ValueKind& kind) {
  using Tag = ValueKind::Tag;
  switch (kind.tag) {
    case Tag::Enum: return json{{"enum", kind.name}};
    case Tag::ObjRef: return json{{"obj", kind.name}};
    default: return to_string(kind);
  }
}

/// Plain JSON for a value whose kind is known from context.
json value_json(const HostValue& value) {
  struct Visitor {
    json operator()(const VoidVal&) const { return nullptr; }
    json operator()(std::int64_t v) const { return v; }
    json operator()(double v) const { return v; }
    json operator()(bool v) const { return v; }
    json operator()(const CStr& s) const { return s.text; }
    json operator()(const StrObj& s) const { return s.text; }
    json operator()(const EnumVal& e) const { return e.value; }
    json operator()(const Ref& r) const { return r.handle == 0 ? json(nullptr) : json(r.handle); }
  };
  return std::visit(Visitor{}, value);
}

json expr_json(const Expr& e);

json args_json(const std::vector<Expr>& args) {
  json out = json::array();
  for (const auto& a : args) out.push_back(expr_json(a));
  return out;
}

json expr_json(const Expr& e) {
  struct Visitor {
    json operator()(const ConstExpr& c) const {
      json out{{"op", "const"}, {"value", value_json(c.value)}};
      if (std::holds_alternative<StrObj>(c.value) || std::holds_alternative<EnumVal>(c.value))
        out["kind"] = kind_json(kind_of(c.value));
      else if (std::holds_alternative<Ref>(c.value))
        out["kind"] = "ref";
      return out;
    }
    json operator()(const ParamExpr& p) const { return {{"op", "param"}, {"index", p.index}}; }
    json operator()(const SelfExpr&) const { return {{"op", "self"}}; }
    json operator()(const FieldExpr& f) const { return {{"op", "get"}, {"field", f.field}}; }
    json operator()(const GlobalExpr& g) const { return {{"op", "gget"}, {"name", g.name}}; }
    json operator()(const BinaryExpr& b) const {
      return {{"op", "bin"}, {"o", std::string(1, static_cast<char>(b.op))}, {"l", expr_json(*b.lhs)},
              {"r", expr_json(*b.rhs)}};
    }
    json operator()(const BuiltinExpr& b) const {
      return {{"op", "builtin"}, {"name", builtin_name(b.fn)}, {"args", args_json(b.args)}};
    }
    json operator()(const NewExpr& n) const { return {{"op", "new"}, {"type", n.type}, {"args", args_json(n.args)}}; }
  };
  return std::visit(Visitor{}, e.node);
}

json stmt_json(const Stmt& s) {
  struct Visitor {
    json operator()(const SetFieldStmt& st) const {
      return {{"op", "set"}, {"field", st.field}, {"value", expr_json(st.value)}};
    }
    json operator()(const SetGlobalStmt& st) const {
      return {{"op", "gset"}, {"name", st.name}, {"value", expr_json(st.value)}};
    }
    json operator()(const ReturnStmt& st) const { return {{"op", "ret"}, {"value", expr_json(st.value)}}; }
    json operator()(const ExprStmt& st) const { return {{"op", "expr"}, {"value", expr_json(st.value)}}; }
  };
  return std::visit(Visitor{}, s);
}

json body_json(const std::vector<Stmt>& body) {
  json out = json::array();
  for (const auto& s : body) out.push_back(stmt_json(s));
  return out;
}

json params_json(const std::vector<ValueKind>& params) {
  json out = json::array();
  for (const auto& k : params) out.push_back(kind_json(k));
  return out;
}

json signature_json(const std::string& name, const MethodSignature& sig) {
  return {{"name", name},
          {"static", sig.is_static},
          {"params", params_json(sig.params)},
          {"returns", kind_json(sig.returns)},
          {"body", body_json(sig.body)}};
}

}  // namespace

std::string serialize_manifest(const Manifest& m, int indent) {
  json doc = json::object();
  if (!m.namespaces.empty()) doc["namespaces"] = m.namespaces;
  if (!m.enums.empty()) {
    json enums = json::object();
    for (const auto& [name, values] : m.enums) {
      json vs = json::object();
      for (const auto& [k, v] : values) vs[k] = v;
      enums[name] = vs;
    }
    doc["enums"] = enums;
  }
  if (!m.types.empty()) {
    json types = json::array();
    for (const auto& t : m.types) {
      json jt{{"name", t.name}, {"namespace", t.ns}};
      if (t.extends) jt["extends"] = true;
      jt["bases"] = t.bases;
      json fields = json::array();
      for (const auto& f : t.fields)
        fields.push_back({{"name", f.name}, {"kind", kind_json(f.kind)}, {"initial", value_json(f.initial)}});
      jt["fields"] = fields;
      json methods = json::array();
      for (const auto& md : t.methods) methods.push_back(signature_json(md.name, md.signature));
      jt["methods"] = methods;
      json ctors = json::array();
      for (const auto& c : t.ctors) ctors.push_back({{"params", params_json(c.params)}, {"body", body_json(c.body)}});
      jt["ctors"] = ctors;
      types.push_back(std::move(jt));
    }
    doc["types"] = types;
  }
  if (!m.functions.empty()) {
    json fns = json::array();
    for (const auto& f : m.functions) {
      json jf = signature_json(f.name, f.signature);
      jf["namespace"] = f.ns;
      fns.push_back(std::move(jf));
    }
    doc["functions"] = fns;
  }
  if (!m.globals.empty()) {
    json gs = json::array();
    for (const auto& g : m.globals)
      gs.push_back({{"name", g.name}, {"namespace", g.ns}, {"kind", kind_json(g.kind)}, {"initial", value_json(g.initial)}});
    doc["globals"] = gs;
  }
  if (!m.statements.empty()) doc["statements"] = body_json(m.statements);
  return doc.dump(indent);
}

}  // namespace rjs
