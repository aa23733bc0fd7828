#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <cstring>
#include <random>

#include "oracles.hpp"
#include "rjs/error.hpp"
#include "rjs/manifest.hpp"
#include "rjs/value.hpp"

using namespace rjs;

namespace {

// Significant digits of a decimal rendering (leading/trailing zeros dropped).
int significant_digits(const std::string& text) {
  std::string digits;
  for (char c : text) {
    if (c == 'e' || c == 'E') break;
    if (c >= '0' && c <= '9') digits += c;
  }
  auto first = digits.find_first_not_of('0');
  if (first == std::string::npos) return 0;
  auto last = digits.find_last_not_of('0');
  return static_cast<int>(last - first + 1);
}

// Fewest %g digits that read back as the same double.
int shortest_precision(double x) {
  char buf[64];
  for (int p = 1; p <= 17; ++p) {
    std::snprintf(buf, sizeof buf, "%.*g", p, x);
    if (std::strtod(buf, nullptr) == x) return p;
  }
  return 17;
}

template <class F>
Errc code_of(F&& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("expected an rjs::Error");
  return Errc::Io;
}

}  // namespace

TEST_CASE("format_number renders shortest round-trip decimals") {
  CHECK(format_number(5.0) == "5");
  CHECK(format_number(0.1) == "0.1");
  CHECK(format_number(3.141592653589793) == "3.141592653589793");
  CHECK(format_number(-2.5) == "-2.5");
  CHECK(format_number(0.0) == "0");
  CHECK(format_number(-0.0) == "-0");
  CHECK(format_number(NAN) == "NaN");
  CHECK(format_number(INFINITY) == "Infinity");
  CHECK(format_number(-INFINITY) == "-Infinity");
}

TEST_CASE("format_number property: round-trips with minimal digits") {
  std::mt19937_64 g(20240611);
  for (int i = 0; i < 5000; ++i) {
    std::uint64_t bits = g();
    double x;
    std::memcpy(&x, &bits, sizeof x);
    if (!std::isfinite(x) || x == 0.0) continue;
    auto text = format_number(x);
    INFO(text);
    CHECK(std::strtod(text.c_str(), nullptr) == x);
    CHECK(significant_digits(text) == shortest_precision(x));
  }
}

TEST_CASE("identifier and qualified-name rules") {
  CHECK(is_identifier("TH1"));
  CHECK(is_identifier("_x9"));
  CHECK_FALSE(is_identifier("9x"));
  CHECK_FALSE(is_identifier(""));
  CHECK_FALSE(is_identifier("a.b"));
  CHECK(is_qualified_name("ROOT.Math.Pi"));
  CHECK_FALSE(is_qualified_name("ROOT..Pi"));
  CHECK_FALSE(is_qualified_name("ROOT."));
  CHECK(split_qualified("ROOT.Math.Pi") == std::pair<std::string, std::string>{"ROOT.Math", "Pi"});
  CHECK(split_qualified("Pi") == std::pair<std::string, std::string>{"", "Pi"});
  CHECK(join_qualified("", "Pi") == "Pi");
  CHECK(join_qualified("ROOT.Math", "Pi") == "ROOT.Math.Pi");
}

TEST_CASE("kind strings") {
  CHECK(to_string(ValueKind::enumeration("EColor")) == "enum<EColor>");
  CHECK(to_string(ValueKind::object("Geom.Box")) == "obj<Geom.Box>");
  CHECK(parse_kind_string("i64") == ValueKind::int64());
  CHECK(parse_kind_string("str") == ValueKind::strobj());
  CHECK(code_of([] { parse_kind_string("int"); }) == Errc::Validation);
}

TEST_CASE("parse the Pi manifest") {
  auto m = parse_manifest(R"({"namespaces": ["ROOT.Math"],
    "functions": [{"name": "Pi", "namespace": "ROOT.Math", "returns": "f64",
                   "body": [{"op": "ret", "value": {"op": "const", "value": 3.141592653589793}}]}]})");
  REQUIRE(m.functions.size() == 1);
  CHECK(m.functions[0].qualified_name() == "ROOT.Math.Pi");
  CHECK(m.functions[0].signature.returns == ValueKind::float64());
  CHECK(m.functions[0].signature.is_static);
  CHECK(m.has_declarations());
}

TEST_CASE("defaults: enums start at their lowest enumerator") {
  auto m = parse_manifest(R"({"enums": {"E": {"kB": 5, "kA": -3}},
    "globals": [{"name": "g", "kind": {"enum": "E"}}, {"name": "h", "kind": "f64"}]})");
  CHECK(m.globals[0].initial == HostValue{EnumVal{"E", -3}});
  CHECK(m.globals[1].initial == HostValue{0.0});
}

TEST_CASE("malformed JSON reports line and column") {
  try {
    parse_manifest("{\n  \"types\": [\n    {\"name\": }\n]}");
    FAIL("expected a parse error");
  } catch (const SourceError& e) {
    CHECK(e.code() == Errc::Parse);
    CHECK(e.line() == 3);
    CHECK(e.column() == 14);
  }
}

TEST_CASE("validation rejects ill-formed declarations") {
  auto bad = [](const char* text) { return code_of([&] { parse_manifest(text); }); };
  // parameter index beyond arity
  CHECK(bad(R"({"functions": [{"name": "f", "params": ["f64"],
      "body": [{"op": "ret", "value": {"op": "param", "index": 1}}]}]})") == Errc::Validation);
  // self in a static context
  CHECK(bad(R"({"functions": [{"name": "f", "body": [{"op": "expr", "value": {"op": "self"}}]}]})") ==
        Errc::Validation);
  CHECK(bad(R"({"types": [{"name": "T", "methods": [{"name": "m", "static": true,
      "body": [{"op": "ret", "value": {"op": "get", "field": "x"}}]}]}]})") == Errc::Validation);
  // duplicate across categories
  CHECK(bad(R"({"types": [{"name": "X"}], "globals": [{"name": "X", "kind": "i64"}]})") == Errc::Validation);
  // identical overload signatures
  CHECK(bad(R"({"functions": [{"name": "f", "params": ["i64"]}, {"name": "f", "params": ["i64"]}]})") ==
        Errc::Validation);
  // void field and void parameter
  CHECK(bad(R"({"types": [{"name": "T", "fields": [{"name": "x", "kind": "void"}]}]})") == Errc::Validation);
  CHECK(bad(R"({"functions": [{"name": "f", "params": ["void"]}]})") == Errc::Validation);
  // builtin arity
  CHECK(bad(R"({"functions": [{"name": "f", "body": [{"op": "expr",
      "value": {"op": "builtin", "name": "sqrt", "args": []}}]}]})") == Errc::Validation);
  CHECK(bad(R"({"functions": [{"name": "f", "body": [{"op": "expr",
      "value": {"op": "builtin", "name": "concat", "args": []}}]}]})") == Errc::Validation);
  // extension blocks only add behaviour
  CHECK(bad(R"({"types": [{"name": "T", "extends": true, "fields": [{"name": "x", "kind": "i64"}]}]})") ==
        Errc::Validation);
  // unknown keys are shape errors, bad names semantic ones
  CHECK(bad(R"({"typez": []})") == Errc::Parse);
  CHECK(bad(R"({"types": [{"name": "1T"}]})") == Errc::Validation);
}

namespace {

using oracle::pick;
using oracle::uniform;

struct ManifestGen {
  std::mt19937& g;
  std::vector<std::string> enum_names;

  ValueKind kind() {
    std::vector<ValueKind> kinds = {ValueKind::int64(), ValueKind::float64(), ValueKind::boolean(),
                                    ValueKind::cstring(), ValueKind::strobj(), ValueKind::object("T0")};
    for (const auto& e : enum_names) kinds.push_back(ValueKind::enumeration(e));
    return pick(g, kinds);
  }

  HostValue constant() {
    switch (uniform(g, 0, 4)) {
      case 0: return static_cast<std::int64_t>(uniform(g, -1000, 1000));
      case 1: return uniform(g, -1000, 1000) / 8.0 + 0.125;
      case 2: return uniform(g, 0, 1) == 1;
      case 3: return CStr{"s" + std::to_string(uniform(g, 0, 99))};
      default: return StrObj{"o" + std::to_string(uniform(g, 0, 99))};
    }
  }

  Expr expr(int depth, std::size_t arity, const std::vector<std::string>& fields) {
    int choice = uniform(g, 0, depth > 0 ? 5 : 2);
    if (choice == 1 && arity > 0) return {ParamExpr{static_cast<std::size_t>(uniform(g, 0, int(arity) - 1))}};
    if (choice == 2 && !fields.empty()) return {FieldExpr{pick(g, fields)}};
    if (choice == 3) {
      static const std::vector<BinaryOp> ops = {BinaryOp::Add, BinaryOp::Sub, BinaryOp::Mul, BinaryOp::Div,
                                                BinaryOp::Mod};
      return {BinaryExpr{pick(g, ops), expr(depth - 1, arity, fields), expr(depth - 1, arity, fields)}};
    }
    if (choice == 4) return {BuiltinExpr{Builtin::Sqrt, {expr(depth - 1, arity, fields)}}};
    if (choice == 5) {
      std::vector<Expr> parts;
      for (int i = uniform(g, 1, 3); i > 0; --i) parts.push_back(expr(depth - 1, arity, fields));
      return {BuiltinExpr{Builtin::Concat, std::move(parts)}};
    }
    return {ConstExpr{constant()}};
  }

  std::vector<Stmt> body(std::size_t arity, const std::vector<std::string>& fields) {
    std::vector<Stmt> out;
    for (int i = uniform(g, 0, 3); i > 0; --i) {
      if (!fields.empty() && uniform(g, 0, 1)) out.push_back(SetFieldStmt{pick(g, fields), expr(2, arity, fields)});
      else out.push_back(ExprStmt{expr(2, arity, fields)});
    }
    if (uniform(g, 0, 1)) out.push_back(ReturnStmt{expr(3, arity, fields)});
    return out;
  }

  MethodSignature signature(std::size_t arity, bool with_self, const std::vector<std::string>& fields) {
    MethodSignature s;
    for (std::size_t i = 0; i < arity; ++i) s.params.push_back(kind());
    s.returns = uniform(g, 0, 3) == 0 ? ValueKind::void_kind() : kind();
    s.body = body(arity, with_self ? fields : std::vector<std::string>{});
    return s;
  }

  Manifest manifest() {
    Manifest m;
    m.namespaces = {"N" + std::to_string(uniform(g, 0, 9))};
    for (int e = uniform(g, 0, 2); e > 0; --e) {
      std::string name = "E" + std::to_string(e);
      Enumerators vals;
      for (int k = uniform(g, 1, 4); k > 0; --k) vals["k" + std::to_string(k)] = uniform(g, -5, 50);
      m.enums[name] = vals;
      enum_names.push_back(name);
    }
    for (int t = 0, n = uniform(g, 1, 3); t < n; ++t) {
      TypeDecl td;
      td.name = "T" + std::to_string(t);
      td.ns = uniform(g, 0, 1) ? m.namespaces[0] : "";
      if (t > 0 && uniform(g, 0, 1)) td.bases.push_back("T0");
      std::vector<std::string> fields;
      for (int f = uniform(g, 0, 3); f > 0; --f) {
        FieldDecl fd{"f" + std::to_string(f), kind(), {}};
        fd.initial = default_value(fd.kind);
        if (fd.kind.tag == ValueKind::Tag::Enum) fd.initial = EnumVal{fd.kind.name, m.enums[fd.kind.name].begin()->second};
        td.fields.push_back(fd);
        fields.push_back(fd.name);
      }
      for (int k = uniform(g, 0, 3); k > 0; --k) {
        MethodDecl md{"m" + std::to_string(k), signature(static_cast<std::size_t>(uniform(g, 0, 2)), true, fields)};
        md.signature.is_static = uniform(g, 0, 4) == 0;
        if (md.signature.is_static) md.signature.body.clear();
        td.methods.push_back(std::move(md));
      }
      if (uniform(g, 0, 1)) {
        auto c = signature(static_cast<std::size_t>(uniform(g, 0, 2)), true, fields);
        c.returns = ValueKind::void_kind();
        td.ctors.push_back(std::move(c));
      }
      m.types.push_back(std::move(td));
    }
    for (int f = uniform(g, 0, 3); f > 0; --f) {
      FunctionDecl fd{"fn" + std::to_string(f), m.namespaces[0], signature(static_cast<std::size_t>(uniform(g, 0, 3)), false, {})};
      fd.signature.is_static = true;
      m.functions.push_back(std::move(fd));
    }
    for (int k = uniform(g, 0, 3); k > 0; --k) {
      GlobalDecl gd{"g" + std::to_string(k), "", ValueKind::int64(), static_cast<std::int64_t>(uniform(g, 0, 9))};
      m.globals.push_back(gd);
    }
    return m;
  }
};

}  // namespace

TEST_CASE("manifest property: serialize then parse is the identity") {
  for (std::uint32_t seed = 1; seed <= 300; ++seed) {
    std::mt19937 g(seed);
    ManifestGen gen{g, {}};
    Manifest m = gen.manifest();
    std::string text = serialize_manifest(m);
    INFO("seed " << seed << "\n" << text);
    Manifest back = parse_manifest(text);
    CHECK(back == m);
    CHECK(serialize_manifest(back) == text);
  }
}
