#include <doctest.h>

#include <random>
#include <set>

#include "fixtures.hpp"
#include "oracles.hpp"
#include "rjs/error.hpp"
#include "rjs/registry.hpp"

using namespace rjs;
using rjs::test::merge_text;

namespace {

constexpr const char* kPi = R"({"namespaces": ["ROOT.Math"],
  "functions": [{"name": "Pi", "namespace": "ROOT.Math", "returns": "f64",
                 "body": [{"op": "ret", "value": {"op": "const", "value": 3.141592653589793}}]}]})";

constexpr const char* kTH1 = R"({"types": [{"name": "TH1", "fields": [{"name": "fN", "kind": "i64"}],
  "methods": [{"name": "Fill", "params": ["f64", "f64"], "returns": "i64"}]}]})";

constexpr const char* kTH1Labels = R"({"types": [{"name": "TH1", "extends": true,
  "methods": [{"name": "Fill", "params": ["cstr", "f64"], "returns": "i64"}]}]})";

template <class T>
const T* as(const Entity& e) {
  auto* p = std::get_if<const T*>(&e);
  return p ? *p : nullptr;
}

}  // namespace

TEST_CASE("empty registry") {
  Registry r;
  CHECK(r.version() == 0);
  CHECK(r.enumerate("") == Listing{});
  CHECK(as<NamespaceNode>(r.lookup("")) == &r.root());
  CHECK(render_tree(r).empty());
}

TEST_CASE("minimal namespace-only manifest") {
  Registry r;
  CHECK(merge_text(r, R"({"namespaces": ["ROOT"]})") == 1);
  CHECK(r.enumerate("").namespaces == std::vector<std::string>{"ROOT"});
  CHECK(render_tree(r) == "ROOT/\n");
}

TEST_CASE("merge the Pi manifest") {
  Registry r;
  CHECK(merge_text(r, kPi) == 1);
  const auto* fs = as<FunctionSet>(r.lookup("ROOT.Math.Pi"));
  REQUIRE(fs);
  CHECK(fs->overloads.size() == 1);
  CHECK(as<NamespaceNode>(r.lookup("ROOT.Math")));
  CHECK(render_tree(r) == "ROOT/\n  Math/\n    Pi() -> f64\n");
}

TEST_CASE("lookup failures report the resolved prefix") {
  Registry r;
  merge_text(r, kPi);
  try {
    r.lookup("ROOT.NoSuch");
    FAIL("expected NotFound");
  } catch (const NotFoundError& e) {
    CHECK(e.code() == Errc::NotFound);
    CHECK(e.resolved_prefix() == "ROOT");
  }
  try {
    r.lookup("ROOT.Math.Pi.x");
    FAIL("expected NotFound");
  } catch (const NotFoundError& e) {
    CHECK(e.resolved_prefix() == "ROOT.Math");
  }
  CHECK_THROWS_AS(r.enumerate("ROOT.Math.Pi"), Error);
  try {
    r.enumerate("ROOT.Math.Pi");
  } catch (const Error& e) {
    CHECK(e.code() == Errc::NotANamespace);
  }
}

TEST_CASE("redeclaration conflicts leave the registry untouched") {
  Registry r;
  merge_text(r, kTH1);
  auto before = render_tree(r);
  try {
    merge_text(r, kTH1);
    FAIL("expected a conflict");
  } catch (const Error& e) {
    CHECK(e.code() == Errc::Conflict);
  }
  CHECK(r.version() == 1);
  CHECK(render_tree(r) == before);

  // A partly valid manifest is rejected as a whole.
  try {
    merge_text(r, R"({"globals": [{"name": "gOk", "kind": "i64"}, {"name": "TH1", "kind": "i64"}]})");
    FAIL("expected a conflict");
  } catch (const Error& e) {
    CHECK(e.code() == Errc::Conflict);
  }
  CHECK_THROWS(r.lookup("gOk"));
  CHECK(r.version() == 1);
}

TEST_CASE("overloads grow across manifests") {
  Registry r;
  merge_text(r, kTH1);
  merge_text(r, kTH1Labels);
  const auto* set = r.find_method("TH1", "Fill");
  REQUIRE(set);
  CHECK(set->size() == 2);
  CHECK(r.version() == 2);
  // the same signature again is indistinguishable
  try {
    merge_text(r, kTH1Labels);
    FAIL("expected a conflict");
  } catch (const Error& e) {
    CHECK(e.code() == Errc::Conflict);
  }
  // free functions too
  merge_text(r, R"({"functions": [{"name": "f", "params": ["i64"]}]})");
  merge_text(r, R"({"functions": [{"name": "f", "params": ["f64"]}]})");
  CHECK(r.find_function("f")->overloads.size() == 2);
}

TEST_CASE("extension of an unknown type fails") {
  Registry r;
  CHECK_THROWS_AS(merge_text(r, kTH1Labels), NotFoundError);
  CHECK(r.version() == 0);
}

TEST_CASE("inheritance queries") {
  Registry r;
  merge_text(r, R"({"namespaces": ["N"], "types": [
    {"name": "A", "fields": [{"name": "a", "kind": "i64"}], "methods": [{"name": "m", "returns": "i64"}]},
    {"name": "B", "namespace": "N", "bases": ["A"], "fields": [{"name": "b", "kind": "f64"}]},
    {"name": "C", "bases": ["N.B"], "fields": [{"name": "c", "kind": "bool"}]}]})");
  CHECK(r.base_distance("C", "C") == 0);
  CHECK(r.base_distance("C", "N.B") == 1);
  CHECK(r.base_distance("C", "A") == 2);
  CHECK_FALSE(r.base_distance("A", "C").has_value());
  CHECK(r.find_method("C", "m") == r.find_method("A", "m"));
  std::vector<std::string> names;
  for (const auto* f : r.all_fields("C")) names.push_back(f->name);
  CHECK(names == std::vector<std::string>{"a", "b", "c"});
}

TEST_CASE("semantic validation at merge time") {
  Registry r;
  auto code = [&](const char* text) {
    try {
      merge_text(r, text);
    } catch (const Error& e) {
      return e.code();
    }
    return Errc::Io;
  };
  CHECK(code(R"({"types": [{"name": "T", "bases": ["Nope"]}]})") == Errc::Validation);
  CHECK(code(R"({"types": [{"name": "T", "bases": ["U"]}, {"name": "U", "bases": ["T"]}]})") == Errc::Validation);
  CHECK(code(R"({"types": [{"name": "P", "fields": [{"name": "x", "kind": "i64"}]},
                           {"name": "Q", "bases": ["P"], "fields": [{"name": "x", "kind": "i64"}]}]})") ==
        Errc::Validation);
  CHECK(code(R"({"globals": [{"name": "g", "kind": {"enum": "Missing"}}]})") == Errc::Validation);
  CHECK(code(R"({"types": [{"name": "X"}], "namespaces": ["X.Y"]})") == Errc::Conflict);
  CHECK(r.version() == 0);
}

TEST_CASE("quiescence gate") {
  Registry r;
  std::size_t in_flight = 2;
  r.set_quiescence_probe([&] { return in_flight; });
  try {
    merge_text(r, kPi);
    FAIL("expected NotQuiescent");
  } catch (const Error& e) {
    CHECK(e.code() == Errc::NotQuiescent);
  }
  CHECK(r.version() == 0);
  in_flight = 0;
  CHECK(merge_text(r, kPi) == 1);
}

TEST_CASE("sample plugin: enumerate agrees with the manifest") {
  Registry r;
  auto text = test::slurp(test::sample_plugin());
  auto m = parse_manifest(text);
  r.merge(m);

  // Oracle listing built straight from the manifest.
  std::map<std::string, Listing> expected;
  auto ns_of = [](const std::string& q) { return split_qualified(q).first; };
  auto leaf = [](const std::string& q) { return split_qualified(q).second; };
  auto touch = [&](std::string ns) {
    expected[ns];
    while (!ns.empty()) {
      auto parent = ns_of(ns);
      auto& list = expected[parent].namespaces;
      if (std::find(list.begin(), list.end(), leaf(ns)) == list.end()) list.push_back(leaf(ns));
      ns = parent;
    }
  };
  for (const auto& ns : m.namespaces) touch(ns);
  for (const auto& [q, v] : m.enums) touch(ns_of(q)), expected[ns_of(q)].enums.push_back(leaf(q));
  for (const auto& t : m.types) touch(t.ns), expected[t.ns].types.push_back(t.name);
  for (const auto& f : m.functions) touch(f.ns), expected[f.ns].functions.push_back(f.name);
  for (const auto& g : m.globals) touch(g.ns), expected[g.ns].globals.push_back(g.name);

  CHECK(expected.size() >= 4);
  for (auto& [ns, listing] : expected) {
    for (auto* v : {&listing.namespaces, &listing.types, &listing.functions, &listing.globals, &listing.enums}) {
      std::sort(v->begin(), v->end());
      v->erase(std::unique(v->begin(), v->end()), v->end());
    }
    INFO("namespace '" << ns << "'");
    CHECK(r.enumerate(ns) == listing);
    // enumerate/lookup agreement
    for (const auto* v : {&listing.namespaces, &listing.types, &listing.functions, &listing.globals, &listing.enums})
      for (const auto& name : *v) CHECK_NOTHROW(r.lookup(join_qualified(ns, name)));
  }
}

TEST_CASE("sample plugin renders the golden tree") {
  Registry r;
  merge_text(r, test::slurp(test::sample_plugin()));
  CHECK(render_tree(r) == test::slurp(test::source_path("tests/golden/sample_tree.txt")));
}

TEST_CASE("property: merge is all-or-nothing and versions are strictly increasing") {
  for (std::uint32_t seed = 1; seed <= 50; ++seed) {
    std::mt19937 g(seed);
    Registry r;
    std::set<std::string> oracle;  // qualified names of types and globals declared so far
    std::uint64_t version = 0;
    for (int step = 0; step < 20; ++step) {
      // Each manifest declares 1-3 names from a small pool so collisions are common.
      std::set<std::string> names;
      for (int k = oracle::uniform(g, 1, 3); k > 0; --k)
        names.insert(std::string(oracle::uniform(g, 0, 1) ? "N." : "") + "x" + std::to_string(oracle::uniform(g, 0, 14)));
      std::string types, globals;
      for (const auto& q : names) {
        auto [ns, leaf] = split_qualified(q);
        std::string decl = R"({"name": ")" + leaf + R"(", "namespace": ")" + ns + "\"";
        if (leaf.back() % 2) types += (types.empty() ? "" : ",") + decl + "}";
        else globals += (globals.empty() ? "" : ",") + decl + R"(, "kind": "i64"})";
      }
      std::string text = R"({"namespaces": ["N"], "types": [)" + types + R"(], "globals": [)" + globals + "]}";
      bool clash = false;
      for (const auto& q : names) clash = clash || oracle.count(q);
      INFO("seed " << seed << " step " << step << ": " << text);
      if (clash) {
        CHECK_THROWS(merge_text(r, text));
        CHECK(r.version() == version);
      } else {
        auto v = merge_text(r, text);
        CHECK(v == version + 1);
        version = v;
        oracle.insert(names.begin(), names.end());
      }
      for (const auto& q : oracle) CHECK_NOTHROW(r.lookup(q));
      std::size_t declared = 0;
      for (const auto& ns : {std::string(""), std::string("N")}) {
        auto l = r.enumerate(ns);
        declared += l.types.size() + l.globals.size();
      }
      CHECK(declared == oracle.size());
    }
  }
}
