#include <doctest.h>

#include <algorithm>
#include <numeric>
#include <random>
#include <set>
#include <thread>

#include "fixtures.hpp"
#include "generators.hpp"
#include "oracles.hpp"
#include "rjs/error.hpp"
#include "rjs/runtime.hpp"

using namespace rjs;
using namespace std::chrono_literals;

namespace {

constexpr const char* kPi = R"({"namespaces": ["ROOT.Math"],
  "functions": [{"name": "Pi", "namespace": "ROOT.Math", "returns": "f64",
                 "body": [{"op": "ret", "value": {"op": "const", "value": 3.141592653589793}}]}]})";

Errc code_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  return Errc::Io;
}

ScriptValue call(Runtime& rt, const ScriptValue& target, std::vector<ScriptValue> args = {}) {
  return std::get<ScriptValue>(rt.bridge.invoke(target, std::move(args)));
}

ScriptValue path(Runtime& rt, const std::string& dotted) {
  ScriptValue v = NsRef{""};
  std::size_t start = 0;
  while (start <= dotted.size()) {
    auto end = dotted.find('.', start);
    if (end == std::string::npos) end = dotted.size();
    v = rt.bridge.member(v, dotted.substr(start, end - start));
    start = end + 1;
  }
  return v;
}

MethodSignature sig_of(std::vector<ValueKind> params) {
  MethodSignature s;
  s.params = std::move(params);
  s.returns = ValueKind::int64();
  return s;
}

CallablePtr noop() {
  return std::make_shared<NativeFunction>("noop", [](std::vector<ScriptValue>) { return ScriptValue{Null{}}; });
}

}  // namespace

TEST_CASE("build_root mirrors the registry") {
  Runtime rt(1);
  CHECK(build_root(rt.registry).size() == 0);
  test::merge_text(rt.registry, kPi);
  auto root = build_root(rt.registry);
  CHECK(root.find("ROOT.Math.Pi") == EntryKind::Function);
  CHECK(root.find("ROOT.Math") == EntryKind::Namespace);
  CHECK(root.version() == rt.registry.version());
}

TEST_CASE("root listing equals enumerate for every namespace of the sample plugin") {
  Runtime rt(1);
  rt.bridge.loadlibrary(test::sample_plugin());
  std::vector<std::string> pending{""};
  std::size_t visited = 0;
  while (!pending.empty()) {
    auto ns = pending.back();
    pending.pop_back();
    ++visited;
    auto listing = rt.bridge.root().children(ns);
    CHECK(listing == rt.registry.enumerate(ns));
    for (const auto& child : listing.namespaces) pending.push_back(join_qualified(ns, child));
  }
  CHECK(visited >= 4);
}

TEST_CASE("refresh counts new entries and is idempotent") {
  Runtime rt(1);
  CHECK(rt.bridge.refresh() == 0);
  test::merge_text(rt.registry, R"({"globals": [{"name": "a", "kind": "i64"}, {"name": "b", "kind": "i64"},
                                               {"name": "c", "kind": "i64"}]})");
  CHECK(rt.bridge.refresh() == 3);
  CHECK(rt.bridge.refresh() == 0);
  for (const char* n : {"a", "b", "c"}) CHECK(rt.bridge.root().find(n) == EntryKind::Global);

  // a statement-only macro moves the version without adding names
  rt.bridge.run_macro(R"({"statements": [{"op": "gset", "name": "a", "value": {"op": "const", "value": 1}}]})");
  CHECK(rt.bridge.root().version() == rt.registry.version());
  CHECK(rt.bridge.refresh() == 0);
}

TEST_CASE("proxy identity follows normalization") {
  Runtime rt(1);
  rt.bridge.loadlibrary(test::sample_plugin());
  auto a = rt.heap.construct("Vec2");
  auto p1 = rt.bridge.proxy_for(a);
  auto p2 = rt.bridge.proxy_for(a);
  auto p3 = rt.bridge.proxy_for(rt.heap.make_alias(rt.heap.make_alias(a)));
  CHECK(p1 == p2);
  CHECK(p1 == p3);
  CHECK(p1->canonical == a);
  CHECK(p1->type == "Vec2");
  rt.heap.destroy(a);
  CHECK(code_of([&] { rt.bridge.proxy_for(a); }) == Errc::DanglingHandle);
  CHECK(rt.bridge.proxies().forget_dead(rt.heap) == 1);
}

TEST_CASE("property: 1000 aliases of 10 objects yield 10 proxies") {
  for (std::uint32_t seed = 1; seed <= 10; ++seed) {
    Runtime rt(1);
    rt.bridge.loadlibrary(test::sample_plugin());
    std::mt19937 g(seed);
    std::vector<Handle> handles;
    std::map<Handle, Handle> root;
    for (int i = 0; i < 10; ++i) {
      auto a = rt.heap.construct("Vec2");
      handles.push_back(a);
      root[a] = a;
    }
    for (int i = 0; i < 1000; ++i) {
      auto from = oracle::pick(g, handles);
      auto h = rt.heap.make_alias(from);
      root[h] = root[from];
      handles.push_back(h);
    }
    std::set<const Proxy*> distinct;
    std::map<Handle, const Proxy*> by_root;
    for (auto h : handles) {
      auto p = rt.bridge.proxy_for(h).get();
      distinct.insert(p);
      auto [it, fresh] = by_root.emplace(root[h], p);
      CHECK(it->second == p);
    }
    CHECK(distinct.size() == 10);
    CHECK(rt.bridge.proxies().size() == 10);
  }
}

TEST_CASE("to_host conversions") {
  Runtime rt(1);
  rt.bridge.loadlibrary(test::sample_plugin());
  CHECK(rt.bridge.to_host(2.0, ValueKind::int64()) == HostValue{std::int64_t{2}});
  CHECK(code_of([&] { rt.bridge.to_host(2.5, ValueKind::int64()); }) == Errc::Conversion);
  CHECK(rt.bridge.to_host(std::string("kBlue"), ValueKind::enumeration("EColor")) ==
        HostValue{EnumVal{"EColor", 600}});
  CHECK(rt.bridge.to_host(632.0, ValueKind::enumeration("EColor")) == HostValue{EnumVal{"EColor", 632}});
  CHECK(code_of([&] { rt.bridge.to_host(std::string("kPurple"), ValueKind::enumeration("EColor")); }) ==
        Errc::Conversion);
  CHECK(code_of([&] { rt.bridge.to_host(3.0, ValueKind::enumeration("EColor")); }) == Errc::Conversion);
  CHECK(rt.bridge.to_host(std::string("s"), ValueKind::strobj()) == HostValue{StrObj{"s"}});
  CHECK(rt.bridge.to_host(Null{}, ValueKind::object("TFile")) == HostValue{Ref{0}});
  CHECK(code_of([&] { rt.bridge.to_host(true, ValueKind::int64()); }) == Errc::Conversion);
  try {
    rt.bridge.to_host(std::string("x"), ValueKind::float64());
  } catch (const Error& e) {
    CHECK(std::string(e.what()).find("f64") != std::string::npos);
    CHECK(std::string(e.what()).find("string") != std::string::npos);
  }
  // a proxy converts to its own type or any base, never to a sibling
  auto file = rt.heap.construct("TFile");
  auto p = rt.bridge.proxy_for(file);
  CHECK(rt.bridge.to_host(p, ValueKind::object("TObject")) == HostValue{Ref{file}});
  CHECK(code_of([&] { rt.bridge.to_host(p, ValueKind::object("TH1")); }) == Errc::Conversion);
}

TEST_CASE("to_script conversions") {
  Runtime rt(1);
  rt.bridge.loadlibrary(test::sample_plugin());
  CHECK(rt.bridge.to_script(5.0) == ScriptValue{5.0});
  CHECK(rt.bridge.to_script(std::int64_t{1} << 53) == ScriptValue{9007199254740992.0});
  CHECK(code_of([&] { rt.bridge.to_script((std::int64_t{1} << 53) + 1); }) == Errc::Precision);
  CHECK(code_of([&] { rt.bridge.to_script(-(std::int64_t{1} << 53) - 1); }) == Errc::Precision);
  CHECK(rt.bridge.to_script(CStr{"a"}) == ScriptValue{std::string("a")});
  CHECK(rt.bridge.to_script(StrObj{"b"}) == ScriptValue{std::string("b")});
  CHECK(rt.bridge.to_script(EnumVal{"EColor", 600}) == ScriptValue{600.0});
  CHECK(rt.bridge.to_script(VoidVal{}) == ScriptValue{Null{}});
  CHECK(rt.bridge.to_script(Ref{0}) == ScriptValue{Null{}});
  auto a = rt.heap.construct("Vec2");
  auto via_ref = std::get<ProxyPtr>(rt.bridge.to_script(Ref{rt.heap.make_alias(a)}));
  CHECK(via_ref == rt.bridge.proxy_for(a));
}

TEST_CASE("property: exact conversions round-trip") {
  Runtime rt(1);
  std::mt19937_64 g(99);
  for (int i = 0; i < 2000; ++i) {
    double x = std::ldexp(static_cast<double>(g() >> 11), static_cast<int>(g() % 200) - 100);
    if (g() % 2) x = -x;
    CHECK(rt.bridge.to_script(rt.bridge.to_host(x, ValueKind::float64())) == ScriptValue{x});
    std::string s(g() % 12, static_cast<char>('a' + g() % 26));
    CHECK(rt.bridge.to_script(rt.bridge.to_host(s, ValueKind::cstring())) == ScriptValue{s});
    bool b = g() % 2;
    CHECK(rt.bridge.to_script(rt.bridge.to_host(b, ValueKind::boolean())) == ScriptValue{b});
  }
}

TEST_CASE("the two Fill vignettes") {
  Runtime rt(1);
  rt.bridge.loadlibrary(test::sample_plugin());
  const auto& fill = *rt.registry.find_method("TH1", "Fill");
  std::vector<ScriptValue> nums{1.5, 2.0};
  std::vector<ScriptValue> label{std::string("bin"), 2.0};
  auto r1 = rt.bridge.resolve_overload(fill, nums);
  auto r2 = rt.bridge.resolve_overload(fill, label);
  CHECK(fill[r1.index].params == std::vector<ValueKind>{ValueKind::float64(), ValueKind::float64()});
  CHECK(fill[r2.index].params == std::vector<ValueKind>{ValueKind::cstring(), ValueKind::float64()});
  CHECK(r2.converted == std::vector<HostValue>{CStr{"bin"}, 2.0});

  // and end to end through a proxy
  auto h = std::get<ProxyPtr>(call(rt, TypeRef{"TH1F"}, {std::string("h"), std::string("t")}));
  call(rt, rt.bridge.member(h, "Fill"), {1.5, 2.0});
  call(rt, rt.bridge.member(h, "Fill"), {std::string("bin"), 0.5});
  CHECK(rt.bridge.member(h, "fEntries") == ScriptValue{2.0});
  CHECK(rt.bridge.member(h, "fSumw") == ScriptValue{2.5});
  CHECK(rt.bridge.member(h, "fLastLabel") == ScriptValue{std::string("bin")});
}

TEST_CASE("resolution examples") {
  Registry reg;
  test::merge_text(reg, gen::kOverloadWorld);
  OverloadSet i_or_f{sig_of({ValueKind::int64()}), sig_of({ValueKind::float64()})};
  std::vector<ScriptValue> two{2.0};
  CHECK(resolve_overload(i_or_f, two, reg).index == 1);

  // i64 costs 1, a registered enumerator value costs 2
  OverloadSet i_or_e{sig_of({ValueKind::int64()}), sig_of({ValueKind::enumeration("Color")})};
  CHECK(resolve_overload(i_or_e, two, reg).index == 0);

  // a name beats nothing; only the enum accepts it
  std::vector<ScriptValue> red{std::string("kRed")};
  CHECK(resolve_overload(i_or_e, red, reg).index == 1);

  // diamond: F reaches B and D in one step each
  auto f = std::make_shared<const Proxy>(Proxy{0x1000, "F"});
  OverloadSet b_or_d{sig_of({ValueKind::object("B")}), sig_of({ValueKind::object("D")})};
  std::vector<ScriptValue> fa{ProxyPtr(f)};
  CHECK(code_of([&] { resolve_overload(b_or_d, fa, reg); }) == Errc::Ambiguous);
  OverloadSet a_or_d{sig_of({ValueKind::object("A")}), sig_of({ValueKind::object("D")})};
  CHECK(resolve_overload(a_or_d, fa, reg).index == 1);

  // str and cstr overloads: cstr wins
  OverloadSet s_or_c{sig_of({ValueKind::strobj()}), sig_of({ValueKind::cstring()})};
  std::vector<ScriptValue> text{std::string("x")};
  CHECK(resolve_overload(s_or_c, text, reg).index == 1);

  // trailing callable is the completion callback
  std::vector<ScriptValue> with_cb{2.0, ScriptValue{noop()}};
  auto r = resolve_overload(i_or_f, with_cb, reg);
  CHECK(r.index == 1);
  CHECK(r.callback);

  std::vector<ScriptValue> wrong{true};
  CHECK(code_of([&] { resolve_overload(i_or_f, wrong, reg); }) == Errc::NoMatch);
  std::vector<ScriptValue> arity{1.0, 2.0};
  CHECK(code_of([&] { resolve_overload(i_or_f, arity, reg); }) == Errc::NoMatch);
}

TEST_CASE("property: resolver agrees with the exhaustive scorer") {
  Registry reg;
  test::merge_text(reg, gen::kOverloadWorld);
  std::mt19937 g(2024);
  std::map<int, int> kinds;
  for (int i = 0; i < 10000; ++i) {
    auto c = gen::random_overload_case(g);
    auto expected = oracle::score(reg, c.params, c.args);
    auto got = gen::classify_resolution(c.set, c.args, reg);
    kinds[expected.kind]++;
    REQUIRE(got == expected);
  }
  // the generator must exercise all three outcomes
  CHECK(kinds[oracle::Verdict::Winner] > 1000);
  CHECK(kinds[oracle::Verdict::NoMatch] > 1000);
  CHECK(kinds[oracle::Verdict::Ambiguous] > 100);
}

TEST_CASE("property: the winner does not depend on storage order") {
  Registry reg;
  test::merge_text(reg, gen::kOverloadWorld);
  std::mt19937 g(7);
  for (int i = 0; i < 2000; ++i) {
    auto c = gen::random_overload_case(g);
    auto base = gen::classify_resolution(c.set, c.args, reg);
    std::vector<std::size_t> perm(c.set.size());
    std::iota(perm.begin(), perm.end(), 0);
    std::shuffle(perm.begin(), perm.end(), g);
    OverloadSet shuffled;
    for (auto k : perm) shuffled.push_back(c.set[k]);
    auto again = gen::classify_resolution(shuffled, c.args, reg);
    REQUIRE(again.kind == base.kind);
    if (base.kind == oracle::Verdict::Winner) CHECK(perm[again.index] == base.index);
  }
}

TEST_CASE("invoke: synchronous paths") {
  Runtime rt(1);
  rt.bridge.loadlibrary(test::sample_plugin());
  rt.bridge.loadlibrary(test::mathcore_plugin());
  CHECK(call(rt, path(rt, "ROOT.Math.Pi")) == ScriptValue{3.141592653589793});
  auto v = call(rt, TypeRef{"Vec2"}, {3.0, 4.0});
  CHECK(call(rt, rt.bridge.member(v, "Mag")) == ScriptValue{5.0});
  CHECK(call(rt, path(rt, "TObject.ClassName")) == ScriptValue{std::string("TObject")});
  // default construction, and a static reached through an instance
  auto r = std::get<ProxyPtr>(call(rt, TypeRef{"TRandom"}));
  CHECK(rt.bridge.member(r, "fSeed") == ScriptValue{65539.0});
  CHECK(call(rt, rt.bridge.member(call(rt, TypeRef{"Vec2"}, {0.0, 0.0}), "Mag")) == ScriptValue{0.0});
  // static lookup through a type refuses instance methods
  CHECK(code_of([&] { path(rt, "Vec2.Mag"); }) == Errc::Name);
  CHECK(code_of([&] { call(rt, path(rt, "gDebug")); }) == Errc::Type);
  CHECK(code_of([&] { call(rt, TypeRef{"Vec2"}, {std::string("x"), 1.0}); }) == Errc::NoMatch);
  CHECK(code_of([&] { call(rt, path(rt, "ROOT.Math.Sqrt"), {-1.0}); }) == Errc::HostExec);
}

TEST_CASE("invoke: a trailing callback makes the call asynchronous") {
  Runtime rt(2);
  rt.bridge.loadlibrary(test::sample_plugin());
  std::vector<ScriptValue> got;
  auto cb = std::make_shared<NativeFunction>("cb", [&](std::vector<ScriptValue> args) {
    got = args;
    return ScriptValue{Null{}};
  });
  auto start = Clock::now();
  auto result = rt.bridge.invoke(path(rt, "TFile.Open"), {std::string("foo.root"), ScriptValue{CallablePtr(cb)}});
  CHECK(Clock::now() - start < 40ms);
  REQUIRE(std::holds_alternative<PendingCall>(result));
  CHECK(std::get<PendingCall>(result).id > 0);
  CHECK(got.empty());
  CHECK(rt.dispatcher.drain(5s));
  REQUIRE(got.size() == 1);
  auto fin = std::get<ProxyPtr>(got[0]);
  CHECK(fin->type == "TFile");
  CHECK(call(rt, rt.bridge.member(fin, "ls")) ==
        ScriptValue{std::string("TFile**\t\tfoo.root\n TFile*\t\tfoo.root [READ]")});
}

TEST_CASE("loadlibrary") {
  Runtime rt(1);
  test::TempDir dir("bridge");
  auto before = rt.bridge.root().size();
  CHECK(code_of([&] { rt.bridge.loadlibrary(dir.path().string() + "/missing.json"); }) == Errc::Io);
  CHECK(code_of([&] { rt.bridge.loadlibrary(dir.write("bad.json", "{")); }) == Errc::Parse);
  CHECK(code_of([&] {
    rt.bridge.loadlibrary(dir.write("stmts.json", R"({"statements": [{"op": "gset", "name": "x", "value": {"op": "const", "value": 1}}]})"));
  }) == Errc::Validation);
  CHECK(rt.bridge.root().size() == before);
  CHECK(rt.registry.version() == 0);

  rt.bridge.add_search_path(dir.path());
  dir.write("pi.json", kPi);
  CHECK(rt.bridge.loadlibrary("pi.json") == 1);
  CHECK(rt.bridge.root().find("ROOT.Math.Pi") == EntryKind::Function);
  CHECK(code_of([&] { rt.bridge.loadlibrary("pi.json"); }) == Errc::Conflict);
}

TEST_CASE("loadlibrary waits for quiescence") {
  Runtime rt(1);
  test::TempDir dir("quiet");
  test::merge_text(rt.registry, test::sleeper_manifest("slow", 300));
  rt.bridge.refresh();
  auto lib = dir.write("pi.json", kPi);
  rt.bridge.invoke(path(rt, "slow"), {1.0, ScriptValue{noop()}});
  CHECK(code_of([&] { rt.bridge.loadlibrary(lib); }) == Errc::NotQuiescent);
  CHECK(rt.dispatcher.drain(5s));
  CHECK_NOTHROW(rt.bridge.loadlibrary(lib));
}

TEST_CASE("globals read through and write through") {
  Runtime rt(1);
  rt.bridge.loadlibrary(test::sample_plugin());
  CHECK(path(rt, "gStyleName") == ScriptValue{std::string("Modern")});
  CHECK(path(rt, "ROOT.gBatch") == ScriptValue{true});
  CHECK(path(rt, "gFile") == ScriptValue{Null{}});
  rt.heap.write_global("gDebug", std::int64_t{3});
  CHECK(path(rt, "gDebug") == ScriptValue{3.0});
  rt.bridge.assign(NsRef{""}, "gDebug", 5.0);
  CHECK(rt.heap.read_global("gDebug") == HostValue{std::int64_t{5}});
  rt.bridge.assign(path(rt, "IO"), "gCompression", 0.0);
  CHECK(rt.heap.read_global("IO.gCompression") == HostValue{std::int64_t{0}});
  CHECK(code_of([&] { rt.bridge.assign(NsRef{""}, "gDebug", 0.5); }) == Errc::Conversion);
  CHECK(code_of([&] { rt.bridge.assign(NsRef{""}, "Vec2", 1.0); }) == Errc::Type);
  auto v = call(rt, TypeRef{"Vec2"}, {1.0, 1.0});
  CHECK(code_of([&] { rt.bridge.assign(v, "x", 2.0); }) == Errc::Type);
  // a host function writing a global is visible on the next read
  call(rt, path(rt, "SetDebug"), {9.0});
  CHECK(path(rt, "gDebug") == ScriptValue{9.0});
}

TEST_CASE("enums, fields and member errors") {
  Runtime rt(1);
  rt.bridge.loadlibrary(test::sample_plugin());
  CHECK(path(rt, "EColor.kRed") == ScriptValue{632.0});
  CHECK(path(rt, "ROOT.EStatus.kError") == ScriptValue{2.0});
  CHECK(code_of([&] { path(rt, "EColor.kPurple"); }) == Errc::Name);
  CHECK(code_of([&] { path(rt, "NoSuch"); }) == Errc::NotFound);
  auto c = call(rt, TypeRef{"TColor"}, {std::string("kGreen")});
  CHECK(call(rt, rt.bridge.member(c, "GetNumber")) == ScriptValue{416.0});
  auto p = std::get<ProxyPtr>(call(rt, TypeRef{"Vec2"}, {1.0, 2.0}));
  rt.bridge.write_field(p, "x", 6.0);
  CHECK(rt.bridge.read_field(p, "x") == ScriptValue{6.0});
  CHECK(rt.heap.read_field(p->canonical, "x") == HostValue{6.0});
  CHECK(code_of([&] { rt.bridge.write_field(p, "nope", 1.0); }) == Errc::UnknownField);
  CHECK(code_of([&] { rt.bridge.member(p, "nope"); }) == Errc::Name);
  CHECK(code_of([&] { rt.bridge.member(3.0, "x"); }) == Errc::Type);
}

TEST_CASE("run_macro resyncs the tree") {
  Runtime rt(1);
  rt.bridge.run_macro(kPi);
  CHECK(call(rt, path(rt, "ROOT.Math.Pi")) == ScriptValue{3.141592653589793});
  rt.bridge.run_macro(R"({"globals": [{"name": "counter", "kind": "i64"}]})");
  rt.bridge.run_macro(R"({"statements": [{"op": "gset", "name": "counter", "value": {"op": "const", "value": 7}}]})");
  CHECK(path(rt, "counter") == ScriptValue{7.0});
  // declarations merged before a statement fault stay visible
  CHECK(code_of([&] {
    rt.bridge.run_macro(R"({"globals": [{"name": "late", "kind": "i64"}], "statements": [
      {"op": "expr", "value": {"op": "builtin", "name": "sqrt", "args": [{"op": "const", "value": -1}]}}]})");
  }) == Errc::HostExec);
  CHECK(rt.bridge.root().find("late") == EntryKind::Global);
}
