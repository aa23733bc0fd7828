#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <variant>
#include <vector>

#include "rjs/dispatcher.hpp"
#include "rjs/heap.hpp"
#include "rjs/registry.hpp"

namespace rjs {

class Callable;
using CallablePtr = std::shared_ptr<Callable>;

/// Script-side stand-in for one host object. Holds identity only; every
/// read and write goes to the heap.
struct Proxy {
  Address canonical = 0;
  std::string type;
};
using ProxyPtr = std::shared_ptr<const Proxy>;

struct Null {
  friend bool operator==(const Null&, const Null&) = default;
};
struct NsRef {
  std::string path;
  friend bool operator==(const NsRef&, const NsRef&) = default;
};
struct TypeRef {
  std::string name;
  friend bool operator==(const TypeRef&, const TypeRef&) = default;
};
struct FnRef {
  std::string path;
  friend bool operator==(const FnRef&, const FnRef&) = default;
};
struct EnumRef {
  std::string name;
  friend bool operator==(const EnumRef&, const EnumRef&) = default;
};
/// A method looked up on a proxy (bound) or on a type (static only).
struct MethodRef {
  std::string type;
  std::string name;
  ProxyPtr self;
  friend bool operator==(const MethodRef&, const MethodRef&) = default;
};

/// Dynamic value of the scripting language. double is the only number.
using ScriptValue =
    std::variant<Null, double, std::string, bool, CallablePtr, ProxyPtr, NsRef, TypeRef, FnRef, MethodRef, EnumRef>;

class Callable {
 public:
  virtual ~Callable() = default;
  virtual ScriptValue call(std::vector<ScriptValue> args) = 0;
  virtual std::string describe() const = 0;
};

class NativeFunction : public Callable {
 public:
  using Fn = std::function<ScriptValue(std::vector<ScriptValue>)>;
  NativeFunction(std::string name, Fn fn) : name_(std::move(name)), fn_(std::move(fn)) {}
  ScriptValue call(std::vector<ScriptValue> args) override { return fn_(std::move(args)); }
  std::string describe() const override { return "<native " + name_ + ">"; }

 private:
  std::string name_;
  Fn fn_;
};

/// "number", "string", "proxy", ...
std::string_view script_kind_name(const ScriptValue& value);

/// Canonical text for print and the REPL: numbers shortest round-trip,
/// strings verbatim.
std::string render(const ScriptValue& value);

/// Identity-preserving proxy cache keyed by canonical address.
class ProxyFactory {
 public:
  ProxyPtr proxy_for(const Heap& heap, Handle handle);
  std::size_t size() const { return cache_.size(); }
  /// Drops entries whose objects were destroyed.
  std::size_t forget_dead(const Heap& heap);

  std::uint64_t registry_version_seen = 0;

 private:
  std::unordered_map<Address, ProxyPtr> cache_;
};

enum class EntryKind { Namespace, Type, Function, Global, Enum };

/// The property tree hung off `root`: one entry per namespace, type,
/// function set, global and enum, keyed by qualified path.
class RootObject {
 public:
  std::optional<EntryKind> find(std::string_view path) const;
  /// Children of a namespace entry ("" is the root), sorted per category.
  Listing children(std::string_view path) const;
  std::uint64_t version() const { return version_; }
  std::size_t size() const { return entries_.size(); }
  const std::map<std::string, EntryKind, std::less<>>& entries() const { return entries_; }

 private:
  friend RootObject build_root(const Registry& registry);
  friend std::size_t refresh(RootObject& root, const Registry& registry);

  std::map<std::string, EntryKind, std::less<>> entries_;
  std::uint64_t version_ = 0;
};

RootObject build_root(const Registry& registry);

/// Rebuilds the tree if the registry version moved; returns the number of
/// entries that were not present before.
std::size_t refresh(RootObject& root, const Registry& registry);

/// Conversion cost of one argument, nullopt when it does not convert:
///   number -> f64 0, -> i64 1 (integral only), -> enum 2 (registered value)
///   string -> cstr 0, -> str 1, -> enum 2 (enumerator name)
///   bool -> bool 0; null -> obj 1; proxy -> obj 0 + 1 per base step.
std::optional<int> argument_cost(const ScriptValue& value, const ValueKind& kind, const Registry& registry);

struct Resolution {
  std::size_t index = 0;
  std::vector<HostValue> converted;
  CallablePtr callback;
};

/// Picks the unique cheapest overload. A trailing callable is split off as
/// the completion callback first. Throws NoMatch or Ambiguous.
Resolution resolve_overload(const OverloadSet& set, std::span<const ScriptValue> args, const Registry& registry);

HostValue to_host(const ScriptValue& value, const ValueKind& kind, const Registry& registry);

struct PendingCall {
  CallId id = 0;
};
using InvokeResult = std::variant<ScriptValue, PendingCall>;

/// The adapter between the script and the host: mirrors the registry as a
/// property tree, converts values, resolves overloads and routes calls.
/// Interpreter domain only.
class Bridge {
 public:
  Bridge(Registry& registry, Heap& heap, Dispatcher& dispatcher);

  const RootObject& root() const { return root_; }
  std::size_t refresh();

  ProxyPtr proxy_for(Handle handle);
  ProxyFactory& proxies() { return proxies_; }

  HostValue to_host(const ScriptValue& value, const ValueKind& kind) const;
  ScriptValue to_script(const HostValue& value);
  Resolution resolve_overload(const OverloadSet& set, std::span<const ScriptValue> args) const;

  /// Calls a FnRef, TypeRef (construction) or MethodRef. Without a trailing
  /// callback the call runs inline; with one it is submitted and the call
  /// id returned at once.
  InvokeResult invoke(const ScriptValue& target, std::vector<ScriptValue> args);

  /// Loads a plugin manifest and refreshes the tree. Returns the new
  /// registry version.
  std::uint64_t loadlibrary(const std::string& path);

  /// Evaluates macro text and refreshes the tree.
  MacroResult run_macro(std::string_view text);

  /// Property read: namespaces, types, functions, globals (current heap
  /// value), enums, proxy fields and methods, static methods.
  ScriptValue member(const ScriptValue& object, std::string_view name);

  /// Property write. Only globals are writable from script.
  void assign(const ScriptValue& object, std::string_view name, const ScriptValue& value);

  /// Direct field access through a proxy.
  ScriptValue read_field(const ProxyPtr& proxy, std::string_view field);
  void write_field(const ProxyPtr& proxy, std::string_view field, const ScriptValue& value);

  /// Extra directories searched by loadlibrary and macro for relative paths.
  void add_search_path(std::filesystem::path dir);
  std::filesystem::path resolve_path(const std::string& path) const;

  Registry& registry() { return registry_; }
  Heap& heap() { return heap_; }
  Dispatcher& dispatcher() { return dispatcher_; }

 private:
  ScriptValue root_member(std::string_view name);
  ScriptValue run_call(CallKind kind, const std::string& type_name, const OverloadSet& set, bool statics_only,
                       const ProxyPtr& self, std::vector<ScriptValue> args, PendingCall& pending);

  Registry& registry_;
  Heap& heap_;
  Dispatcher& dispatcher_;
  RootObject root_;
  ProxyFactory proxies_;
  std::vector<std::filesystem::path> search_paths_;
  std::map<std::string, CallablePtr, std::less<>> root_natives_;
};

}  // namespace rjs
