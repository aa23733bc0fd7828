#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <shared_mutex>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "rjs/manifest.hpp"
#include "rjs/value.hpp"

namespace rjs {

class Registry;

/// Any identifier naming a host object: a canonical address or an alias.
using Handle = std::uint64_t;
/// The one identifier per live object that all its handles normalize to.
using Address = std::uint64_t;

/// Host object storage and the evaluator for host bodies. All objects and
/// globals live here; nothing outside holds copies of their state.
///
/// Thread-safe: individual reads and writes are atomic, structural changes
/// (construct, alias, destroy) are serialised. Bodies are not transactional.
class Heap {
 public:
  static constexpr Address kFirstAddress = 0x1000;

  explicit Heap(const Registry& registry);
  Heap(const Heap&) = delete;
  Heap& operator=(const Heap&) = delete;

  /// Creates an object of `type_name`. With `ctor` null the constructor set
  /// must be empty (or `args` empty) and fields keep their declared initials;
  /// otherwise `ctor`'s body runs with self bound after the initials.
  Address construct(std::string_view type_name, std::span<const HostValue> args = {},
                    const MethodSignature* ctor = nullptr);

  /// Fresh handle for the object `handle` refers to.
  Handle make_alias(Handle handle);
  Address normalize(Handle handle) const;
  bool is_live(Handle handle) const;
  std::string type_of(Handle handle) const;

  HostValue read_field(Handle handle, std::string_view field) const;
  void write_field(Handle handle, std::string_view field, HostValue value);

  HostValue read_global(std::string_view name) const;
  void write_global(std::string_view name, HostValue value);

  /// Runs a body. `self` must be set for instance methods. Faults inside the
  /// body surface as HostExecError.
  HostValue exec_body(std::optional<Handle> self, const MethodSignature& signature,
                      std::span<const HostValue> args);

  /// Called when a top-level macro statement assigns an undeclared global.
  using GlobalDeclarer = std::function<void(const std::string& name, const HostValue& value)>;

  /// Runs macro top-level statements; returns the value of a Return, or Void.
  HostValue exec_statements(std::span<const Stmt> statements, const GlobalDeclarer& declare);

  void destroy(Handle handle);

  std::size_t object_count() const;

  /// Does `value` inhabit `kind`? Refs are checked against the live object's
  /// type and its bases; Ref 0 (null) inhabits every object kind.
  bool matches_kind(const HostValue& value, const ValueKind& kind) const;

  const Registry& registry() const { return registry_; }

 private:
  struct Slot {
    ValueKind kind;
    HostValue value;
  };
  struct HostObject {
    Address address = 0;
    std::string type;
    std::map<std::string, Slot, std::less<>> storage;
    std::vector<Handle> aliases;
  };

  friend class BodyEvaluator;

  Address normalize_locked(Handle handle) const;
  bool matches_kind_locked(const HostValue& value, const ValueKind& kind) const;
  Slot* global_slot_locked(std::string_view name) const;

  const Registry& registry_;
  mutable std::shared_mutex mu_;
  std::unordered_map<Address, HostObject> objects_;
  std::unordered_map<Handle, Address> aliases_;
  // Seeded lazily from registry declarations on first access.
  mutable std::map<std::string, Slot, std::less<>> globals_;
  std::uint64_t next_address_ = kFirstAddress;
};

}  // namespace rjs
