#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "rjs/manifest.hpp"
#include "rjs/value.hpp"

namespace rjs {

struct FieldDescriptor {
  std::string name;
  ValueKind kind;
  HostValue initial;
};

/// Introspection metadata for one host composite type.
struct HostTypeDescriptor {
  std::string qualified_name;
  std::vector<std::string> bases;
  std::vector<FieldDescriptor> fields;  // own fields only, declaration order
  std::map<std::string, OverloadSet> methods;
  OverloadSet constructors;
};

struct FunctionSet {
  std::string qualified_name;
  OverloadSet overloads;
};

struct GlobalDescriptor {
  std::string qualified_name;
  ValueKind kind;
  HostValue initial;
};

struct EnumDescriptor {
  std::string qualified_name;
  Enumerators enumerators;
};

/// One level of the host namespace hierarchy. The five maps never share a
/// key.
struct NamespaceNode {
  std::string name;
  std::string qualified_name;
  std::map<std::string, NamespaceNode> namespaces;
  std::map<std::string, HostTypeDescriptor> types;
  std::map<std::string, FunctionSet> functions;
  std::map<std::string, GlobalDescriptor> globals;
  std::map<std::string, EnumDescriptor> enums;

  bool has_child(const std::string& leaf) const;
  bool empty() const {
    return namespaces.empty() && types.empty() && functions.empty() && globals.empty() && enums.empty();
  }
};

using Entity = std::variant<const NamespaceNode*, const HostTypeDescriptor*, const FunctionSet*,
                            const GlobalDescriptor*, const EnumDescriptor*>;

/// Child names of a namespace, each category sorted lexicographically.
struct Listing {
  std::vector<std::string> namespaces;
  std::vector<std::string> types;
  std::vector<std::string> functions;
  std::vector<std::string> globals;
  std::vector<std::string> enums;

  friend bool operator==(const Listing&, const Listing&) = default;
};

/// All introspection metadata. Mutated only on the interpreter domain while
/// no asynchronous call is in flight; worker reads need no locking.
class Registry {
 public:
  Registry();

  const NamespaceNode& root() const { return root_; }
  std::uint64_t version() const { return version_; }

  /// Merges all declarations of a validated manifest. Atomic: on error the
  /// registry is unchanged. Returns the new version.
  std::uint64_t merge(const Manifest& manifest);

  /// Resolves a dot-separated path; "" is the root namespace.
  Entity lookup(std::string_view path) const;
  Listing enumerate(std::string_view path) const;

  const HostTypeDescriptor* find_type(std::string_view qualified_name) const;
  const GlobalDescriptor* find_global(std::string_view qualified_name) const;
  const EnumDescriptor* find_enum(std::string_view qualified_name) const;
  const FunctionSet* find_function(std::string_view qualified_name) const;

  /// Number of steps from `type` up its base chain to `ancestor` (0 when
  /// equal), or nullopt when unrelated.
  std::optional<int> base_distance(std::string_view type, std::string_view ancestor) const;

  /// Overloads of `method` on `type` or, failing that, on the nearest base
  /// declaring it.
  const OverloadSet* find_method(std::string_view type, std::string_view method) const;

  /// Own and inherited fields, bases first.
  std::vector<const FieldDescriptor*> all_fields(std::string_view type) const;

  /// Declares a global created by a macro statement. Does not bump the
  /// version; eval_macro accounts for the whole macro with one bump.
  void declare_macro_global(const std::string& qualified_name, const ValueKind& kind, const HostValue& initial);

  /// Installed by the engine; merge and macros refuse to run while it
  /// reports in-flight calls.
  void set_quiescence_probe(std::function<std::size_t()> in_flight);
  void require_quiescent() const;

  /// Bumps the version for a mutation that declared nothing (a macro with
  /// statements only still counts).
  std::uint64_t bump_version() { return ++version_; }

 private:
  NamespaceNode root_;
  std::uint64_t version_ = 0;
  std::function<std::size_t()> in_flight_;
};

/// Text rendering of the whole namespace tree, two-space indentation,
/// categories in the order namespaces, types, functions, globals, enums.
/// Empty registry renders as "".
std::string render_tree(const Registry& registry);

std::string render_signature(std::string_view name, const MethodSignature& sig);

class Heap;

struct MacroResult {
  std::uint64_t version = 0;
  HostValue value;
};

/// Parses a macro, merges its declarations, then runs its top-level
/// statements against the heap. Declarations survive a statement fault and
/// the version is bumped exactly once either way.
MacroResult eval_macro(Registry& registry, Heap& heap, std::string_view text);

}  // namespace rjs
