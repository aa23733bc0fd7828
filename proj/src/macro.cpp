#include "rjs/error.hpp"
#include "rjs/heap.hpp"
#include "rjs/registry.hpp"

namespace rjs {

MacroResult eval_macro(Registry& registry, Heap& heap, std::string_view text) {
  Manifest macro = parse_manifest(text);
  registry.require_quiescent();
  // One version bump for the whole macro, taken before any statement runs.
  std::uint64_t version = macro.has_declarations() ? registry.merge(macro) : registry.bump_version();
  Heap::GlobalDeclarer declare = [&registry, &heap](const std::string& name, const HostValue& value) {
    ValueKind kind = kind_of(value);
    if (const auto* ref = std::get_if<Ref>(&value)) {
      if (ref->handle == 0) throw Error(Errc::HostExec, "cannot infer the type of global '" + name + "' from null");
      kind.name = heap.type_of(ref->handle);
    }
    registry.declare_macro_global(name, kind, value);
  };
  HostValue value = heap.exec_statements(macro.statements, declare);
  return {version, std::move(value)};
}

}  // namespace rjs
