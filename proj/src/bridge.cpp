#include "rjs/bridge.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <sstream>

#include "rjs/error.hpp"

namespace rjs {

std::string_view script_kind_name(const ScriptValue& value) {
  static constexpr std::string_view names[] = {"null",  "number",    "string",   "boolean",  "function", "proxy",
                                               "namespace", "type", "function set", "method", "enum"};
  return names[value.index()];
}

std::string render(const ScriptValue& value) {
  struct Visitor {
    std::string operator()(const Null&) const { return "null"; }
    std::string operator()(double d) const { return format_number(d); }
    std::string operator()(const std::string& s) const { return s; }
    std::string operator()(bool b) const { return b ? "true" : "false"; }
    std::string operator()(const CallablePtr& c) const { return c ? c->describe() : "<fn>"; }
    std::string operator()(const ProxyPtr& p) const {
      char buf[32];
      std::snprintf(buf, sizeof buf, "@0x%llx", static_cast<unsigned long long>(p->canonical));
      return "<" + p->type + buf + ">";
    }
    std::string operator()(const NsRef& n) const { return "<namespace " + (n.path.empty() ? "root" : n.path) + ">"; }
    std::string operator()(const TypeRef& t) const { return "<type " + t.name + ">"; }
    std::string operator()(const FnRef& f) const { return "<function " + f.path + ">"; }
    std::string operator()(const MethodRef& m) const { return "<method " + m.type + "." + m.name + ">"; }
    std::string operator()(const EnumRef& e) const { return "<enum " + e.name + ">"; }
  };
  return std::visit(Visitor{}, value);
}

// Proxy factory.

ProxyPtr ProxyFactory::proxy_for(const Heap& heap, Handle handle) {
  Address canonical = heap.normalize(handle);
  auto it = cache_.find(canonical);
  if (it != cache_.end()) return it->second;
  auto proxy = std::make_shared<const Proxy>(Proxy{canonical, heap.type_of(canonical)});
  cache_.emplace(canonical, proxy);
  return proxy;
}

std::size_t ProxyFactory::forget_dead(const Heap& heap) {
  return std::erase_if(cache_, [&heap](const auto& entry) { return !heap.is_live(entry.first); });
}

// Root property tree.

namespace {

void mirror(const NamespaceNode& node, std::map<std::string, EntryKind, std::less<>>& out) {
  for (const auto& [name, child] : node.namespaces) {
    out.emplace(child.qualified_name, EntryKind::Namespace);
    mirror(child, out);
  }
  for (const auto& [name, t] : node.types) out.emplace(t.qualified_name, EntryKind::Type);
  for (const auto& [name, f] : node.functions) out.emplace(f.qualified_name, EntryKind::Function);
  for (const auto& [name, g] : node.globals) out.emplace(g.qualified_name, EntryKind::Global);
  for (const auto& [name, e] : node.enums) out.emplace(e.qualified_name, EntryKind::Enum);
}

}  // namespace

std::optional<EntryKind> RootObject::find(std::string_view path) const {
  if (path.empty()) return EntryKind::Namespace;
  auto it = entries_.find(path);
  if (it == entries_.end()) return std::nullopt;
  return it->second;
}

Listing RootObject::children(std::string_view path) const {
  Listing out;
  std::string prefix = path.empty() ? std::string{} : std::string(path) + ".";
  for (auto it = entries_.lower_bound(prefix); it != entries_.end(); ++it) {
    const std::string& key = it->first;
    if (key.compare(0, prefix.size(), prefix) != 0) break;
    std::string leaf = key.substr(prefix.size());
    if (leaf.find('.') != std::string::npos) continue;
    switch (it->second) {
      case EntryKind::Namespace: out.namespaces.push_back(leaf); break;
      case EntryKind::Type: out.types.push_back(leaf); break;
      case EntryKind::Function: out.functions.push_back(leaf); break;
      case EntryKind::Global: out.globals.push_back(leaf); break;
      case EntryKind::Enum: out.enums.push_back(leaf); break;
    }
  }
  // Keys sharing a prefix interleave with deeper paths ("A.b" < "A.b.c" <
  // "A.bb"), so sort each category to get plain lexicographic order.
  for (auto* v : {&out.namespaces, &out.types, &out.functions, &out.globals, &out.enums}) std::sort(v->begin(), v->end());
  return out;
}

RootObject build_root(const Registry& registry) {
  RootObject root;
  mirror(registry.root(), root.entries_);
  root.version_ = registry.version();
  return root;
}

std::size_t refresh(RootObject& root, const Registry& registry) {
  if (root.version_ == registry.version()) return 0;
  RootObject next = build_root(registry);
  std::size_t added = 0;
  for (const auto& [path, kind] : next.entries_)
    if (!root.entries_.count(path)) ++added;
  root = std::move(next);
  return added;
}

// Conversions and overload resolution.

namespace {

constexpr double kTwo63 = 9223372036854775808.0;

bool integral(double v) { return std::isfinite(v) && std::trunc(v) == v && v >= -kTwo63 && v < kTwo63; }

const std::int64_t* enumerator_value(const Registry& registry, const std::string& enum_name, const std::string& name) {
  const auto* desc = registry.find_enum(enum_name);
  if (!desc) return nullptr;
  auto it = desc->enumerators.find(name);
  return it == desc->enumerators.end() ? nullptr : &it->second;
}

bool is_enumerator_value(const Registry& registry, const std::string& enum_name, std::int64_t value) {
  const auto* desc = registry.find_enum(enum_name);
  if (!desc) return false;
  for (const auto& [name, v] : desc->enumerators)
    if (v == value) return true;
  return false;
}

}  // namespace

std::optional<int> argument_cost(const ScriptValue& value, const ValueKind& kind, const Registry& registry) {
  using Tag = ValueKind::Tag;
  if (const auto* num = std::get_if<double>(&value)) {
    switch (kind.tag) {
      case Tag::Float64: return 0;
      case Tag::Int64: return integral(*num) ? std::optional<int>(1) : std::nullopt;
      case Tag::Enum:
        if (integral(*num) && is_enumerator_value(registry, kind.name, static_cast<std::int64_t>(*num))) return 2;
        return std::nullopt;
      default: return std::nullopt;
    }
  }
  if (const auto* str = std::get_if<std::string>(&value)) {
    switch (kind.tag) {
      case Tag::CString: return 0;
      case Tag::StrObj: return 1;
      case Tag::Enum: return enumerator_value(registry, kind.name, *str) ? std::optional<int>(2) : std::nullopt;
      default: return std::nullopt;
    }
  }
  if (std::holds_alternative<bool>(value)) return kind.tag == Tag::Bool ? std::optional<int>(0) : std::nullopt;
  if (std::holds_alternative<Null>(value)) return kind.tag == Tag::ObjRef ? std::optional<int>(1) : std::nullopt;
  if (const auto* proxy = std::get_if<ProxyPtr>(&value)) {
    if (kind.tag != Tag::ObjRef || !*proxy) return std::nullopt;
    return registry.base_distance((*proxy)->type, kind.name);
  }
  return std::nullopt;
}

HostValue to_host(const ScriptValue& value, const ValueKind& kind, const Registry& registry) {
  using Tag = ValueKind::Tag;
  if (!argument_cost(value, kind, registry))
    throw Error(Errc::Conversion, "cannot convert " + std::string(script_kind_name(value)) + " " + render(value) +
                                      " to " + to_string(kind));
  if (const auto* num = std::get_if<double>(&value)) {
    if (kind.tag == Tag::Float64) return *num;
    if (kind.tag == Tag::Int64) return static_cast<std::int64_t>(*num);
    return EnumVal{kind.name, static_cast<std::int64_t>(*num)};
  }
  if (const auto* str = std::get_if<std::string>(&value)) {
    if (kind.tag == Tag::CString) return CStr{*str};
    if (kind.tag == Tag::StrObj) return StrObj{*str};
    return EnumVal{kind.name, *enumerator_value(registry, kind.name, *str)};
  }
  if (const auto* b = std::get_if<bool>(&value)) return *b;
  if (std::holds_alternative<Null>(value)) return Ref{0};
  return Ref{std::get<ProxyPtr>(value)->canonical};
}

Resolution resolve_overload(const OverloadSet& set, std::span<const ScriptValue> args, const Registry& registry) {
  Resolution out;
  if (!args.empty()) {
    if (const auto* cb = std::get_if<CallablePtr>(&args.back())) {
      out.callback = *cb;
      args = args.first(args.size() - 1);
    }
  }
  std::optional<int> best;
  std::vector<std::size_t> winners;
  for (std::size_t i = 0; i < set.size(); ++i) {
    const auto& params = set[i].params;
    if (params.size() != args.size()) continue;
    int total = 0;
    bool ok = true;
    for (std::size_t a = 0; a < args.size() && ok; ++a) {
      auto c = argument_cost(args[a], params[a], registry);
      if (!c) ok = false;
      else total += *c;
    }
    if (!ok) continue;
    if (!best || total < *best) {
      best = total;
      winners = {i};
    } else if (total == *best) {
      winners.push_back(i);
    }
  }
  if (winners.empty()) {
    std::string got;
    for (std::size_t a = 0; a < args.size(); ++a) {
      if (a) got += ", ";
      got += script_kind_name(args[a]);
    }
    throw Error(Errc::NoMatch, "no overload accepts (" + got + ") among " + std::to_string(set.size()) +
                                   " candidate(s)");
  }
  if (winners.size() > 1)
    throw Error(Errc::Ambiguous, "call is ambiguous between " + render_signature("", set[winners[0]]) + " and " +
                                     render_signature("", set[winners[1]]) + " (cost " + std::to_string(*best) + ")");
  out.index = winners.front();
  const auto& params = set[out.index].params;
  for (std::size_t a = 0; a < args.size(); ++a) out.converted.push_back(rjs::to_host(args[a], params[a], registry));
  return out;
}

// Bridge.

Bridge::Bridge(Registry& registry, Heap& heap, Dispatcher& dispatcher)
    : registry_(registry), heap_(heap), dispatcher_(dispatcher), root_(build_root(registry)) {
  proxies_.registry_version_seen = registry.version();
  auto text_arg = [](const std::vector<ScriptValue>& args, const char* fn) -> const std::string& {
    if (args.empty() || !std::holds_alternative<std::string>(args[0]))
      throw Error(Errc::Type, std::string("root.") + fn + " expects a string argument");
    return std::get<std::string>(args[0]);
  };
  root_natives_["loadlibrary"] = std::make_shared<NativeFunction>("loadlibrary", [this, text_arg](auto args) {
    return ScriptValue{static_cast<double>(loadlibrary(text_arg(args, "loadlibrary")))};
  });
  root_natives_["refresh"] = std::make_shared<NativeFunction>(
      "refresh", [this](auto) { return ScriptValue{static_cast<double>(refresh())}; });
  root_natives_["macro"] = std::make_shared<NativeFunction>("macro", [this, text_arg](auto args) {
    auto path = resolve_path(text_arg(args, "macro"));
    std::ifstream in(path);
    if (!in) throw Error(Errc::Io, "cannot read macro '" + path.string() + "'");
    std::stringstream buf;
    buf << in.rdbuf();
    return to_script(run_macro(buf.str()).value);
  });
  root_natives_["eval"] = std::make_shared<NativeFunction>(
      "eval", [this, text_arg](auto args) { return to_script(run_macro(text_arg(args, "eval")).value); });
}

std::size_t Bridge::refresh() {
  proxies_.registry_version_seen = registry_.version();
  return rjs::refresh(root_, registry_);
}

ProxyPtr Bridge::proxy_for(Handle handle) { return proxies_.proxy_for(heap_, handle); }

HostValue Bridge::to_host(const ScriptValue& value, const ValueKind& kind) const {
  return rjs::to_host(value, kind, registry_);
}

ScriptValue Bridge::to_script(const HostValue& value) {
  struct Visitor {
    Bridge& self;
    ScriptValue operator()(const VoidVal&) const { return Null{}; }
    ScriptValue operator()(std::int64_t v) const {
      constexpr std::int64_t limit = std::int64_t{1} << 53;
      if (v > limit || v < -limit)
        throw Error(Errc::Precision, std::to_string(v) + " is not exactly representable as a script number");
      return static_cast<double>(v);
    }
    ScriptValue operator()(double v) const { return v; }
    ScriptValue operator()(bool v) const { return v; }
    ScriptValue operator()(const CStr& s) const { return s.text; }
    ScriptValue operator()(const StrObj& s) const { return s.text; }
    ScriptValue operator()(const EnumVal& e) const { return (*this)(e.value); }
    ScriptValue operator()(const Ref& r) const {
      if (r.handle == 0) return Null{};
      return self.proxy_for(r.handle);
    }
  };
  return std::visit(Visitor{*this}, value);
}

Resolution Bridge::resolve_overload(const OverloadSet& set, std::span<const ScriptValue> args) const {
  return rjs::resolve_overload(set, args, registry_);
}

ScriptValue Bridge::run_call(CallKind kind, const std::string& type_name, const OverloadSet& set, bool statics_only,
                             const ProxyPtr& self, std::vector<ScriptValue> args, PendingCall& pending) {
  CallTask task;
  task.kind = kind;
  task.type_name = type_name;
  CallablePtr callback;

  if (kind == CallKind::Construct && set.empty()) {
    if (!args.empty() && std::holds_alternative<CallablePtr>(args.back())) {
      callback = std::get<CallablePtr>(args.back());
      args.pop_back();
    }
    if (!args.empty()) throw Error(Errc::NoMatch, "'" + type_name + "' only has a default constructor");
  } else {
    // The task must point into the registry's own set, so a filtered view
    // keeps a map back to the original indices.
    OverloadSet statics;
    std::vector<std::size_t> original;
    if (statics_only) {
      for (std::size_t i = 0; i < set.size(); ++i) {
        if (!set[i].is_static) continue;
        statics.push_back(set[i]);
        original.push_back(i);
      }
    }
    Resolution r = resolve_overload(statics_only ? statics : set, args);
    callback = std::move(r.callback);
    task.signature = &set[statics_only ? original[r.index] : r.index];
    task.args = std::move(r.converted);
    if (kind == CallKind::Method) {
      if (task.signature->is_static) {
        task.kind = CallKind::Function;
      } else {
        if (!self) throw Error(Errc::Type, "instance method called without an object");
        task.target = self->canonical;
      }
    }
  }

  if (!callback) return to_script(execute_task(heap_, task));

  pending.id = dispatcher_.submit(std::move(task), [this, callback](const HostValue& result) {
    callback->call({to_script(result)});
  });
  return Null{};
}

InvokeResult Bridge::invoke(const ScriptValue& target, std::vector<ScriptValue> args) {
  PendingCall pending;
  ScriptValue result;
  if (const auto* fn = std::get_if<FnRef>(&target)) {
    const auto* set = registry_.find_function(fn->path);
    if (!set) throw NotFoundError(fn->path, "");
    result = run_call(CallKind::Function, {}, set->overloads, false, nullptr, std::move(args), pending);
  } else if (const auto* type = std::get_if<TypeRef>(&target)) {
    const auto* desc = registry_.find_type(type->name);
    if (!desc) throw Error(Errc::UnknownType, "unknown type '" + type->name + "'");
    result = run_call(CallKind::Construct, desc->qualified_name, desc->constructors, false, nullptr, std::move(args),
                      pending);
  } else if (const auto* method = std::get_if<MethodRef>(&target)) {
    const auto* set = registry_.find_method(method->type, method->name);
    if (!set) throw Error(Errc::Name, "'" + method->type + "' has no method '" + method->name + "'");
    result = run_call(CallKind::Method, method->type, *set, !method->self, method->self, std::move(args), pending);
  } else {
    throw Error(Errc::Type, std::string(script_kind_name(target)) + " is not invocable");
  }
  if (pending.id != 0) return pending;
  return result;
}

void Bridge::add_search_path(std::filesystem::path dir) { search_paths_.push_back(std::move(dir)); }

std::filesystem::path Bridge::resolve_path(const std::string& path) const {
  std::filesystem::path p(path);
  if (p.is_absolute() || std::filesystem::exists(p)) return p;
  for (const auto& dir : search_paths_) {
    auto candidate = dir / p;
    if (std::filesystem::exists(candidate)) return candidate;
  }
  return p;
}

std::uint64_t Bridge::loadlibrary(const std::string& path) {
  auto resolved = resolve_path(path);
  std::ifstream in(resolved);
  if (!in) throw Error(Errc::Io, "cannot open library '" + path + "'");
  std::stringstream buf;
  buf << in.rdbuf();
  Manifest manifest = parse_manifest(buf.str());
  if (!manifest.statements.empty())
    throw Error(Errc::Validation, "library '" + path + "' contains statements; use a macro instead");
  std::uint64_t version = registry_.merge(manifest);
  refresh();
  return version;
}

MacroResult Bridge::run_macro(std::string_view text) {
  MacroResult result;
  try {
    result = eval_macro(registry_, heap_, text);
  } catch (...) {
    refresh();  // declarations merged before a statement fault stay visible
    throw;
  }
  refresh();
  return result;
}

ScriptValue Bridge::root_member(std::string_view name) {
  if (auto it = root_natives_.find(name); it != root_natives_.end()) return it->second;
  return Null{};
}

ScriptValue Bridge::member(const ScriptValue& object, std::string_view name) {
  if (const auto* ns = std::get_if<NsRef>(&object)) {
    if (ns->path.empty() && root_natives_.count(std::string(name))) return root_member(name);
    std::string path = join_qualified(ns->path, name);
    auto kind = root_.find(path);
    if (!kind) throw NotFoundError(path, ns->path);
    switch (*kind) {
      case EntryKind::Namespace: return NsRef{path};
      case EntryKind::Type: return TypeRef{path};
      case EntryKind::Function: return FnRef{path};
      case EntryKind::Global: return to_script(heap_.read_global(path));
      case EntryKind::Enum: return EnumRef{path};
    }
  }
  if (const auto* type = std::get_if<TypeRef>(&object)) {
    if (const auto* set = registry_.find_method(type->name, name)) {
      for (const auto& sig : *set)
        if (sig.is_static) return MethodRef{type->name, std::string(name), nullptr};
    }
    throw Error(Errc::Name, "'" + type->name + "' has no static method '" + std::string(name) + "'");
  }
  if (const auto* proxy = std::get_if<ProxyPtr>(&object)) {
    for (const auto* f : registry_.all_fields((*proxy)->type))
      if (f->name == name) return read_field(*proxy, name);
    if (registry_.find_method((*proxy)->type, name)) return MethodRef{(*proxy)->type, std::string(name), *proxy};
    throw Error(Errc::Name, "'" + (*proxy)->type + "' has no member '" + std::string(name) + "'");
  }
  if (const auto* e = std::get_if<EnumRef>(&object)) {
    const auto* desc = registry_.find_enum(e->name);
    if (desc) {
      if (auto it = desc->enumerators.find(std::string(name)); it != desc->enumerators.end())
        return static_cast<double>(it->second);
    }
    throw Error(Errc::Name, "'" + e->name + "' has no enumerator '" + std::string(name) + "'");
  }
  throw Error(Errc::Type, "cannot read property '" + std::string(name) + "' of " +
                              std::string(script_kind_name(object)));
}

void Bridge::assign(const ScriptValue& object, std::string_view name, const ScriptValue& value) {
  if (const auto* ns = std::get_if<NsRef>(&object)) {
    std::string path = join_qualified(ns->path, name);
    if (root_.find(path) == EntryKind::Global) {
      const auto* decl = registry_.find_global(path);
      heap_.write_global(path, to_host(value, decl->kind));
      return;
    }
  }
  throw Error(Errc::Type, "property '" + std::string(name) + "' of " + std::string(script_kind_name(object)) +
                              " is read-only");
}

ScriptValue Bridge::read_field(const ProxyPtr& proxy, std::string_view field) {
  return to_script(heap_.read_field(proxy->canonical, field));
}

void Bridge::write_field(const ProxyPtr& proxy, std::string_view field, const ScriptValue& value) {
  for (const auto* f : registry_.all_fields(proxy->type)) {
    if (f->name == field) {
      heap_.write_field(proxy->canonical, field, to_host(value, f->kind));
      return;
    }
  }
  throw Error(Errc::UnknownField, "'" + proxy->type + "' has no field '" + std::string(field) + "'");
}

}  // namespace rjs
