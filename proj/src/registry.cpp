#include "rjs/registry.hpp"

#include <deque>
#include <set>
#include <sstream>

#include "rjs/error.hpp"

namespace rjs {

bool NamespaceNode::has_child(const std::string& leaf) const {
  return namespaces.count(leaf) || types.count(leaf) || functions.count(leaf) || globals.count(leaf) ||
         enums.count(leaf);
}

namespace {

std::vector<std::string> split_path(std::string_view path) {
  std::vector<std::string> parts;
  if (path.empty()) return parts;
  std::size_t start = 0;
  while (true) {
    auto dot = path.find('.', start);
    parts.emplace_back(path.substr(start, dot == std::string_view::npos ? std::string_view::npos : dot - start));
    if (dot == std::string_view::npos) break;
    start = dot + 1;
  }
  return parts;
}

const NamespaceNode* find_namespace(const NamespaceNode& root, std::string_view path) {
  const NamespaceNode* node = &root;
  for (const auto& part : split_path(path)) {
    auto it = node->namespaces.find(part);
    if (it == node->namespaces.end()) return nullptr;
    node = &it->second;
  }
  return node;
}

template <class Member>
auto find_leaf(const NamespaceNode& root, std::string_view qualified_name, Member member)
    -> const typename std::remove_reference_t<decltype(root.*member)>::mapped_type* {
  auto [prefix, leaf] = split_qualified(qualified_name);
  const NamespaceNode* ns = find_namespace(root, prefix);
  if (!ns) return nullptr;
  auto it = (ns->*member).find(leaf);
  return it == (ns->*member).end() ? nullptr : &it->second;
}

const HostTypeDescriptor* type_in(const NamespaceNode& root, std::string_view name) {
  return find_leaf(root, name, &NamespaceNode::types);
}

[[noreturn]] void conflict(const std::string& what) { throw Error(Errc::Conflict, what); }

/// Walks/creates the namespace chain for `path`.
NamespaceNode& ensure_namespace(NamespaceNode& root, std::string_view path) {
  NamespaceNode* node = &root;
  for (const auto& part : split_path(path)) {
    auto it = node->namespaces.find(part);
    if (it == node->namespaces.end()) {
      if (node->has_child(part))
        conflict("'" + join_qualified(node->qualified_name, part) + "' already declared as a non-namespace");
      NamespaceNode child;
      child.name = part;
      child.qualified_name = join_qualified(node->qualified_name, part);
      it = node->namespaces.emplace(part, std::move(child)).first;
    }
    node = &it->second;
  }
  return *node;
}

void append_overload(OverloadSet& set, const MethodSignature& sig, const std::string& owner) {
  for (const auto& existing : set)
    if (existing.params == sig.params) conflict("indistinguishable overload added to '" + owner + "'");
  set.push_back(sig);
}

void check_enum_kind(const NamespaceNode& root, const ValueKind& kind, const std::string& where) {
  if (kind.tag == ValueKind::Tag::Enum && !find_leaf(root, kind.name, &NamespaceNode::enums))
    throw Error(Errc::Validation, where + ": unknown enum '" + kind.name + "'");
}

void check_enum_value(const NamespaceNode& root, const HostValue& value, const std::string& where) {
  if (const auto* e = std::get_if<EnumVal>(&value)) {
    const auto* desc = find_leaf(root, e->enum_name, &NamespaceNode::enums);
    if (!desc) return;
    for (const auto& [name, v] : desc->enumerators)
      if (v == e->value) return;
    throw Error(Errc::Validation,
                where + ": " + std::to_string(e->value) + " is not an enumerator of " + e->enum_name);
  }
}

void check_signature_kinds(const NamespaceNode& root, const MethodSignature& sig, const std::string& where) {
  for (const auto& p : sig.params) check_enum_kind(root, p, where);
  check_enum_kind(root, sig.returns, where);
}

std::optional<int> distance_in(const NamespaceNode& root, std::string_view from, std::string_view to) {
  std::deque<std::pair<std::string, int>> queue{{std::string(from), 0}};
  std::set<std::string> seen{std::string(from)};
  while (!queue.empty()) {
    auto [name, depth] = queue.front();
    queue.pop_front();
    if (name == to) return depth;
    const auto* t = type_in(root, name);
    if (!t) continue;
    for (const auto& b : t->bases)
      if (seen.insert(b).second) queue.emplace_back(b, depth + 1);
  }
  return std::nullopt;
}

void collect_fields(const NamespaceNode& root, const std::string& type, std::set<std::string>& visited,
                    std::vector<const FieldDescriptor*>& out) {
  if (!visited.insert(type).second) return;
  const auto* t = type_in(root, type);
  if (!t) return;
  for (const auto& b : t->bases) collect_fields(root, b, visited, out);
  for (const auto& f : t->fields) out.push_back(&f);
}

bool reaches(const NamespaceNode& root, const std::string& from, const std::string& target,
             std::set<std::string>& visiting) {
  const auto* t = type_in(root, from);
  if (!t) return false;
  for (const auto& b : t->bases) {
    if (b == target) return true;
    if (visiting.insert(b).second && reaches(root, b, target, visiting)) return true;
  }
  return false;
}

void apply_manifest(NamespaceNode& root, const Manifest& m) {
  for (const auto& ns : m.namespaces) ensure_namespace(root, ns);

  for (const auto& [qname, values] : m.enums) {
    auto [prefix, leaf] = split_qualified(qname);
    auto& ns = ensure_namespace(root, prefix);
    if (ns.has_child(leaf)) conflict("enum '" + qname + "' redeclares an existing name");
    ns.enums.emplace(leaf, EnumDescriptor{qname, values});
  }

  std::vector<std::string> new_types;
  for (const auto& t : m.types) {
    if (t.extends) continue;
    auto& ns = ensure_namespace(root, t.ns);
    auto qname = t.qualified_name();
    if (ns.has_child(t.name)) conflict("type '" + qname + "' redeclares an existing name");
    HostTypeDescriptor desc;
    desc.qualified_name = qname;
    desc.bases = t.bases;
    for (const auto& f : t.fields) desc.fields.push_back({f.name, f.kind, f.initial});
    for (const auto& md : t.methods) desc.methods[md.name].push_back(md.signature);
    desc.constructors = t.ctors;
    ns.types.emplace(t.name, std::move(desc));
    new_types.push_back(qname);
  }
  for (const auto& t : m.types) {
    if (!t.extends) continue;
    auto qname = t.qualified_name();
    auto* desc = const_cast<HostTypeDescriptor*>(type_in(root, qname));
    if (!desc) throw NotFoundError(qname, "");
    for (const auto& md : t.methods) append_overload(desc->methods[md.name], md.signature, qname + "." + md.name);
    for (const auto& c : t.ctors) append_overload(desc->constructors, c, qname + " constructors");
  }

  for (const auto& f : m.functions) {
    auto& ns = ensure_namespace(root, f.ns);
    auto qname = f.qualified_name();
    auto it = ns.functions.find(f.name);
    if (it == ns.functions.end()) {
      if (ns.has_child(f.name)) conflict("function '" + qname + "' redeclares an existing name");
      it = ns.functions.emplace(f.name, FunctionSet{qname, {}}).first;
    }
    append_overload(it->second.overloads, f.signature, qname);
  }

  for (const auto& g : m.globals) {
    auto& ns = ensure_namespace(root, g.ns);
    auto qname = g.qualified_name();
    if (ns.has_child(g.name)) conflict("global '" + qname + "' redeclares an existing name");
    ns.globals.emplace(g.name, GlobalDescriptor{qname, g.kind, g.initial});
  }

  // Whole-tree checks that need every declaration in place.
  for (const auto& qname : new_types) {
    const auto* desc = type_in(root, qname);
    for (const auto& b : desc->bases) {
      if (!type_in(root, b)) throw Error(Errc::Validation, "base '" + b + "' of '" + qname + "' is not a type");
    }
    std::set<std::string> visiting;
    if (reaches(root, qname, qname, visiting)) throw Error(Errc::Validation, "cyclic bases at '" + qname + "'");
    std::set<std::string> visited, names;
    std::vector<const FieldDescriptor*> fields;
    collect_fields(root, qname, visited, fields);
    for (const auto* f : fields)
      if (!names.insert(f->name).second)
        throw Error(Errc::Validation, "field '" + f->name + "' of '" + qname + "' shadows an inherited field");
  }
  for (const auto& t : m.types) {
    auto where = t.qualified_name();
    for (const auto& f : t.fields) {
      check_enum_kind(root, f.kind, where + "." + f.name);
      check_enum_value(root, f.initial, where + "." + f.name);
    }
    for (const auto& md : t.methods) check_signature_kinds(root, md.signature, where + "." + md.name);
    for (const auto& c : t.ctors) check_signature_kinds(root, c, where + " constructor");
  }
  for (const auto& f : m.functions) check_signature_kinds(root, f.signature, f.qualified_name());
  for (const auto& g : m.globals) {
    check_enum_kind(root, g.kind, g.qualified_name());
    check_enum_value(root, g.initial, g.qualified_name());
  }
}

}  // namespace

Registry::Registry() = default;

std::uint64_t Registry::merge(const Manifest& manifest) {
  require_quiescent();
  NamespaceNode next = root_;
  apply_manifest(next, manifest);
  root_ = std::move(next);
  return ++version_;
}

void Registry::set_quiescence_probe(std::function<std::size_t()> in_flight) { in_flight_ = std::move(in_flight); }

void Registry::require_quiescent() const {
  if (in_flight_) {
    if (auto n = in_flight_(); n > 0)
      throw Error(Errc::NotQuiescent, std::to_string(n) + " asynchronous call(s) still in flight");
  }
}

Entity Registry::lookup(std::string_view path) const {
  const NamespaceNode* node = &root_;
  auto parts = split_path(path);
  if (!is_qualified_name(path)) throw NotFoundError(std::string(path), "");
  for (std::size_t i = 0; i < parts.size(); ++i) {
    const auto& part = parts[i];
    bool last = i + 1 == parts.size();
    if (auto it = node->namespaces.find(part); it != node->namespaces.end()) {
      node = &it->second;
      continue;
    }
    if (last) {
      if (auto it = node->types.find(part); it != node->types.end()) return &it->second;
      if (auto it = node->functions.find(part); it != node->functions.end()) return &it->second;
      if (auto it = node->globals.find(part); it != node->globals.end()) return &it->second;
      if (auto it = node->enums.find(part); it != node->enums.end()) return &it->second;
    }
    throw NotFoundError(std::string(path), node->qualified_name);
  }
  return node;
}

Listing Registry::enumerate(std::string_view path) const {
  auto entity = lookup(path);
  const auto* const* ns = std::get_if<const NamespaceNode*>(&entity);
  if (!ns) throw Error(Errc::NotANamespace, "'" + std::string(path) + "' is not a namespace");
  Listing out;
  for (const auto& [k, v] : (*ns)->namespaces) out.namespaces.push_back(k);
  for (const auto& [k, v] : (*ns)->types) out.types.push_back(k);
  for (const auto& [k, v] : (*ns)->functions) out.functions.push_back(k);
  for (const auto& [k, v] : (*ns)->globals) out.globals.push_back(k);
  for (const auto& [k, v] : (*ns)->enums) out.enums.push_back(k);
  return out;
}

const HostTypeDescriptor* Registry::find_type(std::string_view qualified_name) const {
  return type_in(root_, qualified_name);
}

const GlobalDescriptor* Registry::find_global(std::string_view qualified_name) const {
  return find_leaf(root_, qualified_name, &NamespaceNode::globals);
}

const EnumDescriptor* Registry::find_enum(std::string_view qualified_name) const {
  return find_leaf(root_, qualified_name, &NamespaceNode::enums);
}

const FunctionSet* Registry::find_function(std::string_view qualified_name) const {
  return find_leaf(root_, qualified_name, &NamespaceNode::functions);
}

std::optional<int> Registry::base_distance(std::string_view type, std::string_view ancestor) const {
  return distance_in(root_, type, ancestor);
}

const OverloadSet* Registry::find_method(std::string_view type, std::string_view method) const {
  std::deque<std::string> queue{std::string(type)};
  std::set<std::string> seen{std::string(type)};
  while (!queue.empty()) {
    auto name = queue.front();
    queue.pop_front();
    const auto* t = type_in(root_, name);
    if (!t) continue;
    if (auto it = t->methods.find(std::string(method)); it != t->methods.end()) return &it->second;
    for (const auto& b : t->bases)
      if (seen.insert(b).second) queue.push_back(b);
  }
  return nullptr;
}

std::vector<const FieldDescriptor*> Registry::all_fields(std::string_view type) const {
  std::set<std::string> visited;
  std::vector<const FieldDescriptor*> out;
  collect_fields(root_, std::string(type), visited, out);
  return out;
}

void Registry::declare_macro_global(const std::string& qualified_name, const ValueKind& kind,
                                    const HostValue& initial) {
  auto [prefix, leaf] = split_qualified(qualified_name);
  NamespaceNode next = root_;
  auto& ns = ensure_namespace(next, prefix);
  if (ns.has_child(leaf)) conflict("global '" + qualified_name + "' redeclares an existing name");
  ns.globals.emplace(leaf, GlobalDescriptor{qualified_name, kind, initial});
  root_ = std::move(next);
}

// Tree rendering.

std::string render_signature(std::string_view name, const MethodSignature& sig) {
  std::string out{name};
  out += '(';
  for (std::size_t i = 0; i < sig.params.size(); ++i) {
    if (i) out += ", ";
    out += to_string(sig.params[i]);
  }
  out += ") -> ";
  out += to_string(sig.returns);
  return out;
}

namespace {

void render_node(const NamespaceNode& node, int depth, std::ostringstream& out) {
  std::string pad(static_cast<std::size_t>(depth) * 2, ' ');
  std::string inner = pad + "  ";
  for (const auto& [name, child] : node.namespaces) {
    out << pad << name << "/\n";
    render_node(child, depth + 1, out);
  }
  for (const auto& [name, t] : node.types) {
    out << pad << "class " << name;
    for (std::size_t i = 0; i < t.bases.size(); ++i) out << (i ? ", " : " : ") << t.bases[i];
    out << '\n';
    for (const auto& f : t.fields) out << inner << "." << f.name << ": " << to_string(f.kind) << '\n';
    for (const auto& c : t.constructors) out << inner << render_signature("new", c) << '\n';
    for (const auto& [mname, set] : t.methods)
      for (const auto& sig : set) out << inner << (sig.is_static ? "static " : "") << render_signature(mname, sig) << '\n';
  }
  for (const auto& [name, fs] : node.functions)
    for (const auto& sig : fs.overloads) out << pad << render_signature(name, sig) << '\n';
  for (const auto& [name, g] : node.globals) out << pad << name << ": " << to_string(g.kind) << '\n';
  for (const auto& [name, e] : node.enums) {
    out << pad << "enum " << name << " {";
    bool first = true;
    for (const auto& [k, v] : e.enumerators) {
      out << (first ? " " : ", ") << k << " = " << v;
      first = false;
    }
    out << " }\n";
  }
}

}  // namespace

std::string render_tree(const Registry& registry) {
  std::ostringstream out;
  render_node(registry.root(), 0, out);
  return out.str();
}

}  // namespace rjs
