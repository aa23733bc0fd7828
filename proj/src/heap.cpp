#include "rjs/heap.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <limits>
#include <mutex>
#include <thread>

#include "rjs/error.hpp"
#include "rjs/registry.hpp"

namespace rjs {

namespace {

std::string hex(std::uint64_t v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "0x%llx", static_cast<unsigned long long>(v));
  return buf;
}

[[noreturn]] void dangling(Handle h) { throw Error(Errc::DanglingHandle, "handle " + hex(h) + " is not live"); }

[[noreturn]] void exec_fault(const std::string& what) { throw Error(Errc::HostExec, what); }

bool is_integral(const HostValue& v) {
  return std::holds_alternative<std::int64_t>(v) || std::holds_alternative<EnumVal>(v);
}

std::int64_t as_int(const HostValue& v) {
  if (const auto* i = std::get_if<std::int64_t>(&v)) return *i;
  return std::get<EnumVal>(v).value;
}

bool is_numeric(const HostValue& v) { return is_integral(v) || std::holds_alternative<double>(v); }

double as_double(const HostValue& v) {
  if (const auto* d = std::get_if<double>(&v)) return *d;
  return static_cast<double>(as_int(v));
}

const std::string* as_text(const HostValue& v) {
  if (const auto* s = std::get_if<CStr>(&v)) return &s->text;
  if (const auto* s = std::get_if<StrObj>(&v)) return &s->text;
  return nullptr;
}

std::int64_t wrap(std::uint64_t bits) { return static_cast<std::int64_t>(bits); }

HostValue integer_op(BinaryOp op, std::int64_t a, std::int64_t b) {
  auto ua = static_cast<std::uint64_t>(a), ub = static_cast<std::uint64_t>(b);
  switch (op) {
    case BinaryOp::Add: return wrap(ua + ub);
    case BinaryOp::Sub: return wrap(ua - ub);
    case BinaryOp::Mul: return wrap(ua * ub);
    case BinaryOp::Div:
      if (b == 0) exec_fault("integer division by zero");
      if (a == std::numeric_limits<std::int64_t>::min() && b == -1) return a;
      return a / b;
    case BinaryOp::Mod:
      if (b == 0) exec_fault("integer modulo by zero");
      if (b == -1) return std::int64_t{0};
      return a % b;
  }
  return std::int64_t{0};
}

HostValue float_op(BinaryOp op, double a, double b) {
  switch (op) {
    case BinaryOp::Add: return a + b;
    case BinaryOp::Sub: return a - b;
    case BinaryOp::Mul: return a * b;
    case BinaryOp::Div:
      if (b == 0.0) exec_fault("division by zero");
      return a / b;
    case BinaryOp::Mod:
      if (b == 0.0) exec_fault("modulo by zero");
      return std::fmod(a, b);
  }
  return 0.0;
}

std::string to_text(const HostValue& v) {
  struct Visitor {
    std::string operator()(const VoidVal&) const { return ""; }
    std::string operator()(std::int64_t i) const { return std::to_string(i); }
    std::string operator()(double d) const { return format_number(d); }
    std::string operator()(bool b) const { return b ? "true" : "false"; }
    std::string operator()(const CStr& s) const { return s.text; }
    std::string operator()(const StrObj& s) const { return s.text; }
    std::string operator()(const EnumVal& e) const { return std::to_string(e.value); }
    std::string operator()(const Ref& r) const { return r.handle ? hex(r.handle) : "null"; }
  };
  return std::visit(Visitor{}, v);
}

/// Implicit conversions a host assignment or return performs: integer to
/// floating point, and between the two string kinds.
HostValue coerce(HostValue v, const ValueKind& kind) {
  if (kind.tag == ValueKind::Tag::Float64 && std::holds_alternative<std::int64_t>(v))
    return static_cast<double>(std::get<std::int64_t>(v));
  if (kind.tag == ValueKind::Tag::StrObj && std::holds_alternative<CStr>(v))
    return StrObj{std::move(std::get<CStr>(v).text)};
  if (kind.tag == ValueKind::Tag::CString && std::holds_alternative<StrObj>(v))
    return CStr{std::move(std::get<StrObj>(v).text)};
  return v;
}

}  // namespace

/// Tree-walking evaluator for one body activation.
class BodyEvaluator {
 public:
  BodyEvaluator(Heap& heap, std::optional<Handle> self, std::span<const HostValue> args,
                const Heap::GlobalDeclarer* declare)
      : heap_(heap), self_(self), args_(args), declare_(declare) {}

  /// Value of the Return that ended the run, if any.
  std::optional<HostValue> run(std::span<const Stmt> body) {
    for (const auto& stmt : body) {
      if (auto r = exec(stmt)) return r;
    }
    return std::nullopt;
  }

 private:
  std::optional<HostValue> exec(const Stmt& stmt) {
    if (const auto* s = std::get_if<SetFieldStmt>(&stmt)) {
      set_field(s->field, eval(s->value));
    } else if (const auto* s = std::get_if<SetGlobalStmt>(&stmt)) {
      set_global(s->name, eval(s->value));
    } else if (const auto* s = std::get_if<ReturnStmt>(&stmt)) {
      return eval(s->value);
    } else {
      eval(std::get<ExprStmt>(stmt).value);
    }
    return std::nullopt;
  }

  Handle self() const {
    if (!self_) exec_fault("no receiver bound");
    return *self_;
  }

  void set_field(const std::string& name, HostValue value) {
    Handle h = self();
    std::optional<ValueKind> kind;
    {
      std::shared_lock lock(heap_.mu_);
      auto obj = heap_.objects_.find(heap_.normalize_locked(h));
      auto slot = obj->second.storage.find(name);
      if (slot == obj->second.storage.end())
        throw Error(Errc::UnknownField, "'" + obj->second.type + "' has no field '" + name + "'");
      kind = slot->second.kind;
    }
    heap_.write_field(h, name, coerce(std::move(value), *kind));
  }

  void set_global(const std::string& name, HostValue value) {
    std::optional<ValueKind> kind;
    {
      std::unique_lock lock(heap_.mu_);
      if (auto* slot = heap_.global_slot_locked(name)) kind = slot->kind;
    }
    if (!kind) {
      if (!declare_) throw Error(Errc::UnknownGlobal, "global '" + name + "' is not declared");
      if (std::holds_alternative<VoidVal>(value)) exec_fault("cannot create global '" + name + "' from void");
      (*declare_)(name, value);
      heap_.write_global(name, std::move(value));
      return;
    }
    heap_.write_global(name, coerce(std::move(value), *kind));
  }

  HostValue eval(const Expr& expr) {
    return std::visit([this](const auto& node) { return eval_node(node); }, expr.node);
  }

  HostValue eval_node(const ConstExpr& c) { return c.value; }

  HostValue eval_node(const ParamExpr& p) {
    if (p.index >= args_.size()) exec_fault("parameter " + std::to_string(p.index) + " not supplied");
    return args_[p.index];
  }

  HostValue eval_node(const SelfExpr&) { return Ref{self()}; }

  HostValue eval_node(const FieldExpr& f) { return heap_.read_field(self(), f.field); }

  HostValue eval_node(const GlobalExpr& g) { return heap_.read_global(g.name); }

  HostValue eval_node(const BinaryExpr& b) {
    HostValue lhs = eval(*b.lhs);
    HostValue rhs = eval(*b.rhs);
    if (is_integral(lhs) && is_integral(rhs)) return integer_op(b.op, as_int(lhs), as_int(rhs));
    if (is_numeric(lhs) && is_numeric(rhs)) return float_op(b.op, as_double(lhs), as_double(rhs));
    exec_fault(std::string("operator ") + static_cast<char>(b.op) + " not defined for " + describe(lhs) + " and " +
               describe(rhs));
  }

  HostValue eval_node(const BuiltinExpr& b) {
    std::vector<HostValue> args;
    args.reserve(b.args.size());
    for (const auto& a : b.args) args.push_back(eval(a));
    auto name = std::string(builtin_name(b.fn));
    auto need_number = [&](const HostValue& v) {
      if (!is_numeric(v)) exec_fault(name + " expects a number, got " + describe(v));
      return as_double(v);
    };
    switch (b.fn) {
      case Builtin::Sqrt: {
        double x = need_number(args[0]);
        if (x < 0.0) exec_fault("sqrt of negative value " + format_number(x));
        return std::sqrt(x);
      }
      case Builtin::Floor:
        return std::floor(need_number(args[0]));
      case Builtin::Concat: {
        std::string out;
        for (const auto& a : args) {
          const auto* t = as_text(a);
          if (!t) exec_fault("concat expects strings, got " + describe(a));
          out += *t;
        }
        return CStr{std::move(out)};
      }
      case Builtin::Strlen: {
        const auto* t = as_text(args[0]);
        if (!t) exec_fault("strlen expects a string, got " + describe(args[0]));
        return static_cast<std::int64_t>(t->size());
      }
      case Builtin::ToStr:
        return CStr{to_text(args[0])};
      case Builtin::SleepMs: {
        double ms = need_number(args[0]);
        if (ms < 0.0) exec_fault("sleep_ms of negative duration");
        std::this_thread::sleep_for(std::chrono::duration<double, std::milli>(ms));
        return VoidVal{};
      }
      case Builtin::Alias: {
        const auto* r = std::get_if<Ref>(&args[0]);
        if (!r || r->handle == 0) exec_fault("alias expects an object reference, got " + describe(args[0]));
        return Ref{heap_.make_alias(r->handle)};
      }
    }
    exec_fault("unknown builtin");
  }

  HostValue eval_node(const NewExpr& n) {
    std::vector<HostValue> args;
    for (const auto& a : n.args) args.push_back(eval(a));
    const auto* type = heap_.registry().find_type(n.type);
    if (!type) throw Error(Errc::UnknownType, "unknown type '" + n.type + "'");
    if (type->constructors.empty()) {
      if (!args.empty()) exec_fault("'" + n.type + "' has only a default constructor");
      return Ref{heap_.construct(n.type)};
    }
    // Exact kinds first, then with implicit conversions.
    for (bool promote : {false, true}) {
      const MethodSignature* chosen = nullptr;
      std::vector<HostValue> converted;
      int matches = 0;
      for (const auto& ctor : type->constructors) {
        if (ctor.params.size() != args.size()) continue;
        std::vector<HostValue> conv;
        bool ok = true;
        for (std::size_t i = 0; i < args.size() && ok; ++i) {
          HostValue v = promote ? coerce(args[i], ctor.params[i]) : args[i];
          ok = heap_.matches_kind(v, ctor.params[i]);
          conv.push_back(std::move(v));
        }
        if (ok) {
          ++matches;
          chosen = &ctor;
          converted = std::move(conv);
        }
      }
      if (matches > 1) exec_fault("ambiguous constructor call for '" + n.type + "'");
      if (chosen) return Ref{heap_.construct(n.type, converted, chosen)};
    }
    exec_fault("no constructor of '" + n.type + "' accepts the given arguments");
  }

  Heap& heap_;
  std::optional<Handle> self_;
  std::span<const HostValue> args_;
  const Heap::GlobalDeclarer* declare_;
};

Heap::Heap(const Registry& registry) : registry_(registry) {}

Address Heap::construct(std::string_view type_name, std::span<const HostValue> args, const MethodSignature* ctor) {
  const auto* type = registry_.find_type(type_name);
  if (!type) throw Error(Errc::UnknownType, "unknown type '" + std::string(type_name) + "'");
  if (!ctor && !args.empty()) exec_fault("default construction of '" + std::string(type_name) + "' takes no arguments");

  Address address = 0;
  {
    std::unique_lock lock(mu_);
    address = next_address_++;
    HostObject obj;
    obj.address = address;
    obj.type = type->qualified_name;
    for (const auto* f : registry_.all_fields(type_name)) obj.storage.emplace(f->name, Slot{f->kind, f->initial});
    obj.aliases.push_back(address);
    objects_.emplace(address, std::move(obj));
    aliases_.emplace(address, address);
  }
  if (ctor) {
    try {
      exec_body(address, *ctor, args);
    } catch (...) {
      destroy(address);
      throw;
    }
  }
  return address;
}

Address Heap::normalize_locked(Handle handle) const {
  auto it = aliases_.find(handle);
  if (it == aliases_.end()) dangling(handle);
  return it->second;
}

Handle Heap::make_alias(Handle handle) {
  std::unique_lock lock(mu_);
  Address canonical = normalize_locked(handle);
  Handle fresh = next_address_++;
  aliases_.emplace(fresh, canonical);
  objects_.at(canonical).aliases.push_back(fresh);
  return fresh;
}

Address Heap::normalize(Handle handle) const {
  std::shared_lock lock(mu_);
  return normalize_locked(handle);
}

bool Heap::is_live(Handle handle) const {
  std::shared_lock lock(mu_);
  return aliases_.count(handle) != 0;
}

std::string Heap::type_of(Handle handle) const {
  std::shared_lock lock(mu_);
  return objects_.at(normalize_locked(handle)).type;
}

HostValue Heap::read_field(Handle handle, std::string_view field) const {
  std::shared_lock lock(mu_);
  const auto& obj = objects_.at(normalize_locked(handle));
  auto it = obj.storage.find(field);
  if (it == obj.storage.end())
    throw Error(Errc::UnknownField, "'" + obj.type + "' has no field '" + std::string(field) + "'");
  return it->second.value;
}

void Heap::write_field(Handle handle, std::string_view field, HostValue value) {
  std::unique_lock lock(mu_);
  auto& obj = objects_.at(normalize_locked(handle));
  auto it = obj.storage.find(field);
  if (it == obj.storage.end())
    throw Error(Errc::UnknownField, "'" + obj.type + "' has no field '" + std::string(field) + "'");
  if (!matches_kind_locked(value, it->second.kind))
    throw Error(Errc::KindMismatch, "field '" + std::string(field) + "' of kind " + to_string(it->second.kind) +
                                        " cannot hold " + describe(value));
  it->second.value = std::move(value);
}

Heap::Slot* Heap::global_slot_locked(std::string_view name) const {
  auto it = globals_.find(name);
  if (it != globals_.end()) return &it->second;
  const auto* decl = registry_.find_global(name);
  if (!decl) return nullptr;
  return &globals_.emplace(std::string(name), Slot{decl->kind, decl->initial}).first->second;
}

HostValue Heap::read_global(std::string_view name) const {
  std::unique_lock lock(mu_);
  const Slot* slot = global_slot_locked(name);
  if (!slot) throw Error(Errc::UnknownGlobal, "global '" + std::string(name) + "' is not declared");
  return slot->value;
}

void Heap::write_global(std::string_view name, HostValue value) {
  std::unique_lock lock(mu_);
  Slot* slot = global_slot_locked(name);
  if (!slot) throw Error(Errc::UnknownGlobal, "global '" + std::string(name) + "' is not declared");
  if (!matches_kind_locked(value, slot->kind))
    throw Error(Errc::KindMismatch, "global '" + std::string(name) + "' of kind " + to_string(slot->kind) +
                                        " cannot hold " + describe(value));
  slot->value = std::move(value);
}

HostValue Heap::exec_body(std::optional<Handle> self, const MethodSignature& signature,
                          std::span<const HostValue> args) {
  if (args.size() != signature.params.size())
    exec_fault("expected " + std::to_string(signature.params.size()) + " argument(s), got " +
               std::to_string(args.size()));
  for (std::size_t i = 0; i < args.size(); ++i)
    if (!matches_kind(args[i], signature.params[i]))
      exec_fault("argument " + std::to_string(i) + " " + describe(args[i]) + " does not match " +
                 to_string(signature.params[i]));
  if (self && !is_live(*self)) exec_fault("receiver " + hex(*self) + " is not live");

  std::optional<HostValue> returned;
  try {
    BodyEvaluator evaluator(*this, self, args, nullptr);
    returned = evaluator.run(signature.body);
  } catch (const Error& e) {
    if (e.code() == Errc::HostExec) throw;
    throw Error(Errc::HostExec, e.what());
  }
  if (signature.returns.tag == ValueKind::Tag::Void) return VoidVal{};
  if (!returned) exec_fault("body finished without returning " + to_string(signature.returns));
  HostValue out = coerce(std::move(*returned), signature.returns);
  if (!matches_kind(out, signature.returns))
    exec_fault("body returned " + describe(out) + " for declared " + to_string(signature.returns));
  return out;
}

HostValue Heap::exec_statements(std::span<const Stmt> statements, const GlobalDeclarer& declare) {
  try {
    BodyEvaluator evaluator(*this, std::nullopt, {}, &declare);
    return evaluator.run(statements).value_or(VoidVal{});
  } catch (const Error& e) {
    if (e.code() == Errc::HostExec) throw;
    throw Error(Errc::HostExec, e.what());
  }
}

void Heap::destroy(Handle handle) {
  std::unique_lock lock(mu_);
  Address canonical = normalize_locked(handle);
  auto it = objects_.find(canonical);
  for (Handle h : it->second.aliases) aliases_.erase(h);
  objects_.erase(it);
}

std::size_t Heap::object_count() const {
  std::shared_lock lock(mu_);
  return objects_.size();
}

bool Heap::matches_kind(const HostValue& value, const ValueKind& kind) const {
  std::shared_lock lock(mu_);
  return matches_kind_locked(value, kind);
}

bool Heap::matches_kind_locked(const HostValue& value, const ValueKind& kind) const {
  using Tag = ValueKind::Tag;
  switch (kind.tag) {
    case Tag::Int64: return std::holds_alternative<std::int64_t>(value);
    case Tag::Float64: return std::holds_alternative<double>(value);
    case Tag::Bool: return std::holds_alternative<bool>(value);
    case Tag::CString: return std::holds_alternative<CStr>(value);
    case Tag::StrObj: return std::holds_alternative<StrObj>(value);
    case Tag::Void: return std::holds_alternative<VoidVal>(value);
    case Tag::Enum: {
      const auto* e = std::get_if<EnumVal>(&value);
      if (!e || e->enum_name != kind.name) return false;
      const auto* desc = registry_.find_enum(kind.name);
      if (!desc) return false;
      for (const auto& [name, v] : desc->enumerators)
        if (v == e->value) return true;
      return false;
    }
    case Tag::ObjRef: {
      const auto* r = std::get_if<Ref>(&value);
      if (!r) return false;
      if (r->handle == 0) return true;
      auto alias = aliases_.find(r->handle);
      if (alias == aliases_.end()) return false;
      return registry_.base_distance(objects_.at(alias->second).type, kind.name).has_value();
    }
  }
  return false;
}

}  // namespace rjs
