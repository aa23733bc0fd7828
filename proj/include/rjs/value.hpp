#pragma once

#include <cstdint>
#include <string>
#include <variant>

namespace rjs {

/// Host-side type vocabulary: the parameter, field and return kinds a host
/// signature can name.
struct ValueKind {
  enum class Tag : std::uint8_t { Int64, Float64, Bool, CString, StrObj, Enum, ObjRef, Void };

  Tag tag = Tag::Void;
  std::string name;  // enum name for Enum, qualified type name for ObjRef

  static ValueKind int64() { return {Tag::Int64, {}}; }
  static ValueKind float64() { return {Tag::Float64, {}}; }
  static ValueKind boolean() { return {Tag::Bool, {}}; }
  static ValueKind cstring() { return {Tag::CString, {}}; }
  static ValueKind strobj() { return {Tag::StrObj, {}}; }
  static ValueKind void_kind() { return {Tag::Void, {}}; }
  static ValueKind enumeration(std::string enum_name) { return {Tag::Enum, std::move(enum_name)}; }
  static ValueKind object(std::string type_name) { return {Tag::ObjRef, std::move(type_name)}; }

  friend bool operator==(const ValueKind&, const ValueKind&) = default;
};

/// Short rendering used by the tree printer and diagnostics:
/// i64 f64 bool cstr str void enum<Name> obj<Name>.
std::string to_string(const ValueKind& kind);

struct VoidVal {
  friend bool operator==(const VoidVal&, const VoidVal&) = default;
};
struct CStr {
  std::string text;
  friend bool operator==(const CStr&, const CStr&) = default;
};
struct StrObj {
  std::string text;
  friend bool operator==(const StrObj&, const StrObj&) = default;
};
struct EnumVal {
  std::string enum_name;
  std::int64_t value = 0;
  friend bool operator==(const EnumVal&, const EnumVal&) = default;
};
/// Reference to a host object. Handle 0 is the null reference.
struct Ref {
  std::uint64_t handle = 0;
  friend bool operator==(const Ref&, const Ref&) = default;
};

using HostValue = std::variant<VoidVal, std::int64_t, double, bool, CStr, StrObj, EnumVal, Ref>;

/// Kind of a value as far as it can be told without the heap (Ref yields an
/// ObjRef with an empty type name).
ValueKind kind_of(const HostValue& value);

/// Zero value for a kind: 0, 0.0, false, "", null reference, void.
/// Enum kinds get value 0 and must be fixed up by the caller.
HostValue default_value(const ValueKind& kind);

/// Diagnostic rendering, e.g. I64(3), CStr("a").
std::string describe(const HostValue& value);

/// Shortest decimal that round-trips the binary64 value ("5", "0.1").
std::string format_number(double value);

bool is_identifier(std::string_view text);
/// Dot-separated identifiers; the empty string is the root path.
bool is_qualified_name(std::string_view text);

/// "a.b.c" -> {"a.b", "c"}; "c" -> {"", "c"}.
std::pair<std::string, std::string> split_qualified(std::string_view name);
std::string join_qualified(std::string_view prefix, std::string_view leaf);

}  // namespace rjs
