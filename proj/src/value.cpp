#include "rjs/value.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <system_error>

namespace rjs {

std::string to_string(const ValueKind& kind) {
  using Tag = ValueKind::Tag;
  switch (kind.tag) {
    case Tag::Int64: return "i64";
    case Tag::Float64: return "f64";
    case Tag::Bool: return "bool";
    case Tag::CString: return "cstr";
    case Tag::StrObj: return "str";
    case Tag::Void: return "void";
    case Tag::Enum: return "enum<" + kind.name + ">";
    case Tag::ObjRef: return "obj<" + kind.name + ">";
  }
  return "?";
}

ValueKind kind_of(const HostValue& value) {
  struct Visitor {
    ValueKind operator()(const VoidVal&) const { return ValueKind::void_kind(); }
    ValueKind operator()(std::int64_t) const { return ValueKind::int64(); }
    ValueKind operator()(double) const { return ValueKind::float64(); }
    ValueKind operator()(bool) const { return ValueKind::boolean(); }
    ValueKind operator()(const CStr&) const { return ValueKind::cstring(); }
    ValueKind operator()(const StrObj&) const { return ValueKind::strobj(); }
    ValueKind operator()(const EnumVal& e) const { return ValueKind::enumeration(e.enum_name); }
    ValueKind operator()(const Ref&) const { return ValueKind::object({}); }
  };
  return std::visit(Visitor{}, value);
}

HostValue default_value(const ValueKind& kind) {
  using Tag = ValueKind::Tag;
  switch (kind.tag) {
    case Tag::Int64: return std::int64_t{0};
    case Tag::Float64: return 0.0;
    case Tag::Bool: return false;
    case Tag::CString: return CStr{};
    case Tag::StrObj: return StrObj{};
    case Tag::Enum: return EnumVal{kind.name, 0};
    case Tag::ObjRef: return Ref{0};
    case Tag::Void: return VoidVal{};
  }
  return VoidVal{};
}

std::string format_number(double value) {
  if (std::isnan(value)) return "NaN";
  if (std::isinf(value)) return value > 0 ? "Infinity" : "-Infinity";
  if (value == 0.0) return std::signbit(value) ? "-0" : "0";
  // Shortest digits from scientific form, then laid out like ECMAScript:
  // plain decimals for exponents in [-7, 21), otherwise d.ddde+N.
  char buf[64];
  auto [end, ec] = std::to_chars(buf, buf + sizeof buf, std::fabs(value), std::chars_format::scientific);
  if (ec != std::errc{}) return std::to_string(value);
  std::string_view sci(buf, static_cast<std::size_t>(end - buf));
  auto epos = sci.find('e');
  std::string digits;
  for (char c : sci.substr(0, epos))
    if (c != '.') digits += c;
  int exp = std::stoi(std::string(sci.substr(epos + 1)));
  int n = static_cast<int>(digits.size());

  std::string out = value < 0 ? "-" : "";
  if (exp >= 21 || exp < -7) {
    out += digits[0];
    if (n > 1) out += "." + digits.substr(1);
    out += exp < 0 ? "e-" : "e+";
    out += std::to_string(std::abs(exp));
  } else if (exp >= n - 1) {
    out += digits + std::string(static_cast<std::size_t>(exp - n + 1), '0');
  } else if (exp >= 0) {
    out += digits.substr(0, static_cast<std::size_t>(exp + 1)) + "." + digits.substr(static_cast<std::size_t>(exp + 1));
  } else {
    out += "0." + std::string(static_cast<std::size_t>(-exp - 1), '0') + digits;
  }
  return out;
}

namespace {

std::string quote(const std::string& s) { return "\"" + s + "\""; }

}  // namespace

std::string describe(const HostValue& value) {
  struct Visitor {
    std::string operator()(const VoidVal&) const { return "Void"; }
    std::string operator()(std::int64_t v) const { return "I64(" + std::to_string(v) + ")"; }
    std::string operator()(double v) const { return "F64(" + format_number(v) + ")"; }
    std::string operator()(bool v) const { return v ? "Bool(true)" : "Bool(false)"; }
    std::string operator()(const CStr& s) const { return "CStr(" + quote(s.text) + ")"; }
    std::string operator()(const StrObj& s) const { return "StrObj(" + quote(s.text) + ")"; }
    std::string operator()(const EnumVal& e) const {
      return "Enum(" + e.enum_name + ", " + std::to_string(e.value) + ")";
    }
    std::string operator()(const Ref& r) const {
      char buf[32];
      std::snprintf(buf, sizeof buf, "Ref(0x%llx)", static_cast<unsigned long long>(r.handle));
      return buf;
    }
  };
  return std::visit(Visitor{}, value);
}

bool is_identifier(std::string_view text) {
  if (text.empty()) return false;
  auto alpha = [](char c) { return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || c == '_'; };
  auto digit = [](char c) { return c >= '0' && c <= '9'; };
  if (!alpha(text.front())) return false;
  for (char c : text)
    if (!alpha(c) && !digit(c)) return false;
  return true;
}

bool is_qualified_name(std::string_view text) {
  if (text.empty()) return true;
  std::size_t start = 0;
  while (true) {
    auto dot = text.find('.', start);
    auto part = text.substr(start, dot == std::string_view::npos ? std::string_view::npos : dot - start);
    if (!is_identifier(part)) return false;
    if (dot == std::string_view::npos) return true;
    start = dot + 1;
  }
}

std::pair<std::string, std::string> split_qualified(std::string_view name) {
  auto dot = name.rfind('.');
  if (dot == std::string_view::npos) return {std::string{}, std::string{name}};
  return {std::string{name.substr(0, dot)}, std::string{name.substr(dot + 1)}};
}

std::string join_qualified(std::string_view prefix, std::string_view leaf) {
  if (prefix.empty()) return std::string{leaf};
  std::string out{prefix};
  out += '.';
  out += leaf;
  return out;
}

}  // namespace rjs
