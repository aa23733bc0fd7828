#include "rjs/error.hpp"

namespace rjs {

std::string_view errc_name(Errc code) noexcept {
  switch (code) {
    case Errc::Parse: return "ParseError";
    case Errc::Validation: return "ValidationError";
    case Errc::Conflict: return "ConflictError";
    case Errc::NotQuiescent: return "NotQuiescent";
    case Errc::NotFound: return "NotFound";
    case Errc::NotANamespace: return "NotANamespace";
    case Errc::UnknownType: return "UnknownType";
    case Errc::DanglingHandle: return "DanglingHandle";
    case Errc::UnknownField: return "UnknownField";
    case Errc::KindMismatch: return "KindMismatch";
    case Errc::UnknownGlobal: return "UnknownGlobal";
    case Errc::HostExec: return "HostExecError";
    case Errc::Conversion: return "ConversionError";
    case Errc::Precision: return "PrecisionError";
    case Errc::NoMatch: return "NoMatch";
    case Errc::Ambiguous: return "Ambiguous";
    case Errc::EngineStopped: return "EngineStopped";
    case Errc::Lex: return "LexError";
    case Errc::Name: return "NameError";
    case Errc::Type: return "TypeError";
    case Errc::Io: return "IoError";
  }
  return "Error";
}

Error::Error(Errc code, const std::string& message)
    : std::runtime_error(std::string(errc_name(code)) + ": " + message), code_(code), message_(message) {}

NotFoundError::NotFoundError(std::string path, std::string resolved_prefix)
    : Error(Errc::NotFound,
            "'" + path + "' not found (resolved prefix: '" + resolved_prefix + "')"),
      path_(std::move(path)),
      prefix_(std::move(resolved_prefix)) {}

SourceError::SourceError(Errc code, std::size_t line, std::size_t column, const std::string& message)
    : Error(code, std::to_string(line) + ":" + std::to_string(column) + ": " + message),
      line_(line),
      column_(column) {}

}  // namespace rjs
