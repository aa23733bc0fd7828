#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <string_view>

namespace rjs {

enum class Errc {
  Parse,
  Validation,
  Conflict,
  NotQuiescent,
  NotFound,
  NotANamespace,
  UnknownType,
  DanglingHandle,
  UnknownField,
  KindMismatch,
  UnknownGlobal,
  HostExec,
  Conversion,
  Precision,
  NoMatch,
  Ambiguous,
  EngineStopped,
  Lex,
  Name,
  Type,
  Io,
};

/// Stable name of an error code, e.g. "ConflictError".
std::string_view errc_name(Errc code) noexcept;

/// Every failure surfaced by the engine. what() is "<ErrcName>: <message>".
class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& message);

  Errc code() const noexcept { return code_; }
  const std::string& message() const noexcept { return message_; }

 private:
  Errc code_;
  std::string message_;
};

/// Path lookup failure; carries the longest prefix that did resolve.
class NotFoundError : public Error {
 public:
  NotFoundError(std::string path, std::string resolved_prefix);

  const std::string& path() const noexcept { return path_; }
  const std::string& resolved_prefix() const noexcept { return prefix_; }

 private:
  std::string path_;
  std::string prefix_;
};

/// Lexing/parsing failure with a 1-based source position.
class SourceError : public Error {
 public:
  SourceError(Errc code, std::size_t line, std::size_t column, const std::string& message);

  std::size_t line() const noexcept { return line_; }
  std::size_t column() const noexcept { return column_; }

 private:
  std::size_t line_;
  std::size_t column_;
};

}  // namespace rjs
