#include <ostream>

#include "rjs/error.hpp"
#include "rjs/runtime.hpp"
#include "rjs/script.hpp"

namespace rjs::script {

namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t' || s.front() == '\r' || s.front() == '\n'))
    s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r' || s.back() == '\n'))
    s.remove_suffix(1);
  return s;
}

}  // namespace

ReplSession::ReplSession(Runtime& runtime, std::ostream& out) : interpreter_(runtime, out), out_(out) {
  runtime.dispatcher.set_error_sink(
      [this](const Fault& fault) { out_ << "async error: " << errc_name(fault.code) << ": " << fault.message << '\n'; });
}

bool ReplSession::step(std::string_view raw) {
  auto& dispatcher = interpreter_.runtime().dispatcher;
  std::string_view line = trim(raw);
  if (line.empty()) return true;
  if (line == ".quit") return false;
  if (line == ".pump") {
    dispatcher.process_events();
    return true;
  }
  if (line == ".tree") {
    std::string tree = render_tree(interpreter_.runtime().registry);
    out_ << (tree.empty() ? "(empty)\n" : tree);
    return true;
  }
  try {
    std::string source(line);
    if (source.back() != ';') source += ';';
    auto program = std::make_shared<const Program>(parse(source));
    ScriptValue value = interpreter_.run(program);
    bool bare = !program->empty() && std::holds_alternative<ExprStmt>(program->back().node);
    if (bare && !std::holds_alternative<Null>(value)) out_ << render(value) << '\n';
  } catch (const std::exception& e) {
    out_ << "error: " << e.what() << '\n';
  }
  dispatcher.process_events();
  return true;
}

}  // namespace rjs::script
