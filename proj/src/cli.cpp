#include "rjs/cli.hpp"

#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include "rjs/error.hpp"
#include "rjs/runtime.hpp"
#include "rjs/script.hpp"

namespace rjs::cli {

namespace {

bool load_plugins(Runtime& rt, const std::vector<std::string>& plugins, std::ostream& err) {
  for (const auto& path : plugins) {
    try {
      rt.bridge.loadlibrary(path);
    } catch (const std::exception& e) {
      err << "error: plugin " << path << ": " << e.what() << '\n';
      return false;
    }
  }
  return true;
}

}  // namespace

int cmd_run(const RunOptions& options, std::ostream& out, std::ostream& err) {
  Runtime rt;
  if (!load_plugins(rt, options.plugins, err)) return kExitFault;

  std::ifstream file(options.file, std::ios::binary);
  if (!file) {
    err << "error: " << Error(Errc::Io, "cannot read " + options.file).what() << '\n';
    return kExitFault;
  }
  std::stringstream source;
  source << file.rdbuf();

  auto dir = std::filesystem::absolute(options.file).parent_path();
  rt.bridge.add_search_path(dir);

  bool faulted = false;
  rt.dispatcher.set_error_sink([&](const Fault& fault) {
    faulted = true;
    err << "async error: " << errc_name(fault.code) << ": " << fault.message << '\n';
  });

  script::Interpreter interp(rt, out);
  try {
    interp.run_source(source.str());
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitFault;
  }
  if (!rt.dispatcher.drain(options.drain_timeout)) {
    err << "error: drain timed out after " << options.drain_timeout.count() << " ms with "
        << rt.dispatcher.pending_count() << " call(s) pending\n";
    return kExitTimeout;
  }
  out.flush();
  return faulted ? kExitFault : kExitOk;
}

int cmd_repl(const std::vector<std::string>& plugins, std::istream& in, std::ostream& out, std::ostream& err,
             bool prompt) {
  Runtime rt;
  if (!load_plugins(rt, plugins, err)) return kExitFault;
  script::ReplSession session(rt, out);
  std::string line;
  while (true) {
    if (prompt) out << "> " << std::flush;
    if (!std::getline(in, line)) break;
    if (!session.step(line)) break;
  }
  return kExitOk;
}

int cmd_inspect(const std::vector<std::string>& plugins, std::ostream& out, std::ostream& err) {
  Runtime rt;
  if (!load_plugins(rt, plugins, err)) return kExitFault;
  out << render_tree(rt.registry);
  return kExitOk;
}

}  // namespace rjs::cli
