#pragma once

#include <chrono>
#include <iosfwd>
#include <string>
#include <vector>

namespace rjs::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitFault = 1;
inline constexpr int kExitTimeout = 2;

inline constexpr std::chrono::milliseconds kDefaultDrainTimeout{30000};

struct RunOptions {
  std::string file;
  std::vector<std::string> plugins;
  std::chrono::milliseconds drain_timeout = kDefaultDrainTimeout;
};

/// Batch mode: plugins, script, then drain. 0 ok, 1 fault, 2 drain timeout.
int cmd_run(const RunOptions& options, std::ostream& out, std::ostream& err);

/// Reads lines from `in` until `.quit` or end of input.
int cmd_repl(const std::vector<std::string>& plugins, std::istream& in, std::ostream& out, std::ostream& err,
             bool prompt = false);

/// Prints the namespace tree after loading the plugins.
int cmd_inspect(const std::vector<std::string>& plugins, std::ostream& out, std::ostream& err);

}  // namespace rjs::cli
