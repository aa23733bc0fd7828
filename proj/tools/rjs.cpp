#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <unistd.h>

#include "rjs/cli.hpp"

int main(int argc, char** argv) {
  CLI::App app{"rjs: reflective bindings for a host object system"};
  app.require_subcommand(1);

  std::vector<std::string> plugins;
  rjs::cli::RunOptions run;
  long long drain_ms = rjs::cli::kDefaultDrainTimeout.count();
  bool tree = false;

  auto* run_cmd = app.add_subcommand("run", "Run a script in batch mode");
  run_cmd->add_option("file", run.file, "Script file (.rjs)")->required();
  run_cmd->add_option("--plugin", plugins, "Plugin manifest to preload");
  run_cmd->add_option("--drain-timeout", drain_ms, "Drain timeout in milliseconds")->check(CLI::NonNegativeNumber);

  auto* repl_cmd = app.add_subcommand("repl", "Start an interactive session");
  repl_cmd->add_option("--plugin", plugins, "Plugin manifest to preload");

  auto* inspect_cmd = app.add_subcommand("inspect", "Print the exposed namespace tree");
  inspect_cmd->add_flag("--tree", tree, "Render as a tree")->required();
  inspect_cmd->add_option("--plugin", plugins, "Plugin manifest to preload");

  CLI11_PARSE(app, argc, argv);

  if (*run_cmd) {
    run.plugins = plugins;
    run.drain_timeout = std::chrono::milliseconds(drain_ms);
    return rjs::cli::cmd_run(run, std::cout, std::cerr);
  }
  if (*repl_cmd) return rjs::cli::cmd_repl(plugins, std::cin, std::cout, std::cerr, isatty(0) != 0);
  return rjs::cli::cmd_inspect(plugins, std::cout, std::cerr);
}
