#pragma once

#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "rjs/manifest.hpp"
#include "rjs/registry.hpp"

#ifndef RJS_SOURCE_DIR
#error "RJS_SOURCE_DIR must point at the project root"
#endif

namespace rjs::test {

inline std::filesystem::path source_path(const std::string& relative) {
  return std::filesystem::path(RJS_SOURCE_DIR) / relative;
}

inline std::string slurp(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  std::stringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

inline std::string sample_plugin() { return source_path("plugins/sample.plugin.json").string(); }
inline std::string mathcore_plugin() { return source_path("plugins/mathcore.plugin.json").string(); }

inline std::uint64_t merge_text(Registry& registry, std::string_view json) {
  return registry.merge(parse_manifest(json));
}

/// Scratch directory removed on scope exit.
class TempDir {
 public:
  explicit TempDir(const std::string& tag) {
    path_ = std::filesystem::temp_directory_path() /
            ("rjs-" + tag + "-" + std::to_string(reinterpret_cast<std::uintptr_t>(this)));
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const std::filesystem::path& path() const { return path_; }

  std::string write(const std::string& name, const std::string& content) const {
    auto p = path_ / name;
    std::ofstream(p, std::ios::binary) << content;
    return p.string();
  }

 private:
  std::filesystem::path path_;
};

// A function whose body sleeps `ms` then returns `value`.
inline std::string sleeper_manifest(const std::string& name, int ms) {
  return R"({"functions": [{"name": ")" + name + R"(", "params": ["f64"], "returns": "f64", "body": [
    {"op": "builtin", "name": "sleep_ms", "args": [{"op": "const", "value": )" + std::to_string(ms) + R"(}]},
    {"op": "ret", "value": {"op": "param", "index": 0}}]}]})";
}

}  // namespace rjs::test
