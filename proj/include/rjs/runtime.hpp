#pragma once

#include <cstddef>

#include "rjs/bridge.hpp"
#include "rjs/dispatcher.hpp"
#include "rjs/heap.hpp"
#include "rjs/registry.hpp"

namespace rjs {

/// Registry, heap, worker pool and bridge wired together. The constructing
/// thread becomes the interpreter domain.
class Runtime {
 public:
  explicit Runtime(std::size_t workers = worker_count_from_env());
  Runtime(const Runtime&) = delete;
  Runtime& operator=(const Runtime&) = delete;

  Registry registry;
  Heap heap{registry};
  Dispatcher dispatcher;
  Bridge bridge{registry, heap, dispatcher};
};

}  // namespace rjs
