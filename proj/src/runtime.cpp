#include "rjs/runtime.hpp"

namespace rjs {

Runtime::Runtime(std::size_t workers) : dispatcher(heap, workers) {
  registry.set_quiescence_probe([this] { return dispatcher.pending_count(); });
}

}  // namespace rjs
