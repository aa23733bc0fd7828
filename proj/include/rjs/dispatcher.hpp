#pragma once

#include <chrono>
#include <condition_variable>
#include <cstdint>
#include <deque>
#include <functional>
#include <iosfwd>
#include <map>
#include <mutex>
#include <optional>
#include <string>
#include <thread>
#include <variant>
#include <vector>

#include "rjs/error.hpp"
#include "rjs/heap.hpp"

namespace rjs {

using CallId = std::uint64_t;
using Clock = std::chrono::steady_clock;

enum class CallKind { Function, Method, Construct };

/// One unit of asynchronous work. `signature` points into the registry,
/// which cannot change while the task is in flight.
struct CallTask {
  CallId call_id = 0;  // assigned by submit
  CallKind kind = CallKind::Function;
  std::optional<Address> target;  // receiver for instance methods
  std::string type_name;          // for Construct
  const MethodSignature* signature = nullptr;  // null: default construction
  std::vector<HostValue> args;
  Clock::time_point submitted_at{};
};

struct Fault {
  Errc code = Errc::HostExec;
  std::string message;
};

struct Completion {
  CallId call_id = 0;
  std::variant<HostValue, Fault> outcome;
  Clock::time_point finished_at{};
};

using SuccessHandler = std::function<void(const HostValue&)>;
using ErrorSink = std::function<void(const Fault&)>;

/// Runs a task against the heap on the calling thread.
HostValue execute_task(Heap& heap, const CallTask& task);

/// Pool size from RJS_WORKERS, falling back to 4 (with a warning on `diag`)
/// when unset or invalid.
std::size_t worker_count_from_env(std::ostream& diag);
std::size_t worker_count_from_env();

inline constexpr std::size_t kDefaultWorkers = 4;

/// Worker pool plus the completion pump. The thread that constructs the
/// dispatcher is the interpreter domain: only it may submit or pump, and
/// success handlers run only inside process_events on it.
class Dispatcher {
 public:
  Dispatcher(Heap& heap, std::size_t workers);
  ~Dispatcher();
  Dispatcher(const Dispatcher&) = delete;
  Dispatcher& operator=(const Dispatcher&) = delete;

  /// Enqueues the task and registers its handler; never waits for execution.
  CallId submit(CallTask task, SuccessHandler on_success);

  /// Delivers up to `max` finished calls in completion order. Faults and
  /// exceptions thrown by handlers go to the error sink.
  std::size_t process_events(std::optional<std::size_t> max = std::nullopt);

  /// Submitted and not yet delivered.
  std::size_t pending_count() const;

  /// Pumps until nothing is pending or the timeout passes. True when
  /// quiescent.
  bool drain(std::chrono::milliseconds timeout);

  /// Stops the workers after the queued tasks finish. Idempotent.
  /// Completions already produced stay deliverable.
  void shutdown();

  void set_error_sink(ErrorSink sink);
  std::size_t worker_count() const { return worker_count_; }
  bool on_interpreter_domain() const { return std::this_thread::get_id() == domain_; }

 private:
  void worker_loop();
  void require_domain(const char* op) const;

  Heap& heap_;
  std::size_t worker_count_;
  std::thread::id domain_;

  mutable std::mutex mu_;
  std::condition_variable task_ready_;
  std::condition_variable completion_ready_;
  std::deque<CallTask> tasks_;
  std::deque<Completion> completions_;
  bool stopping_ = false;

  // Interpreter-domain state.
  std::map<CallId, SuccessHandler> callbacks_;
  CallId next_call_id_ = 1;
  ErrorSink error_sink_;

  std::vector<std::jthread> workers_;
};

}  // namespace rjs
