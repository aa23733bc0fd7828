#include "rjs/dispatcher.hpp"

#include <cstdlib>
#include <iostream>
#include <stdexcept>

namespace rjs {

HostValue execute_task(Heap& heap, const CallTask& task) {
  switch (task.kind) {
    case CallKind::Construct:
      return Ref{heap.construct(task.type_name, task.args, task.signature)};
    case CallKind::Method:
      return heap.exec_body(task.target, *task.signature, task.args);
    case CallKind::Function:
      return heap.exec_body(std::nullopt, *task.signature, task.args);
  }
  return VoidVal{};
}

std::size_t worker_count_from_env(std::ostream& diag) {
  const char* raw = std::getenv("RJS_WORKERS");
  if (!raw) return kDefaultWorkers;
  std::string text(raw);
  char* end = nullptr;
  long n = std::strtol(text.c_str(), &end, 10);
  if (text.empty() || *end != '\0' || n <= 0 || n > 1024) {
    diag << "warning: ignoring invalid RJS_WORKERS='" << text << "', using " << kDefaultWorkers << " workers\n";
    return kDefaultWorkers;
  }
  return static_cast<std::size_t>(n);
}

std::size_t worker_count_from_env() { return worker_count_from_env(std::cerr); }

Dispatcher::Dispatcher(Heap& heap, std::size_t workers)
    : heap_(heap), worker_count_(workers == 0 ? kDefaultWorkers : workers), domain_(std::this_thread::get_id()) {
  workers_.reserve(worker_count_);
  for (std::size_t i = 0; i < worker_count_; ++i) workers_.emplace_back([this] { worker_loop(); });
}

Dispatcher::~Dispatcher() { shutdown(); }

void Dispatcher::require_domain(const char* op) const {
  if (!on_interpreter_domain())
    throw std::logic_error(std::string(op) + " called outside the interpreter domain");
}

void Dispatcher::worker_loop() {
  while (true) {
    CallTask task;
    {
      std::unique_lock lock(mu_);
      task_ready_.wait(lock, [this] { return stopping_ || !tasks_.empty(); });
      if (tasks_.empty()) return;
      task = std::move(tasks_.front());
      tasks_.pop_front();
    }
    Completion done;
    done.call_id = task.call_id;
    try {
      done.outcome = execute_task(heap_, task);
    } catch (const Error& e) {
      done.outcome = Fault{e.code(), e.message()};
    } catch (const std::exception& e) {
      done.outcome = Fault{Errc::HostExec, e.what()};
    }
    done.finished_at = Clock::now();
    {
      std::lock_guard lock(mu_);
      completions_.push_back(std::move(done));
    }
    completion_ready_.notify_all();
  }
}

CallId Dispatcher::submit(CallTask task, SuccessHandler on_success) {
  require_domain("submit");
  std::unique_lock lock(mu_);
  if (stopping_) throw Error(Errc::EngineStopped, "dispatcher has been shut down");
  task.call_id = next_call_id_++;
  task.submitted_at = Clock::now();
  CallId id = task.call_id;
  callbacks_.emplace(id, std::move(on_success));
  tasks_.push_back(std::move(task));
  lock.unlock();
  task_ready_.notify_one();
  return id;
}

std::size_t Dispatcher::process_events(std::optional<std::size_t> max) {
  require_domain("process_events");
  std::size_t delivered = 0;
  while (!max || delivered < *max) {
    Completion done;
    SuccessHandler handler;
    {
      std::lock_guard lock(mu_);
      if (completions_.empty()) break;
      done = std::move(completions_.front());
      completions_.pop_front();
      if (auto it = callbacks_.find(done.call_id); it != callbacks_.end()) {
        handler = std::move(it->second);
        callbacks_.erase(it);
      }
    }
    ++delivered;
    auto report = [this](Fault fault) {
      if (error_sink_) error_sink_(fault);
    };
    if (const auto* fault = std::get_if<Fault>(&done.outcome)) {
      report(*fault);
      continue;
    }
    if (!handler) continue;
    try {
      handler(std::get<HostValue>(done.outcome));
    } catch (const Error& e) {
      report(Fault{e.code(), e.message()});
    } catch (const std::exception& e) {
      report(Fault{Errc::HostExec, e.what()});
    }
  }
  return delivered;
}

std::size_t Dispatcher::pending_count() const {
  std::lock_guard lock(mu_);
  return callbacks_.size();
}

bool Dispatcher::drain(std::chrono::milliseconds timeout) {
  require_domain("drain");
  auto deadline = Clock::now() + timeout;
  while (true) {
    process_events();
    std::unique_lock lock(mu_);
    if (callbacks_.empty()) return true;
    if (!completion_ready_.wait_until(lock, deadline, [this] { return !completions_.empty(); }))
      return callbacks_.empty();
  }
}

void Dispatcher::shutdown() {
  {
    std::lock_guard lock(mu_);
    if (stopping_ && workers_.empty()) return;
    stopping_ = true;
  }
  task_ready_.notify_all();
  for (auto& w : workers_)
    if (w.joinable()) w.join();
  workers_.clear();
}

void Dispatcher::set_error_sink(ErrorSink sink) { error_sink_ = std::move(sink); }

}  // namespace rjs
