#pragma once

#include <algorithm>
#include <atomic>
#include <cstddef>
#include <exception>
#include <thread>
#include <vector>

namespace fixpoint {

/// Number of worker threads used by parallel_for. Defaults to the machine's
/// hardware concurrency; the CLI overrides it from FIXPOINT_THREADS.
std::size_t worker_count() noexcept;
void set_worker_count(std::size_t count) noexcept;

namespace detail {
bool& inside_worker() noexcept;
}

/// Runs fn(i) for i in [0, count). Each index must write only to its own
/// output slot; results are then independent of scheduling. Nested calls run
/// serially on the calling worker. If several indices throw, the exception
/// from the lowest index is rethrown.
template <class Fn>
void parallel_for(std::size_t count, Fn&& fn) {
  const std::size_t workers = std::min(worker_count(), count);
  if (workers <= 1 || detail::inside_worker()) {
    for (std::size_t i = 0; i < count; ++i) fn(i);
    return;
  }

  std::vector<std::exception_ptr> errors(count);
  std::atomic<std::size_t> next{0};
  auto work = [&] {
    detail::inside_worker() = true;
    for (std::size_t i = next.fetch_add(1); i < count; i = next.fetch_add(1)) {
      try {
        fn(i);
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
    detail::inside_worker() = false;
  };

  std::vector<std::jthread> threads;
  threads.reserve(workers - 1);
  for (std::size_t t = 1; t < workers; ++t) threads.emplace_back(work);
  work();
  threads.clear();

  for (auto& error : errors)
    if (error) std::rethrow_exception(error);
}

}  // namespace fixpoint
