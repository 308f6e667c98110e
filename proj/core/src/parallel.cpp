#include "fixpoint/parallel.hpp"

namespace fixpoint {
namespace {

std::atomic<std::size_t>& configured_workers() {
  static std::atomic<std::size_t> workers{std::max<std::size_t>(1, std::thread::hardware_concurrency())};
  return workers;
}

}  // namespace

std::size_t worker_count() noexcept { return configured_workers().load(); }

void set_worker_count(std::size_t count) noexcept { configured_workers().store(std::max<std::size_t>(1, count)); }

namespace detail {
bool& inside_worker() noexcept {
  thread_local bool flag = false;
  return flag;
}
}  // namespace detail

}  // namespace fixpoint
