#pragma once

#include <atomic>
#include <exception>
#include <mutex>

namespace hgdg::detail {

/// Captures the first exception thrown inside an OpenMP loop body so it can
/// be rethrown on the calling thread once the parallel region has ended.
class ErrorSlot {
 public:
  template <class F>
  void run(F&& f) {
    if (failed_.load(std::memory_order_relaxed)) return;
    try {
      f();
    } catch (...) {
      std::lock_guard lock(mutex_);
      if (!error_) error_ = std::current_exception();
      failed_.store(true, std::memory_order_relaxed);
    }
  }

  void rethrow() {
    if (error_) std::rethrow_exception(error_);
  }

 private:
  std::atomic<bool> failed_{false};
  std::mutex mutex_;
  std::exception_ptr error_;
};

}  // namespace hgdg::detail
