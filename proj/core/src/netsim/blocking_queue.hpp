#pragma once

#include <condition_variable>
#include <deque>
#include <mutex>
#include <optional>

namespace chameleon::netsim::detail {

/// Unbounded MPMC queue; pop() returns nullopt once closed and drained.
template <typename T>
class BlockingQueue {
 public:
  /// False if the queue is already closed.
  bool push(T value) {
    {
      std::lock_guard lock(mutex_);
      if (closed_) {
        return false;
      }
      items_.push_back(std::move(value));
    }
    ready_.notify_one();
    return true;
  }

  std::optional<T> pop() {
    std::unique_lock lock(mutex_);
    ready_.wait(lock, [this] { return closed_ || !items_.empty(); });
    if (items_.empty()) {
      return std::nullopt;
    }
    T out = std::move(items_.front());
    items_.pop_front();
    return out;
  }

  void close() {
    {
      std::lock_guard lock(mutex_);
      closed_ = true;
    }
    ready_.notify_all();
  }

  bool closed() const {
    std::lock_guard lock(mutex_);
    return closed_;
  }

 private:
  mutable std::mutex mutex_;
  std::condition_variable ready_;
  std::deque<T> items_;
  bool closed_ = false;
};

}  // namespace chameleon::netsim::detail
