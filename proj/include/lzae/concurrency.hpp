#pragma once

#include <algorithm>
#include <condition_variable>
#include <cstddef>
#include <cstdint>
#include <deque>
#include <exception>
#include <map>
#include <mutex>
#include <optional>

namespace lzae {

/// Bounded FIFO. push() blocks while full; pop() blocks while empty.
/// close() ends input (pop drains what is left); abort() drops everything.
template <typename T>
class BoundedQueue {
 public:
  explicit BoundedQueue(std::size_t capacity) : capacity_(std::max<std::size_t>(capacity, 1)) {}

  bool push(T item) {
    std::unique_lock lk(mu_);
    not_full_.wait(lk, [&] { return items_.size() < capacity_ || closed_ || aborted_; });
    if (closed_ || aborted_) return false;
    items_.push_back(std::move(item));
    high_water_ = std::max(high_water_, items_.size());
    not_empty_.notify_one();
    return true;
  }

  std::optional<T> pop() {
    std::unique_lock lk(mu_);
    not_empty_.wait(lk, [&] { return !items_.empty() || closed_ || aborted_; });
    if (aborted_ || items_.empty()) return std::nullopt;
    T item = std::move(items_.front());
    items_.pop_front();
    not_full_.notify_one();
    return item;
  }

  void close() {
    std::lock_guard lk(mu_);
    closed_ = true;
    not_empty_.notify_all();
    not_full_.notify_all();
  }

  void abort() {
    std::lock_guard lk(mu_);
    aborted_ = true;
    items_.clear();
    not_empty_.notify_all();
    not_full_.notify_all();
  }

  std::size_t capacity() const noexcept { return capacity_; }

  std::size_t high_water() const {
    std::lock_guard lk(mu_);
    return high_water_;
  }

 private:
  const std::size_t capacity_;
  mutable std::mutex mu_;
  std::condition_variable not_empty_, not_full_;
  std::deque<T> items_;
  std::size_t high_water_ = 0;
  bool closed_ = false;
  bool aborted_ = false;
};

/// Holds results that arrive out of order until their index is next.
template <typename T>
class ReorderBuffer {
 public:
  void put(std::uint64_t index, T item) {
    std::lock_guard lk(mu_);
    if (aborted_) return;
    items_.emplace(index, std::move(item));
    high_water_ = std::max(high_water_, items_.size());
    cv_.notify_all();
  }

  /// Blocks until `index` is available. Returns nullopt once the producers have
  /// closed the buffer without supplying it, or on abort.
  std::optional<T> take(std::uint64_t index) {
    std::unique_lock lk(mu_);
    cv_.wait(lk, [&] { return aborted_ || closed_ || items_.count(index) != 0; });
    if (aborted_) return std::nullopt;
    auto it = items_.find(index);
    if (it == items_.end()) return std::nullopt;
    T item = std::move(it->second);
    items_.erase(it);
    return item;
  }

  void close() {
    std::lock_guard lk(mu_);
    closed_ = true;
    cv_.notify_all();
  }

  void abort() {
    std::lock_guard lk(mu_);
    aborted_ = true;
    items_.clear();
    cv_.notify_all();
  }

  std::size_t high_water() const {
    std::lock_guard lk(mu_);
    return high_water_;
  }

 private:
  mutable std::mutex mu_;
  std::condition_variable cv_;
  std::map<std::uint64_t, T> items_;
  std::size_t high_water_ = 0;
  bool closed_ = false;
  bool aborted_ = false;
};

/// Counting semaphore that caps the number of blocks resident in a pipeline
/// and records the peak.
class ResidencyGate {
 public:
  explicit ResidencyGate(std::size_t limit) : limit_(std::max<std::size_t>(limit, 1)) {}

  bool acquire() {
    std::unique_lock lk(mu_);
    cv_.wait(lk, [&] { return in_use_ < limit_ || aborted_; });
    if (aborted_) return false;
    ++in_use_;
    peak_ = std::max(peak_, in_use_);
    return true;
  }

  void release() {
    std::lock_guard lk(mu_);
    if (in_use_ > 0) --in_use_;
    cv_.notify_one();
  }

  void abort() {
    std::lock_guard lk(mu_);
    aborted_ = true;
    cv_.notify_all();
  }

  std::size_t limit() const noexcept { return limit_; }

  std::size_t peak() const {
    std::lock_guard lk(mu_);
    return peak_;
  }

 private:
  const std::size_t limit_;
  mutable std::mutex mu_;
  std::condition_variable cv_;
  std::size_t in_use_ = 0;
  std::size_t peak_ = 0;
  bool aborted_ = false;
};

/// Keeps the first exception raised by any stage.
class ErrorLatch {
 public:
  bool set(std::exception_ptr e) {
    std::lock_guard lk(mu_);
    if (error_) return false;
    error_ = std::move(e);
    return true;
  }

  bool failed() const {
    std::lock_guard lk(mu_);
    return static_cast<bool>(error_);
  }

  void rethrow_if_failed() const {
    std::lock_guard lk(mu_);
    if (error_) std::rethrow_exception(error_);
  }

 private:
  mutable std::mutex mu_;
  std::exception_ptr error_;
};

}  // namespace lzae
