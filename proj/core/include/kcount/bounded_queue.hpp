#pragma once

#include <condition_variable>
#include <cstddef>
#include <deque>
#include <mutex>
#include <optional>

namespace kcount {

/// Blocking FIFO connecting pipeline stages. Producers block while the queue
/// holds `capacity` items. Each of the declared producers calls
/// producer_done() once; pop() returns nullopt after the last one finished
/// and the queue drained.
template <class T>
class BoundedQueue {
public:
    explicit BoundedQueue(std::size_t capacity, std::size_t producers = 1)
        : capacity_(capacity == 0 ? 1 : capacity), producers_(producers) {}

    BoundedQueue(const BoundedQueue&) = delete;
    BoundedQueue& operator=(const BoundedQueue&) = delete;

    void push(T item) {
        std::unique_lock lock(mutex_);
        not_full_.wait(lock, [&] { return items_.size() < capacity_ || aborted_; });
        if (aborted_) return;
        items_.push_back(std::move(item));
        not_empty_.notify_one();
    }

    std::optional<T> pop() {
        std::unique_lock lock(mutex_);
        not_empty_.wait(lock, [&] { return !items_.empty() || producers_ == 0 || aborted_; });
        if (aborted_ || items_.empty()) return std::nullopt;
        T item = std::move(items_.front());
        items_.pop_front();
        not_full_.notify_one();
        return item;
    }

    void producer_done() {
        std::lock_guard lock(mutex_);
        if (producers_ > 0 && --producers_ == 0) not_empty_.notify_all();
    }

    /// Wakes every waiter; later pushes are dropped and pops return nullopt.
    /// Used to unwind a pipeline after a worker failed.
    void abort() {
        std::lock_guard lock(mutex_);
        aborted_ = true;
        items_.clear();
        not_empty_.notify_all();
        not_full_.notify_all();
    }

    std::size_t capacity() const noexcept { return capacity_; }

private:
    std::mutex mutex_;
    std::condition_variable not_empty_;
    std::condition_variable not_full_;
    std::deque<T> items_;
    std::size_t capacity_;
    std::size_t producers_;
    bool aborted_ = false;
};

}  // namespace kcount
