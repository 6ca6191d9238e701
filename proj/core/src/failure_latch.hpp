#pragma once

#include <exception>
#include <mutex>

namespace kcount::detail {

// Keeps the first exception thrown by any pipeline worker and aborts the
// queues so the remaining workers drain out.
class FailureLatch {
public:
    template <class... Queues>
    void fail(Queues&... queues) {
        {
            std::lock_guard lock(mutex_);
            if (!error_) error_ = std::current_exception();
            failed_ = true;
        }
        (queues.abort(), ...);
    }

    void rethrow() {
        if (error_) std::rethrow_exception(error_);
    }

    explicit operator bool() const {
        std::lock_guard lock(mutex_);
        return failed_;
    }

private:
    mutable std::mutex mutex_;
    std::exception_ptr error_;
    bool failed_ = false;
};

}  // namespace kcount::detail
