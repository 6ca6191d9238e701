#pragma once

#include <stdexcept>
#include <string>

namespace kcount {

/// Failure categories; each maps onto one process exit status.
enum class ErrorKind { usage = 1, io = 2, internal = 3 };

class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}

    ErrorKind kind() const noexcept { return kind_; }
    int exit_code() const noexcept { return static_cast<int>(kind_); }

private:
    ErrorKind kind_;
};

class UsageError : public Error {
public:
    explicit UsageError(const std::string& what) : Error(ErrorKind::usage, what) {}
};

/// Unreadable/unwritable files, malformed input records, corrupt temporary files.
class IoError : public Error {
public:
    explicit IoError(const std::string& what) : Error(ErrorKind::io, what) {}
};

class InternalError : public Error {
public:
    explicit InternalError(const std::string& what) : Error(ErrorKind::internal, what) {}
};

}  // namespace kcount
