#pragma once

#include <stdexcept>
#include <string>

namespace cyclegate {

// Error category, mapped to CLI exit codes (validation=1, io=2, internal=3).
enum class ErrorKind { Validation = 1, Io = 2, Internal = 3 };

class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& message)
        : std::runtime_error(message), kind_(kind) {}

    ErrorKind kind() const { return kind_; }

private:
    ErrorKind kind_;
};

inline Error validation_error(const std::string& msg) { return Error(ErrorKind::Validation, msg); }
inline Error io_error(const std::string& msg) { return Error(ErrorKind::Io, msg); }
inline Error internal_error(const std::string& msg) { return Error(ErrorKind::Internal, msg); }

}  // namespace cyclegate
