#pragma once

#include <stdexcept>
#include <string>

namespace insight {

enum class ErrorKind {
    dimension,   // shape / size mismatch
    config,      // invalid configuration value
    io,          // file system failure
    format,      // malformed input data
    state,       // operation called in a state that does not permit it
    index,       // out-of-range index (labels, token ids)
    input,       // invalid runtime input (empty sequence, ...)
    numeric,     // NaN / Inf where finite values are required
};

class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& message)
        : std::runtime_error(message), kind_(kind) {}

    ErrorKind kind() const noexcept { return kind_; }

    const char* kind_name() const noexcept {
        switch (kind_) {
            case ErrorKind::dimension: return "dimension";
            case ErrorKind::config: return "config";
            case ErrorKind::io: return "io";
            case ErrorKind::format: return "format";
            case ErrorKind::state: return "state";
            case ErrorKind::index: return "index";
            case ErrorKind::input: return "input";
            case ErrorKind::numeric: return "numeric";
        }
        return "unknown";
    }

private:
    ErrorKind kind_;
};

[[noreturn]] inline void fail(ErrorKind kind, const std::string& message) {
    throw Error(kind, message);
}

} // namespace insight
