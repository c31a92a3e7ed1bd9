#pragma once

#include <stdexcept>
#include <string>

namespace ssd {

// Maps onto the CLI exit codes: validation = 1, data = 2, backend = 3.
enum class ErrorKind { validation = 1, data = 2, backend = 3 };

class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}
    ErrorKind kind() const noexcept { return kind_; }

private:
    ErrorKind kind_;
};

struct ValidationError : Error {
    explicit ValidationError(const std::string& what) : Error(ErrorKind::validation, what) {}
};

struct DataError : Error {
    explicit DataError(const std::string& what) : Error(ErrorKind::data, what) {}
};

struct BackendError : Error {
    explicit BackendError(const std::string& what) : Error(ErrorKind::backend, what) {}
};

}  // namespace ssd
