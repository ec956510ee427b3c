#pragma once

#include <stdexcept>
#include <string>
#include <utility>

namespace frond {

// Base error. The module tag keeps diagnostics attributable when errors
// cross module boundaries; the CLI maps the subclasses onto exit codes.
class error : public std::runtime_error {
public:
    error(std::string module, const std::string& message)
        : std::runtime_error("[" + module + "] " + message),
          module_(std::move(module)) {}

    const std::string& module() const noexcept { return module_; }

private:
    std::string module_;
};

// Bad arguments, invalid configuration, contract violations.  Exit code 1.
class config_error : public error {
public:
    using error::error;
};

// Malformed input files.  Exit code 2.
class parse_error : public error {
public:
    using error::error;
};

// Numerical failure: non-finite values, non-convergence, domain violations,
// poles, overflow.  Exit code 3.
class numeric_error : public error {
public:
    using error::error;
};

// Filesystem failures.  Exit code 4.
class io_error : public error {
public:
    using error::error;
};

}  // namespace frond
