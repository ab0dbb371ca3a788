#ifndef SPDCSIM_ERRORS_HPP
#define SPDCSIM_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace spdcsim {

// Thrown when the quasi-phase-matching residual has no root inside the
// requested bracket (e.g. a grating period far from the design value).
class NoPhaseMatchError : public std::runtime_error {
public:
    explicit NoPhaseMatchError(const std::string& what) : std::runtime_error(what) {}
};

// Thrown when an iterative solve exhausts its iteration budget.
class NotConvergedError : public std::runtime_error {
public:
    explicit NotConvergedError(const std::string& what) : std::runtime_error(what) {}
};

// Thrown when a derived quantity has no defined value for the given state
// (zero-signal visibility, all-zero correlation denominators).
class UndefinedResultError : public std::runtime_error {
public:
    explicit UndefinedResultError(const std::string& what) : std::runtime_error(what) {}
};

// Configuration / input-file problems (missing fields, unparsable JSON, ...).
class ConfigError : public std::runtime_error {
public:
    explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

// Lock loop failed to hold the fringe.
class LockFailureError : public std::runtime_error {
public:
    explicit LockFailureError(const std::string& what) : std::runtime_error(what) {}
};

} // namespace spdcsim

#endif
