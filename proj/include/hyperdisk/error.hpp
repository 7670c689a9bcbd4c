#pragma once

#include <stdexcept>
#include <string>

namespace hyperdisk {

// Malformed or inconsistent input data (unknown ids, disconnected graphs,
// bad records). The CLI maps this to exit status 2.
class DataError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// A numeric precondition was violated (point outside the disk, non-finite
// value, degenerate regression design). The CLI maps this to exit status 3.
class DomainError : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

// Invalid configuration or parameters supplied by the caller. Exit status 1.
class ConfigError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

}  // namespace hyperdisk
