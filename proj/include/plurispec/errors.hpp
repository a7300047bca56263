#pragma once

#include <stdexcept>
#include <string>

namespace plurispec {

// Base class for all library errors.
class error : public std::runtime_error {
public:
    explicit error(const std::string& msg) : std::runtime_error(msg) {}
};

// Invalid configuration: incompatible space/flavor, bad truncation, malformed
// config documents, unknown keys. CLI exit code 2.
class config_error : public error {
public:
    explicit config_error(const std::string& msg) : error(msg) {}
};

// Numeric failure at runtime: non-finite symbol value at a quadrature node,
// eigensolver breakdown, range errors. CLI exit code 3.
class numeric_error : public error {
public:
    explicit numeric_error(const std::string& msg) : error(msg) {}
};

// A point that is not inside the requested domain.
class domain_error : public numeric_error {
public:
    explicit domain_error(const std::string& msg) : numeric_error(msg) {}
};

} // namespace plurispec
