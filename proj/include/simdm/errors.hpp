#pragma once

#include <stdexcept>
#include <string>

namespace simdm {

// Invalid or inconsistent run configuration; `field` is the dotted key path.
class ConfigError : public std::runtime_error {
public:
    ConfigError(std::string field, const std::string& what)
        : std::runtime_error(field + ": " + what), field_(std::move(field)) {}
    const std::string& field() const { return field_; }

private:
    std::string field_;
};

// Numerical failure at run time (non-finite state, impossible request).
class NumericError : public std::runtime_error {
public:
    explicit NumericError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace simdm
