#pragma once

#include <stdexcept>
#include <string>

namespace sdsearch {

// Error taxonomy. Every failure mode is reported explicitly; the library
// never substitutes infinity sentinels or silently clamped values.

// Invalid argument or malformed configuration (bad family tag, unknown key,
// out-of-range parameter).
struct config_error : std::runtime_error {
    explicit config_error(const std::string& msg) : std::runtime_error(msg) {}
};

// A numerical solve could not be completed: no bracket, iteration cap,
// quadrature breakdown.
struct solver_error : std::runtime_error {
    explicit solver_error(const std::string& msg) : std::runtime_error(msg) {}
};

// Model violates a structural requirement of an operation (dependence where
// independence is required, non-ordered position-dependent beliefs, ...).
struct model_error : std::runtime_error {
    explicit model_error(const std::string& msg) : std::runtime_error(msg) {}
};

}  // namespace sdsearch
