#pragma once

#include <stdexcept>
#include <string>

namespace qmc {

/// Invalid configuration or schema violation. The CLI maps this to exit code 2.
class ConfigError : public std::runtime_error {
public:
    explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

/// Numerical degeneracy (indefinite matrix, constant function, ...). Exit code 3.
class NumericError : public std::runtime_error {
public:
    explicit NumericError(const std::string& what) : std::runtime_error(what) {}
};

#define QMC_REQUIRE(cond, msg)                        \
    do {                                              \
        if (!(cond)) throw qmc::ConfigError(msg);     \
    } while (0)

#define QMC_NUMERIC_REQUIRE(cond, msg)                \
    do {                                              \
        if (!(cond)) throw qmc::NumericError(msg);    \
    } while (0)

} // namespace qmc
