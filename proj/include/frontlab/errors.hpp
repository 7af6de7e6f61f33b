#ifndef FRONTLAB_ERRORS_HPP
#define FRONTLAB_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace frontlab {

// Bad user input: malformed config, invalid parameters. CLI exit code 2.
class ConfigError : public std::invalid_argument {
public:
    explicit ConfigError(const std::string& msg) : std::invalid_argument(msg) {}
};

// A computation could not produce a result: nonexistence detected, iteration
// budget exhausted, quantity not evaluable. CLI exit code 3.
class NumericalError : public std::runtime_error {
public:
    explicit NumericalError(const std::string& msg) : std::runtime_error(msg) {}
};

// A declared invariant failed on a computed result. CLI exit code 4.
class InvariantError : public std::runtime_error {
public:
    explicit InvariantError(const std::string& msg) : std::runtime_error(msg) {}
};

} // namespace frontlab

#endif
