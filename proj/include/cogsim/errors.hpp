#pragma once

#include <stdexcept>
#include <string>

namespace cogsim {

// Bad user input: malformed spec, probabilities out of range, bad grids.
class ConfigError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

// A protocol state that the algorithm rules say cannot happen.
class InvariantViolation : public std::logic_error {
public:
    using std::logic_error::logic_error;
};

// Closed-form quantity requested outside the stability region.
class InstabilityError : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

} // namespace cogsim
