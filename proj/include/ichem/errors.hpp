#pragma once

#include <stdexcept>
#include <string>

namespace ichem {

// Precondition violation on a numeric argument (nonpositive scalar, interval
// straddling zero, p outside [0, 1], ...).
class DomainError : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

// Malformed model file or flag value. The message names the field or line.
class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// A single path could not be integrated (non-finite state, lost positivity).
class SimulationError : public std::runtime_error {
public:
    SimulationError(const std::string& what, double time)
        : std::runtime_error(what), time_(time) {}

    double time() const noexcept { return time_; }

private:
    double time_;
};

} // namespace ichem
