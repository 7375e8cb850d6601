#pragma once

// Exception types shared by every bubblesynth module.

#include <stdexcept>
#include <string>

namespace bubblesynth {

/// A value violates a documented precondition (non-positive radius, key out of range, ...).
class DomainError : public std::domain_error {
public:
    explicit DomainError(const std::string& what) : std::domain_error(what) {}
};

/// Malformed score or configuration text. `line()` is 1-based, 0 when not applicable.
class ParseError : public std::runtime_error {
public:
    ParseError(const std::string& what, int line)
        : std::runtime_error(line > 0 ? "line " + std::to_string(line) + ": " + what : what),
          line_(line) {}

    int line() const noexcept { return line_; }

private:
    int line_;
};

/// The ODE integration cannot continue: bubble collapse or a vanishing leading coefficient.
class SolverError : public std::runtime_error {
public:
    SolverError(const std::string& what, double tau)
        : std::runtime_error(what + " at tau=" + std::to_string(tau)), tau_(tau) {}

    double tau() const noexcept { return tau_; }

private:
    double tau_;
};

class IoError : public std::runtime_error {
public:
    explicit IoError(const std::string& what) : std::runtime_error(what) {}
};

namespace detail {

inline void require(bool condition, const std::string& message)
{
    if (!condition)
        throw DomainError(message);
}

inline void require_positive(double value, const char* name)
{
    if (!(value > 0.0))
        throw DomainError(std::string(name) + " must be positive, got " + std::to_string(value));
}

}  // namespace detail
}  // namespace bubblesynth
