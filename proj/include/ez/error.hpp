#pragma once

#include <stdexcept>
#include <string>

namespace ez {

/// Input outside the domain an operation is defined on (bad altitude, aspect, y <= 0, ...).
class DomainError : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

/// A query or flag failed validation. Maps to CLI exit code 2.
class ValidationError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// Missing, unreadable, or inconsistent input artifact (including hash mismatch). Exit code 3.
class ArtifactError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// No composition satisfies the policy constraints. Exit code 4.
class InfeasibleError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Non-finite state or loss. Exit code 5.
class DivergenceError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

} // namespace ez
