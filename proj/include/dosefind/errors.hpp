#pragma once

#include <stdexcept>
#include <string>

namespace dosefind {

/// Raised when an argument lies outside the mathematical domain of an operation.
class DomainError : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

/// Raised when user-supplied data (scenarios, configs, documents) is invalid.
/// `field()` names the offending key when one is known.
class ValidationError : public std::invalid_argument {
public:
    explicit ValidationError(const std::string& message, std::string field = {})
        : std::invalid_argument(field.empty() ? message : field + ": " + message),
          field_(std::move(field)) {}

    const std::string& field() const noexcept { return field_; }

private:
    std::string field_;
};

/// Raised when a referenced object (session, scenario) does not exist.
class NotFoundError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Raised when an operation is valid in form but not in the object's current state.
class ConflictError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

}  // namespace dosefind
