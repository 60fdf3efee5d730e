#pragma once

#include <stdexcept>
#include <string>

namespace teachdim {

// Base class for all library errors.
struct Error : std::runtime_error {
    explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

// A structural invariant of a domain type does not hold.
struct InvariantViolation : Error {
    explicit InvariantViolation(const std::string& msg) : Error(msg) {}
};

// Generator parameters cannot produce a well-formed instance.
struct InvalidShape : Error {
    explicit InvalidShape(const std::string& msg) : Error(msg) {}
};

// A state has no path from any supported initial state.
struct UnreachableState : Error {
    int state;
    explicit UnreachableState(int s)
        : Error("state " + std::to_string(s) +
                " is unreachable from every supported initial state"),
          state(s) {}
};

// A file could not be parsed into the expected schema.
struct ParseError : Error {
    explicit ParseError(const std::string& msg) : Error(msg) {}
};

// An argument is outside an operation's mathematical domain.
struct DomainError : Error {
    explicit DomainError(const std::string& msg) : Error(msg) {}
};

// A teacher decision exceeds the powers of its declared level.
struct LevelViolation : Error {
    explicit LevelViolation(const std::string& msg) : Error(msg) {}
};

// SARSA update requested without the trailing action of the 5-tuple.
struct MissingNextAction : Error {
    MissingNextAction() : Error("SARSA update requires the next action") {}
};

// An exact-oracle certification replay disagreed with the computed value.
struct CertificationFailure : Error {
    explicit CertificationFailure(const std::string& msg) : Error(msg) {}
};

// Instance too large for an exact solver.
struct TooLarge : Error {
    explicit TooLarge(const std::string& msg) : Error(msg) {}
};

}  // namespace teachdim
