#ifndef WGMQED_ERRORS_HPP
#define WGMQED_ERRORS_HPP

#include <cstddef>
#include <stdexcept>
#include <string>

namespace wgmqed {

/// Base class for every error thrown by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Parameters or inputs that violate a documented precondition.
class InvalidArgument : public Error {
public:
    using Error::Error;
};

/// A closed-form expression hit a pole (zero denominator).
class SingularityError : public Error {
public:
    using Error::Error;
};

/// Input polarization cannot be balanced (empty resonator at critical coupling).
class Unbalanceable : public Error {
public:
    using Error::Error;
};

/// The Liouvillian has more than one stationary state.
class DegenerateSteadyState : public Error {
public:
    using Error::Error;
};

/// A density operator handed in as stationary is not (residual above tolerance).
class NonSteadyState : public Error {
public:
    using Error::Error;
};

/// A numerical routine produced an unphysical or non-finite result.
class NumericalFailure : public Error {
public:
    using Error::Error;
};

/// The set of measurement settings cannot determine the state.
class RankDeficient : public Error {
public:
    using Error::Error;
};

/// Phase requested from off-diagonal elements that are too small to carry one.
class UndefinedPhase : public Error {
public:
    using Error::Error;
};

/// A normalized correlation was requested where a singles rate vanishes.
class UndefinedCorrelation : public Error {
public:
    using Error::Error;
};

/// Malformed input file. Carries the 1-based line number (0 if unknown).
class ParseError : public Error {
public:
    ParseError(const std::string& what, std::size_t line)
        : Error(line > 0 ? "line " + std::to_string(line) + ": " + what : what), line_(line) {}

    std::size_t line() const noexcept { return line_; }

private:
    std::size_t line_;
};

/// Bad run configuration (unknown key, wrong type, out-of-range value).
class ConfigError : public Error {
public:
    using Error::Error;
};

}  // namespace wgmqed

#endif
