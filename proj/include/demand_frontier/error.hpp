#pragma once

#include <stdexcept>
#include <string>

namespace demand_frontier {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Malformed or out-of-range user input (configs, CSV rows, arguments).
class InvalidInput : public Error {
public:
    using Error::Error;
};

/// A numerical fit failed to converge or produced an invalid optimum.
class FitError : public Error {
public:
    using Error::Error;
};

/// The optimizer could not find any candidate satisfying the constraints.
class InfeasibleError : public Error {
public:
    using Error::Error;
};

namespace detail {
[[noreturn]] inline void throw_invalid(const std::string& what) { throw InvalidInput(what); }

inline void require(bool cond, const std::string& what) {
    if (!cond) throw InvalidInput(what);
}
}  // namespace detail

}  // namespace demand_frontier
