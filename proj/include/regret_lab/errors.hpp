#pragma once

#include <stdexcept>
#include <string>

namespace regret_lab {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// A constructor or function argument lies outside its admissible range.
/// The message names the violated bound.
class ParameterError : public Error {
public:
    using Error::Error;
};

/// The Markov chain induced by a policy has more than one closed class.
class NonUnichainError : public Error {
public:
    using Error::Error;
};

/// Some state pair cannot be connected under any policy.
class UndefinedDiameterError : public Error {
public:
    using Error::Error;
};

/// A linear solve failed its residual check, or an iteration hit its cap.
class SolveError : public Error {
public:
    using Error::Error;
};

/// Exhaustive enumeration was requested beyond the supported caps.
class EnumerationTooLarge : public Error {
public:
    using Error::Error;
};

/// The tuned gap parameter does not produce a valid instance.
class InfeasibleEpsilon : public Error {
public:
    using Error::Error;
};

class UnsupportedInstance : public Error {
public:
    using Error::Error;
};

/// Invalid command-line or file configuration. The message names the field.
class ConfigError : public Error {
public:
    using Error::Error;
};

} // namespace regret_lab
