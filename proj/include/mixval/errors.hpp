#pragma once

#include <stdexcept>
#include <string>

namespace mixval {

/// Bad caller input: wrong dimensions, values outside their support, bad options.
class InvalidArgument : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// Command-line options that are missing, malformed or out of range.
class UsageError : public InvalidArgument {
public:
    using InvalidArgument::InvalidArgument;
};

/// The data or model is unusable as given (rank-deficient design, n <= p, ...).
class ModelError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// An integral that only converges under the propriety conditions was asked for
/// outside of them.
class DivergentIntegral : public ModelError {
public:
    using ModelError::ModelError;
};

/// Factorization or other numerical failure that survived every fallback.
class NumericalError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class SingularMatrix : public NumericalError {
public:
    using NumericalError::NumericalError;
};

}  // namespace mixval
