#pragma once

#include <stdexcept>
#include <string>

namespace qme {

// Caller supplied an out-of-range or inconsistent argument.
class ParameterError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

// A numerical routine failed (non-convergence, loss of positivity, ...).
class NumericalError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// A matrix passed as a density matrix has a clearly negative eigenvalue.
class InvalidDensityError : public NumericalError {
public:
    using NumericalError::NumericalError;
};

}  // namespace qme
