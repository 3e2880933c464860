#pragma once

#include <stdexcept>
#include <string>

namespace dsmc {

/// Bad input: malformed files, inconsistent shapes, out-of-range parameters.
class ValidationError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// Eigensolver / SVD failures and other numerical breakdowns.
class NumericalError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

}  // namespace dsmc
