#pragma once

#include <stdexcept>
#include <string>

namespace xhyp {

/// Input sits on (or within the guard distance of) a singular set.
class singular_point_error : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

/// Quadrature or extrapolation could not produce a trustworthy number.
class numerical_error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// The requested domain family or isometry image is outside what a pipeline supports.
class unsupported_error : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

}  // namespace xhyp
