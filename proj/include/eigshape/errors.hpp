#pragma once

#include <stdexcept>
#include <string>

namespace eigshape {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class DegenerateShape : public Error {
public:
    using Error::Error;
};

class DimensionMismatch : public Error {
public:
    using Error::Error;
};

class InvalidArgument : public Error {
public:
    using Error::Error;
};

/// Iterative eigensolver did not reach the requested residual.
class ConvergenceFailure : public Error {
public:
    ConvergenceFailure(const std::string& what, double achieved)
        : Error(what), achieved_residual(achieved) {}
    double achieved_residual;
};

class DivisionByZeroInterval : public Error {
public:
    using Error::Error;
};

class NegativeSqrt : public Error {
public:
    using Error::Error;
};

class SingularEnclosure : public Error {
public:
    using Error::Error;
};

/// A precondition on eigenvalue separation could not be verified.
class GapTooSmall : public Error {
public:
    using Error::Error;
};

class InvalidDeltaB : public Error {
public:
    using Error::Error;
};

class DeltaTooLarge : public Error {
public:
    using Error::Error;
};

class LinearDependence : public Error {
public:
    using Error::Error;
};

class NotCertifiedSimple : public Error {
public:
    using Error::Error;
};

} // namespace eigshape
