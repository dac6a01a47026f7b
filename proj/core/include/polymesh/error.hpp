#pragma once

#include <stdexcept>
#include <string>

namespace polymesh {

// Every failure raised by the library derives from Error. The CLI maps the
// stage-specific subclasses onto process exit codes.
class Error : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

// Bad caller input: wrong dimension, non-unit direction, point outside body...
class InputError : public Error {
  public:
    using Error::Error;
};

// A body description that does not define a convex body (unbounded, empty,
// not positive definite, ...).
class MalformedBody : public Error {
  public:
    using Error::Error;
};

// Body has (numerically) zero volume.
class FlatnessError : public Error {
  public:
    using Error::Error;
};

class NormalizationFailed : public Error {
  public:
    NormalizationFailed(const std::string& what, double inner, double outer)
        : Error(what), inner_radius(inner), outer_radius(outer) {}
    double inner_radius;
    double outer_radius;
};

// A Chebyshev node received an argument outside [-1, 1]: some range
// certificate in the expression tree is broken.
class RangeViolation : public Error {
  public:
    using Error::Error;
};

// Two points are too close in the metric for the requested degree.
class SeparationError : public Error {
  public:
    SeparationError(const std::string& what, int min_degree)
        : Error(what), minimum_usable_degree(min_degree) {}
    int minimum_usable_degree;
};

class BudgetExceeded : public Error {
  public:
    BudgetExceeded(const std::string& what, int achieved, int budget)
        : Error(what), achieved_degree(achieved), degree_budget(budget) {}
    int achieved_degree;
    int degree_budget;
};

class MeshQualityError : public Error {
  public:
    using Error::Error;
};

class FingerprintMismatch : public Error {
  public:
    using Error::Error;
};

class ParseError : public Error {
  public:
    using Error::Error;
};

}  // namespace polymesh
