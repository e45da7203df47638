#pragma once

#include <stdexcept>
#include <string>

namespace dme {

/// Invalid argument or precondition violation (bad dimension, bad law parameter, ...).
class ParameterError : public std::invalid_argument {
public:
    explicit ParameterError(const std::string& what) : std::invalid_argument(what) {}
};

/// A value type invariant does not hold (e.g. a matrix that is not row-stochastic).
class InvariantError : public std::logic_error {
public:
    explicit InvariantError(const std::string& what) : std::logic_error(what) {}
};

/// Iterative numerical method failed (no convergence, singular pivot, ...).
class NumericalError : public std::runtime_error {
public:
    explicit NumericalError(const std::string& what) : std::runtime_error(what) {}
};

/// Operation is undefined for the given input (e.g. a sub-dominant eigenvalue for n = 1).
class DomainError : public std::domain_error {
public:
    explicit DomainError(const std::string& what) : std::domain_error(what) {}
};

}  // namespace dme
