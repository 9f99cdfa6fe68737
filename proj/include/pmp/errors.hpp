#pragma once

#include <stdexcept>
#include <string>

namespace pmp {

// Argument outside the mathematical domain of an operation.
class DomainError : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

// Data that cannot support a posterior (collinear pairs, zero spread, n too small).
class DegenerateDataError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Iterative method failed to converge. Carries the best estimate reached.
class NumericalError : public std::runtime_error {
public:
    NumericalError(const std::string& what, double best_estimate)
        : std::runtime_error(what), best_estimate_(best_estimate) {}
    explicit NumericalError(const std::string& what)
        : NumericalError(what, 0.0) {}

    double best_estimate() const noexcept { return best_estimate_; }

private:
    double best_estimate_;
};

}  // namespace pmp
