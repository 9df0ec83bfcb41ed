#pragma once

#include <stdexcept>
#include <string>

namespace revrank {

/// Raised when an input violates a documented precondition
/// (non-stochastic matrix, zero stationary mass, bad parameters, ...).
class DomainError : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

/// Raised when an iterative routine exhausts its iteration or update cap.
/// Carries the residual reached when it gave up.
class ConvergenceError : public std::runtime_error {
public:
    ConvergenceError(const std::string& what, double achieved_residual)
        : std::runtime_error(what), residual_(achieved_residual) {}

    double residual() const noexcept { return residual_; }

private:
    double residual_;
};

} // namespace revrank
