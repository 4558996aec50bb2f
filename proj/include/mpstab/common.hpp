#pragma once

#include <Eigen/Dense>

#include <complex>
#include <stdexcept>
#include <string>

namespace mpstab {

using Real = double;
using Complex = std::complex<Real>;
using VecX = Eigen::VectorXd;
using MatX = Eigen::MatrixXd;

/// Input document could not be parsed.
class SyntaxError : public std::runtime_error {
public:
    explicit SyntaxError(const std::string& msg) : std::runtime_error(msg) {}
};

/// A domain invariant was violated; carries the offending field path.
class ValidationError : public std::runtime_error {
public:
    ValidationError(std::string field, const std::string& msg)
        : std::runtime_error(field + ": " + msg), field_(std::move(field)) {}
    const std::string& field() const noexcept { return field_; }

private:
    std::string field_;
};

class WrongControllerKind : public std::runtime_error {
public:
    explicit WrongControllerKind(const std::string& msg) : std::runtime_error(msg) {}
};

class UnsupportedController : public std::runtime_error {
public:
    explicit UnsupportedController(const std::string& msg) : std::runtime_error(msg) {}
};

/// No steady state exists (load power above the deliverable maximum).
class NoEquilibrium : public std::runtime_error {
public:
    explicit NoEquilibrium(const std::string& msg) : std::runtime_error(msg) {}
};

class StepSizeUnderflow : public std::runtime_error {
public:
    explicit StepSizeUnderflow(const std::string& msg) : std::runtime_error(msg) {}
};

class NonFiniteState : public std::runtime_error {
public:
    explicit NonFiniteState(const std::string& msg) : std::runtime_error(msg) {}
};

class DomainError : public std::runtime_error {
public:
    explicit DomainError(const std::string& msg) : std::runtime_error(msg) {}
};

class NotTwiceDifferentiable : public std::runtime_error {
public:
    explicit NotTwiceDifferentiable(const std::string& msg) : std::runtime_error(msg) {}
};

class SingularWeight : public std::runtime_error {
public:
    explicit SingularWeight(const std::string& msg) : std::runtime_error(msg) {}
};

class EmptySeries : public std::runtime_error {
public:
    explicit EmptySeries(const std::string& msg) : std::runtime_error(msg) {}
};

class DegenerateDenominator : public std::runtime_error {
public:
    explicit DegenerateDenominator(const std::string& msg) : std::runtime_error(msg) {}
};

}  // namespace mpstab
