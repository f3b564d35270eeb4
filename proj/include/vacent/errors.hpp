#ifndef VACENT_ERRORS_HPP
#define VACENT_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace vacent {

class Error : public std::runtime_error
{
public:
    using std::runtime_error::runtime_error;
};

// Bad argument: non-positive frequency, unknown mode label, shape mismatch...
class InvalidParameter : public Error
{
public:
    using Error::Error;
};

// The quadratic Hamiltonian has a non-positive potential eigenvalue, i.e. the
// harmonic (Holstein-Primakoff) description has no ground state.
class UnstableRegime : public Error
{
public:
    UnstableRegime(const std::string& what, double critical_coupling)
        : Error(what), critical_coupling_(critical_coupling) {}

    double critical_coupling() const noexcept { return critical_coupling_; }

private:
    double critical_coupling_;
};

class NumericalError : public Error
{
public:
    using Error::Error;
};

class NumericalDegeneracy : public NumericalError
{
public:
    NumericalDegeneracy(const std::string& what, double residual)
        : NumericalError(what), residual_(residual) {}

    double residual() const noexcept { return residual_; }

private:
    double residual_;
};

class StepTooLarge : public NumericalError
{
public:
    using NumericalError::NumericalError;
};

class ConvergenceFailure : public NumericalError
{
public:
    ConvergenceFailure(const std::string& what, double residual)
        : NumericalError(what), residual_(residual) {}

    double residual() const noexcept { return residual_; }

private:
    double residual_;
};

class UnsupportedState : public Error
{
public:
    using Error::Error;
};

} // namespace vacent

#endif
