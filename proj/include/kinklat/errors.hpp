#ifndef KINKLAT_ERRORS_HPP
#define KINKLAT_ERRORS_HPP

#include <cstddef>
#include <stdexcept>
#include <string>

namespace kinklat {

// A bond whose squared Flaschka variable w_i vanishes; c_i / a_i is undefined there.
class SingularBondError : public std::domain_error {
public:
    SingularBondError(std::size_t bond, const std::string& what)
        : std::domain_error(what), bond_(bond) {}
    std::size_t bond() const noexcept { return bond_; }

private:
    std::size_t bond_;
};

// Raised by the integrators when the state becomes non-finite or exceeds the blow-up threshold.
class BlowUpError : public std::runtime_error {
public:
    BlowUpError(std::size_t step, const std::string& what)
        : std::runtime_error(what), step_(step) {}
    std::size_t step() const noexcept { return step_; }

private:
    std::size_t step_;
};

// A quantity that is expected to be real came out with a nonzero imaginary part
// (periodic winding walks with an odd number of negative w_i).
class ComplexValueError : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

}  // namespace kinklat

#endif  // KINKLAT_ERRORS_HPP
