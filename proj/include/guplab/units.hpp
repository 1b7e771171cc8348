#pragma once

#include <cmath>
#include <stdexcept>
#include <string>

namespace guplab {

// Bad input: maps to CLI exit status 2.
class ValidationError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Quadrature/eigensolver/iteration breakdown: CLI exit status 3.
class NumericalError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct PhysicalUnits {
    double hbar = 1.0;
    double mass = 1.0;
    double omega = 1.0;

    void validate() const {
        auto ok = [](double v) { return std::isfinite(v) && v > 0.0; };
        if (!ok(hbar) || !ok(mass) || !ok(omega))
            throw ValidationError("physical units must be finite and strictly positive");
    }

    // oscillator length and momentum scales, L0*K0 = hbar/2
    double L0() const { return std::sqrt(hbar / (2.0 * mass * omega)); }
    double K0() const { return std::sqrt(hbar * mass * omega / 2.0); }
};

} // namespace guplab
