/*
 * model.hpp: parameters of a parametric oscillator in a Kerr medium and the
 * scalar time-dependent coefficients of its Hamiltonian (hbar = 1).
 *
 *   H(t)   = Omega0 (n + 1/2) + chi n^2 + g(t) (a^2 + a+^2 + 2n + 1)
 *   Om(t)  = Omega0 [1 + 2 kappa cos(2 Omega0 t)]
 *   g(t)   = Omega0 kappa cos(2 Omega0 t) (1 + kappa cos(2 Omega0 t))
 *
 * In the interaction picture the operator-valued phases exp(+-4i chi t n) are
 * replaced by their average over the coherent state |alpha0>:
 *
 *   <alpha0| exp(+-4i chi t n) |alpha0> = exp[|alpha0|^2 (exp(+-4i chi t) - 1)]
 *
 * which leaves the approximate interaction Hamiltonian as a linear combination
 * f1 a+^2 + f2 n + f3 a^2 + f4 of time-independent generators.
 */

#pragma once

#include <cmath>
#include <complex>
#include <optional>
#include <string>

#include "kerrpo/errors.hpp"

namespace kerrpo {

using cplx = std::complex<double>;

inline constexpr double kPi = 3.14159265358979323846;
inline constexpr cplx kI{0.0, 1.0};

struct ModelParams {
    double omega0 = 1.0;
    double kappa = 0.0;
    double chi = 0.0;
    cplx z{0.0, 0.0};
    // Amplitude of the coherent state used in the Kerr average. When unset
    // the average is taken over |z| (real).
    std::optional<cplx> alpha0;

    cplx averaging_amplitude() const { return alpha0 ? *alpha0 : cplx(std::abs(z), 0.0); }

    void validate() const {
        if (!(omega0 > 0.0) || !std::isfinite(omega0))
            throw InvalidParameter("omega0 must be positive and finite, got " + std::to_string(omega0));
        if (!(kappa >= 0.0) || !std::isfinite(kappa))
            throw InvalidParameter("kappa must be non-negative, got " + std::to_string(kappa));
        if (!(chi >= 0.0) || !std::isfinite(chi))
            throw InvalidParameter("chi must be non-negative, got " + std::to_string(chi));
        if (!std::isfinite(z.real()) || !std::isfinite(z.imag()))
            throw InvalidParameter("z must be finite");
        const cplx a0 = averaging_amplitude();
        if (!std::isfinite(a0.real()) || !std::isfinite(a0.imag()))
            throw InvalidParameter("alpha0 must be finite");
    }
};

// Coefficients of X1 = a+^2, X2 = n, X3 = a^2, X4 = 1.
struct CoeffVector {
    cplx f1, f2, f3, f4;
};

inline double pump_frequency(double t, const ModelParams& p) {
    return p.omega0 * (1.0 + 2.0 * p.kappa * std::cos(2.0 * p.omega0 * t));
}

inline double coupling_g(double t, const ModelParams& p) {
    const double c = std::cos(2.0 * p.omega0 * t);
    return p.omega0 * p.kappa * c * (1.0 + p.kappa * c);
}

// exp[|alpha0|^2 (exp(sign 4i chi t) - 1)]; sign must be +1 or -1.
inline cplx kerr_average(double t, const ModelParams& p, int sign) {
    const double n0 = std::norm(p.averaging_amplitude());
    const double phase = sign * 4.0 * p.chi * t;
    // exp(i phase) - 1 written to avoid cancellation for small chi t
    const cplx em1(-2.0 * std::sin(0.5 * phase) * std::sin(0.5 * phase), std::sin(phase));
    return std::exp(n0 * em1);
}

inline CoeffVector interaction_coeffs(double t, const ModelParams& p) {
    const double g = coupling_g(t, p);
    const double phase = 2.0 * (p.omega0 + 2.0 * p.chi) * t;
    const cplx rot = std::polar(1.0, phase);
    CoeffVector c;
    c.f1 = g * rot * kerr_average(t, p, +1);
    // Built as the conjugate of f1 so that Hermiticity holds bit-for-bit.
    c.f3 = std::conj(c.f1);
    c.f2 = cplx(2.0 * g, 0.0);
    c.f4 = cplx(g, 0.0);
    return c;
}

}  // namespace kerrpo
