#pragma once

#include <cmath>
#include <complex>
#include <cstddef>
#include <vector>

#include "kerrpo/errors.hpp"
#include "kerrpo/model.hpp"

namespace kerrpo {

// Amplitudes c_0..c_{N-1} over the truncated number basis.
struct FockVector {
    std::vector<cplx> amplitudes;

    std::size_t basis_size() const { return amplitudes.size(); }
    double norm2() const {
        double s = 0.0;
        for (const cplx& c : amplitudes) s += std::norm(c);
        return s;
    }
};

inline double log_factorial(std::size_t n) { return std::lgamma(static_cast<double>(n) + 1.0); }

// <n|z> = exp(-|z|^2/2) z^n / sqrt(n!), evaluated in log space.
inline FockVector coherent_state(cplx z, std::size_t n) {
    FockVector v;
    v.amplitudes.resize(n);
    const double r = std::abs(z);
    const double theta = std::arg(z);
    for (std::size_t k = 0; k < n; ++k) {
        if (r == 0.0) {
            v.amplitudes[k] = k == 0 ? cplx(1.0) : cplx(0.0);
            continue;
        }
        const double log_mag = -0.5 * r * r + static_cast<double>(k) * std::log(r) - 0.5 * log_factorial(k);
        v.amplitudes[k] = std::polar(std::exp(log_mag), static_cast<double>(k) * theta);
    }
    return v;
}

// Poisson(mean) probability mass at k >= n, summed upward from n.
inline double poisson_tail(double mean, std::size_t n) {
    if (mean == 0.0) return n == 0 ? 1.0 : 0.0;
    double tail = 0.0;
    for (std::size_t k = n;; ++k) {
        const double pk =
            std::exp(-mean + static_cast<double>(k) * std::log(mean) - log_factorial(k));
        tail += pk;
        if (static_cast<double>(k) > mean && pk < 1e-300 + 1e-18 * tail) break;
        if (k > n + 100000) break;
    }
    return tail;
}

// Smallest basis size whose Poisson(mean) tail is below tol.
inline std::size_t poisson_basis_size(double mean, double tol) {
    std::size_t n = 1;
    while (poisson_tail(mean, n) >= tol) ++n;
    return n;
}

}  // namespace kerrpo
