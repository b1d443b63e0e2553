/*
 * state_analysis.hpp: observables of the evolved coherent state
 *
 *   |z;t> = U0(t) U(t) |z>,   U0(t) = exp(-i Omega0 t (n + 1/2) - i chi t n^2)
 *
 * With w = z exp(a2) and the Wei–Norman coefficients a1..a4 at time t,
 *
 *   c_n = N exp(-i chi t n^2 - i Omega0 t n) sqrt(n!) S_n,
 *   S_n = sum_{m=0}^{[n/2]} a1^m w^{n-2m} / (m! (n-2m)!),
 *   N   = exp(-i Omega0 t / 2 + a4 + z^2 a3 - |z|^2 / 2).
 *
 * The autocorrelation F(t) = <z|z;t> reduces to a double series in
 *   x = |z|^2 exp(a2 - i Omega0 t),  y = conj(z)^2 a1 exp(-2i Omega0 t)
 * weighted by the Kerr phases exp(-i chi t (k + 2l)^2); at chi = 0 the
 * series factorizes into a single exponential.
 */

#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "kerrpo/errors.hpp"
#include "kerrpo/fock.hpp"
#include "kerrpo/model.hpp"
#include "kerrpo/parallel.hpp"
#include "kerrpo/wei_norman.hpp"

namespace kerrpo {

struct Distribution {
    std::vector<double> probabilities;
    double time = 0.0;

    double total() const {
        double s = 0.0;
        for (double p : probabilities) s += p;
        return s;
    }
    double mean() const {
        double s = 0.0;
        for (std::size_t k = 0; k < probabilities.size(); ++k) s += static_cast<double>(k) * probabilities[k];
        return s;
    }
    std::size_t argmax() const {
        return static_cast<std::size_t>(
            std::distance(probabilities.begin(), std::max_element(probabilities.begin(), probabilities.end())));
    }
    // Interior indices strictly greater than both neighbours, ignoring values below floor.
    std::vector<std::size_t> local_maxima(double floor = 1e-12) const {
        std::vector<std::size_t> out;
        const auto& p = probabilities;
        for (std::size_t k = 0; k < p.size(); ++k) {
            if (p[k] < floor) continue;
            const bool left = k == 0 || p[k] > p[k - 1];
            const bool right = k + 1 == p.size() || p[k] > p[k + 1];
            if (left && right) out.push_back(k);
        }
        return out;
    }
};

struct TimeSeries {
    std::vector<double> times;
    std::vector<cplx> values;

    std::size_t size() const { return times.size(); }
    std::vector<double> abs2() const {
        std::vector<double> out(values.size());
        for (std::size_t i = 0; i < values.size(); ++i) out[i] = std::norm(values[i]);
        return out;
    }
};

struct Revival {
    double time = 0.0;
    double height = 0.0;
};

struct SeriesOptions {
    double fock_tol = 1e-12;       // tail probability allowed beyond the basis
    double autocorr_tol = 1e-14;   // bound on neglected autocorrelation terms
    std::size_t max_terms = 20000; // per index of the double series
    std::size_t max_basis = 1u << 15;
};

namespace detail {

inline void require_convergent(const WNState& s) {
    if (!(std::abs(s.a1) < 0.5))
        throw SeriesDivergence("|a1| = " + std::to_string(std::abs(s.a1)) + " is not below 1/2");
}

inline cplx log_normalization(const ModelParams& p, const WNState& s, double t) {
    return -kI * (0.5 * p.omega0 * t) + s.a4 + p.z * p.z * s.a3 - 0.5 * std::norm(p.z);
}

// c_n for n in [0, count), log-space term by term.
inline std::vector<cplx> fock_amplitudes(const ModelParams& p, const WNState& s, double t, std::size_t count) {
    const cplx log_norm = log_normalization(p, s, t);
    const cplx w = p.z * std::exp(s.a2);
    const bool a1_zero = s.a1 == cplx{};
    const bool w_zero = w == cplx{};
    const cplx log_a1 = a1_zero ? cplx{} : std::log(s.a1);
    const cplx log_w = w_zero ? cplx{} : std::log(w);

    std::vector<cplx> c(count);
    for (std::size_t n = 0; n < count; ++n) {
        const double dn = static_cast<double>(n);
        const double kerr_phase = std::fmod(p.chi * t * dn * dn + p.omega0 * t * dn, 2.0 * kPi);
        const cplx prefix = log_norm - kI * kerr_phase + 0.5 * log_factorial(n);
        cplx sum{};
        for (std::size_t m = 0; 2 * m <= n; ++m) {
            const std::size_t l = n - 2 * m;
            if ((a1_zero && m > 0) || (w_zero && l > 0)) continue;
            const cplx log_term = (m ? static_cast<double>(m) * log_a1 : cplx{}) +
                                  (l ? static_cast<double>(l) * log_w : cplx{}) - log_factorial(m) - log_factorial(l);
            sum += std::exp(prefix + log_term);
        }
        c[n] = sum;
    }
    return c;
}

}  // namespace detail

// Fock amplitudes of |z;t> on a basis of size n. The amplitudes on [n, 2n)
// are evaluated as a tail estimate; TruncationTooSmall if their probability
// reaches series_tol.
inline FockVector evolved_coefficients(const ModelParams& p, const WNState& s, double t, std::size_t n,
                                       double series_tol = 1e-12) {
    detail::require_convergent(s);
    if (n == 0) throw InvalidParameter("basis size must be positive");
    std::vector<cplx> c = detail::fock_amplitudes(p, s, t, 2 * n);
    double tail = 0.0;
    for (std::size_t k = n; k < 2 * n; ++k) tail += std::norm(c[k]);
    if (!(tail < series_tol))
        throw TruncationTooSmall("tail probability " + std::to_string(tail) + " beyond basis size " +
                                 std::to_string(n));
    c.resize(n);
    return FockVector{std::move(c)};
}

// Initial basis size for the adaptive cutoff.
inline std::size_t initial_basis_size(cplx z) {
    const double r = std::abs(z);
    return static_cast<std::size_t>(std::ceil(r * r + 8.0 * r + 20.0));
}

// Doubles the basis from initial_basis_size(z) until the appended tail is below opts.fock_tol.
inline FockVector evolved_state(const ModelParams& p, const WNState& s, double t, const SeriesOptions& opts = {}) {
    for (std::size_t n = initial_basis_size(p.z); n <= opts.max_basis; n *= 2) {
        try {
            return evolved_coefficients(p, s, t, n, opts.fock_tol);
        } catch (const TruncationTooSmall&) {
        }
    }
    throw TruncationTooSmall("no basis size up to " + std::to_string(opts.max_basis) + " meets the tail bound");
}

// P_0..P_{count-1} via the three-term recurrence of T_k = sqrt(k!) S_k:
//   T_{k+1} = (w T_k + 2 a1 sqrt(k) T_{k-1}) / sqrt(k+1).
// Kept independent of the log-space sum used for the amplitudes.
inline std::vector<double> probabilities_upto(const ModelParams& p, const WNState& s, double t, std::size_t count) {
    detail::require_convergent(s);
    std::vector<double> out(count);
    if (count == 0) return out;
    const cplx w = p.z * std::exp(s.a2);
    cplx prev{};
    cplx cur = std::exp(detail::log_normalization(p, s, t));
    out[0] = std::norm(cur);
    for (std::size_t k = 0; k + 1 < count; ++k) {
        const double dk = static_cast<double>(k);
        const cplx next = (w * cur + 2.0 * s.a1 * std::sqrt(dk) * prev) / std::sqrt(dk + 1.0);
        prev = cur;
        cur = next;
        out[k + 1] = std::norm(cur);
    }
    return out;
}

inline double probability_k(std::size_t k, const ModelParams& p, const WNState& s, double t) {
    return probabilities_upto(p, s, t, k + 1).back();
}

// P_k on the adaptive basis chosen by evolved_state.
inline Distribution distribution(const ModelParams& p, const WNState& s, double t, const SeriesOptions& opts = {}) {
    const FockVector v = evolved_state(p, s, t, opts);
    Distribution d;
    d.time = t;
    d.probabilities = probabilities_upto(p, s, t, v.basis_size());
    return d;
}

inline cplx autocorrelation(const ModelParams& p, const WNState& s, double t, double series_tol = 1e-14,
                            std::size_t max_terms = 20000) {
    if (!(series_tol > 0.0)) throw InvalidParameter("series tolerance must be positive");
    const double n0 = std::norm(p.z);
    const cplx x = n0 * std::exp(s.a2 - kI * (p.omega0 * t));
    const cplx y = std::conj(p.z) * std::conj(p.z) * s.a1 * std::exp(-kI * (2.0 * p.omega0 * t));
    const cplx pref = std::exp(-kI * (0.5 * p.omega0 * t) + s.a4 + p.z * p.z * s.a3 - n0);
    const double ax = std::abs(x), ay = std::abs(y);
    const double scale = std::abs(pref) * std::exp(ax + ay);

    // First index past the ratio-1/2 point whose term, scaled by everything
    // else in the series, drops below series_tol; plus ten terms of margin.
    auto cutoff = [&](double a) {
        double term = 1.0;
        std::size_t k = 0;
        for (; k < max_terms; ++k) {
            if (static_cast<double>(k) >= 2.0 * a && term * scale * std::exp(-a) < series_tol) break;
            term *= a / static_cast<double>(k + 1);
        }
        if (k >= max_terms)
            throw TruncationTooSmall("autocorrelation series needs more than " + std::to_string(max_terms) +
                                     " terms");
        return std::min(k + 10, max_terms);
    };
    const std::size_t kmax = cutoff(ax);
    const std::size_t lmax = (y == cplx{}) ? 1 : cutoff(ay);

    std::vector<cplx> xk(kmax), yl(lmax);
    xk[0] = 1.0;
    for (std::size_t k = 1; k < kmax; ++k) xk[k] = xk[k - 1] * x / static_cast<double>(k);
    yl[0] = 1.0;
    for (std::size_t l = 1; l < lmax; ++l) yl[l] = yl[l - 1] * y / static_cast<double>(l);

    const std::size_t nmax = kmax + 2 * lmax;
    std::vector<cplx> kerr(nmax);
    for (std::size_t n = 0; n < nmax; ++n) {
        const double dn = static_cast<double>(n);
        kerr[n] = std::polar(1.0, -std::fmod(p.chi * t * dn * dn, 2.0 * kPi));
    }

    cplx sum{};
    for (std::size_t l = 0; l < lmax; ++l) {
        cplx inner{};
        for (std::size_t k = 0; k < kmax; ++k) inner += xk[k] * kerr[k + 2 * l];
        sum += yl[l] * inner;
    }
    return pref * sum;
}

inline cplx autocorrelation_chi0(const ModelParams& p, const WNState& s, double t) {
    if (p.chi != 0.0) throw DomainError("closed-form autocorrelation requires chi = 0");
    const double n0 = std::norm(p.z);
    const cplx zc = std::conj(p.z);
    return std::exp(-kI * (0.5 * p.omega0 * t) + s.a4 + p.z * p.z * s.a3 - n0 +
                    zc * zc * s.a1 * std::exp(-kI * (2.0 * p.omega0 * t)) + n0 * std::exp(s.a2 - kI * (p.omega0 * t)));
}

// Overlap of |z> with the freely rotating coherent state |z exp(-i Omega0 t)>.
inline cplx reference_coherent_autocorr(cplx z, double omega0, double t) {
    return std::exp(-kI * (0.5 * omega0 * t) + std::norm(z) * (std::exp(-kI * (omega0 * t)) - 1.0));
}

// 4 pi / |E''| for E(n) = Omega0 (n + 1/2) + chi n^2.
inline double revival_time(const ModelParams& p) {
    if (!(p.chi > 0.0)) throw DomainError("revival time is undefined for chi = 0 (linear spectrum)");
    return 4.0 * kPi / (2.0 * p.chi);
}

// Autocorrelation along a Wei–Norman trajectory, one entry per sample.
inline TimeSeries autocorrelation_series(const ModelParams& p, const WNTrajectory& traj, double series_tol = 1e-14) {
    TimeSeries ts;
    ts.times = traj.times;
    ts.values.resize(traj.size());
    parallel_for(traj.size(), [&](std::size_t i) {
        ts.values[i] = autocorrelation(p, traj.states[i], traj.times[i], series_tol);
    });
    return ts;
}

// Local maxima of `values` above threshold. Interior peaks are refined with
// the parabola through the peak and its two neighbours; endpoint samples
// count as peaks when they exceed their single neighbour.
inline std::vector<Revival> detect_revivals(std::span<const double> times, std::span<const double> values,
                                            double threshold = 0.5) {
    if (!(threshold > 0.0 && threshold < 1.0)) throw InvalidParameter("threshold must lie in (0, 1)");
    if (times.size() != values.size()) throw InvalidParameter("times and values differ in length");
    std::vector<Revival> peaks;
    const std::size_t n = values.size();
    if (n < 2) return peaks;
    for (std::size_t i = 0; i < n; ++i) {
        const double v = values[i];
        if (!(v > threshold)) continue;
        if (i == 0) {
            if (v > values[1]) peaks.push_back({times[0], v});
            continue;
        }
        if (i + 1 == n) {
            if (v > values[i - 1]) peaks.push_back({times[i], v});
            continue;
        }
        // Plateaus count once, at their left edge.
        if (!(v > values[i - 1] && v >= values[i + 1])) continue;
        const double t0 = times[i - 1], t1 = times[i], t2 = times[i + 1];
        const double y0 = values[i - 1], y1 = v, y2 = values[i + 1];
        const double d01 = (y1 - y0) / (t1 - t0);
        const double d12 = (y2 - y1) / (t2 - t1);
        const double curv = (d12 - d01) / (t2 - t0);
        Revival r{t1, y1};
        if (curv < 0.0) {
            // y(t) = y1 + b (t - t1) + curv (t - t1)^2 with b the slope at t1
            const double b = d01 + curv * (t1 - t0);
            const double dt = std::clamp(-b / (2.0 * curv), t0 - t1, t2 - t1);
            r.time = t1 + dt;
            r.height = y1 + b * dt + curv * dt * dt;
        }
        peaks.push_back(r);
    }
    return peaks;
}

// Peaks of |F|^2 for an autocorrelation series F.
inline std::vector<Revival> detect_revivals(const TimeSeries& f, double threshold = 0.5) {
    const std::vector<double> v = f.abs2();
    return detect_revivals(f.times, v, threshold);
}

}  // namespace kerrpo
