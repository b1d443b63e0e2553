/*
 * oracle.hpp: converged Fock-basis propagation of the exact interaction
 * picture Hamiltonian
 *
 *   H_I(t) = g(t) [ exp(-2i Om(n) t) a^2 + a+^2 exp(2i Om(n) t) + 2n + 1 ],
 *   Om(n)  = Omega0 + 2 chi (1 + n),
 *
 * followed by the exact free evolution U0(t) = exp(-i Omega0 t (n+1/2) - i chi t n^2).
 * Every operator involved has nonzero entries only on the main diagonal and
 * the diagonals at offset +-2, so matrices are stored as bands.
 */

#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "kerrpo/errors.hpp"
#include "kerrpo/fock.hpp"
#include "kerrpo/model.hpp"
#include "kerrpo/ode.hpp"
#include "kerrpo/state_analysis.hpp"

namespace kerrpo {

// Hermitian matrix with entries on the main diagonal and at offsets +-2.
// upper[j] holds H(j, j+2); H(j+2, j) is its conjugate.
struct BandedHermitian {
    std::vector<double> diag;
    std::vector<cplx> upper;

    std::size_t size() const { return diag.size(); }

    // out = H in
    void apply(std::span<const cplx> in, std::span<cplx> out) const {
        const std::size_t n = diag.size();
        for (std::size_t j = 0; j < n; ++j) out[j] = diag[j] * in[j];
        for (std::size_t j = 0; j + 2 < n; ++j) {
            out[j] += upper[j] * in[j + 2];
            out[j + 2] += std::conj(upper[j]) * in[j];
        }
    }

    Eigen::MatrixXcd to_dense() const {
        const auto n = static_cast<Eigen::Index>(diag.size());
        Eigen::MatrixXcd m = Eigen::MatrixXcd::Zero(n, n);
        for (Eigen::Index j = 0; j < n; ++j) m(j, j) = diag[j];
        for (Eigen::Index j = 0; j + 2 < n; ++j) {
            m(j, j + 2) = upper[j];
            m(j + 2, j) = std::conj(upper[j]);
        }
        return m;
    }
};

// a^2, a+^2 and n on the basis |0>..|N-1>.
struct OperatorSet {
    std::size_t n = 0;
    std::vector<double> ladder2;  // <j|a^2|j+2> = sqrt((j+1)(j+2))

    void apply_lower2(std::span<const cplx> in, std::span<cplx> out) const {
        std::fill(out.begin(), out.end(), cplx{});
        for (std::size_t j = 0; j + 2 < n; ++j) out[j] = ladder2[j] * in[j + 2];
    }
    void apply_raise2(std::span<const cplx> in, std::span<cplx> out) const {
        std::fill(out.begin(), out.end(), cplx{});
        for (std::size_t j = 0; j + 2 < n; ++j) out[j + 2] = ladder2[j] * in[j];
    }
    void apply_number(std::span<const cplx> in, std::span<cplx> out) const {
        for (std::size_t j = 0; j < n; ++j) out[j] = static_cast<double>(j) * in[j];
    }

    Eigen::MatrixXcd lower2() const {
        const auto m = static_cast<Eigen::Index>(n);
        Eigen::MatrixXcd a = Eigen::MatrixXcd::Zero(m, m);
        for (Eigen::Index j = 0; j + 2 < m; ++j) a(j, j + 2) = ladder2[j];
        return a;
    }
    Eigen::MatrixXcd raise2() const { return lower2().adjoint(); }
    Eigen::MatrixXcd number() const {
        Eigen::VectorXcd d(static_cast<Eigen::Index>(n));
        for (std::size_t j = 0; j < n; ++j) d(static_cast<Eigen::Index>(j)) = static_cast<double>(j);
        return d.asDiagonal();
    }
};

inline OperatorSet build_operators(std::size_t n) {
    if (n < 3) throw InvalidParameter("operator basis size must be at least 3");
    OperatorSet ops;
    ops.n = n;
    ops.ladder2.resize(n - 2);
    for (std::size_t j = 0; j + 2 < n; ++j)
        ops.ladder2[j] = std::sqrt(static_cast<double>(j + 1) * static_cast<double>(j + 2));
    return ops;
}

// Om(n) = Omega0 + 2 chi (1 + n)
inline double effective_frequency(std::size_t n, const ModelParams& p) {
    return p.omega0 + 2.0 * p.chi * (1.0 + static_cast<double>(n));
}

inline BandedHermitian exact_hi_matrix(double t, const ModelParams& p, const OperatorSet& ops) {
    const double g = coupling_g(t, p);
    BandedHermitian h;
    h.diag.resize(ops.n);
    h.upper.resize(ops.n >= 2 ? ops.n - 2 : 0);
    for (std::size_t j = 0; j < ops.n; ++j) h.diag[j] = g * (2.0 * static_cast<double>(j) + 1.0);
    // exp(-2i Om(n) t) multiplies a^2 from the left: row j carries Om(j).
    for (std::size_t j = 0; j + 2 < ops.n; ++j) {
        const double phase = std::fmod(2.0 * effective_frequency(j, p) * t, 2.0 * kPi);
        h.upper[j] = g * ops.ladder2[j] * std::polar(1.0, -phase);
    }
    return h;
}

// Matrix of f1 a+^2 + f2 n + f3 a^2 + f4 with the averaged coefficients.
inline BandedHermitian approx_hi_matrix(double t, const ModelParams& p, const OperatorSet& ops) {
    const CoeffVector f = interaction_coeffs(t, p);
    BandedHermitian h;
    h.diag.resize(ops.n);
    h.upper.resize(ops.n >= 2 ? ops.n - 2 : 0);
    for (std::size_t j = 0; j < ops.n; ++j) h.diag[j] = f.f2.real() * static_cast<double>(j) + f.f4.real();
    for (std::size_t j = 0; j + 2 < ops.n; ++j) h.upper[j] = f.f3 * ops.ladder2[j];
    return h;
}

// c_n <- c_n exp(-i Omega0 t (n + 1/2) - i chi t n^2)
inline FockVector apply_u0(const FockVector& v, const ModelParams& p, double t) {
    FockVector out = v;
    for (std::size_t n = 0; n < out.amplitudes.size(); ++n) {
        const double dn = static_cast<double>(n);
        const double phase = std::fmod(p.omega0 * t * (dn + 0.5) + p.chi * t * dn * dn, 2.0 * kPi);
        out.amplitudes[n] *= std::polar(1.0, -phase);
    }
    return out;
}

struct OracleOptions {
    double ode_tol = 1e-11;
    double drift_limit = 1e-7;  // NormDrift beyond this
    double prep_tol = 1e-8;     // allowed Poisson tail of the truncated initial state
    ode::ErrorNorm error_norm = ode::ErrorNorm::kMax;
};

struct PropagationResult {
    std::vector<double> times;
    std::vector<FockVector> states;  // interaction picture
    double norm_drift = 0.0;         // max | ||psi(t)|| - ||psi(0)|| |
    std::size_t truncation_used = 0;
    ode::Stats stats;
};

// Solves i psi' = H_I(t) psi from the truncated coherent state |z>.
inline PropagationResult propagate_exact(const ModelParams& p, std::span<const double> times, std::size_t n,
                                         const OracleOptions& opts = {}) {
    p.validate();
    if (times.empty() || times.front() != 0.0) throw InvalidParameter("oracle grid must start at t = 0");
    if (!(opts.ode_tol > 0.0)) throw InvalidParameter("ODE tolerance must be positive");
    const double tail = poisson_tail(std::norm(p.z), n);
    if (!(tail < opts.prep_tol))
        throw TruncationTooSmall("initial coherent state leaves tail " + std::to_string(tail) + " beyond N = " +
                                 std::to_string(n));

    const OperatorSet ops = build_operators(n);
    std::vector<double> ladder = ops.ladder2;
    auto rhs = [&p, ladder = std::move(ladder), n](double t, std::span<const cplx> y, std::span<cplx> dy) {
        const double g = coupling_g(t, p);
        for (std::size_t j = 0; j < n; ++j) dy[j] = g * (2.0 * static_cast<double>(j) + 1.0) * y[j];
        if (g != 0.0) {
            for (std::size_t j = 0; j + 2 < n; ++j) {
                const double phase = std::fmod(2.0 * effective_frequency(j, p) * t, 2.0 * kPi);
                const cplx h = g * ladder[j] * std::polar(1.0, -phase);
                dy[j] += h * y[j + 2];
                dy[j + 2] += std::conj(h) * y[j];
            }
        }
        for (std::size_t j = 0; j < n; ++j) dy[j] = cplx(dy[j].imag(), -dy[j].real());  // -i * dy
    };

    PropagationResult res;
    res.times.assign(times.begin(), times.end());
    res.states.resize(times.size());
    res.truncation_used = n;

    FockVector psi0 = coherent_state(p.z, n);
    const double norm0 = std::sqrt(psi0.norm2());
    ode::Options o;
    o.rtol = opts.ode_tol;
    o.atol = opts.ode_tol;
    o.max_step = 0.1 / p.omega0;
    o.norm = opts.error_norm;
    res.stats = ode::integrate_dense(rhs, psi0.amplitudes, times, o,
                                     [&](std::size_t i, double, std::span<const cplx> y) {
                                         res.states[i].amplitudes.assign(y.begin(), y.end());
                                         const double drift = std::abs(std::sqrt(res.states[i].norm2()) - norm0);
                                         res.norm_drift = std::max(res.norm_drift, drift);
                                     });
    if (res.norm_drift > opts.drift_limit)
        throw NormDrift("oracle norm drift " + std::to_string(res.norm_drift) + " exceeds " +
                        std::to_string(opts.drift_limit));
    return res;
}

// F(t) = <psi(0)| U0(t) psi_I(t)>
inline TimeSeries oracle_autocorrelation(const PropagationResult& res, const ModelParams& p) {
    TimeSeries ts;
    ts.times = res.times;
    ts.values.resize(res.times.size());
    const auto& psi0 = res.states.front().amplitudes;
    for (std::size_t i = 0; i < res.times.size(); ++i) {
        const FockVector v = apply_u0(res.states[i], p, res.times[i]);
        cplx f{};
        for (std::size_t k = 0; k < psi0.size(); ++k) f += std::conj(psi0[k]) * v.amplitudes[k];
        ts.values[i] = f;
    }
    return ts;
}

struct ConvergenceReport {
    std::vector<std::size_t> n_tried;
    std::vector<double> sup_deltas;  // sup |F|^2 change between consecutive sizes
    std::size_t n_final = 0;
    TimeSeries series;               // oracle autocorrelation at n_final
    double norm_drift = 0.0;         // of the run at n_final
};

// Doubles N from the smallest size whose Poisson tail is below conv_tol / 10
// until |F(t)|^2 changes by less than conv_tol (sup over the grid) under one
// further doubling. n_final is the smaller size of the converged pair.
inline ConvergenceReport converge_truncation(const ModelParams& p, std::span<const double> times, double conv_tol,
                                             OracleOptions opts = {}, std::size_t cap = 4096) {
    if (!(conv_tol > 0.0)) throw InvalidParameter("convergence tolerance must be positive");
    opts.prep_tol = conv_tol / 10.0;
    ConvergenceReport rep;
    std::size_t n = std::max<std::size_t>(poisson_basis_size(std::norm(p.z), opts.prep_tol), 3);
    if (n > cap) throw NoConvergence("initial state alone needs N = " + std::to_string(n));

    PropagationResult cur = propagate_exact(p, times, n, opts);
    TimeSeries cur_f = oracle_autocorrelation(cur, p);
    rep.n_tried.push_back(n);
    while (2 * n <= cap) {
        PropagationResult next = propagate_exact(p, times, 2 * n, opts);
        TimeSeries next_f = oracle_autocorrelation(next, p);
        double delta = 0.0;
        for (std::size_t i = 0; i < times.size(); ++i)
            delta = std::max(delta, std::abs(std::norm(next_f.values[i]) - std::norm(cur_f.values[i])));
        rep.n_tried.push_back(2 * n);
        rep.sup_deltas.push_back(delta);
        if (delta < conv_tol) {
            rep.n_final = n;
            rep.series = std::move(cur_f);
            rep.norm_drift = cur.norm_drift;
            return rep;
        }
        n *= 2;
        cur = std::move(next);
        cur_f = std::move(next_f);
    }
    throw NoConvergence("oracle not converged below N cap " + std::to_string(cap));
}

}  // namespace kerrpo
