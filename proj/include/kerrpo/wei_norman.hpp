/*
 * wei_norman.hpp: product-form propagator of the approximate interaction
 * Hamiltonian  H~(t) = f1 a+^2 + f2 n + f3 a^2 + f4.
 *
 *   U(t) = exp(a1 a+^2) exp(a2 n) exp(a3 a^2) exp(a4),   a_k(0) = 0
 *
 *   a1' = -i (f1 + 2 a1 f2 + 4 a1^2 f3)      (Riccati)
 *   a2' = -i (f2 + 4 a1 f3)
 *   a3' = -i f3 exp(2 a2)
 *   a4' = -i (f4 + 2 a1 f3)
 *
 * For Hermitian H~ the product is an su(1,1) squeeze-rotation, which forces
 *   exp(2 Re a2) + 4 |a1|^2 = 1,   |a1| = |a3|,   2 Re a4 = Re a2
 * along the exact trajectory. These residuals are monitored during
 * integration and are the primary accuracy diagnostic.
 */

#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "kerrpo/errors.hpp"
#include "kerrpo/model.hpp"
#include "kerrpo/ode.hpp"

namespace kerrpo {

struct WNState {
    cplx a1{}, a2{}, a3{}, a4{};

    std::array<cplx, 4> as_array() const { return {a1, a2, a3, a4}; }
    static WNState from_span(std::span<const cplx> y) { return {y[0], y[1], y[2], y[3]}; }
};

struct UnitarityResidual {
    double norm = 0.0;     // |exp(2 Re a2) + 4|a1|^2 - 1|
    double modulus = 0.0;  // ||a1| - |a3||
    double scale = 0.0;    // |2 Re a4 - Re a2|

    double max() const { return std::max({norm, modulus, scale}); }
};

inline UnitarityResidual unitarity_residual(const WNState& s) {
    UnitarityResidual r;
    r.norm = std::abs(std::exp(2.0 * s.a2.real()) + 4.0 * std::norm(s.a1) - 1.0);
    r.modulus = std::abs(std::abs(s.a1) - std::abs(s.a3));
    r.scale = std::abs(2.0 * s.a4.real() - s.a2.real());
    return r;
}

struct WNTrajectory {
    std::vector<double> times;
    std::vector<WNState> states;
    std::vector<UnitarityResidual> residuals;
    ode::Stats stats;

    std::size_t size() const { return times.size(); }
    const WNState& final_state() const { return states.back(); }
    double max_residual() const {
        double m = 0.0;
        for (const auto& r : residuals) m = std::max(m, r.max());
        return m;
    }
};

struct WNOptions {
    double tol = 1e-10;           // absolute and relative local tolerance
    double squeeze_limit = 0.499; // SqueezeOverflow once |a1| reaches this
    double breach_factor = 100.0; // UnitarityBreach once a residual exceeds breach_factor * tol
};

inline WNState wn_rhs(double t, const WNState& s, const ModelParams& p) {
    const CoeffVector f = interaction_coeffs(t, p);
    WNState d;
    d.a1 = -kI * (f.f1 + 2.0 * s.a1 * f.f2 + 4.0 * s.a1 * s.a1 * f.f3);
    d.a2 = -kI * (f.f2 + 4.0 * s.a1 * f.f3);
    d.a3 = -kI * f.f3 * std::exp(2.0 * s.a2);
    d.a4 = -kI * (f.f4 + 2.0 * s.a1 * f.f3);
    return d;
}

// Samples the Wei–Norman coefficients at `times` (strictly increasing,
// starting at t = 0 where every coefficient vanishes).
inline WNTrajectory integrate_wn_at(const ModelParams& p, std::span<const double> times, const WNOptions& opts = {}) {
    p.validate();
    if (times.empty() || times.front() != 0.0) throw InvalidParameter("Wei–Norman grid must start at t = 0");
    if (!(opts.tol > 0.0)) throw InvalidParameter("ODE tolerance must be positive");

    WNTrajectory traj;
    traj.times.assign(times.begin(), times.end());
    traj.states.resize(times.size());
    traj.residuals.resize(times.size());

    const double breach = opts.breach_factor * opts.tol;
    auto check = [&](double t, const WNState& s) {
        if (std::abs(s.a1) >= opts.squeeze_limit)
            throw SqueezeOverflow("|a1| = " + std::to_string(std::abs(s.a1)) + " reached the squeeze limit at t = " +
                                  std::to_string(t));
        const UnitarityResidual r = unitarity_residual(s);
        if (r.max() > breach)
            throw UnitarityBreach("Wei–Norman unitarity residual " + std::to_string(r.max()) + " exceeds " +
                                  std::to_string(breach) + " at t = " + std::to_string(t));
        return r;
    };

    auto rhs = [&p](double t, std::span<const cplx> y, std::span<cplx> dy) {
        const WNState d = wn_rhs(t, WNState::from_span(y), p);
        dy[0] = d.a1;
        dy[1] = d.a2;
        dy[2] = d.a3;
        dy[3] = d.a4;
    };
    ode::Options o;
    o.rtol = opts.tol;
    o.atol = opts.tol;
    // Resolve the pump period even while the state is still exactly zero.
    o.max_step = 0.1 / p.omega0;
    o.land_on_samples = true;

    traj.stats = ode::integrate_dense(
        rhs, std::vector<cplx>(4, cplx{}), times, o,
        [&](std::size_t i, double t, std::span<const cplx> y) {
            traj.states[i] = i == 0 ? WNState{} : WNState::from_span(y);
            traj.residuals[i] = check(t, traj.states[i]);
        },
        [&](double t, std::span<const cplx> y) { check(t, WNState::from_span(y)); });
    return traj;
}

inline WNTrajectory integrate_wn(const ModelParams& p, double t_end, double sample_dt, double tol) {
    if (!(tol > 0.0)) throw InvalidParameter("ODE tolerance must be positive");
    const std::vector<double> grid = ode::uniform_grid(t_end, sample_dt);
    WNOptions opts;
    opts.tol = tol;
    return integrate_wn_at(p, grid, opts);
}

// Wei–Norman coefficients at a single time.
inline WNState wn_state_at(const ModelParams& p, double t, const WNOptions& opts = {}) {
    if (t == 0.0) return {};
    const std::array<double, 2> grid{0.0, t};
    return integrate_wn_at(p, grid, opts).final_state();
}

// exp(a1 A+^2) exp(a2 N) exp(a3 A^2) exp(a4) with truncated ladder matrices.
// A+^2 and A^2 are nilpotent once truncated, so each factor is a finite
// polynomial; the entries of the bottom rows still differ from the infinite
// operator, so comparisons should use an interior block.
inline Eigen::MatrixXcd wn_unitary_matrix(const WNState& s, int n) {
    if (n < 2) throw InvalidParameter("basis size must be at least 2");
    Eigen::MatrixXcd raise = Eigen::MatrixXcd::Zero(n, n);
    Eigen::MatrixXcd lower = Eigen::MatrixXcd::Zero(n, n);
    // (exp(c A+^2))_{j+2m, j} = c^m / m! * sqrt((j+2m)! / j!)
    for (int j = 0; j < n; ++j) {
        cplx up = 1.0, down = 1.0;
        raise(j, j) = 1.0;
        lower(j, j) = 1.0;
        for (int m = 1; j + 2 * m < n; ++m) {
            const double k = j + 2 * m;
            const double w = std::sqrt(k * (k - 1.0)) / m;
            up *= s.a1 * w;
            down *= s.a3 * w;
            raise(j + 2 * m, j) = up;
            lower(j, j + 2 * m) = down;
        }
    }
    Eigen::VectorXcd diag(n);
    const cplx e4 = std::exp(s.a4);
    for (int j = 0; j < n; ++j) diag(j) = std::exp(s.a2 * static_cast<double>(j)) * e4;
    return raise * diag.asDiagonal() * lower;
}

}  // namespace kerrpo
