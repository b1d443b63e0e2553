/*
 * ode.hpp: adaptive Dormand–Prince 5(4) integrator for complex-valued
 * first-order systems y' = f(t, y), with the 4th-order continuous extension
 * used to sample the solution at arbitrary output times.
 *
 * Error control follows Hairer/Norsett/Wanner: the RMS over components of
 * |err_i| / (atol + rtol * max(|y_i|, |y_new_i|)) must not exceed 1.
 */

#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <limits>
#include <span>
#include <string>
#include <vector>

#include "kerrpo/errors.hpp"

namespace kerrpo::ode {

using cplx = std::complex<double>;

enum class ErrorNorm { kRms, kMax };

struct Options {
    ErrorNorm norm = ErrorNorm::kRms;
    double rtol = 1e-10;
    double atol = 1e-10;
    double initial_step = 0.0;  // 0 selects automatically
    double max_step = 0.0;      // 0 means unbounded
    std::size_t max_steps = 20'000'000;
    // Step exactly onto every output time instead of interpolating. The
    // dense output is only fourth order; landing keeps samples at full accuracy.
    bool land_on_samples = false;
};

struct Stats {
    std::size_t accepted = 0;
    std::size_t rejected = 0;
    std::size_t rhs_evaluations = 0;
};

namespace dopri {
inline constexpr double c2 = 1.0 / 5.0, c3 = 3.0 / 10.0, c4 = 4.0 / 5.0, c5 = 8.0 / 9.0;
inline constexpr double a21 = 1.0 / 5.0;
inline constexpr double a31 = 3.0 / 40.0, a32 = 9.0 / 40.0;
inline constexpr double a41 = 44.0 / 45.0, a42 = -56.0 / 15.0, a43 = 32.0 / 9.0;
inline constexpr double a51 = 19372.0 / 6561.0, a52 = -25360.0 / 2187.0, a53 = 64448.0 / 6561.0,
                        a54 = -212.0 / 729.0;
inline constexpr double a61 = 9017.0 / 3168.0, a62 = -355.0 / 33.0, a63 = 46732.0 / 5247.0,
                        a64 = 49.0 / 176.0, a65 = -5103.0 / 18656.0;
inline constexpr double a71 = 35.0 / 384.0, a73 = 500.0 / 1113.0, a74 = 125.0 / 192.0,
                        a75 = -2187.0 / 6784.0, a76 = 11.0 / 84.0;
// 5th-order weights minus embedded 4th-order weights
inline constexpr double e1 = 71.0 / 57600.0, e3 = -71.0 / 16695.0, e4 = 71.0 / 1920.0,
                        e5 = -17253.0 / 339200.0, e6 = 22.0 / 525.0, e7 = -1.0 / 40.0;
// continuous extension
inline constexpr double d1 = -12715105075.0 / 11282082432.0, d3 = 87487479700.0 / 32700410799.0,
                        d4 = -10690763975.0 / 1880347072.0, d5 = 701980252875.0 / 199316789632.0,
                        d6 = -1453857185.0 / 822651844.0, d7 = 69997945.0 / 29380423.0;
}  // namespace dopri

// Rhs: void(double t, std::span<const cplx> y, std::span<cplx> dydt)
template <class Rhs>
class DormandPrince45 {
public:
    DormandPrince45(Rhs rhs, std::vector<cplx> y0, double t0, Options opts)
        : rhs_(std::move(rhs)), opts_(opts), t_(t0), t_prev_(t0), y_(std::move(y0)) {
        const std::size_t n = y_.size();
        for (auto* v : {&k1_, &k2_, &k3_, &k4_, &k5_, &k6_, &k7_, &ytmp_, &ynew_, &r1_, &r2_, &r3_, &r4_, &r5_})
            v->assign(n, cplx{});
        eval(t_, y_, k1_);
        h_ = opts_.initial_step > 0.0 ? opts_.initial_step : initial_step();
        r1_ = y_;
    }

    double t() const { return t_; }
    double t_prev() const { return t_prev_; }
    double step_size() const { return h_; }
    std::span<const cplx> y() const { return y_; }
    const Stats& stats() const { return stats_; }

    // Takes one accepted step, never passing t_limit.
    void step(double t_limit) {
        using namespace dopri;
        const std::size_t n = y_.size();
        double h = std::min(h_, t_limit - t_);
        if (opts_.max_step > 0.0) h = std::min(h, opts_.max_step);
        // never leave a rounding-sized sliver before t_limit
        if (t_limit - t_ - h < 1e-8 * h) h = t_limit - t_;
        bool clipped = h < h_;
        for (;;) {
            if (stats_.accepted + stats_.rejected >= opts_.max_steps)
                throw IntegrationFailure("step budget exhausted at t = " + std::to_string(t_));
            if (!(h > 16.0 * std::numeric_limits<double>::epsilon() * std::max(1.0, std::abs(t_))))
                throw IntegrationFailure("step size underflow at t = " + std::to_string(t_));

            for (std::size_t i = 0; i < n; ++i) ytmp_[i] = y_[i] + h * a21 * k1_[i];
            eval(t_ + c2 * h, ytmp_, k2_);
            for (std::size_t i = 0; i < n; ++i) ytmp_[i] = y_[i] + h * (a31 * k1_[i] + a32 * k2_[i]);
            eval(t_ + c3 * h, ytmp_, k3_);
            for (std::size_t i = 0; i < n; ++i)
                ytmp_[i] = y_[i] + h * (a41 * k1_[i] + a42 * k2_[i] + a43 * k3_[i]);
            eval(t_ + c4 * h, ytmp_, k4_);
            for (std::size_t i = 0; i < n; ++i)
                ytmp_[i] = y_[i] + h * (a51 * k1_[i] + a52 * k2_[i] + a53 * k3_[i] + a54 * k4_[i]);
            eval(t_ + c5 * h, ytmp_, k5_);
            for (std::size_t i = 0; i < n; ++i)
                ytmp_[i] = y_[i] + h * (a61 * k1_[i] + a62 * k2_[i] + a63 * k3_[i] + a64 * k4_[i] +
                                        a65 * k5_[i]);
            const double t_new = (h == t_limit - t_) ? t_limit : t_ + h;
            eval(t_new, ytmp_, k6_);
            for (std::size_t i = 0; i < n; ++i)
                ynew_[i] = y_[i] + h * (a71 * k1_[i] + a73 * k3_[i] + a74 * k4_[i] + a75 * k5_[i] +
                                        a76 * k6_[i]);
            eval(t_new, ynew_, k7_);

            double err = 0.0;
            for (std::size_t i = 0; i < n; ++i) {
                const cplx e = h * (e1 * k1_[i] + e3 * k3_[i] + e4 * k4_[i] + e5 * k5_[i] + e6 * k6_[i] +
                                    e7 * k7_[i]);
                const double sk = opts_.atol + opts_.rtol * std::max(std::abs(y_[i]), std::abs(ynew_[i]));
                const double q = std::norm(e) / (sk * sk);
                err = opts_.norm == ErrorNorm::kMax ? std::max(err, q) : err + q;
            }
            if (opts_.norm == ErrorNorm::kRms && n) err /= static_cast<double>(n);
            err = std::sqrt(err);
            if (!std::isfinite(err))
                throw IntegrationFailure("non-finite error estimate at t = " + std::to_string(t_));

            if (err <= 1.0) {
                for (std::size_t i = 0; i < n; ++i) {
                    const cplx ydiff = ynew_[i] - y_[i];
                    const cplx bspl = h * k1_[i] - ydiff;
                    r1_[i] = y_[i];
                    r2_[i] = ydiff;
                    r3_[i] = bspl;
                    r4_[i] = ydiff - h * k7_[i] - bspl;
                    r5_[i] = h * (d1 * k1_[i] + d3 * k3_[i] + d4 * k4_[i] + d5 * k5_[i] + d6 * k6_[i] +
                                  d7 * k7_[i]);
                }
                t_prev_ = t_;
                h_prev_ = h;
                t_ = t_new;
                y_.swap(ynew_);
                k1_.swap(k7_);
                ++stats_.accepted;
                const double fac = err > 0.0 ? 0.9 * std::pow(err, -0.2) : 5.0;
                const double proposal = h * std::clamp(fac, 0.2, 5.0);
                // a step shortened to reach t_limit says little about the next one
                h_ = clipped ? std::max(proposal, h_) : proposal;
                return;
            }
            ++stats_.rejected;
            clipped = false;
            h *= std::clamp(0.9 * std::pow(err, -0.2), 0.1, 1.0);
        }
    }

    // Interpolated solution at s in [t_prev, t]; valid only after a step.
    void dense(double s, std::span<cplx> out) const {
        const double theta = h_prev_ > 0.0 ? (s - t_prev_) / h_prev_ : 1.0;
        const double theta1 = 1.0 - theta;
        for (std::size_t i = 0; i < y_.size(); ++i)
            out[i] = r1_[i] + theta * (r2_[i] + theta1 * (r3_[i] + theta * (r4_[i] + theta1 * r5_[i])));
    }

private:
    void eval(double t, std::span<const cplx> y, std::span<cplx> dy) {
        ++stats_.rhs_evaluations;
        rhs_(t, y, dy);
    }

    double initial_step() {
        const std::size_t n = y_.size();
        if (n == 0) return 1e-3;
        double dnf = 0.0, dny = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            const double sk = opts_.atol + opts_.rtol * std::abs(y_[i]);
            dnf += std::norm(k1_[i]) / (sk * sk);
            dny += std::norm(y_[i]) / (sk * sk);
        }
        double h = (dnf <= 1e-10 || dny <= 1e-10) ? 1e-6 : 0.01 * std::sqrt(dny / dnf);
        for (std::size_t i = 0; i < n; ++i) ytmp_[i] = y_[i] + h * k1_[i];
        eval(t_ + h, ytmp_, k2_);
        double der2 = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            const double sk = opts_.atol + opts_.rtol * std::abs(y_[i]);
            der2 += std::norm(k2_[i] - k1_[i]) / (sk * sk);
        }
        der2 = std::sqrt(der2) / h;
        const double der12 = std::max(der2, std::sqrt(dnf));
        const double h1 = der12 <= 1e-15 ? std::max(1e-6, h * 1e-3) : std::pow(0.01 / der12, 0.2);
        h = std::min(100.0 * h, h1);
        if (opts_.max_step > 0.0) h = std::min(h, opts_.max_step);
        return h;
    }

    Rhs rhs_;
    Options opts_;
    double t_, t_prev_;
    double h_ = 0.0, h_prev_ = 0.0;
    std::vector<cplx> y_;
    std::vector<cplx> k1_, k2_, k3_, k4_, k5_, k6_, k7_, ytmp_, ynew_;
    std::vector<cplx> r1_, r2_, r3_, r4_, r5_;
    Stats stats_;
};

// Integrates from times.front() (where y = y0) through every entry of the
// strictly increasing grid `times`, reporting samples through
// on_sample(index, t, y). on_step(t, y) is invoked after each accepted step
// and may throw to abort the integration.
template <class Rhs, class OnSample, class OnStep>
Stats integrate_dense(Rhs rhs, std::vector<cplx> y0, std::span<const double> times, const Options& opts,
                      OnSample&& on_sample, OnStep&& on_step) {
    if (times.empty()) return {};
    for (std::size_t i = 1; i < times.size(); ++i)
        if (!(times[i] > times[i - 1])) throw InvalidParameter("output times must be strictly increasing");

    on_sample(std::size_t{0}, times.front(), std::span<const cplx>(y0));
    if (times.size() == 1) return {};

    DormandPrince45<Rhs> solver(std::move(rhs), y0, times.front(), opts);
    std::vector<cplx> buf(y0.size());
    std::size_t next = 1;
    const double t_end = times.back();
    while (next < times.size()) {
        solver.step(opts.land_on_samples ? times[next] : t_end);
        on_step(solver.t(), solver.y());
        while (next < times.size() && times[next] <= solver.t()) {
            if (times[next] == solver.t()) {
                on_sample(next, times[next], solver.y());
            } else {
                solver.dense(times[next], buf);
                on_sample(next, times[next], std::span<const cplx>(buf));
            }
            ++next;
        }
    }
    return solver.stats();
}

template <class Rhs, class OnSample>
Stats integrate_dense(Rhs rhs, std::vector<cplx> y0, std::span<const double> times, const Options& opts,
                      OnSample&& on_sample) {
    return integrate_dense(std::move(rhs), std::move(y0), times, opts, std::forward<OnSample>(on_sample),
                           [](double, std::span<const cplx>) {});
}

// Uniform grid 0, dt, 2dt, ..., ending exactly at t_end.
inline std::vector<double> uniform_grid(double t_end, double dt) {
    if (!(t_end > 0.0)) throw InvalidParameter("t_end must be positive");
    if (!(dt > 0.0)) throw InvalidParameter("sample step must be positive");
    const auto steps = static_cast<std::size_t>(std::ceil(t_end / dt - 1e-9));
    std::vector<double> grid;
    grid.reserve(steps + 1);
    for (std::size_t i = 0; i < steps; ++i) grid.push_back(static_cast<double>(i) * dt);
    grid.push_back(t_end);
    return grid;
}

}  // namespace kerrpo::ode
