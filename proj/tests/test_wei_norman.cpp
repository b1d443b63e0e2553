#include <array>
#include <cmath>
#include <vector>

#include <gtest/gtest.h>

#include "kerrpo/oracle.hpp"
#include "kerrpo/wei_norman.hpp"
#include "support/propagators.hpp"

using namespace kerrpo;

namespace {

ModelParams params(double kappa, double chi, cplx z = 2.0) {
    ModelParams p;
    p.omega0 = 1.0;
    p.kappa = kappa;
    p.chi = chi;
    p.z = z;
    p.alpha0 = cplx(std::abs(z), 0.0);
    return p;
}

double dist(const WNState& a, const WNState& b) {
    double d = 0.0;
    const auto x = a.as_array(), y = b.as_array();
    for (int i = 0; i < 4; ++i) d = std::max(d, std::abs(x[i] - y[i]));
    return d;
}

}  // namespace

TEST(WnRhs, ZeroStateGivesMinusIF) {
    const ModelParams p = params(0.25, 0.25);
    const CoeffVector f = interaction_coeffs(0.0, p);
    const WNState d = wn_rhs(0.0, WNState{}, p);
    EXPECT_EQ(d.a1, -kI * f.f1);
    EXPECT_EQ(d.a2, -kI * f.f2);
    EXPECT_EQ(d.a3, -kI * f.f3);
    EXPECT_EQ(d.a4, -kI * f.f4);
}

TEST(WnRhs, VanishesWithoutPump) {
    const WNState s{{0.1, 0.2}, {-0.3, 0.1}, {0.05, -0.1}, {0.2, 0.2}};
    const WNState d = wn_rhs(3.7, s, params(0.0, 0.25));
    EXPECT_EQ(dist(d, WNState{}), 0.0);
}

TEST(WnRhs, MatchesFiniteDifferenceOfTrajectory) {
    const ModelParams p = params(0.25, 0.25);
    const double h = 1e-5;
    WNOptions o;
    o.tol = 1e-13;
    for (double t : {1.0, 4.2, 9.9}) {
        const std::array<double, 4> grid{0.0, t - h, t, t + h};
        const WNTrajectory traj = integrate_wn_at(p, grid, o);
        const auto lo = traj.states[1].as_array(), mid = traj.states[2].as_array(), hi = traj.states[3].as_array();
        const auto rhs = wn_rhs(t, traj.states[2], p).as_array();
        for (int k = 0; k < 4; ++k) {
            const cplx fd = (hi[k] - lo[k]) / (2 * h);
            EXPECT_NEAR(std::abs(fd - rhs[k]), 0.0, 1e-6) << "component " << k << " at t = " << t;
        }
        (void)mid;
    }
}

TEST(IntegrateWn, StartsAtZeroState) {
    const WNTrajectory traj = integrate_wn(params(0.25, 0.25), 5.0, 0.5, 1e-10);
    ASSERT_EQ(traj.times.front(), 0.0);
    EXPECT_EQ(dist(traj.states.front(), WNState{}), 0.0);
    EXPECT_EQ(traj.times.back(), 5.0);
}

TEST(IntegrateWn, IdenticallyZeroWithoutPump) {
    const WNTrajectory traj = integrate_wn(params(0.0, 0.25), 50.0, 0.25, 1e-10);
    for (const auto& s : traj.states) ASSERT_EQ(dist(s, WNState{}), 0.0);
}

TEST(IntegrateWn, UnitarityRelationsHoldAlongTrajectories) {
    for (const ModelParams& p : {params(0.05, 0.0), params(0.25, 0.25), params(0.1, 0.05, {1.0, -0.5}),
                                 params(0.05, 0.0, {3.0, 3.0})}) {
        const WNTrajectory traj = integrate_wn(p, 8 * kPi, 0.05, 1e-10);
        for (std::size_t i = 0; i < traj.size(); ++i) {
            const UnitarityResidual r = traj.residuals[i];
            ASSERT_LT(r.norm, 1e-8);
            ASSERT_LT(r.modulus, 1e-8);
            ASSERT_LT(r.scale, 1e-8);
            ASSERT_LT(std::abs(traj.states[i].a1), 0.5);
        }
    }
}

TEST(IntegrateWn, RiccatiComponentSolvesTheScalarEquation) {
    // Substitute a1 from the full system back into the scalar Riccati
    // equation in integral form, Simpson's rule over each pair of samples.
    const ModelParams p = params(0.25, 0.25);
    const double tol = 1e-10;
    const std::vector<double> grid = ode::uniform_grid(8 * kPi, 8 * kPi / 20000);
    WNOptions o;
    o.tol = tol;
    const WNTrajectory traj = integrate_wn_at(p, grid, o);
    auto riccati = [&](std::size_t i) {
        const CoeffVector f = interaction_coeffs(grid[i], p);
        const cplx a = traj.states[i].a1;
        return -kI * (f.f1 + 2.0 * a * f.f2 + 4.0 * a * a * f.f3);
    };
    double worst = 0.0;
    for (std::size_t i = 0; i + 2 < grid.size(); i += 2) {
        const double h = grid[i + 1] - grid[i];
        const cplx integral = h / 3.0 * (riccati(i) + 4.0 * riccati(i + 1) + riccati(i + 2));
        worst = std::max(worst, std::abs(traj.states[i + 2].a1 - traj.states[i].a1 - integral));
    }
    EXPECT_LT(worst, 10 * tol);
}

TEST(IntegrateWn, TighterToleranceConverges) {
    const ModelParams p = params(0.25, 0.25);
    auto final_state = [&](double tol) { return integrate_wn(p, 8 * kPi, 8 * kPi, tol).final_state(); };
    const double coarse = dist(final_state(1e-7), final_state(5e-8));
    const double fine = dist(final_state(1e-10), final_state(5e-11));
    EXPECT_LT(coarse, 1e-5);
    EXPECT_LT(fine, coarse);
    EXPECT_LT(fine, 1e-8);
}

TEST(IntegrateWn, ResonantSqueezingOverflows) {
    // kappa = 0.05 at chi = 0 squeezes at rate ~kappa; |a1| = tanh(r)/2 reaches 0.499 near t ~ 70
    EXPECT_THROW(integrate_wn(params(0.05, 0.0), 120.0, 1.0, 1e-10), SqueezeOverflow);
}

TEST(IntegrateWn, UnitarityBreachIsReported) {
    WNOptions o;
    o.tol = 1e-6;
    o.breach_factor = 1e-6;  // any residual above 1e-12 is a breach
    const auto grid = ode::uniform_grid(10.0, 1.0);
    EXPECT_THROW(integrate_wn_at(params(0.25, 0.25), grid, o), UnitarityBreach);
}

TEST(IntegrateWn, RejectsBadArguments) {
    EXPECT_THROW(integrate_wn(params(0.1, 0.1), -1.0, 0.1, 1e-10), InvalidParameter);
    EXPECT_THROW(integrate_wn(params(0.1, 0.1), 1.0, 0.0, 1e-10), InvalidParameter);
    EXPECT_THROW(integrate_wn(params(0.1, 0.1), 1.0, 0.1, 0.0), InvalidParameter);
    const std::array<double, 2> late{1.0, 2.0};
    EXPECT_THROW(integrate_wn_at(params(0.1, 0.1), late), InvalidParameter);
}

TEST(WnUnitaryMatrix, ZeroStateIsIdentity) {
    const Eigen::MatrixXcd u = wn_unitary_matrix(WNState{}, 10);
    EXPECT_LT((u - Eigen::MatrixXcd::Identity(10, 10)).norm(), 1e-15);
    EXPECT_THROW(wn_unitary_matrix(WNState{}, 1), InvalidParameter);
}

TEST(WnUnitaryMatrix, InteriorBlockIsUnitary) {
    const WNState s = wn_state_at(params(0.05, 0.0, {3.0, 3.0}), 2 * kPi);
    ASSERT_GT(std::abs(s.a1), 0.1);
    const Eigen::MatrixXcd u = wn_unitary_matrix(s, 60);
    const Eigen::MatrixXcd block = (u.adjoint() * u).topLeftCorner(20, 20);
    EXPECT_LT((block - Eigen::MatrixXcd::Identity(20, 20)).cwiseAbs().maxCoeff(), 1e-8);
}

TEST(WnUnitaryMatrix, FirstOrderInA1) {
    const double eps = 1e-6;
    WNState s;
    s.a1 = eps;
    const int n = 40;
    const Eigen::MatrixXcd u = wn_unitary_matrix(s, n);
    const Eigen::MatrixXcd raise2 = build_operators(n).raise2();
    const Eigen::MatrixXcd expected = Eigen::MatrixXcd::Identity(n, n) + eps * raise2;
    // second-order term is eps^2/2 (A+^2)^2 with entries ~ n^2 inside the 20x20 block
    EXPECT_LT((u - expected).topLeftCorner(20, 20).norm(), 1e-9);
    EXPECT_GT((u - Eigen::MatrixXcd::Identity(n, n)).topLeftCorner(20, 20).norm(), 1e-6);
}

TEST(WnUnitaryMatrix, MatchesDirectPropagationOfAveragedHamiltonian) {
    const ModelParams p = params(0.05, 0.0);
    const double t = 2 * kPi;
    const WNState s = wn_state_at(p, t);
    const Eigen::MatrixXcd product = wn_unitary_matrix(s, 80).topLeftCorner(20, 20);
    const Eigen::MatrixXcd direct = reference::propagate_approx_columns(p, t, 80, 20).topLeftCorner(20, 20);
    EXPECT_LT((product - direct).norm(), 1e-6);
}

TEST(WnUnitaryMatrix, MatchesDirectPropagationWithKerrAverage) {
    const ModelParams p = params(0.25, 0.25);
    const double t = 3.0;
    const WNState s = wn_state_at(p, t);
    const Eigen::MatrixXcd product = wn_unitary_matrix(s, 80).topLeftCorner(20, 20);
    const Eigen::MatrixXcd direct = reference::propagate_approx_columns(p, t, 80, 20).topLeftCorner(20, 20);
    EXPECT_LT((product - direct).norm(), 1e-6);
}
