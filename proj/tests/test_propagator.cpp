#include <cmath>

#include <gtest/gtest.h>

#include "tentlab/propagator.hpp"
#include "test_support.hpp"

using namespace tentlab;

namespace {

SolverConfig solver(double dt, double theta = 1.0) {
    SolverConfig c;
    c.dt = dt;
    c.theta = theta;
    return c;
}

double rel_l2(const Field& a, const Field& b) { return lp_norm(a - b, 2) / lp_norm(b, 2); }

} // namespace

TEST(SolverConfig, Validation) {
    SolverConfig c;
    c.dt = -1.0;
    c.theta = 0.3;
    c.tol_lin = 1e-3;
    try {
        c.validate();
        FAIL() << "expected an error";
    } catch (const ValidationError& e) {
        EXPECT_EQ(e.issues().size(), 3u);
    }
}

TEST(Step, ConstantsUnchanged) {
    const auto g = make_grid(1, 64, 8.0);
    const Propagator P(make_rough(3, 10.0, g, 2, 1), solver(0.01));
    const auto one = Field::constant(g, 1, cplx{1.0});
    const auto u = P.step(one, 0L);
    for (std::size_t i = 0; i < g.size(); ++i) EXPECT_NEAR(std::abs(u(0, i) - 1.0), 0.0, 1e-12);
}

TEST(Step, EnergyDecaysForRoughCoefficients) {
    const auto g = make_grid(1, 64, 8.0);
    const auto cfg = solver(0.01);
    const Propagator P(make_rough(13, 10.0, g, 1, 1), cfg);
    auto u = test_support::random_field(g, 2);
    for (long k = 0; k < 1000; ++k) {
        const double before = lp_norm(u, 2);
        u = P.step(u, k);
        ASSERT_LE(lp_norm(u, 2), before * (1.0 + cfg.tol_lin)) << "step " << k;
    }
}

TEST(Step, LinearSolveFailureReported) {
    const auto g = make_grid(1, 64, 8.0);
    SolverConfig cfg = solver(0.5);
    cfg.max_lin_iters = 1;
    cfg.restart = 1;
    const Propagator P(make_rough(3, 10.0, g, 2, 1), cfg);
    try {
        P.step(test_support::random_field(g, 1), 0L);
        FAIL() << "expected an error";
    } catch (const NumericalError& e) {
        EXPECT_NE(std::string(e.what()).find("relative residual"), std::string::npos);
    }
}

TEST(Propagate, ConvergenceOrderAgainstSemigroup) {
    const auto g = make_grid(1, 128, 16.0);
    const auto A = make_polyharmonic(g, 1);
    const Semigroup S(A);
    const auto f = test_support::gaussian(g, 1.0);
    const double T = 0.5;
    const auto exact = S.apply(T, f);
    for (double theta : {1.0, 0.5}) {
        std::vector<double> errs;
        for (double dt : {0.02, 0.01, 0.005}) errs.push_back(rel_l2(Propagator(A, solver(dt, theta)).propagate_final(0.0, T, f), exact));
        const double order = std::log2(errs[1] / errs[2]);
        EXPECT_NEAR(order, theta == 1.0 ? 1.0 : 2.0, 0.2) << "theta=" << theta;
        EXPECT_NEAR(std::log2(errs[0] / errs[1]), order, 0.2);
    }
}

TEST(Propagate, SameTimeIsIdentity) {
    const auto g = make_grid(1, 64, 8.0);
    const Propagator P(make_rough(3, 10.0, g, 1, 1), solver(0.01));
    const auto f = test_support::random_field(g, 4);
    const auto traj = P.propagate(0.3, 0.3, f);
    ASSERT_EQ(traj.size(), 1u);
    EXPECT_TRUE(test_support::same_values(traj.slices[0], f));
    EXPECT_TRUE(test_support::same_values(P.adjoint_propagate(0.3, 0.3, f), f));
}

TEST(Propagate, ChapmanKolmogorov) {
    const auto g = make_grid(1, 64, 8.0);
    const TimeStructure ts{TimeStructure::Kind::piecewise_constant, 4, 0.0, 1.0};
    const Propagator P(make_rough(5, 10.0, g, 1, 1, ts), solver(0.02));
    const auto f = test_support::random_field(g, 6);
    const auto direct = P.propagate_final(0.1, 0.9, f);
    const auto mid = P.propagate_final(0.1, 0.4, f);
    const auto composed = P.propagate_final(0.4, 0.9, mid);
    EXPECT_TRUE(test_support::same_values(direct, composed));
    const auto traj = P.propagate(0.1, 0.9, f);
    EXPECT_TRUE(test_support::same_values(traj.slices.back(), direct));
}

TEST(Propagate, RejectsOffLatticeTime) {
    const auto g = make_grid(1, 64, 8.0);
    const Propagator P(make_polyharmonic(g, 1), solver(0.1));
    EXPECT_THROW(P.propagate(0.0, 0.25, test_support::random_field(g, 1)), ValidationError);
    EXPECT_THROW(P.propagate(0.5, 0.2, test_support::random_field(g, 1)), ValidationError);
}

TEST(Adjoint, SelfAdjointMatchesForward) {
    const auto g = make_grid(1, 64, 8.0);
    const Propagator P(make_constant(MatrixXc::Identity(1, 1) * 1.5, g, 1, 1), solver(0.01));
    const auto f = test_support::random_field(g, 8);
    const auto a = P.propagate_final(0.0, 0.2, f);
    const auto b = P.adjoint_propagate(0.0, 0.2, f);
    EXPECT_LE(rel_l2(b, a), 1e-10);
}

TEST(Adjoint, DualityOnRoughNonAutonomous) {
    const auto g = make_grid(1, 64, 8.0);
    const TimeStructure ts{TimeStructure::Kind::bv, 4, 2.0, 0.5};
    for (double theta : {1.0, 0.5}) {
        const auto cfg = solver(0.02, theta);
        const Propagator P(make_rough(21, 10.0, g, 1, 1, ts), cfg);
        for (int i = 0; i < 5; ++i) {
            const auto f = test_support::random_field(g, 30 + static_cast<std::uint64_t>(i));
            const auto h = test_support::random_field(g, 60 + static_cast<std::uint64_t>(i));
            const cplx lhs = inner(P.propagate_final(0.1, 0.5, f), h);
            const cplx rhs = inner(f, P.adjoint_propagate(0.1, 0.5, h));
            EXPECT_LE(std::abs(lhs - rhs), 10 * cfg.tol_lin * lp_norm(f, 2) * lp_norm(h, 2));
        }
    }
}

TEST(Duhamel, ZeroPerturbationIsSemigroup) {
    const auto g = make_grid(1, 64, 8.0);
    const auto A = make_polyharmonic(g, 1);
    const Semigroup S(A);
    const auto f = test_support::random_field(g, 3);
    const auto res = duhamel_picard(S, A, f, 0.5, 4, 0.01);
    EXPECT_LE(rel_l2(res.u, S.apply(0.5, f)), 1e-12);
}

TEST(Duhamel, SmallPerturbationMatchesStepper) {
    const auto g = make_grid(1, 128, 16.0);
    const auto base = make_polyharmonic(g, 1);
    const auto A = make_perturbation(base, 0.1, 5);
    const auto f = test_support::gaussian(g, 1.0);
    const auto res = duhamel_picard(Semigroup(base), A, f, 0.5, 8, 0.005);
    const auto u = Propagator(A, solver(0.005, 0.5)).propagate_final(0.0, 0.5, f);
    EXPECT_LE(rel_l2(res.u, u), 1e-3);
    for (double c : res.contraction_factors) EXPECT_LT(c, 1.0);
}

TEST(Duhamel, LargePerturbationDiverges) {
    const auto g = make_grid(1, 64, 8.0);
    const auto base = make_polyharmonic(g, 1);
    const auto A = make_rough(4, 10.0, g, 1, 1);
    try {
        duhamel_picard(Semigroup(base), A, test_support::random_field(g, 1), 1.0, 12, 0.05);
        FAIL() << "expected an error";
    } catch (const NumericalError& e) {
        EXPECT_NE(std::string(e.what()).find("Picard divergence"), std::string::npos);
    }
}

TEST(OffDiagonal, SameBoxShortTimeNearOne) {
    const auto g = make_grid(1, 128, 16.0);
    const Semigroup S(make_polyharmonic(g, 1));
    const Box E{{-2.0}, {2.0}};
    const auto rep = off_diagonal_norm(SemigroupEvolution{&S, 1e-4}, g, 1, E, E, 2, 1, 100, 1e-10);
    EXPECT_NEAR(rep.value, 1.0, 1e-2);
    EXPECT_LE(rep.value, 1.0 + 1e-12);
}

TEST(OffDiagonal, MonotoneInDistance) {
    const auto g = make_grid(1, 128, 16.0);
    const Propagator P(make_rough(2, 4.0, g, 1, 1), solver(0.05));
    const PropagatorEvolution ev{&P, 0.0, 0.5};
    double prev = 2.0;
    for (double d : {0.5, 1.5, 2.5, 3.5}) {
        const Box E{{0.5 * d}, {0.5 * d + 1.0}};
        const Box F{{-0.5 * d - 1.0}, {-0.5 * d}};
        const double v = off_diagonal_norm(ev, g, 1, E, F, 2, 9, 60, 1e-8).value;
        EXPECT_LE(v, 1.0);
        EXPECT_LE(v, prev * (1.0 + 1e-6));
        prev = v;
    }
}

TEST(Stats, AccumulatesAcrossSteps) {
    const auto g = make_grid(1, 64, 8.0);
    const Propagator P(make_rough(3, 4.0, g, 1, 1), solver(0.01));
    P.propagate_final(0.0, 0.1, test_support::random_field(g, 1));
    const auto s = P.stats();
    EXPECT_EQ(s.steps, 10);
    EXPECT_GT(s.linear_iterations, 0);
    EXPECT_LE(s.worst_residual, P.config().tol_lin);
}
