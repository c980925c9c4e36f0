#include <cmath>
#include <numbers>

#include <gtest/gtest.h>

#include "tentlab/derivative.hpp"
#include "tentlab/grid.hpp"
#include "tentlab/inequalities.hpp"
#include "tentlab/rng.hpp"
#include "test_support.hpp"

using namespace tentlab;
using std::numbers::pi;

TEST(MakeGrid, SpacingAndCounts) {
    const auto g1 = make_grid(1, 256, 32.0);
    EXPECT_DOUBLE_EQ(g1.spacing(), 0.125);
    EXPECT_EQ(g1.size(), 256u);
    const auto g2 = make_grid(2, 64, 16.0);
    EXPECT_EQ(g2.size(), 4096u);
    EXPECT_DOUBLE_EQ(g2.spacing() * g2.points_per_axis(), g2.box_length());
}

TEST(MakeGrid, RejectsBadInput) {
    EXPECT_THROW(make_grid(1, 100, 1.0), ValidationError);
    EXPECT_THROW(make_grid(3, 64, 1.0), ValidationError);
    EXPECT_THROW(make_grid(1, 4, 1.0), ValidationError);
    EXPECT_THROW(make_grid(1, 64, 0.0), ValidationError);
}

TEST(MultiIndex, CountsAndOrder) {
    for (int n = 1; n <= 2; ++n)
        for (int m = 0; m <= 5; ++m) {
            const auto a = multi_indices(n, m);
            EXPECT_EQ(a.size(), binomial(n + m - 1, m));
            for (const auto& x : a) EXPECT_EQ(x.order(), m);
        }
    const auto a = multi_indices(2, 2);
    ASSERT_EQ(a.size(), 3u);
    EXPECT_EQ(a[0].entries, (std::vector<int>{2, 0}));
    EXPECT_EQ(a[1].entries, (std::vector<int>{1, 1}));
    EXPECT_EQ(a[2].entries, (std::vector<int>{0, 2}));
}

TEST(Derivative, SpectralSineExact) {
    const auto g = make_grid(1, 128, 10.0);
    const double L = g.box_length();
    const auto f = Field::from_function(g, 1, [&](int, auto x) { return cplx{std::sin(2 * pi * x[0] / L)}; });
    const auto d = derivative(f, MultiIndex{{1}});
    double err = 0.0;
    for (std::size_t i = 0; i < g.size(); ++i)
        err = std::max(err, std::abs(d(0, i) - (2 * pi / L) * std::cos(2 * pi * g.coordinate(i, 0) / L)));
    EXPECT_LT(err, 1e-13);
}

TEST(Derivative, PlaneWavesUpToQuarterNyquist) {
    const auto g = make_grid(2, 32, 6.0);
    const double L = g.box_length();
    for (int k0 = -8; k0 <= 8; k0 += 4)
        for (int k1 = -8; k1 <= 8; k1 += 8) {
            const auto f = Field::from_function(g, 1, [&](int, auto x) {
                return std::exp(cplx{0.0, 2 * pi * (k0 * x[0] + k1 * x[1]) / L});
            });
            for (const auto& alpha : multi_indices_upto(2, 3)) {
                const cplx mult = std::pow(cplx{0.0, 2 * pi * k0 / L}, alpha[0]) *
                                  std::pow(cplx{0.0, 2 * pi * k1 / L}, alpha[1]);
                const auto d = derivative(f, alpha);
                const double scale = std::max(1.0, std::abs(mult));
                for (std::size_t i = 0; i < g.size(); ++i)
                    ASSERT_LT(std::abs(d(0, i) - mult * f(0, i)) / scale, 1e-12);
            }
        }
}

TEST(Derivative, ConstantsAnnihilated) {
    const auto g = make_grid(2, 16, 3.0);
    const auto f = Field::constant(g, 2, cplx{1.5, -2.0});
    for (const auto& a : multi_indices_upto(2, 4)) {
        if (a.order() == 0) continue;
        const auto fd = derivative(f, a, Scheme::fd4);
        const auto sp = derivative(f, a);
        for (auto v : fd.values()) ASSERT_EQ(v, cplx{});
        for (auto v : sp.values()) ASSERT_EQ(v, cplx{});
    }
}

TEST(Derivative, FdStencilAgreesWithMultiplier) {
    const auto g = make_grid(1, 64, 4.0);
    tentlab::CounterRng rng(3);
    Field f(g, 1);
    for (auto& v : f.values()) v = rng.normal();
    const auto d2 = derivative(f, MultiIndex{{2}}, Scheme::fd2);
    const auto d1 = derivative(f, MultiIndex{{1}}, Scheme::fd4);
    const double h = g.spacing();
    for (int i = 0; i < 64; ++i) {
        const auto at = [&](int j) { return f(0, g.flat_index(j)); };
        EXPECT_NEAR(std::abs(d2(0, g.flat_index(i)) - (at(i + 1) - 2.0 * at(i) + at(i - 1)) / (h * h)), 0.0, 1e-10);
        const cplx st = (-at(i + 2) + 8.0 * at(i + 1) - 8.0 * at(i - 1) + at(i - 2)) / (12.0 * h);
        EXPECT_NEAR(std::abs(d1(0, g.flat_index(i)) - st), 0.0, 1e-11);
    }
}

// Richardson study: max |fd2 - spectral| on a Gaussian bump, h halved twice.
TEST(Derivative, Fd2ConvergenceOrder) {
    std::vector<double> errs;
    for (int P : {64, 128, 256}) {
        const auto g = make_grid(1, P, 16.0);
        const auto f = Field::from_function(g, 1, [](int, auto x) { return cplx{std::exp(-x[0] * x[0])}; });
        const auto a = derivative(f, MultiIndex{{1}}, Scheme::fd2);
        const auto b = derivative(f, MultiIndex{{1}}, Scheme::spectral);
        errs.push_back(lp_norm(a - b, kInfinity));
    }
    const double order1 = std::log2(errs[0] / errs[1]);
    const double order2 = std::log2(errs[1] / errs[2]);
    EXPECT_NEAR(order1, 2.0, 0.2);
    EXPECT_NEAR(order2, 2.0, 0.2);
}

TEST(GradM, LengthsAndContent) {
    const auto g1 = make_grid(1, 32, 2.0);
    const auto f1 = Field::from_function(g1, 1, [](int, auto x) { return cplx{std::sin(pi * x[0])}; });
    const auto gr = grad_m(f1, 2);
    ASSERT_EQ(gr.size(), 1u);
    EXPECT_EQ(gr[0], derivative(f1, MultiIndex{{2}}));
    const auto g2 = make_grid(2, 16, 2.0);
    const auto f2 = Field::from_function(g2, 1, [](int, auto x) { return cplx{std::sin(pi * x[0]) * std::cos(pi * x[1])}; });
    EXPECT_EQ(grad_m(f2, 1).size(), 2u);
    EXPECT_EQ(grad_m(f2, 2).size(), 3u);
}

TEST(GradM, AdjointIdentity) {
    const auto g = make_grid(2, 16, 5.0);
    tentlab::CounterRng rng(11);
    Field f(g, 2);
    for (auto& v : f.values()) v = cplx{rng.normal(), rng.normal()};
    for (Scheme s : {Scheme::spectral, Scheme::fd2, Scheme::fd4}) {
        const auto gr = grad_m(f, 2, s);
        std::vector<Field> h;
        for (std::size_t a = 0; a < gr.size(); ++a) {
            Field x(g, 2);
            for (auto& v : x.values()) v = cplx{rng.normal(), rng.normal()};
            h.push_back(x);
        }
        cplx lhs{};
        for (std::size_t a = 0; a < gr.size(); ++a) lhs += inner(gr[a], h[a]);
        const cplx rhs = inner(f, grad_m_adjoint(h, 2, s));
        EXPECT_LT(std::abs(lhs - rhs), 1e-10 * std::abs(lhs));
    }
}

TEST(BallMeanSq, Examples) {
    const auto g = make_grid(1, 256, 16.0);
    const auto three = Field::constant(g, 1, 3.0);
    EXPECT_NEAR(ball_mean_sq(three, Ball{{0.3}, 1.0}), 3.0, 1e-14);
    EXPECT_EQ(ball_mean_sq(Field(g, 1), Ball{{0.0}, 1.0}), 0.0);
    const auto x = Field::from_function(g, 1, [](int, auto p) { return cplx{p[0]}; });
    EXPECT_NEAR(ball_mean_sq(x, Ball{{0.0}, 1.0}), std::sqrt(1.0 / 3.0), 2 * g.spacing());
    EXPECT_THROW(ball_mean_sq(x, Ball{{0.0}, 0.5 * g.spacing()}), NumericalError);
    EXPECT_THROW(ball_mean_sq(x, Ball{{0.0}, 5.0}), ValidationError);
}

TEST(LpNorm, Examples) {
    const auto g = make_grid(1, 1024, 32.0);
    EXPECT_EQ(lp_norm(Field(g, 1), 2), 0.0);
    Field ind(g, 1);
    for (int i = 0; i < 7; ++i) ind(0, static_cast<std::size_t>(100 + i)) = 1.0;
    EXPECT_NEAR(lp_norm(ind, 1), 7 * g.spacing(), 1e-15);
    const auto gauss = Field::from_function(g, 1, [](int, auto x) { return cplx{std::exp(-x[0] * x[0])}; });
    EXPECT_NEAR(lp_norm(gauss, 2), std::pow(pi / 2, 0.25), 1e-6);
    EXPECT_NEAR(lp_norm(gauss, kInfinity), 1.0, 1e-15);
    EXPECT_NEAR(lp_norm(cplx{-2.5, 0.0} * gauss, 3), 2.5 * lp_norm(gauss, 3), 1e-14);
}

TEST(LpNorm, Parseval) {
    for (int n : {1, 2}) {
        const auto g = make_grid(n, 32, 7.0);
        tentlab::CounterRng rng(5 + static_cast<std::uint64_t>(n));
        Field f(g, 1);
        for (auto& v : f.values()) v = cplx{rng.normal(), rng.normal()};
        const auto spec = to_spectrum(f);
        Accumulator acc;
        for (auto v : spec) acc.add(std::norm(v));
        const double freq = acc.value() / static_cast<double>(g.size()) * g.cell_volume();
        const double l2 = lp_norm(f, 2);
        EXPECT_NEAR(l2 * l2, freq, 1e-12 * freq);
    }
}

TEST(Poincare, PolynomialCases) {
    const auto g = make_grid(1, 512, 16.0);
    const Ball B{{0.0}, 1.0};
    const auto lin = Field::from_function(g, 1, [](int, auto x) { return cplx{2.0 - 3.0 * x[0]}; });
    const auto r0 = poincare_check(lin, 2, B, Scheme::fd4);
    EXPECT_LT(r0.lhs, 1e-9);
    EXPECT_EQ(r0.ratio, 0.0);
    EXPECT_FALSE(r0.degenerate);
    const auto sq = Field::from_function(g, 1, [](int, auto x) { return cplx{x[0] * x[0]}; });
    const auto r1 = poincare_check(sq, 2, B, Scheme::fd4);
    EXPECT_NEAR(r1.lhs_terms[2], r1.rhs, 1e-9 * r1.rhs);
    EXPECT_GE(r1.ratio, 1.0);
    EXPECT_TRUE(std::isfinite(r1.ratio));
}

TEST(Poincare, InvariantUnderLowDegreeShift) {
    const auto g = make_grid(1, 512, 16.0);
    const Ball B{{0.5}, 2.0};
    const auto f = test_support::band_limited(g, 17, 8);
    const auto q = Field::from_function(g, 1, [](int, auto x) { return cplx{0.7 + 1.3 * x[0]}; });
    const auto a = poincare_check(f, 2, B, Scheme::fd4);
    const auto b = poincare_check(f + q, 2, B, Scheme::fd4);
    EXPECT_NEAR(a.ratio, b.ratio, 1e-9 * a.ratio);
}

// Max ratio over random band-limited data, m = 1, at two resolutions.
TEST(Poincare, RandomRatioStableUnderRefinement) {
    std::vector<double> worst;
    for (int P : {256, 512}) {
        const auto g = make_grid(1, P, 16.0);
        double w = 0.0;
        for (int trial = 0; trial < 100; ++trial) {
            const auto f = test_support::band_limited(g, 1000 + static_cast<std::uint64_t>(trial), 12);
            w = std::max(w, poincare_check(f, 1, Ball{{0.0}, 2.0}).ratio);
        }
        worst.push_back(w);
    }
    EXPECT_TRUE(std::isfinite(worst[0]));
    EXPECT_NEAR(worst[1] / worst[0], 1.0, 0.2);
}

TEST(GagliardoNirenberg, Examples) {
    const auto g = make_grid(1, 256, 32.0);
    EXPECT_EQ(gn_check(Field(g, 1), 2, 1, 2, 2).ratio, 0.0);
    const auto f = Field::from_function(g, 1, [](int, auto x) { return cplx{std::exp(-x[0] * x[0])}; });
    EXPECT_EQ(gn_check(f, 2, 0, 2, 3).ratio, 1.0);
    const auto r = gn_check(f, 2, 1, 2, 2);
    EXPECT_GT(r.ratio, 0.0);
    EXPECT_LE(r.ratio, 1.0 + 1e-12); // interpolation inequality with constant 1 for p = r = 2
}

TEST(GagliardoNirenberg, DilationInvariant) {
    std::vector<double> ratios;
    for (double lam : {0.5, 1.0, 2.0}) {
        const auto g = make_grid(1, 1024, 64.0);
        const auto f = Field::from_function(g, 1, [&](int, auto x) {
            const double y = lam * x[0];
            return cplx{std::exp(-y * y) * (1.0 + 0.5 * std::cos(3.0 * y))};
        });
        ratios.push_back(gn_check(f, 2, 1, 2, 2).ratio);
    }
    EXPECT_NEAR(ratios[0] / ratios[1], 1.0, 0.05);
    EXPECT_NEAR(ratios[2] / ratios[1], 1.0, 0.05);
}
