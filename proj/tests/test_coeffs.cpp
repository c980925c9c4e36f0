#include <cmath>

#include <gtest/gtest.h>

#include "tentlab/coeffs.hpp"
#include "tentlab/config.hpp"

using namespace tentlab;

namespace {

// sum_{alpha beta} a_{alpha beta} xi^{alpha+beta} for a scalar (N=1) constant field.
double symbol_at(const CoefficientField& A, const std::vector<double>& xi) {
    const auto a = A.at(0.0);
    const auto alphas = multi_indices(A.grid.dim(), A.m);
    const auto d = alphas.size();
    cplx s{};
    for (std::size_t i = 0; i < d; ++i)
        for (std::size_t j = 0; j < d; ++j) {
            double mono = 1.0;
            for (int k = 0; k < A.grid.dim(); ++k)
                mono *= std::pow(xi[static_cast<std::size_t>(k)], alphas[i][k] + alphas[j][k]);
            s += a[i * d + j] * mono;
        }
    return s.real();
}

} // namespace

TEST(Polyharmonic, HeatIsScalarOne) {
    const auto A = make_polyharmonic(make_grid(1, 64, 8.0), 1);
    ASSERT_EQ(A.d(), 1);
    EXPECT_EQ(A.at(0.0)[0], cplx(1.0));
    EXPECT_NEAR(symbol_at(A, {1.7}), 1.7 * 1.7, 1e-14);
}

TEST(Polyharmonic, TwoDimHeatIsIdentity) {
    const auto A = make_polyharmonic(make_grid(2, 16, 8.0), 1);
    ASSERT_EQ(A.d(), 2);
    const auto a = A.at(0.0);
    EXPECT_EQ(a[0], cplx(1.0));
    EXPECT_EQ(a[1], cplx(0.0));
    EXPECT_EQ(a[2], cplx(0.0));
    EXPECT_EQ(a[3], cplx(1.0));
}

TEST(Polyharmonic, SymbolIsXiToTheTwoM) {
    for (int n = 1; n <= 2; ++n)
        for (int m = 1; m <= 3; ++m) {
            const auto A = make_polyharmonic(make_grid(n, 16, 8.0), m);
            const std::vector<double> xi = n == 1 ? std::vector<double>{0.7} : std::vector<double>{0.7, -1.3};
            double r2 = 0.0;
            for (double v : xi) r2 += v * v;
            EXPECT_NEAR(symbol_at(A, xi), std::pow(r2, m), 1e-12 * std::pow(r2, m)) << "n=" << n << " m=" << m;
        }
}

TEST(Polyharmonic, FourierGardingIsOne) {
    for (int m = 1; m <= 3; ++m) {
        const auto A = make_polyharmonic(make_grid(2, 16, 8.0), m);
        const auto rep = ellipticity_report(A, EllipticityMethod::fourier_symbol);
        EXPECT_NEAR(rep.lambda_est, 1.0, 1e-12);
    }
}

TEST(Polyharmonic, GardingInvariantUnderRefinement) {
    const auto a = ellipticity_report(make_polyharmonic(make_grid(2, 16, 8.0), 2), EllipticityMethod::fourier_symbol);
    const auto b = ellipticity_report(make_polyharmonic(make_grid(2, 32, 8.0), 2), EllipticityMethod::fourier_symbol);
    EXPECT_NEAR(a.lambda_est, b.lambda_est, 1e-10);
}

TEST(Constant, DiagonalTwo) {
    const auto A = make_constant(2.0 * MatrixXc::Identity(1, 1), make_grid(1, 32, 4.0), 1, 1);
    const auto rep = ellipticity_report(A);
    EXPECT_DOUBLE_EQ(rep.lambda_est, 2.0);
    EXPECT_DOUBLE_EQ(rep.Lambda_est, 2.0);
}

TEST(Constant, RejectsWrongShape) {
    EXPECT_THROW(make_constant(MatrixXc::Identity(2, 2), make_grid(1, 32, 4.0), 1, 1), ValidationError);
}

TEST(Rough, KappaOneIsIdentity) {
    const auto A = make_rough(3, 1.0, make_grid(1, 64, 8.0), 1, 2);
    EXPECT_TRUE(A.flags.constant_in_space);
    const auto a = A.at(0.0);
    for (int r = 0; r < A.d(); ++r)
        for (int c = 0; c < A.d(); ++c) EXPECT_EQ(a[static_cast<std::size_t>(r * A.d() + c)], cplx(r == c ? 1.0 : 0.0));
}

TEST(Rough, KappaTenBounds) {
    const auto A = make_rough(11, 10.0, make_grid(1, 128, 16.0), 1, 1);
    const auto rep = ellipticity_report(A);
    EXPECT_GE(rep.lambda_est, 0.9);
    EXPECT_LE(rep.lambda_est, 1.1);
    EXPECT_GE(rep.Lambda_est, 9.0);
    EXPECT_LE(rep.Lambda_est, 11.0);
}

TEST(Rough, KappaFourWithinTenPercent) {
    const auto A = make_rough(5, 4.0, make_grid(2, 32, 8.0), 1, 1);
    const auto rep = ellipticity_report(A);
    EXPECT_NEAR(rep.lambda_est, 1.0, 0.1);
    EXPECT_NEAR(rep.Lambda_est, 4.0, 0.4);
}

TEST(Rough, SameSeedBitIdentical) {
    const auto g = make_grid(1, 64, 8.0);
    const auto a = make_rough(9, 10.0, g, 2, 1);
    const auto b = make_rough(9, 10.0, g, 2, 1);
    EXPECT_EQ(a.slices, b.slices);
    const auto c = make_rough(10, 10.0, g, 2, 1);
    EXPECT_NE(a.slices, c.slices);
}

TEST(Rough, RejectsKappaBelowOne) {
    EXPECT_THROW(make_rough(1, 0.5, make_grid(1, 32, 4.0), 1, 1), ValidationError);
}

TEST(Rough, PiecewiseConstantInTime) {
    const TimeStructure ts{TimeStructure::Kind::piecewise_constant, 4, 0.0, 2.0};
    const auto A = make_rough(2, 5.0, make_grid(1, 64, 8.0), 1, 1, ts);
    EXPECT_FALSE(A.flags.autonomous);
    EXPECT_EQ(A.time_grid(), (std::vector<double>{0.5, 1.0, 1.5}));
    EXPECT_EQ(A.at(0.1), A.at(0.4));
    EXPECT_NE(A.at(0.4), A.at(0.6));
}

TEST(Rough, BvZeroIsAutonomous) {
    const TimeStructure ts{TimeStructure::Kind::bv, 5, 0.0, 1.0};
    const auto A = make_rough(2, 5.0, make_grid(1, 64, 8.0), 1, 1, ts);
    EXPECT_TRUE(A.flags.autonomous);
}

TEST(Rough, BvVariationBounded) {
    for (double V : {0.5, 2.0, 100.0}) {
        const TimeStructure ts{TimeStructure::Kind::bv, 6, V, 1.0};
        const auto A = make_rough(4, 10.0, make_grid(1, 64, 8.0), 1, 1, ts);
        EXPECT_LE(total_variation(A), V * (1.0 + 1e-12));
        EXPECT_TRUE(A.flags.pointwise_elliptic);
    }
}

TEST(Perturbation, ZeroReturnsBase) {
    const auto base = make_polyharmonic(make_grid(1, 64, 8.0), 1);
    const auto A = make_perturbation(base, 0.0, 3);
    EXPECT_EQ(A.slices, base.slices);
    EXPECT_TRUE(A.flags.autonomous);
}

TEST(Perturbation, SizeAndEllipticity) {
    const auto base = make_polyharmonic(make_grid(1, 64, 8.0), 1);
    const auto A = make_perturbation(base, 0.1, 3);
    EXPECT_LE(perturbation_size(A, base), 0.1 * (1.0 + 1e-12));
    EXPECT_GE(A.lambda, 0.9);
    EXPECT_GE(A.lambda, base.lambda - 0.1 - 1e-12);
}

TEST(Perturbation, RoughBaseKeepsGardingBound) {
    const auto base = make_rough(7, 4.0, make_grid(1, 64, 8.0), 1, 1);
    const auto A = make_perturbation(base, 0.3, 8);
    const auto rb = ellipticity_report(base);
    const auto ra = ellipticity_report(A);
    EXPECT_GE(ra.lambda_est, rb.lambda_est - 0.3 - 1e-12);
}

TEST(Perturbation, TooLargeLosesEllipticity) {
    const auto base = make_polyharmonic(make_grid(1, 64, 8.0), 1);
    try {
        make_perturbation(base, 1.5, 3);
        FAIL() << "expected an error";
    } catch (const ValidationError& e) {
        EXPECT_NE(std::string(e.what()).find("ellipticity lost"), std::string::npos);
    }
}

TEST(Presets, ParseCallAndColonForms) {
    const auto a = parse_preset("rough(10,7)");
    EXPECT_EQ(a.kind, CoefficientPreset::Kind::rough);
    EXPECT_DOUBLE_EQ(a.kappa, 10.0);
    EXPECT_EQ(a.seed, 7u);
    const auto b = parse_preset("rough:10:7");
    EXPECT_EQ(b.kind, CoefficientPreset::Kind::rough);
    EXPECT_DOUBLE_EQ(b.kappa, 10.0);
    EXPECT_EQ(b.seed, 7u);
    const auto c = parse_preset("bv(10,2,4,21)");
    EXPECT_EQ(c.kind, CoefficientPreset::Kind::bv);
    EXPECT_DOUBLE_EQ(c.variation, 2.0);
    EXPECT_EQ(c.pieces, 4);
    EXPECT_EQ(parse_preset("polyharmonic").kind, CoefficientPreset::Kind::polyharmonic);
    EXPECT_THROW(parse_preset("smooth(3)"), ValidationError);
    EXPECT_THROW(parse_preset("rough(0.5,1)"), ValidationError);
}
