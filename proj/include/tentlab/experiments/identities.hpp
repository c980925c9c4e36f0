#pragma once

#include <cmath>

#include "tentlab/experiments/adjoint.hpp"
#include "tentlab/experiments/common.hpp"

namespace tentlab {

// Random trajectory on random increasing times in [0, t_max].
inline SpaceTimeField random_trajectory(const Grid& g, int N, int slices, double t_max, CounterRng& rng) {
    SpaceTimeField F;
    std::vector<double> ts{0.0};
    for (int k = 1; k < slices; ++k) ts.push_back(rng.uniform());
    std::sort(ts.begin() + 1, ts.end());
    for (double t : ts) {
        F.times.push_back(t * t_max);
        F.slices.push_back(random_complex_field(g, N, rng));
    }
    return F;
}

// tent_norm(F, 2, m) against the direct L^2(L^2) norm with the same time weights.
inline ExperimentResult run_fubini_identity(const ExperimentConfig& cfg) {
    auto res = start_result("run_fubini_identity", cfg);
    const Grid g = cfg.grid.make();
    CounterRng rng(cfg.seed, 501);
    double worst = 0.0;
    for (int i = 0; i < cfg.samples; ++i) {
        const int m = 1 + i % 2;
        const int N = 1 + static_cast<int>(rng.next_bits() % 3);
        // Largest radius t_max^{1/2m} stays inside L/4.
        const double t_max = std::pow(0.25 * g.box_length(), 2.0 * m) * rng.uniform(0.05, 1.0);
        const auto F = random_trajectory(g, N, 24, t_max, rng);
        const double tent = tent_norm(F, 2.0, m).value;
        const double direct = space_time_l2(F);
        const double err = std::abs(tent - direct) / direct;
        worst = std::max(worst, err);
        res.curve(sweep_label("trajectory", i), "relative_error", err);
    }
    res.metric("max_relative_error", worst);
    res.require("fubini", "max_relative_error", "le", cfg.tol("fubini_rel"));
    return res;
}

// Carleson functional by direct summation over ball_points, independent of the tent code path.
inline double carleson_direct(const SpaceTimeField& F, int m) {
    const Grid& g = F.grid();
    const DyadicBallFamily fam(g);
    const auto w = F.left_weights();
    double best = 0.0;
    for (double r : fam.radii) {
        const double T = std::pow(r, 2.0 * m);
        for (auto c : fam.centers) {
            std::vector<double> center;
            for (int a = 0; a < g.dim(); ++a) center.push_back(g.coordinate(c, a));
            const auto pts = ball_points(g, Ball{center, r});
            Accumulator acc;
            for (std::size_t k = 0; k < F.size(); ++k) {
                const double wk = std::clamp(std::min(w[k], T - F.times[k]), 0.0, w[k]);
                if (wk == 0.0) continue;
                for (auto i : pts) acc.add(wk * F.slices[k].modulus_sq(i));
            }
            best = std::max(best, acc.value() / static_cast<double>(pts.size()));
        }
    }
    return unit_ball_volume(g.dim()) / (2.0 * m) * best;
}

// Exact identities of the functionals, to rounding.
inline ExperimentResult run_functional_identities(const ExperimentConfig& cfg) {
    auto res = start_result("run_functional_identities", cfg);
    const Grid g = cfg.grid.make();
    CounterRng rng(cfg.seed, 601);
    const Field f = make_data(g, cfg.N, "band", 2.0, cfg.seed);

    // sharp_m invariance under adding polynomials of degree < m.
    double shift_err = 0.0;
    for (int m = 1; m <= 2; ++m) {
        const double a = rng.normal(), b = rng.normal(), c = rng.normal();
        const Field pf = Field::from_function(g, cfg.N, [&](int, auto x) {
            double v = a;
            if (m >= 2) v += b * x[0] + (g.dim() == 2 ? c * x[1] : 0.0);
            return cplx{v, 0.5 * v};
        });
        const Field s0 = sharp_m(f, m);
        const Field s1 = sharp_m(f + pf, m);
        double mx = 0.0, d = 0.0;
        for (std::size_t i = 0; i < g.size(); ++i) {
            mx = std::max(mx, std::abs(s0(0, i)));
            d = std::max(d, std::abs(s0(0, i) - s1(0, i)));
        }
        shift_err = std::max(shift_err, d / mx);
    }
    res.metric("sharp_shift_rel_error", shift_err);
    res.require("sharp_shift_invariance", "sharp_shift_rel_error", "le", cfg.tol("rounding"));

    // Homogeneity under f -> c f.
    const cplx cst{2.5, -1.5};
    const double ac = std::abs(cst);
    const Semigroup S(make_polyharmonic(g, 1, cfg.N));
    SpaceTimeField u;
    for (int k = 0; k <= 40; ++k) {
        const double t = 0.035 * k * k;
        u.times.push_back(t);
        u.slices.push_back(S.apply(t, f));
    }
    SpaceTimeField cu = u;
    for (auto& s : cu.slices) s *= cst;
    const auto F = gradient_trajectory(u, 1);
    const auto cF = gradient_trajectory(cu, 1);
    double hom = 0.0;
    const auto rel = [&](double scaled, double base, double factor) {
        hom = std::max(hom, std::abs(scaled - factor * base) / (factor * base));
    };
    for (double p : {1.0, 2.0, 4.0, kInfinity}) {
        rel(tent_norm(cF, p, 1).value, tent_norm(F, p, 1).value, ac);
        rel(lp_norm(cst * f, p), lp_norm(f, p), ac);
        rel(lp_m_norm(cst * f, 2, std::isinf(p) ? 2.0 : p).value, lp_m_norm(f, 2, std::isinf(p) ? 2.0 : p).value, ac);
    }
    for (double p : {1.0, 2.0, 4.0}) rel(nontangential_norm(cu, p, 1).value, nontangential_norm(u, p, 1).value, ac);
    rel(carleson_norm(cu, 1).value, carleson_norm(u, 1).value, ac * ac);
    rel(bmo_norm(cst * f).value, bmo_norm(f).value, ac);
    rel(bmo_m_norm(cst * f, 2).value, bmo_m_norm(f, 2).value, ac);
    res.metric("homogeneity_rel_error", hom);
    res.require("homogeneity", "homogeneity_rel_error", "le", cfg.tol("rounding"));

    // Carleson functional against (omega_n / 2m) tent_inf^2 evaluated directly.
    const double c_lib = carleson_norm(u, 1).value;
    const double c_direct = carleson_direct(F, 1);
    res.metric("carleson_tent_rel_error", std::abs(c_lib - c_direct) / c_direct);
    res.require("carleson_tent_identity", "carleson_tent_rel_error", "le", cfg.tol("carleson_rel"));

    // Projection idempotence: projecting the fitted polynomial returns it.
    double idem = 0.0;
    for (int m = 1; m <= 3; ++m) {
        std::vector<double> center;
        for (int a = 0; a < g.dim(); ++a) center.push_back(rng.uniform(-0.1, 0.1) * g.box_length());
        const Ball ball{center, 0.125 * g.box_length()};
        const auto P1 = poly_project(f, ball, m);
        Field pf(g, cfg.N);
        double x[2] = {0.0, 0.0};
        for (auto i : ball_points(g, ball)) {
            for (int a = 0; a < g.dim(); ++a) x[a] = g.coordinate(i, a);
            const auto y = P1.scaled(g, std::span<const double>(x, static_cast<std::size_t>(g.dim())));
            for (int c = 0; c < cfg.N; ++c) pf(c, i) = P1.eval_scaled(c, y);
        }
        const auto P2 = poly_project(pf, ball, m);
        for (std::size_t c = 0; c < P1.coeffs.size(); ++c) {
            double scale = 0.0, d = 0.0;
            for (std::size_t k = 0; k < P1.coeffs[c].size(); ++k) {
                scale = std::max(scale, std::abs(P1.coeffs[c][k]));
                d = std::max(d, std::abs(P1.coeffs[c][k] - P2.coeffs[c][k]));
            }
            if (scale > 0.0) idem = std::max(idem, d / scale);
        }
    }
    res.metric("projection_idempotence_error", idem);
    res.require("projection_idempotence", "projection_idempotence_error", "le", cfg.tol("projection"));
    return res;
}

} // namespace tentlab
