#pragma once

#include <cmath>

#include "tentlab/experiments/common.hpp"

namespace tentlab {

// x_0 times a smooth window that is flat on |x| <= 3L/8.
inline Field windowed_linear(const Grid& g, int N) {
    const double L = g.box_length();
    return Field::from_function(g, N, [&](int, auto x) {
        double r2 = 0.0;
        for (double v : x) r2 += v * v;
        return cplx{x[0] * smooth_cutoff(std::sqrt(r2), 0.375 * L, 0.5 * L)};
    });
}

// max over the interior window of |u - target|.
inline double interior_sup_error(const Field& u, const Field& target) {
    const Grid& g = u.grid();
    double e = 0.0;
    for (std::size_t i = 0; i < g.size(); ++i)
        if (g.in_interior(i))
            for (int c = 0; c < u.components(); ++c) e = std::max(e, std::abs(u(c, i) - target(c, i)));
    return e;
}

// Gamma(T, 0) P = P for P of degree < m. Constants on every box size; for m >= 2
// windowed P(x) = x at fixed spacing h with box lengths from cfg.scales.
inline ExperimentResult run_conservation(const ExperimentConfig& cfg) {
    auto res = start_result("run_conservation", cfg);
    const double h = cfg.grid.L / cfg.grid.P;
    const std::vector<double> Ls = cfg.scales.empty() ? std::vector<double>{cfg.grid.L} : cfg.scales;

    double const_err = 0.0;
    std::vector<double> errs;
    for (double L : Ls) {
        const int P = static_cast<int>(std::lround(L / h));
        const Grid g = make_grid(cfg.grid.n, P, L);
        const CoefficientField A = build_coefficients(cfg.coeffs, g, cfg.m, cfg.N, cfg.T);
        const Propagator prop(A, cfg.solver);
        const Field one = Field::constant(g, cfg.N, 1.0);
        const Field u1 = prop.propagate_final(0.0, cfg.T, one);
        for (std::size_t i = 0; i < u1.values().size(); ++i)
            const_err = std::max(const_err, std::abs(u1.values()[i] - one.values()[i]));
        if (cfg.m >= 2) {
            const Field f = windowed_linear(g, cfg.N);
            const Field u = prop.propagate_final(0.0, cfg.T, f);
            const double e = interior_sup_error(u, f);
            errs.push_back(e);
            res.curve(sweep_label("L", L), "interior_sup_error", e);
            res.metric("sup_error_L" + format_label(L), e);
        }
    }
    res.metric("constant_max_error", const_err);
    res.require("constants_exact", "constant_max_error", "le", 0.0);

    if (cfg.m >= 2 && !errs.empty()) {
        double worst_ratio = 0.0;
        for (std::size_t k = 1; k < errs.size(); ++k)
            worst_ratio = std::max(worst_ratio, errs[k - 1] > 0.0 ? errs[k] / errs[k - 1] : 0.0);
        res.metric("worst_doubling_ratio", worst_ratio);
        res.metric("sup_error_largest", errs.back());
        res.require("halving_per_doubling", "worst_doubling_ratio", "le", 0.5);
        res.require("largest_box_error", "sup_error_largest", "le", cfg.tol("sup_error"));

        // Contrast: the same x-data under m = 1 rough coefficients is not conserved.
        const double L = Ls.back();
        const Grid g = make_grid(cfg.grid.n, static_cast<int>(std::lround(L / h)), L);
        const CoefficientField A1 = build_coefficients(cfg.coeffs, g, 1, cfg.N, cfg.T);
        const Propagator p1(A1, cfg.solver);
        const Field f = windowed_linear(g, cfg.N);
        res.metric("contrast_m1_sup_error", interior_sup_error(p1.propagate_final(0.0, cfg.T, f), f));
    }
    return res;
}

} // namespace tentlab
