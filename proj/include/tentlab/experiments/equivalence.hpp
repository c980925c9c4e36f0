#pragma once

#include <cmath>

#include "tentlab/experiments/common.hpp"
#include "tentlab/experiments/conservation.hpp"

namespace tentlab {

// 0, then `count` geometrically spaced times on [t_first, T].
inline std::vector<double> geometric_times(double t_first, double T, int count) {
    std::vector<double> ts{0.0};
    const double q = std::pow(T / t_first, 1.0 / (count - 1));
    for (int i = 0; i < count; ++i) ts.push_back(i == count - 1 ? T : t_first * std::pow(q, i));
    return ts;
}

// e^{-tL} f sampled on the given times (exact for constant autonomous presets).
inline SpaceTimeField semigroup_trajectory(const Semigroup& S, const Field& f, const std::vector<double>& ts) {
    SpaceTimeField u;
    for (double t : ts) {
        u.times.push_back(t);
        u.slices.push_back(S.apply(t, f));
    }
    return u;
}

// Trajectory u_f on [0, T]: the exact semigroup on a geometric grid for constant presets,
// the solver lattice otherwise.
inline SpaceTimeField solution_trajectory(const CoefficientField& A, const ExperimentConfig& cfg, const Field& f,
                                          double T, double t_first, int count) {
    if (A.flags.constant_in_space && A.flags.autonomous)
        return semigroup_trajectory(Semigroup(A), f, geometric_times(t_first, T, count));
    SolverConfig sc = cfg.solver;
    const Propagator P(A, sc);
    return P.propagate(0.0, T, f);
}

// Ratios ||grad^m u_f||_{T^{p,2}} / ||f||_p and ||u_f||_{X^p} / ||f||_p over data families and one
// dilation step. Continuum ratios are dilation invariant for homogeneous constant coefficients.
inline ExperimentResult run_equivalence_sweep(const ExperimentConfig& cfg) {
    auto res = start_result("run_equivalence_sweep", cfg);
    const Grid g = cfg.grid.make();
    const CoefficientField A = build_coefficients(cfg.coeffs, g, cfg.m, cfg.N, cfg.T);
    const int m = cfg.m;
    const std::vector<double> lambdas = cfg.scales.empty() ? std::vector<double>{1.0, 2.0} : cfg.scales;
    const double lmax = *std::max_element(lambdas.begin(), lambdas.end());
    const double rmax = std::pow(cfg.T, 1.0 / (2.0 * m)) * std::pow(lmax, 1.0);
    if (rmax > 0.25 * g.box_length() * (1.0 + 1e-12))
        throw ValidationError("run_equivalence_sweep: T * lambda^{2m} exceeds the window (T^{1/2m} lambda > L/4)");

    const std::vector<std::string> families{"gaussian", "step", "band"};
    double worst_tent = 0.0, worst_nt = 0.0;
    double cmin = kInfinity, cmax = 0.0;
    for (const auto& fam : families) {
        std::vector<std::vector<double>> tent(cfg.p_list.size()), nt(cfg.p_list.size());
        for (double lam : lambdas) {
            const Field f = make_data(g, cfg.N, fam, lam, cfg.seed);
            const double Tl = cfg.T * std::pow(lam, 2.0 * m);
            const auto u = solution_trajectory(A, cfg, f, Tl, 1e-4 * std::pow(lam, 2.0 * m), cfg.samples);
            const auto F = gradient_trajectory(u, m);
            for (std::size_t ip = 0; ip < cfg.p_list.size(); ++ip) {
                const double p = cfg.p_list[ip];
                const double fp = lp_norm(f, p);
                const double rt = tent_norm(F, p, m).value / fp;
                const double rn = nontangential_norm(u, p, m).value / fp;
                tent[ip].push_back(rt);
                nt[ip].push_back(rn);
                cmin = std::min(cmin, rt);
                cmax = std::max(cmax, rt);
                const std::string key = fam + "_p" + format_label(p) + "_lambda" + format_label(lam);
                res.metric("tent_ratio_" + key, rt);
                res.metric("nontangential_ratio_" + key, rn);
                res.curve(sweep_label("lambda", lam), "tent_ratio_" + fam + "_p" + format_label(p), rt);
                res.curve(sweep_label("lambda", lam), "nontangential_ratio_" + fam + "_p" + format_label(p), rn);
                if (fam == "gaussian" && p == 2.0 && lam == lambdas.front()) {
                    // Energy identity on [0, T]: ||grad u||^2 = (||f||^2 - ||u(T)||^2) / 2.
                    const double nT = lp_norm(u.slices.back(), 2);
                    const double corrected = rt / std::sqrt(1.0 - nT * nT / (fp * fp));
                    res.metric("gaussian_p2_energy_constant", corrected);
                    res.metric("gaussian_p2_energy_constant_rel_error",
                               std::abs(corrected - std::sqrt(0.5)) / std::sqrt(0.5));
                }
            }
        }
        for (std::size_t ip = 0; ip < cfg.p_list.size(); ++ip)
            for (std::size_t k = 1; k < lambdas.size(); ++k) {
                worst_tent = std::max(worst_tent, relative_change(tent[ip][k - 1], tent[ip][k]));
                worst_nt = std::max(worst_nt, relative_change(nt[ip][k - 1], nt[ip][k]));
            }
    }
    res.metric("max_dilation_change_tent", worst_tent);
    res.metric("max_dilation_change_nontangential", worst_nt);
    res.metric("empirical_constant_min", cmin);
    res.metric("empirical_constant_max", cmax);
    res.require("ratios_finite", "empirical_constant_max", "finite");
    res.require("tent_ratio_dilation_stable", "max_dilation_change_tent", "le", cfg.tol("dilation_rel"));
    return res;
}

// sqrt(carleson_norm(u_f)) / bmo_norm(f) for windowed log data. A dilation by lambda
// uses the grid (lambda P, lambda L) so that the cutoff dilates with the data.
inline ExperimentResult run_carleson_bmo(const ExperimentConfig& cfg) {
    auto res = start_result("run_carleson_bmo", cfg);
    const int m = cfg.m;
    const std::vector<double> lambdas = cfg.scales.empty() ? std::vector<double>{1.0, 2.0} : cfg.scales;
    std::vector<double> ratios;
    for (double lam : lambdas) {
        const int P = static_cast<int>(std::lround(cfg.grid.P * lam));
        const Grid g = make_grid(cfg.grid.n, P, cfg.grid.L * lam);
        const CoefficientField A = build_coefficients(cfg.coeffs, g, m, cfg.N, cfg.T);
        const Semigroup S(A);
        const double T = std::pow(g.box_length() / 8.0, 2.0 * m);
        const auto ts = geometric_times(1e-4 * std::pow(lam, 2.0 * m), T, cfg.samples);
        const Field f = make_data(g, cfg.N, "log", lam);
        const auto u = semigroup_trajectory(S, f, ts);
        const double C = carleson_norm(u, m).value;
        const double B = m == 1 ? bmo_norm(f).value : bmo_m_norm(f, m).value;
        const double r = std::sqrt(C) / B;
        ratios.push_back(r);
        res.metric("carleson_lambda" + format_label(lam), C);
        res.metric("bmo_lambda" + format_label(lam), B);
        res.metric("ratio_lambda" + format_label(lam), r);
        res.curve(sweep_label("lambda", lam), "sqrt_carleson_over_bmo", r);

        if (lam == lambdas.front()) {
            // Translate by L/16 (an integer number of grid points).
            Field ft(g, cfg.N);
            const int shift = P / 16;
            for (std::size_t i = 0; i < g.size(); ++i) {
                const int i0 = g.axis_index(i, 0);
                const int i1 = g.dim() == 2 ? g.axis_index(i, 1) : 0;
                const std::size_t src = g.flat_index(i0 - shift, i1);
                for (int c = 0; c < cfg.N; ++c) ft(c, i) = f(c, src);
            }
            const auto ut = semigroup_trajectory(S, ft, ts);
            const double Ct = carleson_norm(ut, m).value;
            const double Bt = m == 1 ? bmo_norm(ft).value : bmo_m_norm(ft, m).value;
            res.metric("ratio_translated", std::sqrt(Ct) / Bt);
        }
        if (m >= 2) {
            // f - x in BMO: the Carleson functional ignores the degree-one part.
            Field fx = f + windowed_linear(g, cfg.N);
            const auto ux = semigroup_trajectory(S, fx, ts);
            res.metric("with_linear_carleson_lambda" + format_label(lam), carleson_norm(ux, m).value);
            res.metric("with_linear_bmo_lambda" + format_label(lam), bmo_norm(fx).value);
            res.metric("with_linear_bmo_m_lambda" + format_label(lam), bmo_m_norm(fx, m).value);
        }
    }
    double worst = 0.0, lo = kInfinity, hi = 0.0;
    for (std::size_t k = 0; k < ratios.size(); ++k) {
        lo = std::min(lo, ratios[k]);
        hi = std::max(hi, ratios[k]);
        if (k > 0) worst = std::max(worst, relative_change(ratios[k - 1], ratios[k]));
    }
    res.metric("max_dilation_change", worst);
    res.metric("ratio_min", lo);
    res.metric("ratio_max", hi);
    res.require("ratio_bounded_above", "ratio_max", "finite");
    res.require("ratio_bounded_below", "ratio_min", "ge", 1e-12);
    res.require("ratio_dilation_stable", "max_dilation_change", "le", cfg.tol("dilation_rel"));
    return res;
}

} // namespace tentlab
