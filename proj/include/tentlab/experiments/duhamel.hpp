#pragma once

#include <cmath>

#include "tentlab/experiments/common.hpp"

namespace tentlab {

// Picard iterates of the Duhamel formula around the constant base against the
// theta-scheme propagator of the perturbed coefficients.
inline ExperimentResult run_duhamel_crosscheck(const ExperimentConfig& cfg) {
    auto res = start_result("run_duhamel_crosscheck", cfg);
    const Grid g = cfg.grid.make();
    const auto preset = parse_preset(cfg.coeffs);
    if (preset.kind != CoefficientPreset::Kind::perturb)
        throw ValidationError("run_duhamel_crosscheck needs a perturb(eps,seed) preset");
    const CoefficientField base = make_polyharmonic(g, cfg.m, cfg.N);
    const Semigroup S(base);
    const Field f = make_data(g, cfg.N, cfg.data, 1.0, cfg.seed);
    const double dt = cfg.solver.dt;

    const CoefficientField A = make_perturbation(base, preset.eps, preset.seed);
    res.metric("eps", preset.eps);
    res.metric("eps_over_lambda", preset.eps / base.lambda);
    res.metric("perturbation_size", perturbation_size(A, base));
    const auto d = duhamel_picard(S, A, f, cfg.T, cfg.picard_iters, dt);
    const Propagator P(A, cfg.solver);
    const Field u = P.propagate_final(0.0, cfg.T, f);
    const double rel = lp_norm(d.u - u, 2) / lp_norm(u, 2);
    res.metric("relative_l2_difference", rel);
    res.metric("picard_iterations", d.iterations);
    double worst = 0.0;
    for (std::size_t j = 0; j < d.contraction_factors.size(); ++j) {
        res.curve(sweep_label("J", static_cast<double>(j + 2)), "contraction_factor", d.contraction_factors[j]);
        worst = std::max(worst, d.contraction_factors[j]);
    }
    for (std::size_t j = 0; j < d.increments.size(); ++j)
        res.curve(sweep_label("J", static_cast<double>(j + 1)), "increment", d.increments[j]);
    res.metric("max_contraction_factor", worst);
    res.require("duhamel_vs_propagate", "relative_l2_difference", "le", cfg.tol("duhamel_rel"));

    // eps = 0: the iteration returns the free evolution.
    const auto d0 = duhamel_picard(S, base, f, cfg.T, cfg.picard_iters, dt);
    res.metric("eps0_difference", lp_norm(d0.u - S.apply(cfg.T, f), 2) / lp_norm(f, 2));
    res.require("eps0_free_evolution", "eps0_difference", "le", 10.0 * cfg.solver.tol_lin);

    // A larger perturbation: slower contraction, either convergent or flagged.
    const double big = 0.5 * base.lambda;
    try {
        const auto db = duhamel_picard(S, make_perturbation(base, big, preset.seed), f, cfg.T, cfg.picard_iters, dt);
        double wb = 0.0;
        for (double c : db.contraction_factors) wb = std::max(wb, c);
        res.metric("eps_half_max_contraction_factor", wb);
        res.note("eps_half", "convergent");
    } catch (const NumericalError& e) {
        res.note("eps_half", std::string("flagged: ") + e.what());
    }
    return res;
}

} // namespace tentlab
