#pragma once

#include <cmath>

#include "tentlab/experiments/common.hpp"

namespace tentlab {

// Energy estimates along the theta-scheme trajectory. With E_k = ||u0||^2 - ||u_k||^2,
// D_k = sum_j ||u_{j+1} - u_j||^2 and G_k = dt sum_j ||grad^m u_{j+1}||^2, implicit
// Euler gives E_k - D_k = 2 dt sum_j Re<A grad^m u_{j+1}, grad^m u_{j+1}>, hence
// 2 lambda G_k <= E_k - D_k <= 2 Lambda G_k at every step.
inline ExperimentResult run_energy_identity(const ExperimentConfig& cfg) {
    auto res = start_result("run_energy_identity", cfg);
    const Grid g = cfg.grid.make();
    const CoefficientField A = build_coefficients(cfg.coeffs, g, cfg.m, cfg.N, cfg.T);
    const Propagator P(A, cfg.solver);
    const long K = P.lattice_index(cfg.T);
    const double dt = cfg.solver.dt;
    const double lambda = A.lambda;
    const double Lambda = A.Lambda_op;

    Field u = make_data(g, cfg.N, cfg.data, 1.0, cfg.seed);
    const double n0 = sq_norm(u);
    double grad0 = grad_sq_norm(u, cfg.m);
    Accumulator D, G, Gtrap, W;
    double linf = n0;
    double worst_mono = -kInfinity, worst_lower = -kInfinity, worst_upper = -kInfinity, worst_right = -kInfinity;
    const double scale = n0 > 0.0 ? n0 : 1.0;
    double nk = n0;
    double gprev = grad0;
    const std::size_t every = std::max<std::size_t>(1, static_cast<std::size_t>(K / 50));
    for (long k = 0; k < K; ++k) {
        Field next = P.step(u, k);
        const double nn = sq_norm(next);
        D.add(sq_norm(next - u));
        const double gn = grad_sq_norm(next, cfg.m);
        G.add(dt * gn);
        Gtrap.add(0.5 * dt * (gn + gprev));
        W.add(dt * P.op().energy_form(A.at(P.lattice_time(k + 1)), next));
        const double E = n0 - nn;
        const double ED = E - D.value();
        worst_mono = std::max(worst_mono, (nn - nk) / scale);
        if (cfg.solver.theta == 1.0) {
            worst_lower = std::max(worst_lower, (2.0 * lambda * G.value() - ED) / scale);
            worst_upper = std::max(worst_upper, (ED - 2.0 * Lambda * G.value()) / scale);
        }
        worst_right = std::max(worst_right, (2.0 * lambda * G.value() - n0) / scale);
        linf = std::max(linf, nn);
        if (static_cast<std::size_t>(k + 1) % every == 0) {
            const std::string t = sweep_label("t", P.lattice_time(k + 1));
            res.curve(t, "norm_sq", nn);
            res.curve(t, "dissipation_2G", 2.0 * G.value());
        }
        nk = nn;
        gprev = gn;
        u = std::move(next);
    }
    const double E = n0 - nk;
    res.metric("lambda", lambda);
    res.metric("Lambda_op", Lambda);
    res.metric("norm_u0", std::sqrt(n0));
    res.metric("norm_linf_l2", std::sqrt(linf));
    res.metric("norm_uT", std::sqrt(nk));
    res.metric("grad_l2l2", std::sqrt(G.value()));
    res.metric("grad_l2l2_trapezoid", std::sqrt(Gtrap.value()));
    res.metric("dissipation_D", D.value());
    res.metric("energy_form_integral", W.value());
    res.metric("steps", static_cast<double>(K));
    const auto st = P.stats();
    res.metric("linear_iterations_per_step", st.steps ? static_cast<double>(st.linear_iterations) / st.steps : 0.0);
    if (n0 == 0.0) {
        res.metric("energy_rel_error", 0.0);
        res.metric("ratio_left", 0.0);
        res.metric("ratio_right", 0.0);
    } else {
        res.metric("energy_rel_error", E > 0.0 ? std::abs(E - 2.0 * Gtrap.value()) / E : 0.0);
        // ||u0|| <= sqrt(2 Lambda) ||grad^m u|| (literal, finite horizon) and
        // sqrt(2 Lambda) ||grad^m u|| <= sqrt(Lambda / lambda) ||u0||.
        const double mid = std::sqrt(2.0 * Lambda * G.value());
        res.metric("ratio_left", mid / std::sqrt(n0));
        res.metric("ratio_right", mid > 0.0 ? std::sqrt(Lambda / lambda * n0) / mid : kInfinity);
        res.metric("ratio_left_finite_horizon", E > 0.0 ? mid / std::sqrt(E) : 0.0);
    }
    const double slack = 10.0 * cfg.solver.tol_lin;
    res.metric("max_norm_increase", n0 == 0.0 ? 0.0 : worst_mono);
    res.metric("max_right_violation", n0 == 0.0 ? 0.0 : worst_right);
    res.require("norm_nonincreasing", "max_norm_increase", "le", slack);
    res.require("chain_right_every_step", "max_right_violation", "le", slack);
    if (cfg.solver.theta == 1.0) {
        res.metric("max_lower_violation", n0 == 0.0 ? 0.0 : worst_lower);
        res.metric("max_upper_violation", n0 == 0.0 ? 0.0 : worst_upper);
        res.require("garding_lower_every_step", "max_lower_violation", "le", slack);
        res.require("chain_left_every_step", "max_upper_violation", "le", slack);
    }
    if (A.flags.constant_in_space && A.flags.autonomous && std::abs(Lambda - lambda) <= 1e-12 * Lambda)
        res.require("energy_identity", "energy_rel_error", "le", cfg.tol("energy_rel"));
    return res;
}

} // namespace tentlab
