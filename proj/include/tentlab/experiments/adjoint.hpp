#pragma once

#include <cmath>

#include "tentlab/experiments/common.hpp"

namespace tentlab {

inline Field random_complex_field(const Grid& g, int N, CounterRng& rng) {
    Field f(g, N);
    for (auto& v : f.values()) v = cplx{rng.normal(), rng.normal()};
    return f;
}

// |<Gamma(t,s) f, g> - <f, Gamma(t,s)^* g>| over random pairs and random lattice times.
inline ExperimentResult run_adjoint_duality(const ExperimentConfig& cfg) {
    auto res = start_result("run_adjoint_duality", cfg);
    const Grid g = cfg.grid.make();
    const CoefficientField A = build_coefficients(cfg.coeffs, g, cfg.m, cfg.N, cfg.T);
    res.note("coefficients", A.description);
    res.metric("autonomous", A.flags.autonomous ? 1.0 : 0.0);
    const Propagator P(A, cfg.solver);
    const long K = P.lattice_index(cfg.T);
    CounterRng rng(cfg.seed, 101);
    double worst = 0.0;
    for (int i = 0; i < cfg.samples; ++i) {
        long k0 = static_cast<long>(rng.uniform() * static_cast<double>(K));
        long k1 = static_cast<long>(rng.uniform() * static_cast<double>(K));
        if (k0 > k1) std::swap(k0, k1);
        if (k0 == k1) k1 = std::min(K, k1 + 1);
        const double s = P.lattice_time(k0), t = P.lattice_time(k1);
        const Field f = random_complex_field(g, cfg.N, rng);
        const Field h = random_complex_field(g, cfg.N, rng);
        const cplx lhs = inner(P.propagate_final(s, t, f), h);
        const cplx rhs = inner(f, P.adjoint_propagate(s, t, h));
        const double err = std::abs(lhs - rhs) / (lp_norm(f, 2) * lp_norm(h, 2));
        worst = std::max(worst, err);
        res.curve(sweep_label("pair", i), "normalized_duality_error", err);
    }
    res.metric("max_normalized_duality_error", worst);
    res.require("adjoint_duality", "max_normalized_duality_error", "le", 10.0 * cfg.solver.tol_lin);
    return res;
}

} // namespace tentlab
