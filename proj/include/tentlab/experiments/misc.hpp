#pragma once

#include <cmath>

#include "tentlab/experiments/adjoint.hpp"
#include "tentlab/experiments/common.hpp"

namespace tentlab {

// ||u(t) - f||_{L^2(window)} along the solver lattice and sup_t ||u(t) - P||_p against the
// tent norm of grad^m u. The data decay, so the limiting polynomial is P = 0.
inline ExperimentResult run_trace_convergence(const ExperimentConfig& cfg) {
    auto res = start_result("run_trace_convergence", cfg);
    const Grid g = cfg.grid.make();
    const CoefficientField A = build_coefficients(cfg.coeffs, g, cfg.m, cfg.N, cfg.T);
    const Propagator P(A, cfg.solver);
    const Field f = make_data(g, cfg.N, cfg.data, 1.0, cfg.seed);
    const auto u = P.propagate(0.0, cfg.T, f);
    const auto mask = interior_mask(g);

    std::vector<double> err(u.size());
    for (std::size_t k = 0; k < u.size(); ++k) {
        const Field d = u.slices[k] - f;
        std::vector<double> a(g.size());
        for (std::size_t i = 0; i < g.size(); ++i) a[i] = std::sqrt(d.modulus_sq(i));
        err[k] = lp_norm_of(a, g, 2.0, mask);
    }
    int violations = 0;
    const std::size_t every = std::max<std::size_t>(1, u.size() / 50);
    for (std::size_t k = 1; k < u.size(); ++k) {
        if (err[k] < err[k - 1] * (1.0 - 1e-12)) ++violations;
        if (k % every == 0) res.curve(sweep_label("t", u.times[k]), "trace_error", err[k]);
    }
    res.metric("trace_error_first_step", u.size() > 1 ? err[1] : 0.0);
    res.metric("trace_error_final", err.back());
    res.metric("monotone_violations", violations);
    res.require("trace_error_monotone", "monotone_violations", "le", 0.0);

    const auto F = gradient_trajectory(u, cfg.m);
    for (double p : cfg.p_list) {
        double sup = 0.0;
        for (const auto& s : u.slices) sup = std::max(sup, lp_norm(s, p));
        const double tent = tent_norm(F, p, cfg.m).value;
        const double r = tent > 0.0 ? sup / tent : (sup == 0.0 ? 0.0 : kInfinity);
        res.metric("sup_over_tent_p" + format_label(p), r);
        res.require("sup_over_tent_finite_p" + format_label(p), "sup_over_tent_p" + format_label(p), "finite");
    }
    return res;
}

// |y|^{p-2} y, the duality map of L^p up to normalisation.
inline Field duality_map(const Field& y, double p) {
    Field out = y;
    for (auto& v : out.values()) {
        const double a = std::abs(v);
        v = a > 0.0 ? v * std::pow(a, p - 2.0) : cplx{};
    }
    return out;
}

// Lower-bound estimate of ||T||_{L^p -> L^p}: Boyd's power iteration
// x <- J_q(T^* J_p(T x)) from several random starts, plus the random starts themselves.
template <Evolution E>
double lp_operator_norm_lower_bound(const E& ev, const Grid& g, int N, double p, int starts, int iters,
                                    std::uint64_t seed) {
    const double q = p / (p - 1.0);
    double best = 0.0;
    for (int s = 0; s < starts; ++s) {
        CounterRng rng(seed, 700 + static_cast<std::uint64_t>(s));
        Field x(g, N);
        if (s % 2 == 0) {
            x = random_complex_field(g, N, rng);
        } else {
            const double x0 = rng.uniform(-0.25, 0.25) * g.box_length();
            const double w = rng.uniform(0.5, 2.0);
            x = Field::from_function(g, N, [&](int, auto y) {
                return cplx{std::exp(-std::pow((y[0] - x0) / w, 2))};
            });
        }
        for (int it = 0; it < iters; ++it) {
            const double xn = lp_norm(x, p);
            if (xn == 0.0) break;
            x *= 1.0 / xn;
            const Field y = ev.forward(x);
            best = std::max(best, lp_norm(y, p));
            const Field z = ev.adjoint(duality_map(y, p));
            x = duality_map(z, q);
        }
    }
    return best;
}

// Sampled sup over (s, t) of the discrete ||Gamma(t, s)||_{p -> p}, labelled as a lower bound.
inline ExperimentResult run_ubc_probe(const ExperimentConfig& cfg) {
    auto res = start_result("run_ubc_probe", cfg);
    res.note("estimator", "lower bound (power iteration and random probes)");
    const Grid g = cfg.grid.make();
    const CoefficientField A = build_coefficients(cfg.coeffs, g, cfg.m, cfg.N, cfg.T);
    res.note("coefficients", A.description);
    const Propagator P(A, cfg.solver);
    const long K = P.lattice_index(cfg.T);
    CounterRng rng(cfg.seed, 801);
    std::vector<std::pair<long, long>> pairs;
    for (int i = 0; i < cfg.samples; ++i) {
        long k0 = static_cast<long>(rng.uniform() * static_cast<double>(K));
        long k1 = static_cast<long>(rng.uniform() * static_cast<double>(K));
        if (k0 > k1) std::swap(k0, k1);
        if (k0 == k1) k1 = std::min(K, k1 + 1);
        pairs.emplace_back(k0, k1);
    }
    for (double p : cfg.p_list) {
        double sup = 0.0;
        for (const auto& [k0, k1] : pairs) {
            const PropagatorEvolution ev{&P, P.lattice_time(k0), P.lattice_time(k1)};
            const double est = lp_operator_norm_lower_bound(ev, g, cfg.N, p, cfg.probes, 12, cfg.seed);
            sup = std::max(sup, est);
            res.curve(sweep_label("t_minus_s", P.lattice_time(k1 - k0)), "norm_p" + format_label(p), est);
        }
        const std::string key = "sup_norm_p" + format_label(p);
        res.metric(key, sup);
        res.require("bounded_p" + format_label(p), key, "finite");
        if (p == 2.0) res.require("l2_contraction", key, "le", 1.0 + cfg.tol("contraction"));
    }
    return res;
}

} // namespace tentlab
